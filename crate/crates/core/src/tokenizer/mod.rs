//! Pre-tokenization, whitespace probing, token merging and character-level
//! generalization of token values.

mod chargen;
mod merge;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfg::yields::join_lexemes;
use crate::cfg::{CharClass, LexAtom, Tok, TokenDef, TokenSequence};
use crate::oracle::{Oracle, OracleError};

pub use chargen::generalize_characters;
pub use merge::merge_tokens;

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("no training example is accepted by the oracle")]
    NoAcceptedExamples,
    #[error("unknown token id {0}")]
    UnknownToken(u32),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexClass {
    Ident,
    Number,
    Str,
    Space,
    Punct,
}

impl LexClass {
    /// Values of the same group may be merged into one token.
    fn merge_group(self) -> Option<u8> {
        match self {
            LexClass::Ident | LexClass::Number => Some(0),
            LexClass::Str => Some(1),
            LexClass::Space | LexClass::Punct => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreToken {
    pub class: LexClass,
    pub text: String,
}

/// Maximal-munch segmentation. Whitespace runs are kept only when `keep_space`.
pub fn pretokenize(input: &str, keep_space: bool) -> Vec<PreToken> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let take = |from: usize, to: usize| chars[from..to].iter().collect::<String>();
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let class = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            LexClass::Ident
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            LexClass::Number
        } else if c.is_whitespace() {
            while i < chars.len() && chars[i].is_whitespace() {
                i += 1;
            }
            LexClass::Space
        } else if c == '"' || c == '\'' {
            let mut j = i + 1;
            let mut closed = false;
            while j < chars.len() {
                match chars[j] {
                    '\\' => j += 2,
                    q if q == c => {
                        closed = true;
                        break;
                    }
                    _ => j += 1,
                }
            }
            if closed {
                i = j + 1;
                LexClass::Str
            } else {
                i += 1;
                LexClass::Punct
            }
        } else {
            i += 1;
            LexClass::Punct
        };
        if class == LexClass::Space && !keep_space {
            continue;
        }
        out.push(PreToken {
            class,
            text: take(start, i),
        });
    }
    out
}

/// Probes whether the oracle cares about whitespace.
pub fn detect_whitespace_sensitivity(examples: &[String], oracle: &Oracle) -> Result<bool, TokenizeError> {
    let mut accepted = Vec::new();
    for e in examples {
        if accepted.len() == 3 {
            break;
        }
        if oracle.check(e)? {
            accepted.push(e);
        }
    }
    if accepted.is_empty() {
        return Err(TokenizeError::NoAcceptedExamples);
    }
    for e in accepted {
        let pieces = pretokenize(e, true);
        let mut probes = Vec::new();
        if pieces.iter().any(|p| p.class == LexClass::Space) {
            probes.push(
                pieces
                    .iter()
                    .map(|p| if p.class == LexClass::Space { p.text.repeat(2) } else { p.text.clone() })
                    .collect::<String>(),
            );
        } else if pieces.len() >= 2 {
            probes.push(format!("{} {}", pieces[0].text, pieces[1..].iter().map(|p| p.text.as_str()).collect::<String>()));
        }
        probes.push(format!(" {e} "));
        for p in probes {
            if !oracle.check(&p)? {
                log::info!("whitespace-sensitive: probe {p:?} rejected");
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Character classes that token values may be generalized to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Lowercase,
    Uppercase,
    Digit,
    Underscore,
}

impl ClassKind {
    pub const ALL: [ClassKind; 4] = [ClassKind::Lowercase, ClassKind::Uppercase, ClassKind::Digit, ClassKind::Underscore];

    pub fn of(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(ClassKind::Lowercase),
            'A'..='Z' => Some(ClassKind::Uppercase),
            '0'..='9' => Some(ClassKind::Digit),
            '_' => Some(ClassKind::Underscore),
            _ => None,
        }
    }

    pub fn representative(self) -> char {
        match self {
            ClassKind::Lowercase => 'q',
            ClassKind::Uppercase => 'Z',
            ClassKind::Digit => '7',
            ClassKind::Underscore => '_',
        }
    }

    pub fn char_class(self, repeatable: bool) -> CharClass {
        let range = match self {
            ClassKind::Lowercase => ('a', 'z'),
            ClassKind::Uppercase => ('A', 'Z'),
            ClassKind::Digit => ('0', '9'),
            ClassKind::Underscore => ('_', '_'),
        };
        CharClass::new([range], repeatable).expect("static range")
    }
}

/// Evidence that two values were swapped everywhere and stayed valid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeWitness {
    pub left: String,
    pub right: String,
    pub probes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenEntry {
    pub name: String,
    pub lex_class: LexClass,
    pub values: BTreeSet<String>,
    pub classes: Vec<ClassKind>,
    /// every accepted class is repeatable
    pub repeatable: bool,
    /// accepted classes whose repetition probes passed
    #[serde(default)]
    pub repeatable_classes: Vec<ClassKind>,
    /// accepted probe per class
    pub class_witnesses: Vec<(ClassKind, String)>,
}

impl TokenEntry {
    pub fn least(&self) -> &str {
        self.values.iter().next().map(String::as_str).unwrap_or("")
    }

    /// Quote delimiter for string tokens.
    pub fn quote(&self) -> Option<char> {
        if self.lex_class == LexClass::Str {
            self.least().chars().next()
        } else {
            None
        }
    }

    /// Literal-only lexical definition (before terminal expansion).
    pub fn literal_def(&self) -> TokenDef {
        TokenDef::literals(self.name.clone(), self.values.iter().cloned())
    }

    /// Values plus one class alternative per accepted class; values fully
    /// covered by an accepted class are dropped.
    pub fn expanded_def(&self) -> TokenDef {
        let mut alts: Vec<Vec<LexAtom>> = Vec::new();
        let classes: Vec<CharClass> = self
            .classes
            .iter()
            .map(|k| k.char_class(self.repeatable_classes.contains(k)))
            .collect();
        let quote = self.quote();
        for v in &self.values {
            let body: &str = match quote {
                Some(q) => v.strip_prefix(q).and_then(|s| s.strip_suffix(q)).unwrap_or(v),
                None => v,
            };
            if !body.is_empty() && classes.iter().any(|c| c.matches(body)) {
                continue;
            }
            alts.push(vec![LexAtom::Lit(v.clone())]);
        }
        for c in classes {
            match quote {
                Some(q) => alts.push(vec![
                    LexAtom::Lit(q.to_string()),
                    LexAtom::Class(c),
                    LexAtom::Lit(q.to_string()),
                ]),
                None => alts.push(vec![LexAtom::Class(c)]),
            }
        }
        TokenDef {
            name: self.name.clone(),
            alts,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTable {
    pub entries: Vec<TokenEntry>,
    pub whitespace_sensitive: bool,
    #[serde(default)]
    pub merges: Vec<MergeWitness>,
}

impl TokenTable {
    pub fn literal_defs(&self) -> Vec<TokenDef> {
        self.entries.iter().map(TokenEntry::literal_def).collect()
    }

    pub fn expanded_defs(&self) -> Vec<TokenDef> {
        self.entries.iter().map(TokenEntry::expanded_def).collect()
    }

    /// Renders a token sequence: ids become their least value and word
    /// lexemes are separated by a single space when whitespace is insignificant.
    pub fn render(&self, seq: &[Tok]) -> Result<String, TokenizeError> {
        let mut pieces: Vec<&str> = Vec::with_capacity(seq.len());
        for t in seq {
            match t {
                Tok::Id(id) => pieces.push(
                    self.entries
                        .get(*id as usize)
                        .ok_or(TokenizeError::UnknownToken(*id))?
                        .least(),
                ),
                Tok::Lit(s) => pieces.push(s),
            }
        }
        Ok(join_lexemes(&pieces, self.whitespace_sensitive))
    }
}

/// Output of the whole tokenization stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedCorpus {
    pub sequences: Vec<TokenSequence>,
    /// index of the source example of each sequence
    pub sources: Vec<usize>,
    pub table: TokenTable,
}

/// Runs whitespace probing, merging and character generalization, then
/// demotes single-valued tokens with no accepted class to literals.
pub fn tokenize(examples: &[String], oracle: &Oracle) -> Result<TokenizedCorpus, TokenizeError> {
    let sensitive = detect_whitespace_sensitivity(examples, oracle)?;
    let pre: Vec<Vec<PreToken>> = examples.iter().map(|e| pretokenize(e, sensitive)).collect();
    let mut corpus = merge_tokens(&pre, sensitive, oracle)?;
    generalize_characters(&mut corpus, oracle)?;
    finalize(&mut corpus);
    let mut keep_seqs = Vec::new();
    let mut keep_src = Vec::new();
    for (seq, src) in corpus.sequences.iter().zip(&corpus.sources) {
        let text = corpus.table.render(seq)?;
        if oracle.check(&text)? {
            keep_seqs.push(seq.clone());
            keep_src.push(*src);
        } else {
            log::warn!("example {src} does not render to an accepted string ({text:?}); dropped");
        }
    }
    corpus.sequences = keep_seqs;
    corpus.sources = keep_src;
    Ok(corpus)
}

fn finalize(corpus: &mut TokenizedCorpus) {
    let entries = std::mem::take(&mut corpus.table.entries);
    let mut remap: Vec<Option<u32>> = Vec::with_capacity(entries.len());
    let mut demoted: Vec<Option<String>> = Vec::with_capacity(entries.len());
    let mut kept = Vec::new();
    for e in entries {
        if e.values.len() == 1 && e.classes.is_empty() && !e.repeatable {
            remap.push(None);
            demoted.push(Some(e.least().to_string()));
        } else {
            remap.push(Some(kept.len() as u32));
            demoted.push(None);
            kept.push(e);
        }
    }
    for (i, e) in kept.iter_mut().enumerate() {
        e.name = crate::cfg::TokId(i as u32).default_name();
    }
    corpus.table.entries = kept;
    for seq in &mut corpus.sequences {
        for t in seq.iter_mut() {
            if let Tok::Id(id) = t {
                let i = *id as usize;
                *t = match remap[i] {
                    Some(n) => Tok::Id(n),
                    None => Tok::Lit(demoted[i].clone().expect("demoted value")),
                };
            }
        }
    }
}
