//! Context-free grammar model with a lexical (token) layer.
//!
//! A [`Grammar`] holds a registry of nonterminals, each owning an ordered list
//! of alternatives, plus an optional set of pre-terminal token definitions.
//! Pre-terminals are opaque to syntactic transformations; their lexical
//! definitions only matter when strings are recognized or sampled at the
//! character level.

mod charclass;
pub mod earley;
pub mod format;
mod metrics;
pub mod simplify;
pub mod yields;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use charclass::CharClass;
pub use metrics::GrammarMetrics;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("character class must contain at least one range")]
    EmptyCharClass,
    #[error("invalid character range {0:?}-{1:?}")]
    InvalidRange(char, char),
    #[error("literal terminals must be non-empty")]
    EmptyLiteral,
    #[error("unknown token id {0}")]
    UnknownToken(u32),
    #[error("unknown nonterminal `{0}`")]
    UnknownNonterminal(String),
    #[error("symbol `{0}` derives no terminal string")]
    Unproductive(String),
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown escape `\\{escape}`")]
    UnknownEscape {
        line: usize,
        column: usize,
        escape: char,
    },
    #[error("nonterminal `{0}` is referenced but has no rules")]
    DanglingReference(String),
    #[error("name `{0}` is defined twice")]
    DuplicateName(String),
}

/// Index of a nonterminal in its grammar's registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NtId(pub u32);

impl NtId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a pre-terminal in the grammar's token layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokId(pub u32);

impl TokId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Conventional name of a tokenizer-assigned id (`t1`, `t2`, ...).
    pub fn default_name(self) -> String {
        format!("t{}", self.0 + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Lit(String),
    Class(CharClass),
    Nt(NtId),
    Tok(TokId),
}

impl Symbol {
    pub fn lit(s: impl Into<String>) -> Self {
        Symbol::Lit(s.into())
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Symbol::Nt(_))
    }

    pub fn as_nt(&self) -> Option<NtId> {
        match self {
            Symbol::Nt(n) => Some(*n),
            _ => None,
        }
    }
}

/// One element of a token sequence: either a pre-terminal id or a literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tok {
    Id(u32),
    Lit(String),
}

impl Tok {
    pub fn lit(s: impl Into<String>) -> Self {
        Tok::Lit(s.into())
    }
}

pub type TokenSequence = Vec<Tok>;

/// Atom of a lexical alternative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LexAtom {
    Lit(String),
    Class(CharClass),
}

impl LexAtom {
    fn min_len(&self) -> usize {
        match self {
            LexAtom::Lit(s) => s.chars().count(),
            LexAtom::Class(_) => 1,
        }
    }
}

/// Lexical definition of one pre-terminal: alternatives of atom sequences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TokenDef {
    pub name: String,
    pub alts: Vec<Vec<LexAtom>>,
}

impl TokenDef {
    pub fn literals(name: impl Into<String>, values: impl IntoIterator<Item = String>) -> Self {
        Self {
            name: name.into(),
            alts: values.into_iter().map(|v| vec![LexAtom::Lit(v)]).collect(),
        }
    }

    /// Shortest rendering; ties go to the earliest alternative.
    pub fn shortest(&self) -> String {
        let alt = self
            .alts
            .iter()
            .min_by_key(|a| a.iter().map(LexAtom::min_len).sum::<usize>())
            .expect("token definitions have at least one alternative");
        alt.iter()
            .map(|a| match a {
                LexAtom::Lit(s) => s.clone(),
                LexAtom::Class(c) => c.lowest().to_string(),
            })
            .collect()
    }

    /// Whether the token derives exactly `s`.
    pub fn matches(&self, s: &str) -> bool {
        let chars: Vec<char> = s.chars().collect();
        self.alts
            .iter()
            .any(|alt| lex_match_ends(alt, &chars, 0).contains(&chars.len()))
    }
}

/// All end positions reachable by matching `alt` starting at `from`.
pub(crate) fn lex_match_ends(alt: &[LexAtom], input: &[char], from: usize) -> Vec<usize> {
    let mut positions = vec![from];
    for atom in alt {
        let mut next = Vec::new();
        for &p in &positions {
            match atom {
                LexAtom::Lit(s) => {
                    let mut q = p;
                    let mut ok = true;
                    for c in s.chars() {
                        if q < input.len() && input[q] == c {
                            q += 1;
                        } else {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        next.push(q);
                    }
                }
                LexAtom::Class(cls) => {
                    let mut q = p;
                    while q < input.len() && cls.contains(input[q]) {
                        q += 1;
                        next.push(q);
                        if !cls.repeatable() {
                            break;
                        }
                    }
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        positions = next;
        if positions.is_empty() {
            break;
        }
    }
    positions.retain(|&p| p > from);
    positions
}

/// A context-free grammar `(N, Σ, P, S)` with an attached lexical layer.
///
/// Alternatives are stored per nonterminal; the global production order is
/// registry order, then alternative order.
#[derive(Clone, Debug)]
pub struct Grammar {
    names: Vec<String>,
    rules: Vec<Vec<Vec<Symbol>>>,
    start: NtId,
    tokens: Vec<TokenDef>,
    whitespace_sensitive: bool,
    next_fresh: u32,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.rules == other.rules
            && self.start == other.start
            && self.tokens == other.tokens
            && self.whitespace_sensitive == other.whitespace_sensitive
    }
}

impl Eq for Grammar {}

impl Grammar {
    /// An empty grammar whose start symbol has no alternatives yet.
    pub fn new(start: impl Into<String>) -> Self {
        let start = start.into();
        let mut g = Self {
            names: vec![start],
            rules: vec![Vec::new()],
            start: NtId(0),
            tokens: Vec::new(),
            whitespace_sensitive: false,
            next_fresh: 0,
        };
        g.bump_fresh_past(&g.names[0].clone());
        g
    }

    /// Empty grammar with start `n0` and the given lexical layer.
    pub fn with_tokens(tokens: Vec<TokenDef>, whitespace_sensitive: bool) -> Self {
        let mut g = Self::new("n0");
        g.tokens = tokens;
        g.whitespace_sensitive = whitespace_sensitive;
        g
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn whitespace_sensitive(&self) -> bool {
        self.whitespace_sensitive
    }

    pub fn set_whitespace_sensitive(&mut self, sensitive: bool) {
        self.whitespace_sensitive = sensitive;
    }

    pub fn nt_count(&self) -> usize {
        self.names.len()
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = NtId> {
        (0..self.names.len() as u32).map(NtId)
    }

    pub fn name(&self, nt: NtId) -> &str {
        &self.names[nt.index()]
    }

    pub fn nt_by_name(&self, name: &str) -> Option<NtId> {
        self.names.iter().position(|n| n == name).map(|i| NtId(i as u32))
    }

    pub fn alternatives(&self, nt: NtId) -> &[Vec<Symbol>] {
        &self.rules[nt.index()]
    }

    pub fn tokens(&self) -> &[TokenDef] {
        &self.tokens
    }

    pub fn token(&self, t: TokId) -> Option<&TokenDef> {
        self.tokens.get(t.index())
    }

    pub fn token_by_name(&self, name: &str) -> Option<TokId> {
        self.tokens.iter().position(|t| t.name == name).map(|i| TokId(i as u32))
    }

    pub fn set_tokens(&mut self, tokens: Vec<TokenDef>) {
        self.tokens = tokens;
    }

    /// All productions as `(lhs, alternative index, rhs)` in registry order.
    pub fn productions(&self) -> impl Iterator<Item = (NtId, usize, &[Symbol])> {
        self.rules.iter().enumerate().flat_map(|(i, alts)| {
            alts.iter()
                .enumerate()
                .map(move |(j, rhs)| (NtId(i as u32), j, rhs.as_slice()))
        })
    }

    pub fn production_count(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    pub fn add_nonterminal(&mut self, name: impl Into<String>) -> Result<NtId, GrammarError> {
        let name = name.into();
        if self.nt_by_name(&name).is_some() || self.token_by_name(&name).is_some() {
            return Err(GrammarError::DuplicateName(name));
        }
        self.bump_fresh_past(&name);
        self.names.push(name);
        self.rules.push(Vec::new());
        Ok(NtId(self.names.len() as u32 - 1))
    }

    /// Allocates `n<k>` from the monotone fresh-id counter.
    pub fn fresh_nonterminal(&mut self) -> NtId {
        loop {
            let name = format!("n{}", self.next_fresh);
            self.next_fresh += 1;
            if self.nt_by_name(&name).is_none() && self.token_by_name(&name).is_none() {
                self.names.push(name);
                self.rules.push(Vec::new());
                return NtId(self.names.len() as u32 - 1);
            }
        }
    }

    fn bump_fresh_past(&mut self, name: &str) {
        if let Some(k) = name.strip_prefix('n').and_then(|d| d.parse::<u32>().ok()) {
            if name == format!("n{k}") && k >= self.next_fresh {
                self.next_fresh = k + 1;
            }
        }
    }

    /// Adds `lhs → rhs` unless present. Returns whether it was added.
    pub fn add_production(&mut self, lhs: NtId, rhs: Vec<Symbol>) -> bool {
        let alts = &mut self.rules[lhs.index()];
        if alts.contains(&rhs) {
            false
        } else {
            alts.push(rhs);
            true
        }
    }

    pub(crate) fn alternatives_mut(&mut self, nt: NtId) -> &mut Vec<Vec<Symbol>> {
        &mut self.rules[nt.index()]
    }

    /// Converts a token sequence into a right-hand side over this grammar's symbols.
    pub fn sequence_to_rhs(&self, seq: &[Tok]) -> Result<Vec<Symbol>, GrammarError> {
        seq.iter()
            .map(|t| match t {
                Tok::Id(id) => {
                    if (*id as usize) < self.tokens.len() {
                        Ok(Symbol::Tok(TokId(*id)))
                    } else {
                        Err(GrammarError::UnknownToken(*id))
                    }
                }
                Tok::Lit(s) if s.is_empty() => Err(GrammarError::EmptyLiteral),
                Tok::Lit(s) => Ok(Symbol::Lit(s.clone())),
            })
            .collect()
    }

    /// Returns a grammar with one more start alternative mirroring `seq`.
    /// Duplicates are suppressed.
    pub fn add_sequence(&self, seq: &[Tok]) -> Result<Grammar, GrammarError> {
        let rhs = self.sequence_to_rhs(seq)?;
        let mut g = self.clone();
        g.add_production(g.start, rhs);
        Ok(g)
    }

    /// Token-level membership of `tokens` in the language.
    pub fn accepts_tokens(&self, tokens: &[Tok]) -> bool {
        earley::Recognizer::new(self).accepts_tokens(tokens)
    }

    /// Character-level membership, honouring the whitespace policy.
    pub fn accepts_str(&self, input: &str) -> bool {
        earley::Recognizer::new(self).accepts_str(input)
    }

    pub fn metrics(&self) -> GrammarMetrics {
        GrammarMetrics::of(self)
    }

    /// Checks the structural invariants (resolution, non-empty literals).
    pub fn validate(&self) -> Result<(), GrammarError> {
        for (_, _, rhs) in self.productions() {
            for s in rhs {
                match s {
                    Symbol::Lit(l) if l.is_empty() => return Err(GrammarError::EmptyLiteral),
                    Symbol::Nt(n) => {
                        if n.index() >= self.names.len() {
                            return Err(GrammarError::UnknownNonterminal(format!("#{}", n.0)));
                        }
                        if self.rules[n.index()].is_empty() {
                            return Err(GrammarError::DanglingReference(self.names[n.index()].clone()));
                        }
                    }
                    Symbol::Tok(t) if t.index() >= self.tokens.len() => {
                        return Err(GrammarError::UnknownToken(t.0));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Keeps only the nonterminals for which `keep` is true and re-indexes
    /// symbols. Productions mentioning a dropped nonterminal are removed.
    pub(crate) fn retain_nonterminals(&mut self, keep: &[bool]) {
        let mut remap: Vec<Option<NtId>> = vec![None; self.names.len()];
        let mut next = 0u32;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = Some(NtId(next));
                next += 1;
            }
        }
        let names = std::mem::take(&mut self.names);
        let rules = std::mem::take(&mut self.rules);
        for (i, (name, alts)) in names.into_iter().zip(rules).enumerate() {
            if !keep[i] {
                continue;
            }
            let alts = alts
                .into_iter()
                .filter_map(|rhs| {
                    rhs.into_iter()
                        .map(|s| match s {
                            Symbol::Nt(n) => remap[n.index()].map(Symbol::Nt),
                            other => Some(other),
                        })
                        .collect::<Option<Vec<_>>>()
                })
                .collect();
            self.names.push(name);
            self.rules.push(alts);
        }
        self.start = remap[self.start.index()].expect("start symbol is always kept");
    }

    /// Nonterminals reachable from the start symbol.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![self.start];
        seen[self.start.index()] = true;
        while let Some(n) = stack.pop() {
            for rhs in &self.rules[n.index()] {
                for s in rhs {
                    if let Symbol::Nt(m) = s {
                        if !seen[m.index()] {
                            seen[m.index()] = true;
                            stack.push(*m);
                        }
                    }
                }
            }
        }
        seen
    }

    /// Nonterminals deriving at least one terminal string.
    pub fn productive(&self) -> Vec<bool> {
        let mut productive = vec![false; self.names.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for (i, alts) in self.rules.iter().enumerate() {
                if productive[i] {
                    continue;
                }
                let ok = alts.iter().any(|rhs| {
                    rhs.iter().all(|s| match s {
                        Symbol::Nt(m) => productive[m.index()],
                        _ => true,
                    })
                });
                if ok {
                    productive[i] = true;
                    changed = true;
                }
            }
        }
        productive
    }

    pub fn symbol_display(&self, s: &Symbol) -> String {
        let mut out = String::new();
        format::write_symbol(&mut out, self, s);
        out
    }

    pub fn rhs_display(&self, rhs: &[Symbol]) -> String {
        rhs.iter().map(|s| self.symbol_display(s)).collect::<Vec<_>>().join(" ")
    }

    /// Content-addressed view of every production, keyed by lhs name.
    pub(crate) fn production_keys(&self) -> HashSet<(String, String)> {
        self.productions()
            .map(|(lhs, _, rhs)| (self.name(lhs).to_string(), self.rhs_display(rhs)))
            .collect()
    }

    pub(crate) fn occurrences(&self) -> HashMap<NtId, Vec<(NtId, usize, usize)>> {
        let mut occ: HashMap<NtId, Vec<(NtId, usize, usize)>> = HashMap::new();
        for (lhs, alt, rhs) in self.productions() {
            for (pos, s) in rhs.iter().enumerate() {
                if let Symbol::Nt(n) = s {
                    occ.entry(*n).or_default().push((lhs, alt, pos));
                }
            }
        }
        occ
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format::to_text(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(id: u32) -> Tok {
        Tok::Id(id)
    }

    fn one_token() -> Vec<TokenDef> {
        vec![TokenDef::literals("t1", ["3".to_string(), "a".to_string()])]
    }

    #[test]
    fn first_sequence_is_inserted_verbatim() {
        let g = Grammar::with_tokens(one_token(), false);
        let g = g.add_sequence(&[t(0), Tok::lit("+"), t(0), Tok::lit(";")]).unwrap();
        assert_eq!(g.alternatives(g.start()).len(), 1);
        assert_eq!(format::to_text(&g).lines().last().unwrap(), "n0 : t1 \"+\" t1 \";\" ;");
    }

    #[test]
    fn duplicate_sequence_is_suppressed() {
        let g = Grammar::with_tokens(one_token(), false)
            .add_sequence(&[t(0), Tok::lit(";")])
            .unwrap();
        let again = g.add_sequence(&[t(0), Tok::lit(";")]).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn second_sequence_appends_in_order() {
        let g = Grammar::with_tokens(one_token(), false)
            .add_sequence(&[t(0), Tok::lit(";")])
            .unwrap()
            .add_sequence(&[t(0), Tok::lit("+"), t(0), Tok::lit(";")])
            .unwrap();
        let text = format::to_text(&g);
        assert!(text.ends_with("n0 : t1 \";\" | t1 \"+\" t1 \";\" ;\n"), "{text}");
        let back = format::parse(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn unknown_token_is_a_resolution_error() {
        let g = Grammar::with_tokens(one_token(), false);
        assert_eq!(g.add_sequence(&[t(7)]), Err(GrammarError::UnknownToken(7)));
    }

    #[test]
    fn fresh_ids_are_monotone_and_deterministic() {
        let mk = || {
            let mut g = Grammar::new("n0");
            let a = g.fresh_nonterminal();
            let b = g.fresh_nonterminal();
            (g.name(a).to_string(), g.name(b).to_string())
        };
        assert_eq!(mk(), ("n1".to_string(), "n2".to_string()));
        assert_eq!(mk(), mk());
    }

    #[test]
    fn lexical_matching_handles_sequences() {
        let q = LexAtom::Lit("\"".into());
        let body = LexAtom::Class(CharClass::new([('a', 'z')], true).unwrap());
        let def = TokenDef {
            name: "t1".into(),
            alts: vec![vec![q.clone(), body, q]],
        };
        assert!(def.matches("\"abc\""));
        assert!(!def.matches("\"\""));
        assert_eq!(def.shortest(), "\"a\"");
    }
}
