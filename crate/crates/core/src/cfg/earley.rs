//! Chart recognizer (Earley, with the Aycock–Horspool nullable fix).
//!
//! The same chart engine runs over three kinds of input: token sequences,
//! raw strings (scannerless, with the grammar's whitespace policy), and
//! sentential forms (used to detect redundant alternatives).

use std::collections::HashSet;

use super::{lex_match_ends, Grammar, NtId, Symbol, Tok, TokenDef};

#[derive(Clone, Debug)]
enum Sym {
    N(u32),
    T(Symbol),
}

#[derive(Clone, Debug)]
struct Rule {
    lhs: u32,
    rhs: Vec<Sym>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Item {
    rule: u32,
    dot: u32,
    origin: u32,
}

/// A compiled grammar ready for repeated membership queries.
#[derive(Clone, Debug)]
pub struct Recognizer {
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<u32>>,
    nullable: Vec<bool>,
    start: u32,
    tokens: Vec<TokenDef>,
    whitespace_sensitive: bool,
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

trait Input {
    fn len(&self) -> usize;
    fn scan(&self, rec: &Recognizer, term: &Symbol, at: usize, out: &mut Vec<usize>);
    fn scan_nt(&self, _nt: u32, _at: usize) -> bool {
        false
    }
    fn accepts_end(&self, at: usize) -> bool;
}

struct TokenInput<'a>(&'a [Tok]);

impl Input for TokenInput<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn scan(&self, rec: &Recognizer, term: &Symbol, at: usize, out: &mut Vec<usize>) {
        let Some(tok) = self.0.get(at) else { return };
        let ok = match (term, tok) {
            (Symbol::Lit(a), Tok::Lit(b)) => a == b,
            (Symbol::Tok(a), Tok::Id(b)) => a.0 == *b,
            (Symbol::Class(c), Tok::Lit(b)) => c.matches(b),
            // a literal token may also spell out a member of a pre-terminal
            (Symbol::Tok(a), Tok::Lit(b)) => rec.tokens.get(a.index()).is_some_and(|d| d.matches(b)),
            _ => false,
        };
        if ok {
            out.push(at + 1);
        }
    }

    fn accepts_end(&self, at: usize) -> bool {
        at == self.0.len()
    }
}

struct CharInput {
    chars: Vec<char>,
    sensitive: bool,
}

impl CharInput {
    fn scan_start(&self, at: usize) -> Option<usize> {
        if self.sensitive {
            return Some(at);
        }
        let mut j = at;
        while j < self.chars.len() && self.chars[j].is_whitespace() {
            j += 1;
        }
        // adjacent word characters belong to one lexeme
        if j == at && at > 0 && j < self.chars.len() && is_word_char(self.chars[at - 1]) && is_word_char(self.chars[j])
        {
            return None;
        }
        Some(j)
    }
}

impl Input for CharInput {
    fn len(&self) -> usize {
        self.chars.len()
    }

    fn scan(&self, rec: &Recognizer, term: &Symbol, at: usize, out: &mut Vec<usize>) {
        let Some(j) = self.scan_start(at) else { return };
        let chars = &self.chars;
        match term {
            Symbol::Lit(s) => {
                let mut q = j;
                for c in s.chars() {
                    if q < chars.len() && chars[q] == c {
                        q += 1;
                    } else {
                        return;
                    }
                }
                out.push(q);
            }
            Symbol::Class(cls) => {
                let mut q = j;
                while q < chars.len() && cls.contains(chars[q]) {
                    q += 1;
                    out.push(q);
                    if !cls.repeatable() {
                        break;
                    }
                }
            }
            Symbol::Tok(t) => {
                if let Some(def) = rec.tokens.get(t.index()) {
                    for alt in &def.alts {
                        out.extend(lex_match_ends(alt, chars, j));
                    }
                }
            }
            Symbol::Nt(_) => {}
        }
    }

    fn accepts_end(&self, at: usize) -> bool {
        if self.sensitive {
            at == self.chars.len()
        } else {
            self.chars[at..].iter().all(|c| c.is_whitespace())
        }
    }
}

struct SententialInput<'a>(&'a [Symbol]);

impl Input for SententialInput<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn scan(&self, _rec: &Recognizer, term: &Symbol, at: usize, out: &mut Vec<usize>) {
        if self.0.get(at) == Some(term) {
            out.push(at + 1);
        }
    }

    fn scan_nt(&self, nt: u32, at: usize) -> bool {
        self.0.get(at) == Some(&Symbol::Nt(NtId(nt)))
    }

    fn accepts_end(&self, at: usize) -> bool {
        at == self.0.len()
    }
}

impl Recognizer {
    pub fn new(g: &Grammar) -> Self {
        Self::build(g, g.start(), None)
    }

    /// Compiles `g` rooted at `start`, optionally leaving out one production.
    pub fn rooted(g: &Grammar, start: NtId, without: Option<(NtId, usize)>) -> Self {
        Self::build(g, start, without)
    }

    fn build(g: &Grammar, start: NtId, without: Option<(NtId, usize)>) -> Self {
        let mut rules = Vec::with_capacity(g.production_count());
        let mut by_lhs = vec![Vec::new(); g.nt_count()];
        for (lhs, alt, rhs) in g.productions() {
            if without == Some((lhs, alt)) {
                continue;
            }
            by_lhs[lhs.index()].push(rules.len() as u32);
            rules.push(Rule {
                lhs: lhs.0,
                rhs: rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::Nt(n) => Sym::N(n.0),
                        t => Sym::T(t.clone()),
                    })
                    .collect(),
            });
        }
        let mut nullable = vec![false; g.nt_count()];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &rules {
                if !nullable[r.lhs as usize] && r.rhs.iter().all(|s| matches!(s, Sym::N(n) if nullable[*n as usize])) {
                    nullable[r.lhs as usize] = true;
                    changed = true;
                }
            }
        }
        Self {
            rules,
            by_lhs,
            nullable,
            start: start.0,
            tokens: g.tokens().to_vec(),
            whitespace_sensitive: g.whitespace_sensitive(),
        }
    }

    pub fn accepts_tokens(&self, tokens: &[Tok]) -> bool {
        self.run(&TokenInput(tokens))
    }

    pub fn accepts_str(&self, input: &str) -> bool {
        self.run(&CharInput {
            chars: input.chars().collect(),
            sensitive: self.whitespace_sensitive,
        })
    }

    /// Whether `form` is derivable from the root in one or more steps.
    pub fn derives_form(&self, form: &[Symbol]) -> bool {
        self.run(&SententialInput(form))
    }

    fn run<I: Input>(&self, input: &I) -> bool {
        let n = input.len();
        let mut sets: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];
        let add = |sets: &mut Vec<Vec<Item>>, seen: &mut Vec<HashSet<Item>>, k: usize, item: Item| {
            if seen[k].insert(item) {
                sets[k].push(item);
            }
        };
        for &r in &self.by_lhs[self.start as usize] {
            add(&mut sets, &mut seen, 0, Item { rule: r, dot: 0, origin: 0 });
        }
        let mut ends = Vec::new();
        for k in 0..=n {
            let mut idx = 0;
            while idx < sets[k].len() {
                let item = sets[k][idx];
                idx += 1;
                let rule = &self.rules[item.rule as usize];
                match rule.rhs.get(item.dot as usize) {
                    None => {
                        let lhs = rule.lhs;
                        let origin = item.origin as usize;
                        let mut j = 0;
                        while j < sets[origin].len() {
                            let waiting = sets[origin][j];
                            j += 1;
                            let wr = &self.rules[waiting.rule as usize];
                            if matches!(wr.rhs.get(waiting.dot as usize), Some(Sym::N(b)) if *b == lhs) {
                                add(&mut sets, &mut seen, k, Item { dot: waiting.dot + 1, ..waiting });
                            }
                        }
                    }
                    Some(Sym::N(b)) => {
                        let b = *b;
                        for &r in &self.by_lhs[b as usize] {
                            add(&mut sets, &mut seen, k, Item { rule: r, dot: 0, origin: k as u32 });
                        }
                        if self.nullable[b as usize] {
                            add(&mut sets, &mut seen, k, Item { dot: item.dot + 1, ..item });
                        }
                        if k < n && input.scan_nt(b, k) {
                            add(&mut sets, &mut seen, k + 1, Item { dot: item.dot + 1, ..item });
                        }
                    }
                    Some(Sym::T(t)) => {
                        if k < n {
                            ends.clear();
                            input.scan(self, t, k, &mut ends);
                            for &e in &ends {
                                add(&mut sets, &mut seen, e, Item { dot: item.dot + 1, ..item });
                            }
                        }
                    }
                }
            }
            if input.accepts_end(k)
                && sets[k].iter().any(|it| {
                    it.origin == 0
                        && self.rules[it.rule as usize].lhs == self.start
                        && it.dot as usize == self.rules[it.rule as usize].rhs.len()
                })
            {
                return true;
            }
        }
        false
    }
}
