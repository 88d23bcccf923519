//! Shortest terminal yields and shortest sentence contexts.

use super::earley::is_word_char;
use super::{Grammar, GrammarError, LexAtom, NtId, Symbol, Tok, TokId};

/// How the length of a terminal is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YieldMode {
    /// every terminal costs 1
    Token,
    /// terminals cost their shortest character length
    Char,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Best {
    cost: u64,
    height: u32,
    alt: usize,
}

/// Per-nonterminal minimal yields, ties broken by height then alternative order.
#[derive(Clone, Debug)]
pub struct ShortestYields {
    mode: YieldMode,
    best: Vec<Option<Best>>,
}

pub fn terminal_cost(g: &Grammar, s: &Symbol, mode: YieldMode) -> u64 {
    match (mode, s) {
        (YieldMode::Token, _) => 1,
        (YieldMode::Char, Symbol::Lit(l)) => l.chars().count() as u64,
        (YieldMode::Char, Symbol::Class(_)) => 1,
        (YieldMode::Char, Symbol::Tok(t)) => g.token(*t).map_or(1, |d| d.shortest().chars().count() as u64),
        (YieldMode::Char, Symbol::Nt(_)) => 0,
    }
}

impl ShortestYields {
    pub fn compute(g: &Grammar, mode: YieldMode) -> Self {
        let mut best: Vec<Option<Best>> = vec![None; g.nt_count()];
        let mut changed = true;
        while changed {
            changed = false;
            for (lhs, alt, rhs) in g.productions() {
                let mut cost = 0u64;
                let mut height = 0u32;
                let mut ok = true;
                for s in rhs {
                    match s {
                        Symbol::Nt(n) => match best[n.index()] {
                            Some(b) => {
                                cost += b.cost;
                                height = height.max(b.height);
                            }
                            None => {
                                ok = false;
                                break;
                            }
                        },
                        t => cost += terminal_cost(g, t, mode),
                    }
                }
                if !ok {
                    continue;
                }
                let cand = Best {
                    cost,
                    height: height + 1,
                    alt,
                };
                let slot = &mut best[lhs.index()];
                if slot.is_none_or(|b| cand < b) {
                    *slot = Some(cand);
                    changed = true;
                }
            }
        }
        Self { mode, best }
    }

    pub fn mode(&self) -> YieldMode {
        self.mode
    }

    pub fn cost(&self, nt: NtId) -> Option<u64> {
        self.best.get(nt.index()).copied().flatten().map(|b| b.cost)
    }

    pub fn productive(&self, nt: NtId) -> bool {
        self.cost(nt).is_some()
    }

    /// Index of the alternative realizing the shortest yield of `nt`.
    pub fn best_alt(&self, nt: NtId) -> Option<usize> {
        self.best.get(nt.index()).copied().flatten().map(|b| b.alt)
    }

    pub fn rhs_cost(&self, g: &Grammar, rhs: &[Symbol]) -> Option<u64> {
        rhs.iter()
            .map(|s| match s {
                Symbol::Nt(n) => self.cost(*n),
                t => Some(terminal_cost(g, t, self.mode)),
            })
            .sum()
    }

    /// Terminal symbols of the shortest yield of `nt`.
    pub fn terminals(&self, g: &Grammar, nt: NtId) -> Result<Vec<Symbol>, GrammarError> {
        let mut out = Vec::new();
        self.expand_nt(g, nt, &mut out)?;
        Ok(out)
    }

    pub fn rhs_terminals(&self, g: &Grammar, rhs: &[Symbol]) -> Result<Vec<Symbol>, GrammarError> {
        let mut out = Vec::new();
        for s in rhs {
            match s {
                Symbol::Nt(n) => self.expand_nt(g, *n, &mut out)?,
                t => out.push(t.clone()),
            }
        }
        Ok(out)
    }

    fn expand_nt(&self, g: &Grammar, nt: NtId, out: &mut Vec<Symbol>) -> Result<(), GrammarError> {
        let b = self.best[nt.index()].ok_or_else(|| GrammarError::Unproductive(g.name(nt).to_string()))?;
        for s in &g.alternatives(nt)[b.alt] {
            match s {
                Symbol::Nt(n) => self.expand_nt(g, *n, out)?,
                t => out.push(t.clone()),
            }
        }
        Ok(())
    }
}

/// Shortest yield of any symbol as a string, under the grammar's spacing rule.
pub fn shortest_yield(g: &Grammar, s: &Symbol) -> Result<String, GrammarError> {
    let terms = match s {
        Symbol::Nt(n) => ShortestYields::compute(g, YieldMode::Char).terminals(g, *n)?,
        t => vec![t.clone()],
    };
    Ok(render_terminals(g, &terms))
}

/// The lowest rendering of a single terminal.
pub fn terminal_text(g: &Grammar, s: &Symbol) -> String {
    match s {
        Symbol::Lit(l) => l.clone(),
        Symbol::Class(c) => c.lowest().to_string(),
        Symbol::Tok(t) => g.token(*t).map(|d| d.shortest()).unwrap_or_default(),
        Symbol::Nt(_) => String::new(),
    }
}

/// Token-level view of a terminal: pre-terminals stay ids, classes become their lowest member.
pub fn terminal_tok(s: &Symbol) -> Option<Tok> {
    match s {
        Symbol::Lit(l) => Some(Tok::Lit(l.clone())),
        Symbol::Class(c) => Some(Tok::Lit(c.lowest().to_string())),
        Symbol::Tok(TokId(t)) => Some(Tok::Id(*t)),
        Symbol::Nt(_) => None,
    }
}

pub fn render_terminals(g: &Grammar, terms: &[Symbol]) -> String {
    let pieces: Vec<String> = terms.iter().map(|t| terminal_text(g, t)).collect();
    join_lexemes(&pieces, g.whitespace_sensitive())
}

/// Concatenates lexemes; when whitespace is insignificant a single space
/// separates two lexemes whose touching characters are both word characters.
pub fn join_lexemes<S: AsRef<str>>(pieces: &[S], sensitive: bool) -> String {
    let mut out = String::new();
    for p in pieces {
        let p = p.as_ref();
        if !sensitive {
            if let (Some(a), Some(b)) = (out.chars().last(), p.chars().next()) {
                if is_word_char(a) && is_word_char(b) {
                    out.push(' ');
                }
            }
        }
        out.push_str(p);
    }
    out
}

/// Shortest terminal context `(prefix, suffix)` of every reachable nonterminal,
/// so that `prefix · yield(n) · suffix` is a sentence.
pub fn shortest_contexts(g: &Grammar, ys: &ShortestYields) -> Vec<Option<(Vec<Symbol>, Vec<Symbol>)>> {
    let n = g.nt_count();
    let mut cost: Vec<Option<u64>> = vec![None; n];
    let mut via: Vec<Option<(NtId, usize, usize)>> = vec![None; n];
    cost[g.start().index()] = Some(0);
    for _ in 0..=n {
        let mut changed = false;
        for (lhs, alt, rhs) in g.productions() {
            let Some(base) = cost[lhs.index()] else { continue };
            let Some(total) = ys.rhs_cost(g, rhs) else { continue };
            for (pos, s) in rhs.iter().enumerate() {
                if let Symbol::Nt(m) = s {
                    let Some(own) = ys.cost(*m) else { continue };
                    let c = base + total - own;
                    if cost[m.index()].is_none_or(|old| c < old) && *m != g.start() {
                        cost[m.index()] = Some(c);
                        via[m.index()] = Some((lhs, alt, pos));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n)
        .map(|i| {
            cost[i]?;
            let mut prefix = Vec::new();
            let mut suffix = Vec::new();
            let mut cur = NtId(i as u32);
            let mut guard = 0;
            while let Some((lhs, alt, pos)) = via[cur.index()] {
                let rhs = &g.alternatives(lhs)[alt];
                let mut p = ys.rhs_terminals(g, &rhs[..pos]).ok()?;
                p.append(&mut prefix);
                prefix = p;
                suffix.extend(ys.rhs_terminals(g, &rhs[pos + 1..]).ok()?);
                cur = lhs;
                guard += 1;
                if guard > n {
                    return None;
                }
            }
            Some((prefix, suffix))
        })
        .collect()
}

/// Collapses lexical atoms into a printable lowest string.
pub fn lex_alt_text(alt: &[LexAtom]) -> String {
    alt.iter()
        .map(|a| match a {
            LexAtom::Lit(s) => s.clone(),
            LexAtom::Class(c) => c.lowest().to_string(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::format::parse;
    use crate::cfg::CharClass;

    const G23: &str = "%start t0\nt0 : t1 t2 t1 \";\" ;\nt1 : \"a\" | \"3\" ;\nt2 : \"<\" | \"+\" ;\n";

    #[test]
    fn literal_and_class_yields() {
        let g = parse(G23).unwrap();
        assert_eq!(shortest_yield(&g, &Symbol::lit("a")).unwrap(), "a");
        let c = CharClass::new([('a', 'z')], false).unwrap();
        assert_eq!(shortest_yield(&g, &Symbol::Class(c)).unwrap(), "a");
    }

    #[test]
    fn start_yield_follows_registry_order() {
        let g = parse(G23).unwrap();
        let y = shortest_yield(&g, &Symbol::Nt(g.start())).unwrap();
        assert_eq!(y, "a<a;");
        assert!(g.accepts_str(&y));
    }

    #[test]
    fn unproductive_symbol_is_an_error() {
        let g = parse("%start s\ns : \"a\" | x ;\nx : x \"b\" ;\n").unwrap();
        let x = g.nt_by_name("x").unwrap();
        assert_eq!(shortest_yield(&g, &Symbol::Nt(x)), Err(GrammarError::Unproductive("x".into())));
    }

    #[test]
    fn recursive_rule_terminates() {
        let g = parse("%start e\ne : e \"+\" e | \"(\" e \")\" | \"x\" ;\n").unwrap();
        assert_eq!(shortest_yield(&g, &Symbol::Nt(g.start())).unwrap(), "x");
    }

    #[test]
    fn contexts_embed_into_sentences() {
        let g = parse("%start s\ns : \"{\" b \"}\" ;\nb : st b | ;\nst : \"x\" \"=\" e \";\" ;\ne : \"1\" | \"(\" e \")\" ;\n")
            .unwrap();
        let ys = ShortestYields::compute(&g, YieldMode::Char);
        let ctx = shortest_contexts(&g, &ys);
        let e = g.nt_by_name("e").unwrap();
        let (pre, suf) = ctx[e.index()].clone().unwrap();
        assert_eq!(render_terminals(&g, &pre), "{x=");
        assert_eq!(render_terminals(&g, &suf), ";}");
    }

    #[test]
    fn word_lexemes_are_spaced() {
        assert_eq!(join_lexemes(&["int", "x", ";"], false), "int x;");
        assert_eq!(join_lexemes(&["int", "x", ";"], true), "intx;");
    }
}
