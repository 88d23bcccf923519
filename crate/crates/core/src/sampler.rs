//! Random sentence generation from a grammar.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cfg::yields::{join_lexemes, terminal_tok, ShortestYields, YieldMode};
use crate::cfg::{CharClass, Grammar, GrammarError, LexAtom, NtId, Symbol, Tok};
use crate::rng::{rng_from_seed, Rng};

/// Longest run drawn for a repeatable character class.
pub const CLASS_RUN_CAP: usize = 16;
/// Safety cap on expansions for depth-limited sampling without a length bound.
const EXPANSION_CAP: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerKind {
    /// Each production may be used at most `limit` times per sample.
    Lpp { limit: u32 },
    /// Beyond `max_depth`, alternatives with only terminals are preferred.
    DepthLimited { max_depth: u32, max_len: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSpec {
    #[serde(flatten)]
    pub kind: SamplerKind,
    pub seed: u64,
}

impl SamplerKind {
    pub fn lpp10() -> Self {
        SamplerKind::Lpp { limit: 10 }
    }

    /// Names accepted on the command line: `lpp10` (any `lppN`), `arvada`,
    /// `treevada`, `depthN`.
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "arvada" => Some(SamplerKind::DepthLimited {
                max_depth: 5,
                max_len: Some(300),
            }),
            "treevada" => Some(SamplerKind::DepthLimited {
                max_depth: 5,
                max_len: None,
            }),
            _ => {
                if let Some(n) = name.strip_prefix("lpp") {
                    n.parse().ok().filter(|&l| l >= 1).map(|limit| SamplerKind::Lpp { limit })
                } else if let Some(n) = name.strip_prefix("depth") {
                    n.parse().ok().filter(|&d| d >= 1).map(|max_depth| SamplerKind::DepthLimited {
                        max_depth,
                        max_len: None,
                    })
                } else {
                    None
                }
            }
        }
    }
}

/// A grammar prepared for repeated sampling.
pub struct Sampler<'g> {
    g: &'g Grammar,
    kind: SamplerKind,
    yields: ShortestYields,
    /// offset of each nonterminal's first production in the global order
    offsets: Vec<usize>,
    terminal_only: Vec<Vec<usize>>,
}

impl<'g> Sampler<'g> {
    pub fn new(g: &'g Grammar, kind: SamplerKind) -> Result<Self, GrammarError> {
        let yields = ShortestYields::compute(g, YieldMode::Char);
        if !yields.productive(g.start()) {
            return Err(GrammarError::Unproductive(g.name(g.start()).to_string()));
        }
        let mut offsets = Vec::with_capacity(g.nt_count());
        let mut total = 0;
        let mut terminal_only = Vec::with_capacity(g.nt_count());
        for nt in g.nonterminals() {
            offsets.push(total);
            total += g.alternatives(nt).len();
            terminal_only.push(
                g.alternatives(nt)
                    .iter()
                    .enumerate()
                    .filter(|(_, rhs)| rhs.iter().all(Symbol::is_terminal))
                    .map(|(i, _)| i)
                    .collect(),
            );
        }
        Ok(Self {
            g,
            kind,
            yields,
            offsets,
            terminal_only,
        })
    }

    pub fn grammar(&self) -> &Grammar {
        self.g
    }

    fn usable(&self, nt: NtId, alt: usize) -> bool {
        self.yields.best_alt(nt).is_some() && {
            let rhs = &self.g.alternatives(nt)[alt];
            rhs.iter().all(|s| s.as_nt().is_none_or(|m| self.yields.productive(m)))
        }
    }

    /// One leftmost derivation, as a list of terminal symbols.
    pub fn derive(&self, rng: &mut Rng) -> Vec<Symbol> {
        let g = self.g;
        let mut out = Vec::new();
        let mut used = vec![0u32; g.production_count()];
        let mut stack: Vec<(Symbol, u32)> = vec![(Symbol::Nt(g.start()), 1)];
        let mut expansions = 0usize;
        while let Some((sym, depth)) = stack.pop() {
            let Symbol::Nt(nt) = sym else {
                out.push(sym);
                continue;
            };
            let n_alts = g.alternatives(nt).len();
            let choice = match &self.kind {
                SamplerKind::Lpp { limit } => {
                    let open: Vec<usize> = (0..n_alts)
                        .filter(|&a| used[self.offsets[nt.index()] + a] < *limit && self.usable(nt, a))
                        .collect();
                    if open.is_empty() {
                        None
                    } else {
                        Some(open[rng.random_range(0..open.len())])
                    }
                }
                SamplerKind::DepthLimited { max_depth, .. } => {
                    if expansions >= EXPANSION_CAP {
                        None
                    } else {
                        let term: Vec<usize> = self.terminal_only[nt.index()].clone();
                        let pool: Vec<usize> = if depth > *max_depth && !term.is_empty() {
                            term
                        } else {
                            (0..n_alts).filter(|&a| self.usable(nt, a)).collect()
                        };
                        Some(pool[rng.random_range(0..pool.len())])
                    }
                }
            };
            match choice {
                Some(alt) => {
                    expansions += 1;
                    used[self.offsets[nt.index()] + alt] += 1;
                    for s in g.alternatives(nt)[alt].iter().rev() {
                        stack.push((s.clone(), depth + 1));
                    }
                }
                None => {
                    let ys = self.yields.terminals(g, nt).expect("productive by construction");
                    for s in ys.into_iter().rev() {
                        stack.push((s, depth + 1));
                    }
                }
            }
        }
        out
    }

    /// A token-level sample: pre-terminals stay as ids.
    pub fn sample_tokens(&self, rng: &mut Rng) -> Vec<Tok> {
        self.derive(rng).iter().filter_map(terminal_tok).collect()
    }

    /// A concrete string, with pre-terminals and classes drawn at random.
    pub fn sample_string(&self, rng: &mut Rng) -> String {
        let max_len = match self.kind {
            SamplerKind::DepthLimited { max_len: Some(m), .. } => Some(m),
            _ => None,
        };
        for _ in 0..100 {
            let s = self.realize(&self.derive(rng), rng);
            match max_len {
                Some(m) if s.chars().count() > m => continue,
                _ => return s,
            }
        }
        let ys = self.yields.terminals(self.g, self.g.start()).expect("productive by construction");
        crate::cfg::yields::render_terminals(self.g, &ys)
    }

    pub fn realize(&self, terms: &[Symbol], rng: &mut Rng) -> String {
        let pieces: Vec<String> = terms.iter().map(|t| realize_terminal(self.g, t, rng)).collect();
        join_lexemes(&pieces, self.g.whitespace_sensitive())
    }
}

fn draw_class(c: &CharClass, rng: &mut Rng, out: &mut String) {
    let mut len = 1;
    if c.repeatable() {
        while len < CLASS_RUN_CAP && rng.random_bool(2.0 / 3.0) {
            len += 1;
        }
    }
    for _ in 0..len {
        out.push(c.nth(rng.random_range(0..c.size())));
    }
}

pub fn realize_terminal(g: &Grammar, s: &Symbol, rng: &mut Rng) -> String {
    let mut out = String::new();
    match s {
        Symbol::Lit(l) => out.push_str(l),
        Symbol::Class(c) => draw_class(c, rng, &mut out),
        Symbol::Tok(t) => {
            if let Some(def) = g.token(*t) {
                let alt = &def.alts[rng.random_range(0..def.alts.len())];
                for a in alt {
                    match a {
                        LexAtom::Lit(l) => out.push_str(l),
                        LexAtom::Class(c) => draw_class(c, rng, &mut out),
                    }
                }
            }
        }
        Symbol::Nt(_) => {}
    }
    out
}

/// `n` string samples from one seeded stream.
pub fn sample_n(g: &Grammar, spec: &SamplerSpec, n: usize) -> Result<Vec<String>, GrammarError> {
    let sampler = Sampler::new(g, spec.kind.clone())?;
    let mut rng = rng_from_seed(spec.seed);
    Ok((0..n).map(|_| sampler.sample_string(&mut rng)).collect())
}

pub fn sample(g: &Grammar, spec: &SamplerSpec) -> Result<String, GrammarError> {
    Ok(sample_n(g, spec, 1)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::format::parse;

    const DEEP_CHAIN: &str = "%start n0\nn0 : n1 ;\nn1 : n2 ;\nn2 : n3 ;\nn3 : n4 ;\nn4 : n5 ;\nn5 : n6 | \"1\" ;\nn6 : \"2\" ;\n";

    fn spec(kind: SamplerKind) -> SamplerSpec {
        SamplerSpec { kind, seed: 0 }
    }

    #[test]
    fn depth_limit_hides_the_deep_alternative() {
        let g = parse(DEEP_CHAIN).unwrap();
        let kind = SamplerKind::parse("depth5").unwrap();
        let xs = sample_n(&g, &spec(kind), 1000).unwrap();
        assert!(xs.iter().all(|s| s == "1"));
    }

    #[test]
    fn lpp_reaches_the_deep_alternative() {
        let g = parse(DEEP_CHAIN).unwrap();
        let xs = sample_n(&g, &spec(SamplerKind::lpp10()), 1000).unwrap();
        assert!(xs.iter().any(|s| s == "2"));
        assert!(xs.iter().any(|s| s == "1"));
    }

    #[test]
    fn single_string_grammar() {
        let g = parse("%start s\ns : \"a\" ;\n").unwrap();
        for name in ["lpp10", "arvada", "treevada"] {
            let xs = sample_n(&g, &spec(SamplerKind::parse(name).unwrap()), 5).unwrap();
            assert_eq!(xs, vec!["a"; 5]);
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let g = parse("%start e\ne : e \"+\" e | \"(\" e \")\" | \"x\" | \"y\" ;\n").unwrap();
        let s = spec(SamplerKind::lpp10());
        assert_eq!(sample_n(&g, &s, 3).unwrap(), sample_n(&g, &s, 3).unwrap());
    }

    #[test]
    fn samples_are_members() {
        let g = parse("%start p\n%token id = [a-z]+ | \"_\" ;\np : s p | s ;\ns : \"int\" id \";\" | id \"=\" id \"+\" id \";\" ;\n")
            .unwrap();
        let xs = sample_n(&g, &spec(SamplerKind::lpp10()), 100).unwrap();
        for x in &xs {
            assert!(g.accepts_str(x), "{x}");
        }
    }

    #[test]
    fn unproductive_grammar_is_rejected() {
        let g = parse("%start s\ns : s \"a\" ;\n").unwrap();
        assert!(sample_n(&g, &spec(SamplerKind::lpp10()), 1).is_err());
    }

    #[test]
    fn long_samples_are_redrawn() {
        let g = parse("%start s\ns : \"aaaa\" s | \"b\" ;\n").unwrap();
        let kind = SamplerKind::DepthLimited {
            max_depth: 50,
            max_len: Some(3),
        };
        let xs = sample_n(&g, &spec(kind), 20).unwrap();
        assert!(xs.iter().all(|s| s == "b"));
    }

    #[test]
    fn spec_names() {
        assert_eq!(SamplerKind::parse("lpp10"), Some(SamplerKind::lpp10()));
        assert_eq!(SamplerKind::parse("lpp0"), None);
        assert_eq!(SamplerKind::parse("bogus"), None);
    }
}
