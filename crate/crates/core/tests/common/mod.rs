#![allow(dead_code)]

use gramforge::decompose::{decompose, DecomposedCorpus};
use gramforge::infer::{infer_grammar, InferConfig, InferOutput};
use gramforge::oracle::Oracle;
use gramforge::refbench::language;
use gramforge::tokenizer::{tokenize, TokenizedCorpus};

pub fn builtin(name: &str) -> Oracle {
    Oracle::builtin_from_grammar(&language(name).unwrap().grammar()).unwrap()
}

pub fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub struct Run {
    pub corpus: TokenizedCorpus,
    pub dec: DecomposedCorpus,
    pub out: InferOutput,
}

pub fn pipeline(examples: &[&str], oracle: &Oracle, cfg: &InferConfig) -> Run {
    let corpus = tokenize(&strings(examples), oracle).unwrap();
    let dec = decompose(&corpus, oracle).unwrap();
    let out = infer_grammar(&dec, &corpus.table, oracle, cfg).unwrap();
    Run { corpus, dec, out }
}

use std::collections::HashSet;

use gramforge::{Grammar, Symbol, Tok};

/// Terminal alphabet at token level: every literal, then every token id.
pub fn alphabet(g: &Grammar) -> Vec<Tok> {
    let mut out: Vec<Tok> = Vec::new();
    for (_, _, rhs) in g.productions() {
        for s in rhs {
            let t = match s {
                Symbol::Lit(l) => Tok::lit(l.clone()),
                Symbol::Tok(id) => Tok::Id(id.0),
                Symbol::Class(c) => Tok::lit(c.lowest().to_string()),
                Symbol::Nt(_) => continue,
            };
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

/// Every token string of length at most `max` derivable from the start
/// symbol, by fixpoint iteration over per-nonterminal string sets.
pub fn derivable(g: &Grammar, max: usize) -> HashSet<Vec<Tok>> {
    let n = g.nt_count();
    let mut sets: Vec<HashSet<Vec<Tok>>> = vec![HashSet::new(); n];
    loop {
        let mut changed = false;
        for nt in g.nonterminals() {
            for rhs in g.alternatives(nt) {
                let mut acc: HashSet<Vec<Tok>> = HashSet::from([Vec::new()]);
                for s in rhs {
                    let parts: Vec<Vec<Tok>> = match s {
                        Symbol::Nt(m) => sets[m.index()].iter().cloned().collect(),
                        Symbol::Lit(l) => vec![vec![Tok::lit(l.clone())]],
                        Symbol::Tok(id) => vec![vec![Tok::Id(id.0)]],
                        Symbol::Class(c) => vec![vec![Tok::lit(c.lowest().to_string())]],
                    };
                    let mut next = HashSet::new();
                    for a in &acc {
                        for p in &parts {
                            if a.len() + p.len() <= max {
                                let mut v = a.clone();
                                v.extend(p.iter().cloned());
                                next.insert(v);
                            }
                        }
                    }
                    acc = next;
                }
                for s in acc {
                    changed |= sets[nt.index()].insert(s);
                }
            }
        }
        if !changed {
            break;
        }
    }
    std::mem::take(&mut sets[g.start().index()])
}

/// Calls `f` on every string over `alpha` of length at most `max`.
pub fn for_all_strings(alpha: &[Tok], max: usize, mut f: impl FnMut(&[Tok])) {
    let mut cur: Vec<usize> = Vec::new();
    loop {
        let s: Vec<Tok> = cur.iter().map(|&i| alpha[i].clone()).collect();
        f(&s);
        // odometer increment, growing the length when it wraps
        let mut i = cur.len();
        loop {
            if i == 0 {
                if cur.len() == max || alpha.is_empty() {
                    return;
                }
                cur = vec![0; cur.len() + 1];
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < alpha.len() {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Strings of length at most `max` on which Earley and the enumeration disagree.
pub fn mismatches(g: &Grammar, max: usize) -> Vec<Vec<Tok>> {
    let lang = derivable(g, max);
    let rec = gramforge::cfg::earley::Recognizer::new(g);
    let mut bad = Vec::new();
    for_all_strings(&alphabet(g), max, |s| {
        if rec.accepts_tokens(s) != lang.contains(s) {
            bad.push(s.to_vec());
        }
    });
    bad
}
