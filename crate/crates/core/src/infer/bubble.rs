//! Bubbles, sentence contexts, swap checks and bubble-set scoring.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{InferConfig, InferError};
use crate::cfg::earley::Recognizer;
use crate::cfg::yields::{shortest_contexts, terminal_tok, ShortestYields, YieldMode};
use crate::cfg::{Grammar, NtId, Symbol, Tok};
use crate::oracle::Oracle;
use crate::tokenizer::TokenTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    NewProduction,
    ExistingGrammar,
}

/// A span `[start, end)` of one alternative's right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bubble {
    pub lhs: NtId,
    pub alt: usize,
    pub start: usize,
    pub end: usize,
    pub origin: Origin,
}

impl Bubble {
    pub fn symbols<'g>(&self, g: &'g Grammar) -> &'g [Symbol] {
        &g.alternatives(self.lhs)[self.alt][self.start..self.end]
    }

    pub fn same_site(&self, other: &Bubble) -> bool {
        (self.lhs, self.alt, self.start, self.end) == (other.lhs, other.alt, other.start, other.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BubbleSet {
    pub first: Bubble,
    pub rest: Vec<Bubble>,
    pub score: usize,
}

impl BubbleSet {
    pub fn all(&self) -> Vec<Bubble> {
        let mut v = vec![self.first];
        v.extend(self.rest.iter().copied());
        v
    }
}

/// A token sequence produced by swapping two bubbles, with its verdicts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSample {
    pub tokens: Vec<Tok>,
    pub source: (Bubble, Bubble),
    pub in_old_grammar: bool,
    /// only asked when the sample is outside the old grammar
    pub oracle: bool,
}

impl GenSample {
    pub fn is_generalization(&self) -> bool {
        !self.in_old_grammar && self.oracle
    }
}

const OPEN: [&str; 3] = ["(", "[", "{"];
const CLOSE: [&str; 3] = [")", "]", "}"];

/// Whether the literal brackets inside `syms` pair up.
pub fn bracket_balanced(syms: &[Symbol]) -> bool {
    let mut stack = Vec::new();
    for s in syms {
        if let Symbol::Lit(l) = s {
            if let Some(i) = OPEN.iter().position(|o| o == l) {
                stack.push(i);
            } else if let Some(i) = CLOSE.iter().position(|c| c == l) {
                if stack.pop() != Some(i) {
                    return false;
                }
            }
        }
    }
    stack.is_empty()
}

/// Left and right halves of a sentence around a hole.
pub type Context = (Vec<Tok>, Vec<Tok>);

/// Token-level witness yields and start contexts of one grammar version.
pub struct Probe<'g> {
    pub g: &'g Grammar,
    ys: ShortestYields,
    ctx: Vec<Option<Context>>,
    pub recognizer: Recognizer,
}

fn toks(syms: Vec<Symbol>) -> Vec<Tok> {
    syms.iter().filter_map(terminal_tok).collect()
}

impl<'g> Probe<'g> {
    pub fn new(g: &'g Grammar) -> Self {
        let ys = ShortestYields::compute(g, YieldMode::Token);
        let ctx = shortest_contexts(g, &ys)
            .into_iter()
            .map(|c| c.map(|(p, s)| (toks(p), toks(s))))
            .collect();
        Self {
            g,
            ys,
            ctx,
            recognizer: Recognizer::new(g),
        }
    }

    pub fn rhs_yield(&self, rhs: &[Symbol]) -> Option<Vec<Tok>> {
        self.ys.rhs_terminals(self.g, rhs).ok().map(toks)
    }

    pub fn nt_yield(&self, nt: NtId) -> Option<Vec<Tok>> {
        self.ys.terminals(self.g, nt).ok().map(toks)
    }

    /// Up to `k` distinct contexts of `nt`, shortest first.
    pub fn nt_contexts(&self, nt: NtId, k: usize) -> Vec<Context> {
        let g = self.g;
        let mut all: Vec<Context> = Vec::new();
        if let Some(c) = &self.ctx[nt.index()] {
            all.push(c.clone());
        }
        if k > 1 {
            if nt == g.start() {
                all.push((Vec::new(), Vec::new()));
            }
            for (lhs, _, rhs) in g.productions() {
                let Some((p, s)) = &self.ctx[lhs.index()] else { continue };
                for (pos, sym) in rhs.iter().enumerate() {
                    if *sym != Symbol::Nt(nt) {
                        continue;
                    }
                    let (Some(left), Some(right)) = (self.rhs_yield(&rhs[..pos]), self.rhs_yield(&rhs[pos + 1..])) else {
                        continue;
                    };
                    let mut pre = p.clone();
                    pre.extend(left);
                    let mut suf = right;
                    suf.extend(s.iter().cloned());
                    all.push((pre, suf));
                }
            }
            all.sort_by_key(|(p, s)| p.len() + s.len());
        }
        let mut seen = HashSet::new();
        all.retain(|c| seen.insert(c.clone()));
        all.truncate(k);
        all
    }

    /// Up to `k` contexts of `nt`, shortest first, one per place it can
    /// appear: every occurrence reached by climbing through unit productions,
    /// each wrapped in its host's shortest context.
    pub fn site_contexts(&self, nt: NtId, k: usize) -> Vec<Context> {
        let g = self.g;
        let occ = g.occurrences();
        let mut all: Vec<Context> = Vec::new();
        all.extend(self.ctx[nt.index()].clone());
        let mut seen_nt = HashSet::from([nt]);
        let mut stack = vec![nt];
        while let Some(x) = stack.pop() {
            if x == g.start() {
                all.push((Vec::new(), Vec::new()));
            }
            for &(b, alt, pos) in occ.get(&x).into_iter().flatten() {
                let rhs = &g.alternatives(b)[alt];
                if rhs.len() == 1 {
                    if seen_nt.insert(b) {
                        stack.push(b);
                    }
                    continue;
                }
                let Some((p, s)) = &self.ctx[b.index()] else { continue };
                let (Some(left), Some(right)) = (self.rhs_yield(&rhs[..pos]), self.rhs_yield(&rhs[pos + 1..])) else {
                    continue;
                };
                let mut pre = p.clone();
                pre.extend(left);
                let mut suf = right;
                suf.extend(s.iter().cloned());
                all.push((pre, suf));
            }
        }
        all.sort_by(|a, b| (a.0.len() + a.1.len()).cmp(&(b.0.len() + b.1.len())).then_with(|| a.cmp(b)));
        all.dedup();
        all.truncate(k);
        all
    }

    /// Contexts of a bubble: host contexts extended by the rest of its alternative.
    pub fn bubble_contexts(&self, b: &Bubble, k: usize) -> Vec<Context> {
        let rhs = &self.g.alternatives(b.lhs)[b.alt];
        let (Some(left), Some(right)) = (self.rhs_yield(&rhs[..b.start]), self.rhs_yield(&rhs[b.end..])) else {
            return Vec::new();
        };
        self.nt_contexts(b.lhs, k)
            .into_iter()
            .map(|(p, s)| {
                let mut pre = p;
                pre.extend(left.iter().cloned());
                let mut suf = right.clone();
                suf.extend(s);
                (pre, suf)
            })
            .collect()
    }

    pub fn bubble_yield(&self, b: &Bubble) -> Option<Vec<Tok>> {
        self.rhs_yield(b.symbols(self.g))
    }

    pub fn member(&self, seq: &[Tok]) -> bool {
        self.recognizer.accepts_tokens(seq)
    }
}

pub fn fill(ctx: &Context, mid: &[Tok]) -> Vec<Tok> {
    let mut v = Vec::with_capacity(ctx.0.len() + mid.len() + ctx.1.len());
    v.extend(ctx.0.iter().cloned());
    v.extend(mid.iter().cloned());
    v.extend(ctx.1.iter().cloned());
    v
}

pub(crate) fn oracle_accepts(table: &TokenTable, oracle: &Oracle, seq: &[Tok]) -> Result<bool, InferError> {
    Ok(oracle.check(&table.render(seq)?)?)
}

/// Precomputed contexts and yield of a bubble.
pub(crate) struct Prepared {
    pub bubble: Bubble,
    pub contexts: Vec<Context>,
    pub yields: Vec<Tok>,
}

impl Prepared {
    fn new(probe: &Probe, b: Bubble, k: usize) -> Option<Self> {
        let contexts = probe.bubble_contexts(&b, k);
        if contexts.is_empty() {
            return None;
        }
        Some(Self {
            bubble: b,
            contexts,
            yields: probe.bubble_yield(&b)?,
        })
    }
}

/// Every contiguous bracket-balanced span of the alternative.
pub fn spans(g: &Grammar, lhs: NtId, alt: usize, max_len: Option<usize>, origin: Origin) -> Vec<Bubble> {
    let rhs = &g.alternatives(lhs)[alt];
    let cap = max_len.unwrap_or(rhs.len()).min(rhs.len());
    let mut out = Vec::new();
    for len in 1..=cap {
        for start in 0..=rhs.len() - len {
            if bracket_balanced(&rhs[start..start + len]) {
                out.push(Bubble {
                    lhs,
                    alt,
                    start,
                    end: start + len,
                    origin,
                });
            }
        }
    }
    out
}

fn swap_ok(
    a: &Prepared,
    b: &Prepared,
    g: &Grammar,
    table: &TokenTable,
    oracle: &Oracle,
) -> Result<bool, InferError> {
    if a.bubble.same_site(&b.bubble) || a.bubble.symbols(g) == b.bubble.symbols(g) {
        return Ok(true);
    }
    for c in &a.contexts {
        if !oracle_accepts(table, oracle, &fill(c, &b.yields))? {
            return Ok(false);
        }
    }
    for c in &b.contexts {
        if !oracle_accepts(table, oracle, &fill(c, &a.yields))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the two bubbles can replace each other in all their contexts.
pub fn check_swap(
    b1: &Bubble,
    b2: &Bubble,
    probe: &Probe,
    table: &TokenTable,
    oracle: &Oracle,
    cfg: &InferConfig,
) -> Result<bool, InferError> {
    let (Some(a), Some(b)) = (
        Prepared::new(probe, *b1, cfg.swap_contexts),
        Prepared::new(probe, *b2, cfg.swap_contexts),
    ) else {
        return Ok(false);
    };
    swap_ok(&a, &b, probe.g, table, oracle)
}

/// One bubble set per balanced span of the production `(lhs, alt)`, each
/// holding every grammar bubble that swaps with it. Sets are scored.
pub fn bubbling(
    probe: &Probe,
    lhs: NtId,
    alt: usize,
    table: &TokenTable,
    oracle: &Oracle,
    cfg: &InferConfig,
) -> Result<Vec<BubbleSet>, InferError> {
    let g = probe.g;
    let k = cfg.swap_contexts;
    let firsts: Vec<Prepared> = spans(g, lhs, alt, cfg.max_bubble_len, Origin::NewProduction)
        .into_iter()
        .filter_map(|b| Prepared::new(probe, b, k))
        .collect();
    let mut pool: Vec<Prepared> = Vec::new();
    for (l, a, _) in g.productions() {
        let origin = if (l, a) == (lhs, alt) {
            Origin::NewProduction
        } else {
            Origin::ExistingGrammar
        };
        for b in spans(g, l, a, cfg.max_bubble_len, origin) {
            if let Some(p) = Prepared::new(probe, b, k) {
                pool.push(p);
            }
        }
    }
    let mut sets = Vec::with_capacity(firsts.len());
    for f in &firsts {
        let mut rest = Vec::new();
        for p in &pool {
            if p.bubble.same_site(&f.bubble) {
                continue;
            }
            if swap_ok(f, p, g, table, oracle)? {
                rest.push(p.bubble);
            }
        }
        let mut set = BubbleSet {
            first: f.bubble,
            rest,
            score: 0,
        };
        set.score = score_bubble_set(probe, &set, table, oracle)?;
        sets.push(set);
    }
    Ok(sets)
}

/// Swap samples of a set: the first bubble's context filled with each other
/// bubble, and each other bubble's context filled with the first.
pub fn swap_samples(
    probe: &Probe,
    s: &BubbleSet,
    table: &TokenTable,
    oracle: &Oracle,
) -> Result<Vec<GenSample>, InferError> {
    let g = probe.g;
    let Some(first) = Prepared::new(probe, s.first, 1) else {
        return Ok(Vec::new());
    };
    let mut seen: BTreeSet<Vec<Tok>> = BTreeSet::new();
    let mut out = Vec::new();
    for b in &s.rest {
        if b.symbols(g) == s.first.symbols(g) {
            continue;
        }
        let Some(other) = Prepared::new(probe, *b, 1) else { continue };
        for tokens in [fill(&first.contexts[0], &other.yields), fill(&other.contexts[0], &first.yields)] {
            if !seen.insert(tokens.clone()) {
                continue;
            }
            let in_old_grammar = probe.member(&tokens);
            let oracle = !in_old_grammar && oracle_accepts(table, oracle, &tokens)?;
            out.push(GenSample {
                tokens,
                source: (s.first, *b),
                in_old_grammar,
                oracle,
            });
        }
    }
    Ok(out)
}

/// Number of distinct swap samples that are new to the grammar and accepted.
pub fn score_bubble_set(
    probe: &Probe,
    s: &BubbleSet,
    table: &TokenTable,
    oracle: &Oracle,
) -> Result<usize, InferError> {
    Ok(swap_samples(probe, s, table, oracle)?
        .iter()
        .filter(|x| x.is_generalization())
        .count())
}
