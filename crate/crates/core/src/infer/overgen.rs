//! Over-generalization elimination for a scored bubble set.

use std::collections::{HashMap, HashSet};

use super::bubble::{fill, oracle_accepts, swap_samples, BubbleSet, Probe};
use super::merge::merge_raw;
use super::{InferConfig, InferError};
use crate::cfg::earley::Recognizer;
use crate::cfg::{Grammar, NtId, Symbol, Tok};
use crate::oracle::Oracle;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sampler::{Sampler, SamplerKind};
use crate::tokenizer::TokenTable;

/// Token-level LPP10 samples.
pub fn lpp_samples(g: &Grammar, n: usize, seed: u64) -> Vec<Vec<Tok>> {
    let Ok(sampler) = Sampler::new(g, SamplerKind::lpp10()) else {
        return Vec::new();
    };
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| sampler.sample_tokens(&mut rng)).collect()
}

/// Every one of `n` LPP10 samples of `g` renders to an accepted string.
pub fn check_overgen(
    g: &Grammar,
    table: &TokenTable,
    oracle: &Oracle,
    n: usize,
    seed: u64,
) -> Result<bool, InferError> {
    check_overgen_since(g, None, table, oracle, n, seed)
}

/// The grammar a candidate grew from.
pub struct Baseline {
    recognizer: Recognizer,
    keys: HashSet<(String, String)>,
}

impl Baseline {
    pub fn new(g: &Grammar) -> Self {
        Self {
            recognizer: Recognizer::new(g),
            keys: g.production_keys(),
        }
    }
}

/// Contexts per production used by [`coverage_probes`].
pub const COVERAGE_CONTEXTS: usize = 8;
/// Nesting depth of the edge variants.
pub const EDGE_DEPTH: usize = 3;
/// Edge variants kept per nonterminal.
pub const EDGE_VARIANTS: usize = 12;
/// Variants per child when two children vary together.
pub const PAIR_VARIANTS: usize = 6;

/// Yields of every nonterminal, one per alternative, with the first and last
/// symbol of that alternative in turn expanded through its own variants.
fn edge_variants(g: &Grammar, probe: &Probe) -> HashMap<NtId, Vec<Vec<Tok>>> {
    let mut cur: HashMap<NtId, Vec<Vec<Tok>>> = HashMap::new();
    for _ in 0..=EDGE_DEPTH {
        let mut next: HashMap<NtId, Vec<Vec<Tok>>> = HashMap::new();
        for nt in g.nonterminals() {
            let mut vs: Vec<Vec<Tok>> = Vec::new();
            for rhs in g.alternatives(nt) {
                let Some(base) = probe.rhs_yield(rhs) else { continue };
                vs.push(base);
                for i in [0, rhs.len().saturating_sub(1)] {
                    let Some(child) = rhs.get(i).and_then(Symbol::as_nt) else { continue };
                    let (Some(l), Some(r)) = (probe.rhs_yield(&rhs[..i]), probe.rhs_yield(&rhs[i + 1..])) else {
                        continue;
                    };
                    for v in cur.get(&child).into_iter().flatten() {
                        let mut m = l.clone();
                        m.extend(v.iter().cloned());
                        m.extend(r.iter().cloned());
                        vs.push(m);
                    }
                }
            }
            vs.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            vs.dedup();
            vs.truncate(EDGE_VARIANTS);
            next.insert(nt, vs);
        }
        cur = next;
    }
    cur
}

/// Sentences exercising every production of `g` that `old` lacks: each of
/// its host's contexts, with each child nonterminal in turn, and each pair
/// of them, replaced by edge variants.
pub fn coverage_probes(g: &Grammar, old: &Baseline) -> Vec<Vec<Tok>> {
    let probe = Probe::new(g);
    let fresh: Vec<_> = g
        .productions()
        .filter(|(lhs, _, rhs)| !old.keys.contains(&(g.name(*lhs).to_string(), g.rhs_display(rhs))))
        .collect();
    if fresh.is_empty() {
        return Vec::new();
    }
    let variants = edge_variants(g, &probe);
    let mut out: Vec<Vec<Tok>> = Vec::new();
    let mut seen: HashSet<Vec<Tok>> = HashSet::new();
    for (lhs, _, rhs) in fresh {
        let contexts = probe.site_contexts(lhs, COVERAGE_CONTEXTS);
        let Some(base) = rhs.iter().map(|s| probe.rhs_yield(std::slice::from_ref(s))).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let kids: Vec<(usize, &Vec<Vec<Tok>>)> = rhs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| Some((i, variants.get(&s.as_nt()?)?)))
            .collect();
        let splice = |parts: &[(usize, &Vec<Tok>)]| -> Vec<Tok> {
            let mut m = Vec::new();
            for (i, y) in base.iter().enumerate() {
                match parts.iter().find(|(j, _)| *j == i) {
                    Some((_, v)) => m.extend(v.iter().cloned()),
                    None => m.extend(y.iter().cloned()),
                }
            }
            m
        };
        let mut middles: Vec<Vec<Tok>> = vec![splice(&[])];
        for &(i, vs) in &kids {
            for v in vs {
                middles.push(splice(&[(i, v)]));
            }
        }
        for (a, &(i, vi)) in kids.iter().enumerate() {
            for &(j, vj) in &kids[a + 1..] {
                for x in vi.iter().take(PAIR_VARIANTS) {
                    for y in vj.iter().take(PAIR_VARIANTS) {
                        middles.push(splice(&[(i, x), (j, y)]));
                    }
                }
            }
        }
        for c in &contexts {
            for m in &middles {
                let s = fill(c, m);
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Like [`check_overgen`], plus [`coverage_probes`] when `old` is given; a
/// rejected sentence that `old` already derives is not held against `g`.
pub fn check_overgen_since(
    g: &Grammar,
    old: Option<&Baseline>,
    table: &TokenTable,
    oracle: &Oracle,
    n: usize,
    seed: u64,
) -> Result<bool, InferError> {
    let mut candidates = match old {
        Some(b) => coverage_probes(g, b),
        None => Vec::new(),
    };
    candidates.extend(lpp_samples(g, n, seed));
    for s in candidates {
        if !oracle_accepts(table, oracle, &s)? && !old.is_some_and(|b| b.recognizer.accepts_tokens(&s)) {
            log::debug!("over-generalization: {:?}", table.render(&s)?);
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shrinks a bubble set to the largest part that does not over-generalize.
pub struct Eliminator<'a> {
    pub g: &'a Grammar,
    pub table: &'a TokenTable,
    pub oracle: &'a Oracle,
    pub cfg: &'a InferConfig,
    /// sub-seed of this call
    pub seed: u64,
    pub old: Baseline,
}

impl Eliminator<'_> {
    fn merged(&self, set: &BubbleSet, pick: &[usize]) -> Grammar {
        let mut bubbles = vec![set.first];
        bubbles.extend(pick.iter().map(|&i| set.rest[i]));
        merge_raw(self.g, &bubbles).unwrap_or_else(|| self.g.clone())
    }

    /// Derivable samples out of `samples`.
    fn gen_count(&self, set: &BubbleSet, pick: &[usize], samples: &[Vec<Tok>]) -> usize {
        let r = Recognizer::new(&self.merged(set, pick));
        samples.iter().filter(|s| r.accepts_tokens(s)).count()
    }

    fn passes(&self, set: &BubbleSet, pick: &[usize]) -> Result<bool, InferError> {
        check_overgen_since(
            &self.merged(set, pick),
            Some(&self.old),
            self.table,
            self.oracle,
            self.cfg.samples_for_overgen,
            derive_seed(self.seed, &[1]),
        )
    }

    /// The generalization samples the full merge is meant to cover: its own
    /// LPP10 samples plus the swap samples, kept if new and accepted.
    pub fn target_samples(&self, probe: &Probe, set: &BubbleSet) -> Result<Vec<Vec<Tok>>, InferError> {
        let full: Vec<usize> = (0..set.rest.len()).collect();
        let merged = self.merged(set, &full);
        let mut out: Vec<Vec<Tok>> = Vec::new();
        for s in swap_samples(probe, set, self.table, self.oracle)? {
            if s.is_generalization() && !out.contains(&s.tokens) {
                out.push(s.tokens);
            }
        }
        for s in lpp_samples(&merged, self.cfg.samples_for_overgen, derive_seed(self.seed, &[0])) {
            if out.contains(&s) || probe.member(&s) {
                continue;
            }
            if oracle_accepts(self.table, self.oracle, &s)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Indices into `set.rest` of the chosen bubbles, with the number of
    /// target samples they cover; `None` when nothing safe covers any.
    pub fn run(&self, probe: &Probe, set: &BubbleSet) -> Result<Option<(Vec<usize>, usize)>, InferError> {
        if set.rest.is_empty() {
            return Ok(None);
        }
        let samples = self.target_samples(probe, set)?;
        if samples.is_empty() {
            return Ok(None);
        }
        let total = samples.len();
        let mut keep: Vec<usize> = (0..set.rest.len()).collect();
        let mut i = 0;
        while i < keep.len() {
            let mut without = keep.clone();
            without.remove(i);
            if self.gen_count(set, &without, &samples) == total {
                keep = without;
            } else {
                i += 1;
            }
        }
        let best = if keep.len() <= self.cfg.overgen_subset_cap {
            self.exhaustive(set, &keep, &samples)?
        } else {
            self.greedy(set, &keep, &samples)?
        };
        Ok(best.filter(|(_, c)| *c > 0))
    }

    fn exhaustive(
        &self,
        set: &BubbleSet,
        keep: &[usize],
        samples: &[Vec<Tok>],
    ) -> Result<Option<(Vec<usize>, usize)>, InferError> {
        let mut cands: Vec<(usize, Vec<usize>)> = Vec::with_capacity(1 << keep.len());
        for mask in 0u32..(1 << keep.len()) {
            let pick: Vec<usize> = (0..keep.len()).filter(|b| mask & (1 << b) != 0).map(|b| keep[b]).collect();
            let c = self.gen_count(set, &pick, samples);
            if c > 0 {
                cands.push((c, pick));
            }
        }
        cands.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.len().cmp(&b.1.len())).then(a.1.cmp(&b.1)));
        for (c, pick) in cands {
            if self.passes(set, &pick)? {
                return Ok(Some((pick, c)));
            }
        }
        Ok(None)
    }

    fn greedy(
        &self,
        set: &BubbleSet,
        keep: &[usize],
        samples: &[Vec<Tok>],
    ) -> Result<Option<(Vec<usize>, usize)>, InferError> {
        let mut pick: Vec<usize> = Vec::new();
        let mut score = 0;
        loop {
            let mut best: Option<(usize, usize)> = None;
            for &k in keep {
                if pick.contains(&k) {
                    continue;
                }
                let mut trial = pick.clone();
                trial.push(k);
                trial.sort_unstable();
                let c = self.gen_count(set, &trial, samples);
                if c > score && best.is_none_or(|(bc, _)| c > bc) && self.passes(set, &trial)? {
                    best = Some((c, k));
                }
            }
            match best {
                Some((c, k)) => {
                    pick.push(k);
                    pick.sort_unstable();
                    score = c;
                }
                None => break,
            }
        }
        Ok((score > 0).then_some((pick, score)))
    }
}
