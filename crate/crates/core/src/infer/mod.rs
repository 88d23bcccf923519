//! Incremental grammar inference over a decomposed corpus.

pub mod bubble;
pub mod merge;
pub mod overgen;
pub mod rep;

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bubble::{bubbling, check_swap, score_bubble_set, Bubble, BubbleSet, GenSample, Origin, Probe};
pub use merge::merge_bubbles;
pub use overgen::{check_overgen, check_overgen_since, coverage_probes, Baseline, Eliminator};
pub use rep::{expand_terminals, generalize_rep};

use crate::cfg::simplify::simplify_in_place;
use crate::cfg::{Grammar, GrammarError, NtId, Symbol};
use crate::decompose::DecomposedCorpus;
use crate::oracle::{Oracle, OracleError, OracleStats};
use crate::rng::derive_seed;
use crate::tokenizer::{TokenTable, TokenizeError};

#[derive(Debug, Error)]
pub enum InferError {
    #[error("nothing to learn from: the decomposed corpus is empty")]
    EmptyCorpus,
    #[error("invalid inference config: {0}")]
    Config(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Tokenize(TokenizeError),
}

impl From<TokenizeError> for InferError {
    fn from(e: TokenizeError) -> Self {
        match e {
            TokenizeError::Oracle(o) => InferError::Oracle(o),
            other => InferError::Tokenize(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferConfig {
    pub seed: u64,
    pub samples_for_overgen: usize,
    pub overgen_subset_cap: usize,
    pub swap_contexts: usize,
    pub rep_repeat_counts: Vec<usize>,
    /// longest bubble considered; unset means whole right-hand sides
    pub max_bubble_len: Option<usize>,
    pub simplify: bool,
    /// upper bound on generalization steps
    pub max_steps: usize,
}

impl Default for InferConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples_for_overgen: 50,
            overgen_subset_cap: 10,
            swap_contexts: 1,
            rep_repeat_counts: vec![2, 3],
            max_bubble_len: None,
            simplify: true,
            max_steps: 10_000,
        }
    }
}

impl InferConfig {
    pub fn validate(&self) -> Result<(), InferError> {
        let counts = [
            ("samples_for_overgen", self.samples_for_overgen),
            ("overgen_subset_cap", self.overgen_subset_cap),
            ("swap_contexts", self.swap_contexts),
            ("max_steps", self.max_steps),
        ];
        for (k, v) in counts {
            if v == 0 {
                return Err(InferError::Config(format!("{k} must be at least 1")));
            }
        }
        if self.overgen_subset_cap > 20 {
            return Err(InferError::Config("overgen_subset_cap must be at most 20".into()));
        }
        if self.rep_repeat_counts.is_empty() || self.rep_repeat_counts.contains(&0) {
            return Err(InferError::Config("rep_repeat_counts must be non-empty and positive".into()));
        }
        if self.max_bubble_len == Some(0) {
            return Err(InferError::Config("max_bubble_len must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InferReport {
    pub sequences: usize,
    /// sequences already derivable when popped
    pub skipped: usize,
    pub steps: usize,
    pub merges_accepted: usize,
    pub merges_rejected: usize,
    pub rep_rules: usize,
    pub samples_for_overgen: usize,
    pub oracle: OracleStats,
}

#[derive(Clone, Debug)]
pub struct InferOutput {
    pub grammar: Grammar,
    pub report: InferReport,
}

type Key = (String, String);

fn key_of(g: &Grammar, lhs: NtId, rhs: &[Symbol]) -> Key {
    (g.name(lhs).to_string(), g.rhs_display(rhs))
}

fn find(g: &Grammar, key: &Key) -> Option<(NtId, usize)> {
    let nt = g.nt_by_name(&key.0)?;
    let alt = g.alternatives(nt).iter().position(|rhs| g.rhs_display(rhs) == key.1)?;
    Some((nt, alt))
}

/// Productions of `g` in registry order.
fn keys_in_order(g: &Grammar) -> Vec<Key> {
    g.productions().map(|(l, _, r)| key_of(g, l, r)).collect()
}

struct Engine<'a> {
    table: &'a TokenTable,
    oracle: &'a Oracle,
    cfg: &'a InferConfig,
    g: Grammar,
    pending: VecDeque<Key>,
    report: InferReport,
}

impl Engine<'_> {
    fn enqueue_new(&mut self, before: &HashSet<Key>) {
        for k in keys_in_order(&self.g) {
            if !before.contains(&k) && !self.pending.contains(&k) {
                self.pending.push_back(k);
            }
        }
    }

    fn step(&mut self, key: Key) -> Result<(), InferError> {
        let Some((lhs, alt)) = find(&self.g, &key) else {
            return Ok(());
        };
        self.report.steps += 1;
        let step = self.report.steps as u64;
        let probe = Probe::new(&self.g);
        let sets = bubbling(&probe, lhs, alt, self.table, self.oracle, self.cfg)?;
        let Some(best) = sets
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.score.cmp(&b.1.score).then(b.0.cmp(&a.0)))
            .map(|(_, s)| s.clone())
        else {
            return Ok(());
        };
        if best.score == 0 {
            return Ok(());
        }
        let elim = Eliminator {
            g: &self.g,
            table: self.table,
            oracle: self.oracle,
            cfg: self.cfg,
            seed: derive_seed(self.cfg.seed, &[step]),
            old: Baseline::new(&self.g),
        };
        let Some((pick, covered)) = elim.run(&probe, &best)? else {
            log::debug!("step {step}: set of {} rejected", self.g.rhs_display(best.first.symbols(&self.g)));
            self.report.merges_rejected += 1;
            return Ok(());
        };
        let mut bubbles = vec![best.first];
        bubbles.extend(pick.iter().map(|&i| best.rest[i]));
        let before: HashSet<Key> = keys_in_order(&self.g).into_iter().collect();
        let mut merged = match merge::merge_raw(&self.g, &bubbles) {
            Some(m) => m,
            None => {
                self.report.merges_rejected += 1;
                return Ok(());
            }
        };
        if self.cfg.simplify {
            simplify_in_place(&mut merged);
        }
        log::debug!(
            "step {step}: merged {} bubbles of {} covering {covered} samples",
            bubbles.len(),
            self.g.rhs_display(best.first.symbols(&self.g))
        );
        self.g = merged;
        log::trace!("grammar after step {step}:\n{}", self.g);
        self.report.merges_accepted += 1;
        self.enqueue_new(&before);
        Ok(())
    }

    fn generalize_pending(&mut self) -> Result<(), InferError> {
        while let Some(key) = self.pending.pop_front() {
            if self.report.steps >= self.cfg.max_steps {
                log::warn!("step limit {} reached", self.cfg.max_steps);
                self.pending.clear();
                break;
            }
            self.step(key)?;
        }
        Ok(())
    }
}

/// Learns a grammar from the decomposed corpus, shortest sequences first.
pub fn infer_grammar(
    dec: &DecomposedCorpus,
    table: &TokenTable,
    oracle: &Oracle,
    cfg: &InferConfig,
) -> Result<InferOutput, InferError> {
    cfg.validate()?;
    if dec.sequences.is_empty() {
        return Err(InferError::EmptyCorpus);
    }
    let mut order: Vec<&Vec<_>> = dec.sequences.iter().collect();
    order.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let mut e = Engine {
        table,
        oracle,
        cfg,
        g: Grammar::with_tokens(table.literal_defs(), table.whitespace_sensitive),
        pending: VecDeque::new(),
        report: InferReport {
            sequences: dec.sequences.len(),
            samples_for_overgen: cfg.samples_for_overgen,
            ..InferReport::default()
        },
    };
    for seq in order {
        if !e.g.alternatives(e.g.start()).is_empty() && e.g.accepts_tokens(seq) {
            e.report.skipped += 1;
            continue;
        }
        let rhs = e.g.sequence_to_rhs(seq)?;
        let before: HashSet<Key> = keys_in_order(&e.g).into_iter().collect();
        let start = e.g.start();
        e.g.add_production(start, rhs);
        e.enqueue_new(&before);
        e.generalize_pending()?;
    }
    let (g, rep_rules) = generalize_rep(&e.g, table, oracle, cfg)?;
    e.report.rep_rules = rep_rules;
    let grammar = expand_terminals(&g, table);
    e.report.oracle = oracle.stats();
    Ok(InferOutput {
        grammar,
        report: e.report,
    })
}
