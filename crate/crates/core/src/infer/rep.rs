//! Repetition rules and terminal expansion, run after the main loop.

use std::collections::HashMap;

use super::bubble::{fill, oracle_accepts, Context, Probe};
use super::overgen::{check_overgen_since, Baseline};
use super::{InferConfig, InferError};
use crate::cfg::simplify::simplify_in_place;
use crate::cfg::{Grammar, NtId, Symbol, Tok};
use crate::oracle::Oracle;
use crate::rng::derive_seed;
use crate::tokenizer::TokenTable;

/// Contexts probed per nonterminal.
pub const REP_CONTEXTS: usize = 3;

fn repeated(w: &[Tok], times: usize) -> Vec<Tok> {
    std::iter::repeat_n(w.iter().cloned(), times).flatten().collect()
}

/// Every context, with `mid(times)` in the hole, is accepted for every count.
fn all_accepted(
    contexts: &[Context],
    mid: impl Fn(usize) -> Vec<Tok>,
    table: &TokenTable,
    oracle: &Oracle,
    cfg: &InferConfig,
) -> Result<bool, InferError> {
    for c in contexts {
        for &times in &cfg.rep_repeat_counts {
            if !oracle_accepts(table, oracle, &fill(c, &mid(times)))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn has_rep(g: &Grammar, n: NtId) -> bool {
    g.alternatives(n).contains(&vec![Symbol::Nt(n), Symbol::Nt(n)])
}

/// Adds `n → n n` for every non-start nonterminal whose witness yield may be
/// repeated in its contexts. A nonterminal that fails somewhere is retried
/// per occurrence: an occurrence whose host contexts all accept the
/// repetition is replaced by a fresh `r → n | r r`. Returns the grammar and
/// the number of rules added.
pub fn generalize_rep(
    g: &Grammar,
    table: &TokenTable,
    oracle: &Oracle,
    cfg: &InferConfig,
) -> Result<(Grammar, usize), InferError> {
    let mut g = g.clone();
    let mut added = 0;
    let names: Vec<String> = g.nonterminals().map(|n| g.name(n).to_string()).collect();
    let mut failed: Vec<String> = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let Some(n) = g.nt_by_name(name) else { continue };
        if n == g.start() || has_rep(&g, n) {
            continue;
        }
        let probe = Probe::new(&g);
        let Some(w) = probe.nt_yield(n) else { continue };
        if w.is_empty() {
            continue;
        }
        let contexts = probe.nt_contexts(n, REP_CONTEXTS);
        if contexts.is_empty() || !all_accepted(&contexts, |t| repeated(&w, t), table, oracle, cfg)? {
            failed.push(name.clone());
            continue;
        }
        let mut trial = g.clone();
        trial.add_production(n, vec![Symbol::Nt(n), Symbol::Nt(n)]);
        let seed = derive_seed(cfg.seed, &[0x7265_70, k as u64]);
        let old = Baseline::new(&g);
        if check_overgen_since(&trial, Some(&old), table, oracle, cfg.samples_for_overgen, seed)? {
            log::debug!("repetition rule for {name}");
            g = trial;
            added += 1;
        } else {
            failed.push(name.clone());
        }
    }
    let mut wrappers: HashMap<String, NtId> = HashMap::new();
    let sites: Vec<(String, String, usize)> = g
        .productions()
        .flat_map(|(lhs, _, rhs)| {
            let host = (g.name(lhs).to_string(), g.rhs_display(rhs));
            rhs.iter().enumerate().filter_map(move |(i, s)| s.as_nt().map(|_| (host.0.clone(), host.1.clone(), i)))
        })
        .collect();
    for (j, (host, rhs_text, i)) in sites.into_iter().enumerate() {
        let Some(a) = g.nt_by_name(&host) else { continue };
        let Some(alt) = g.alternatives(a).iter().position(|r| g.rhs_display(r) == rhs_text) else {
            continue;
        };
        let rhs = g.alternatives(a)[alt].clone();
        let Some(n) = rhs[i].as_nt() else { continue };
        if !failed.iter().any(|f| f == g.name(n)) {
            continue;
        }
        let probe = Probe::new(&g);
        let (Some(w), Some(left), Some(right)) = (
            probe.nt_yield(n),
            probe.rhs_yield(&rhs[..i]),
            probe.rhs_yield(&rhs[i + 1..]),
        ) else {
            continue;
        };
        if w.is_empty() {
            continue;
        }
        let contexts = probe.nt_contexts(a, REP_CONTEXTS);
        let mid = |t: usize| {
            let mut m = left.clone();
            m.extend(repeated(&w, t));
            m.extend(right.iter().cloned());
            m
        };
        if contexts.is_empty() || !all_accepted(&contexts, mid, table, oracle, cfg)? {
            continue;
        }
        let mut trial = g.clone();
        let r = match wrappers.get(g.name(n)) {
            Some(&r) => r,
            None => {
                let r = trial.fresh_nonterminal();
                trial.add_production(r, vec![Symbol::Nt(n)]);
                trial.add_production(r, vec![Symbol::Nt(r), Symbol::Nt(r)]);
                r
            }
        };
        trial.alternatives_mut(a)[alt][i] = Symbol::Nt(r);
        let seed = derive_seed(cfg.seed, &[0x7265_70, 0x6f63_63, j as u64]);
        let old = Baseline::new(&g);
        if check_overgen_since(&trial, Some(&old), table, oracle, cfg.samples_for_overgen, seed)? {
            log::debug!("repetition of {} inside {host}", g.name(n));
            if !wrappers.contains_key(g.name(n)) {
                wrappers.insert(g.name(n).to_string(), r);
                added += 1;
            }
            g = trial;
        }
    }
    if cfg.simplify {
        simplify_in_place(&mut g);
    }
    Ok((g, added))
}

/// Swaps the literal token definitions for their generalized forms.
pub fn expand_terminals(g: &Grammar, table: &TokenTable) -> Grammar {
    let mut out = g.clone();
    out.set_tokens(table.expanded_defs());
    out
}
