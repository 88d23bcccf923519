//! Precision, recall and F1 of a grammar against an oracle and golden programs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfg::earley::Recognizer;
use crate::cfg::{Grammar, GrammarError, GrammarMetrics};
use crate::oracle::{Oracle, OracleError, OracleStats};
use crate::rng::rng_from_seed;
use crate::sampler::{Sampler, SamplerSpec};

/// An exact ratio `num / den`; `value` is its floating-point reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
    pub value: f64,
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Fraction {
    /// `num / den`, reduced; a zero denominator reads as 0.
    pub fn new(num: u64, den: u64) -> Self {
        Self::from_wide(num as u128, den as u128)
    }

    fn from_wide(num: u128, den: u128) -> Self {
        if den == 0 || num == 0 {
            return Self {
                num: 0,
                den: 1,
                value: 0.0,
            };
        }
        let d = gcd(num, den);
        let (mut n, mut m) = (num / d, den / d);
        while m > u64::MAX as u128 || n > u64::MAX as u128 {
            n >>= 1;
            m >>= 1;
        }
        Self {
            num: n as u64,
            den: m as u64,
            value: n as f64 / m as f64,
        }
    }

    /// Harmonic mean `2pr / (p + r)`, 0 when both are 0.
    pub fn f1(p: Fraction, r: Fraction) -> Fraction {
        let (a, n) = (p.num as u128, p.den as u128);
        let (b, m) = (r.num as u128, r.den as u128);
        Self::from_wide(2 * a * b, a * m + b * n)
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("oracle failed after {accepted} of {drawn} samples were accepted: {source}")]
    Oracle {
        accepted: u64,
        drawn: u64,
        #[source]
        source: OracleError,
    },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("golden set is empty")]
    EmptyGolden,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: Fraction,
    pub recall: Fraction,
    pub f1: Fraction,
    pub metrics: GrammarMetrics,
    pub sampler: SamplerSpec,
    pub samples_drawn: u64,
    pub samples_accepted: u64,
    pub golden_total: u64,
    pub golden_parsed: u64,
    /// golden programs the grammar does not derive
    pub misses: Vec<String>,
    pub oracle: OracleStats,
}

/// Share of `n` sampled strings the oracle accepts; duplicates count per draw.
pub fn precision(grammar: &Grammar, oracle: &Oracle, spec: &SamplerSpec, n: usize) -> Result<Fraction, EvalError> {
    Ok(Fraction::new(accepted_samples(grammar, oracle, spec, n)?, n as u64))
}

fn accepted_samples(grammar: &Grammar, oracle: &Oracle, spec: &SamplerSpec, n: usize) -> Result<u64, EvalError> {
    let sampler = Sampler::new(grammar, spec.kind.clone())?;
    let mut rng = rng_from_seed(spec.seed);
    let mut accepted = 0u64;
    for drawn in 0..n as u64 {
        let s = sampler.sample_string(&mut rng);
        match oracle.check(&s) {
            Ok(true) => accepted += 1,
            Ok(false) => log::debug!("sample rejected: {s:?}"),
            Err(source) => {
                return Err(EvalError::Oracle {
                    accepted,
                    drawn,
                    source,
                })
            }
        }
    }
    Ok(accepted)
}

/// Share of golden programs the grammar derives, and the ones it misses.
pub fn recall(grammar: &Grammar, golden: &[String]) -> Result<(Fraction, Vec<String>), EvalError> {
    if golden.is_empty() {
        return Err(EvalError::EmptyGolden);
    }
    let r = Recognizer::new(grammar);
    let misses: Vec<String> = golden.iter().filter(|x| !r.accepts_str(x)).cloned().collect();
    let parsed = (golden.len() - misses.len()) as u64;
    Ok((Fraction::new(parsed, golden.len() as u64), misses))
}

pub fn report(
    grammar: &Grammar,
    oracle: &Oracle,
    golden: &[String],
    spec: &SamplerSpec,
    n: usize,
) -> Result<EvalReport, EvalError> {
    let accepted = accepted_samples(grammar, oracle, spec, n)?;
    let p = Fraction::new(accepted, n as u64);
    let (r, misses) = recall(grammar, golden)?;
    let parsed = golden.len() as u64 - misses.len() as u64;
    Ok(EvalReport {
        precision: p,
        recall: r,
        f1: Fraction::f1(p, r),
        metrics: grammar.metrics(),
        sampler: spec.clone(),
        samples_drawn: n as u64,
        samples_accepted: accepted,
        golden_total: golden.len() as u64,
        golden_parsed: parsed,
        misses,
        oracle: oracle.stats(),
    })
}
