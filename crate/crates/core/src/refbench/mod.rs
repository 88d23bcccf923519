//! Bundled reference languages, corpus generation and the benchmark runner.

mod bench;
mod languages;

use std::collections::HashSet;

pub use bench::{run_benchmark, run_seed, Aggregate, BenchConfig, BenchOutcome, MeanSd, SeedReport, SeedRun};
pub use languages::{language, Language, LANGUAGES};

use crate::rng::{derive_seed, rng_from_seed};
use crate::sampler::{Sampler, SamplerKind};

/// `count` distinct LPP10 samples of the reference grammar (fewer only if
/// the language is too small).
pub fn generate_golden(lang: &Language, count: usize, seed: u64) -> Vec<String> {
    let g = lang.grammar();
    let sampler = Sampler::new(&g, SamplerKind::lpp10()).expect("bundled grammars are productive");
    let mut rng = rng_from_seed(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 50 + 100 {
        attempts += 1;
        let s = sampler.sample_string(&mut rng);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Seed for the training corpus of a benchmark run.
pub fn train_seed(seed: u64) -> u64 {
    derive_seed(seed, &[0x7472_6169_6e])
}

/// Seed for the held-out golden corpus of a benchmark run.
pub fn golden_seed(seed: u64) -> u64 {
    derive_seed(seed, &[0x676f_6c64])
}
