use serde::{Deserialize, Serialize};

use super::{generate_golden, golden_seed, train_seed, Language};
use crate::cfg::Grammar;
use crate::decompose::decompose;
use crate::eval::{report, EvalReport};
use crate::infer::{infer_grammar, InferConfig, InferReport};
use crate::oracle::Oracle;
use crate::rng::derive_seed;
use crate::sampler::{SamplerKind, SamplerSpec};
use crate::tokenizer::tokenize;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub infer: InferConfig,
    pub golden_size: usize,
    pub eval_samples: usize,
    /// worker threads; seeds are spread over them
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            infer: InferConfig::default(),
            golden_size: 500,
            eval_samples: 500,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub language: String,
    pub seed: u64,
    pub train_size: usize,
    pub train_avg_len: f64,
    pub sequences: usize,
    pub infer: InferReport,
    pub eval: EvalReport,
}

#[derive(Clone, Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub outcome: Result<(Grammar, SeedReport), String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// population standard deviation
    pub sd: f64,
}

impl MeanSd {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self { mean, sd: var.sqrt() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub language: String,
    pub runs: usize,
    pub failures: usize,
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub f1: MeanSd,
    pub size_sum: MeanSd,
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub runs: Vec<SeedRun>,
    pub aggregate: Aggregate,
}

impl BenchOutcome {
    pub fn reports(&self) -> impl Iterator<Item = &SeedReport> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().ok().map(|(_, rep)| rep))
    }

    /// One line per successful seed, with a header.
    pub fn csv(&self) -> String {
        let mut out = String::from("language,seed,p,r,f1,NT,A,S,queries,oracle_time\n");
        for r in self.reports() {
            let m = &r.eval.metrics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.3}\n",
                r.language,
                r.seed,
                r.eval.precision.value,
                r.eval.recall.value,
                r.eval.f1.value,
                m.nt_count,
                m.alternatives,
                m.size_sum,
                r.infer.oracle.queries,
                r.infer.oracle.oracle_time
            ));
        }
        out
    }
}

impl SeedReport {
    /// The report with wall-clock fields zeroed, for byte-stable output.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.infer.oracle.oracle_time = 0.0;
        r.eval.oracle.oracle_time = 0.0;
        r
    }
}

/// Train, infer and evaluate one seed against the language's builtin oracle.
pub fn run_seed(lang: &Language, seed: u64, cfg: &BenchConfig) -> Result<(Grammar, SeedReport), String> {
    let oracle = Oracle::builtin_from_grammar(&lang.grammar()).map_err(|e| e.to_string())?;
    let train = generate_golden(lang, lang.train_size, train_seed(seed));
    let golden = generate_golden(lang, cfg.golden_size, golden_seed(seed));
    let corpus = tokenize(&train, &oracle).map_err(|e| format!("tokenize: {e}"))?;
    let dec = decompose(&corpus, &oracle).map_err(|e| format!("decompose: {e}"))?;
    let icfg = InferConfig {
        seed,
        ..cfg.infer.clone()
    };
    let out = infer_grammar(&dec, &corpus.table, &oracle, &icfg).map_err(|e| format!("infer: {e}"))?;
    let spec = SamplerSpec {
        kind: SamplerKind::lpp10(),
        seed: derive_seed(seed, &[0x6576_616c]),
    };
    let eval = report(&out.grammar, &oracle, &golden, &spec, cfg.eval_samples).map_err(|e| format!("eval: {e}"))?;
    let avg = train.iter().map(|s| s.chars().count()).sum::<usize>() as f64 / train.len().max(1) as f64;
    Ok((
        out.grammar,
        SeedReport {
            language: lang.name.to_string(),
            seed,
            train_size: train.len(),
            train_avg_len: avg,
            sequences: dec.sequences.len(),
            infer: out.report,
            eval,
        },
    ))
}

/// Runs every seed, in input order, and aggregates the successes.
pub fn run_benchmark(lang: &Language, seeds: &[u64], cfg: &BenchConfig) -> BenchOutcome {
    let jobs = cfg.jobs.clamp(1, seeds.len().max(1));
    let mut runs: Vec<Option<SeedRun>> = vec![None; seeds.len()];
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                s.spawn(move || {
                    (w..seeds.len())
                        .step_by(jobs)
                        .map(|i| {
                            let outcome = run_seed(lang, seeds[i], cfg);
                            if let Err(e) = &outcome {
                                log::warn!("{} seed {}: {e}", lang.name, seeds[i]);
                            }
                            (i, SeedRun { seed: seeds[i], outcome })
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("benchmark worker panicked") {
                runs[i] = Some(r);
            }
        }
    });
    let runs: Vec<SeedRun> = runs.into_iter().flatten().collect();
    let ok: Vec<&SeedReport> = runs.iter().filter_map(|r| r.outcome.as_ref().ok().map(|(_, x)| x)).collect();
    let col = |f: &dyn Fn(&SeedReport) -> f64| MeanSd::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    let aggregate = Aggregate {
        language: lang.name.to_string(),
        runs: runs.len(),
        failures: runs.len() - ok.len(),
        precision: col(&|r| r.eval.precision.value),
        recall: col(&|r| r.eval.recall.value),
        f1: col(&|r| r.eval.f1.value),
        size_sum: col(&|r| r.eval.metrics.size_sum as f64),
    };
    BenchOutcome { runs, aggregate }
}
