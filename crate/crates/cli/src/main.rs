mod files;
mod logging;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use gramforge::cfg::format::{parse, to_text};
use gramforge::decompose::{decompose, DecomposedCorpus};
use gramforge::eval::report;
use gramforge::infer::{infer_grammar, InferConfig};
use gramforge::oracle::{escape_line, timeout_from_env, Oracle};
use gramforge::refbench::{generate_golden, language, run_benchmark, BenchConfig, LANGUAGES};
use gramforge::sampler::{sample_n, SamplerKind, SamplerSpec};
use gramforge::tokenizer::{tokenize, TokenTable, TokenizedCorpus};
use gramforge::Grammar;

use files::{read_examples, write_atomic, write_json};

/// Learn a context-free grammar from example programs and a parser oracle.
#[derive(Parser, Debug)]
#[command(name = "gramforge", version, about)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// root of every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// `builtin:NAME` or a command that reads a candidate on stdin
    #[arg(long, global = true)]
    oracle: Option<String>,
    /// keep one oracle process alive and talk to it line by line
    #[arg(long, global = true)]
    oracle_persistent: bool,
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    /// one JSON object per log line on stderr
    #[arg(long, global = true)]
    json_logs: bool,
    /// worker threads for commands that can use them
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Split training programs into token sequences and a token table.
    Tokenize {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce tokenized programs to small valid fragments.
    Decompose {
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole pipeline and write the learned grammar.
    Infer {
        /// directory of training programs, one per file
        #[arg(long, required_unless_present = "decomposed", conflicts_with = "decomposed")]
        train: Option<PathBuf>,
        /// output of `decompose`, instead of --train
        #[arg(long)]
        decomposed: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// TOML file with inference settings
        #[arg(long)]
        config: Option<PathBuf>,
        /// run report; defaults to the grammar path with a .report.json suffix
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw random sentences from a grammar.
    Sample {
        #[arg(long)]
        grammar: PathBuf,
        /// lpp10 (any lppN), arvada, treevada or depthN
        #[arg(long, default_value = "lpp10")]
        sampler: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision, recall and F1 of a grammar.
    Eval {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        golden: PathBuf,
        #[arg(long, default_value = "lpp10")]
        sampler: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Benchmark a bundled language over consecutive seeds.
    Bench {
        /// a bundled language, or `all`
        #[arg(long)]
        lang: String,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        #[arg(long)]
        out: PathBuf,
        /// TOML file with inference settings
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write programs sampled from a bundled reference grammar, one per file.
    Golden {
        #[arg(long)]
        lang: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// What `decompose` writes: the fragments plus the table needed to read them.
#[derive(Serialize, Deserialize)]
struct DecomposedFile {
    table: TokenTable,
    #[serde(flatten)]
    corpus: DecomposedCorpus,
}

/// A usage mistake found after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

impl Global {
    fn oracle(&self) -> Result<Oracle> {
        let Some(spec) = self.oracle.as_deref() else {
            return Err(usage("this command needs --oracle"));
        };
        if let Some(name) = spec.strip_prefix("builtin:") {
            if self.oracle_persistent {
                return Err(usage("--oracle-persistent cannot be combined with a builtin oracle"));
            }
            if language(name).is_none() {
                return Err(usage(format!("unknown builtin oracle `{name}`")));
            }
        }
        Oracle::from_spec(spec, self.oracle_persistent, timeout_from_env()).context("starting oracle")
    }
}

fn sampler_spec(name: &str, seed: u64) -> Result<SamplerSpec> {
    let kind = SamplerKind::parse(name).ok_or_else(|| usage(format!("unknown sampler `{name}`")))?;
    Ok(SamplerSpec { kind, seed })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_grammar(path: &Path) -> Result<Grammar> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_infer_config(path: Option<&Path>, seed: u64) -> Result<InferConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => InferConfig::default(),
    };
    cfg.seed = seed;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.report.json"))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.cmd {
        Cmd::Tokenize { train, out } => {
            let examples = read_examples(&train)?;
            let oracle = g.oracle()?;
            let corpus = tokenize(&examples, &oracle)?;
            write_json(&out, &corpus)?;
        }
        Cmd::Decompose { tokens, out } => {
            let corpus: TokenizedCorpus = read_json(&tokens)?;
            let oracle = g.oracle()?;
            let dec = decompose(&corpus, &oracle)?;
            write_json(
                &out,
                &DecomposedFile {
                    table: corpus.table,
                    corpus: dec,
                },
            )?;
        }
        Cmd::Infer {
            train,
            decomposed,
            out,
            config,
            report,
        } => {
            let cfg = read_infer_config(config.as_deref(), g.seed)?;
            let oracle = g.oracle()?;
            let (table, dec) = match (train, decomposed) {
                (Some(dir), _) => {
                    let examples = read_examples(&dir)?;
                    let corpus = tokenize(&examples, &oracle)?;
                    let dec = decompose(&corpus, &oracle)?;
                    (corpus.table, dec)
                }
                (None, Some(path)) => {
                    let f: DecomposedFile = read_json(&path)?;
                    (f.table, f.corpus)
                }
                (None, None) => bail!(usage("infer needs --train or --decomposed")),
            };
            let result = infer_grammar(&dec, &table, &oracle, &cfg)?;
            write_atomic(&out, to_text(&result.grammar).as_bytes())?;
            write_json(&report.unwrap_or_else(|| report_path(&out)), &result.report)?;
        }
        Cmd::Sample {
            grammar,
            sampler,
            n,
            out,
        } => {
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let spec = sampler_spec(&sampler, g.seed)?;
            let grammar = read_grammar(&grammar)?;
            let mut text = String::new();
            for s in sample_n(&grammar, &spec, n)? {
                text.push_str(&escape_line(&s));
                text.push('\n');
            }
            match out {
                Some(p) => write_atomic(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Cmd::Eval {
            grammar,
            golden,
            sampler,
            n,
            out,
        } => {
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let spec = sampler_spec(&sampler, g.seed)?;
            let grammar = read_grammar(&grammar)?;
            let golden = read_examples(&golden)?;
            let oracle = g.oracle()?;
            let rep = report(&grammar, &oracle, &golden, &spec, n)?;
            write_json(&out, &rep)?;
        }
        Cmd::Bench {
            lang,
            runs,
            out,
            config,
        } => {
            let langs: Vec<_> = if lang == "all" {
                LANGUAGES.iter().collect()
            } else {
                vec![language(&lang).ok_or_else(|| usage(format!("unknown language `{lang}`")))?]
            };
            if runs == 0 {
                return Err(usage("--runs must be at least 1"));
            }
            let cfg = BenchConfig {
                infer: read_infer_config(config.as_deref(), g.seed)?,
                jobs: g.jobs.max(1),
                ..BenchConfig::default()
            };
            let seeds: Vec<u64> = (0..runs).map(|i| g.seed + i).collect();
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut csv = String::new();
            let mut aggregates = Vec::new();
            for l in langs {
                let outcome = run_benchmark(l, &seeds, &cfg);
                for r in &outcome.runs {
                    let base = out.join(format!("{}-seed{}", l.short, r.seed));
                    match &r.outcome {
                        Ok((grammar, rep)) => {
                            write_atomic(&base.with_extension("gram"), to_text(grammar).as_bytes())?;
                            write_json(&base.with_extension("json"), &rep.without_timing())?;
                        }
                        Err(e) => write_atomic(&base.with_extension("err"), format!("{e}\n").as_bytes())?,
                    }
                }
                let table = outcome.csv();
                if csv.is_empty() {
                    csv.push_str(&table);
                } else {
                    csv.push_str(table.split_once('\n').map_or("", |(_, rows)| rows));
                }
                eprintln!(
                    "{}: P {:.3}±{:.3} R {:.3}±{:.3} F1 {:.3}±{:.3} ({} of {} runs ok)",
                    l.name,
                    outcome.aggregate.precision.mean,
                    outcome.aggregate.precision.sd,
                    outcome.aggregate.recall.mean,
                    outcome.aggregate.recall.sd,
                    outcome.aggregate.f1.mean,
                    outcome.aggregate.f1.sd,
                    outcome.aggregate.runs - outcome.aggregate.failures,
                    outcome.aggregate.runs
                );
                aggregates.push(outcome.aggregate);
            }
            write_atomic(&out.join("aggregate.csv"), csv.as_bytes())?;
            write_json(&out.join("summary.json"), &aggregates)?;
        }
        Cmd::Golden { lang, count, out } => {
            let l = language(&lang).ok_or_else(|| usage(format!("unknown language `{lang}`")))?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for (i, s) in generate_golden(l, count, g.seed).iter().enumerate() {
                write_atomic(&out.join(format!("{i:04}.txt")), s.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// The error chain joined by ": ", skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !last.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = logging::init(&cli.global.log_level, cli.global.json_logs) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
