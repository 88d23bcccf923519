#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use common::{builtin, mismatches, pipeline};
use gramforge::cfg::earley::Recognizer;
use gramforge::cfg::format::parse;
use gramforge::cfg::simplify::simplify;
use gramforge::decompose::{decompose, is_anchored_minimal};
use gramforge::eval::precision;
use gramforge::infer::{infer_grammar, InferConfig};
use gramforge::oracle::Oracle;
use gramforge::refbench::{
    generate_golden, language, run_benchmark, run_seed, train_seed, BenchConfig, SeedReport, LANGUAGES,
};
use gramforge::sampler::{sample_n, SamplerKind, SamplerSpec};
use gramforge::tokenizer::tokenize;

type Verdict = Result<String, String>;

struct Board {
    failed: usize,
}

impl Board {
    fn record(&mut self, n: usize, name: &str, v: Verdict) {
        match v {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(detail) => {
                self.failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({detail})");
            }
        }
    }
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn motivating() -> Verdict {
    let t = Instant::now();
    let run = pipeline(&["a+3;", "3<3;"], &builtin("tinyc"), &InferConfig::default());
    let secs = t.elapsed().as_secs_f64();
    let g = &run.out.grammar;
    let verdicts: Vec<String> = ["a+a+a;", "3+3+3;", "a<a<a;"]
        .iter()
        .map(|s| format!("{s} {}", if g.accepts_str(s) { "accepted" } else { "rejected" }))
        .collect();
    let ok = g.accepts_str("a+a+a;") && g.accepts_str("3+3+3;") && !g.accepts_str("a<a<a;") && secs < 10.0;
    check(ok, format!("{}; {secs:.2}s", verdicts.join(", ")))
}

struct LangRuns {
    seed0: SeedReport,
    seed0_time: Duration,
    f1: Vec<f64>,
    failures: usize,
}

fn bench_language(name: &str, seeds: u64) -> LangRuns {
    let l = language(name).unwrap();
    let cfg = BenchConfig::default();
    let t = Instant::now();
    let seed0 = run_seed(l, 0, &cfg).map(|(_, r)| r).unwrap_or_else(|e| panic!("{name} seed 0: {e}"));
    let seed0_time = t.elapsed();
    let mut f1 = vec![seed0.eval.f1.value];
    let rest: Vec<u64> = (1..seeds).collect();
    let out = run_benchmark(l, &rest, &cfg);
    f1.extend(out.reports().map(|r| r.eval.f1.value));
    eprintln!("{}: {} seeds in {:.1}s", l.name, seeds, t.elapsed().as_secs_f64());
    LangRuns {
        seed0,
        seed0_time,
        f1,
        failures: out.aggregate.failures,
    }
}

fn no_overgeneralization(runs: &BTreeMap<&str, LangRuns>) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for l in LANGUAGES {
        let r = &runs[l.short];
        let p = r.seed0.eval.precision.value;
        let secs = r.seed0_time.as_secs_f64();
        ok &= p >= 0.99 && secs < 300.0;
        parts.push(format!("{} P={p:.3} {secs:.0}s", l.short));
    }
    check(ok, parts.join(", "))
}

fn recall_check(runs: &BTreeMap<&str, LangRuns>) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["lisp", "while", "xml", "turtle", "tinyc"] {
        let e = &runs[name].seed0.eval;
        ok &= e.recall.value >= 0.95 && e.golden_total == 500;
        parts.push(format!("{name} R={:.3} of {}", e.recall.value, e.golden_total));
    }
    check(ok, parts.join(", "))
}

fn sampler_depth() -> Verdict {
    let g = parse("%start n0\nn0 : n1 ;\nn1 : n2 ;\nn2 : n3 ;\nn3 : n4 ;\nn4 : n5 ;\nn5 : n6 | \"1\" ;\nn6 : \"2\" ;\n")
        .unwrap();
    let oracle = Oracle::from_fn(|s| s == "1");
    let depth = SamplerSpec {
        kind: SamplerKind::parse("depth5").unwrap(),
        seed: 0,
    };
    let lpp = SamplerSpec {
        kind: SamplerKind::lpp10(),
        seed: 0,
    };
    let pd = precision(&g, &oracle, &depth, 1000).unwrap();
    let pl = precision(&g, &oracle, &lpp, 1000).unwrap();
    let twos = sample_n(&g, &lpp, 1000).unwrap().iter().filter(|s| *s == "2").count();
    check(
        pd.value == 1.0 && pl.value < 1.0 && twos >= 1,
        format!("depth5 P={}, lpp10 P={}, {twos} of 1000 lpp10 samples are \"2\"", pd.value, pl.value),
    )
}

fn parser_equivalence() -> Verdict {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    let (mut checked, mut bad) = (0, Vec::new());
    for path in entries {
        let g = parse(&fs::read_to_string(&path).unwrap()).unwrap();
        if g.nt_count() > 6 {
            continue;
        }
        checked += 1;
        let m = mismatches(&g, 6);
        if !m.is_empty() {
            bad.push(format!("{}: {} mismatches", path.file_name().unwrap().to_string_lossy(), m.len()));
        }
    }
    check(
        bad.is_empty() && checked > 0,
        if bad.is_empty() { format!("{checked} fixture grammars, 0 mismatches") } else { bad.join(", ") },
    )
}

fn decomposition() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for l in LANGUAGES {
        let oracle = builtin(l.short);
        let xs = generate_golden(l, l.train_size, train_seed(0));
        let c = tokenize(&xs, &oracle).unwrap();
        let d = decompose(&c, &oracle).unwrap();
        let mut accepted = 0;
        let mut minimal = 0;
        for s in &d.sequences {
            accepted += oracle.check(&c.table.render(s).unwrap()).unwrap() as usize;
            minimal += is_anchored_minimal(s, &c.table, &oracle).unwrap() as usize;
        }
        let uncovered: usize = c
            .sequences
            .iter()
            .enumerate()
            .map(|(ex, seq)| (0..seq.len()).filter(|&i| !d.provenance.iter().any(|p| p.contains(&(ex, i)))).count())
            .sum();
        let n = d.sequences.len();
        ok &= accepted == n && minimal == n && uncovered == 0;
        parts.push(format!("{} {n} seqs, {accepted} accepted, {minimal} minimal, {uncovered} uncovered", l.short));
    }
    check(ok, parts.join("; "))
}

fn simplification() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for l in LANGUAGES {
        let oracle = builtin(l.short);
        let xs = generate_golden(l, l.train_size, train_seed(0));
        let c = tokenize(&xs, &oracle).unwrap();
        let d = decompose(&c, &oracle).unwrap();
        let cfg = InferConfig {
            simplify: false,
            ..InferConfig::default()
        };
        let raw = infer_grammar(&d, &c.table, &oracle, &cfg).unwrap().grammar;
        let simple = simplify(&raw);
        let (before, after) = (Recognizer::new(&raw), Recognizer::new(&simple));
        let spec = SamplerSpec {
            kind: SamplerKind::lpp10(),
            seed: 0,
        };
        let mut samples = sample_n(&raw, &spec, 200).unwrap();
        samples.extend(sample_n(&simple, &spec, 200).unwrap());
        let differ = samples.iter().filter(|s| before.accepts_str(s) != after.accepts_str(s)).count();
        let (s0, s1) = (raw.metrics().size_sum, simple.metrics().size_sum);
        let ratio = s1 as f64 / s0 as f64;
        ok &= differ == 0 && s1 <= s0;
        if l.short == "tinyc" {
            ok &= ratio <= 0.7;
        }
        parts.push(format!("{} S {s0}->{s1} ({ratio:.2}), {differ} differing verdicts", l.short));
    }
    check(ok, parts.join("; "))
}

fn readability(runs: &BTreeMap<&str, LangRuns>) -> Verdict {
    let s = runs["tinyc"].seed0.eval.metrics.size_sum;
    check(s <= 120, format!("tinyc S={s}"))
}

fn bench_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "gram" || x == "json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Verdict {
    let tmp = tempfile::TempDir::new().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_gramforge"))
            .args(["bench", "--lang", "while", "--runs", "3", "--seed", "0", "--out"])
            .arg(&out)
            .env_remove("RUST_LOG")
            .stdin(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .unwrap();
        if !status.success() {
            return Err(format!("bench exited with {status}"));
        }
        outs.push(bench_files(&out));
    }
    let differing: Vec<&String> = outs[0].keys().filter(|k| outs[0].get(*k) != outs[1].get(*k)).collect();
    check(
        outs[0].len() == 7 && outs[0].keys().eq(outs[1].keys()) && differing.is_empty(),
        format!("{} files compared, differing: {differing:?}", outs[0].len()),
    )
}

fn stability(runs: &BTreeMap<&str, LangRuns>) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["lisp", "while", "xml", "turtle"] {
        let r = &runs[name];
        let m = gramforge::refbench::MeanSd::of(&r.f1);
        ok &= r.f1.len() == 10 && r.failures == 0 && m.sd <= 0.05;
        parts.push(format!("{name} F1 {:.3}±{:.3} over {}", m.mean, m.sd, r.f1.len()));
    }
    check(ok, parts.join(", "))
}

fn main() {
    let mut board = Board { failed: 0 };
    board.record(1, "motivating example", motivating());

    let mut runs = BTreeMap::new();
    for l in LANGUAGES {
        let seeds = if ["lisp", "while", "xml", "turtle"].contains(&l.short) { 10 } else { 1 };
        runs.insert(l.short, bench_language(l.short, seeds));
    }
    board.record(2, "no over-generalization", no_overgeneralization(&runs));
    board.record(3, "recall", recall_check(&runs));
    board.record(4, "sampler depth exposure", sampler_depth());
    board.record(5, "parser oracle-equivalence", parser_equivalence());
    board.record(6, "decomposition", decomposition());
    board.record(7, "simplification safety", simplification());
    board.record(8, "readability", readability(&runs));
    board.record(9, "determinism", determinism());
    board.record(10, "stability", stability(&runs));

    println!("{} of 10 criteria passed", 10 - board.failed);
    if board.failed > 0 {
        std::process::exit(1);
    }
}
