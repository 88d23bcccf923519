mod common;

use common::{alphabet, derivable, for_all_strings};
use gramforge::cfg::yields::join_lexemes;
use gramforge::infer::InferConfig;
use gramforge::oracle::Oracle;
use gramforge::refbench::{generate_golden, language, run_benchmark, run_seed, train_seed, BenchConfig, MeanSd, LANGUAGES};
use gramforge::Tok;

fn depth(s: &str) -> usize {
    let (mut d, mut max) = (0usize, 0usize);
    for c in s.chars() {
        match c {
            '[' | '{' => {
                d += 1;
                max = max.max(d);
            }
            ']' | '}' => d = d.saturating_sub(1),
            _ => {}
        }
    }
    max
}

#[test]
fn json_corpus_mixes_flat_and_nested_values() {
    let l = language("json").unwrap();
    let xs = generate_golden(l, l.train_size, train_seed(0));
    assert_eq!(xs.len(), 71);
    let mut hist = [0usize; 4];
    for x in &xs {
        hist[depth(x).min(3)] += 1;
    }
    assert!(hist[0] > 0, "{hist:?}");
    assert!(hist[1] > 0, "{hist:?}");
    assert!(hist[2] + hist[3] > 0, "{hist:?}");
}

#[test]
fn tinyc_training_sets_are_near_the_target_length() {
    let l = language("tinyc").unwrap();
    for seed in 0..10 {
        let xs = generate_golden(l, l.train_size, train_seed(seed));
        assert_eq!(xs.len(), 25);
        let avg = xs.iter().map(|s| s.len()).sum::<usize>() as f64 / 25.0;
        assert!((80.5 / 2.0..=80.5 * 2.0).contains(&avg), "seed {seed}: {avg}");
    }
}

#[test]
fn builtin_oracles_agree_with_enumeration() {
    for l in LANGUAGES {
        let g = l.grammar();
        let oracle = Oracle::builtin_from_grammar(&g).unwrap();
        let alpha = alphabet(&g);
        let mut max = 3;
        while max < 6 && alpha.len().pow(max as u32 + 1) <= 200_000 {
            max += 1;
        }
        let lang = derivable(&g, max);
        let text = |s: &[Tok]| -> String {
            let pieces: Vec<String> = s
                .iter()
                .map(|t| match t {
                    Tok::Id(i) => g.tokens()[*i as usize].shortest(),
                    Tok::Lit(x) => x.clone(),
                })
                .collect();
            join_lexemes(&pieces, g.whitespace_sensitive())
        };
        let mut bad = Vec::new();
        for_all_strings(&alpha, max, |s| {
            if oracle.check(&text(s)).unwrap() != lang.contains(s) {
                bad.push(text(s));
            }
        });
        assert!(bad.is_empty(), "{}: {:?}", l.name, &bad[..bad.len().min(5)]);
    }
}

#[test]
fn one_seed_twice_gives_identical_reports() {
    let l = language("json").unwrap();
    let cfg = BenchConfig::default();
    let (g1, r1) = run_seed(l, 3, &cfg).unwrap();
    let (g2, r2) = run_seed(l, 3, &cfg).unwrap();
    assert_eq!(g1, g2);
    assert_eq!(r1.without_timing(), r2.without_timing());
    assert_eq!(r1.without_timing().infer.oracle.oracle_time, 0.0);
}

#[test]
fn failures_are_recorded_per_seed() {
    let l = language("arith").unwrap();
    let cfg = BenchConfig {
        infer: InferConfig {
            swap_contexts: 0,
            ..InferConfig::default()
        },
        ..BenchConfig::default()
    };
    let out = run_benchmark(l, &[0, 1], &cfg);
    assert_eq!((out.aggregate.runs, out.aggregate.failures), (2, 2));
    assert!(out.runs.iter().all(|r| r.outcome.as_ref().is_err_and(|e| e.contains("swap_contexts"))));
    assert_eq!(out.csv().lines().count(), 1);
}

#[test]
fn mean_and_population_deviation() {
    let m = MeanSd::of(&[1.0, 1.0, 0.0, 0.0]);
    assert_eq!((m.mean, m.sd), (0.5, 0.5));
    assert_eq!(MeanSd::of(&[]), MeanSd::default());
}

#[test]
fn lisp_is_stable_across_ten_seeds() {
    let l = language("lisp").unwrap();
    let seeds: Vec<u64> = (0..10).collect();
    let out = run_benchmark(l, &seeds, &BenchConfig::default());
    assert_eq!(out.aggregate.failures, 0);
    assert!(out.aggregate.f1.sd <= 0.05, "{:?}", out.aggregate);
    let csv = out.csv();
    assert_eq!(csv.lines().next().unwrap(), "language,seed,p,r,f1,NT,A,S,queries,oracle_time");
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn while_over_ten_seeds() {
    let l = language("while").unwrap();
    let seeds: Vec<u64> = (0..10).collect();
    let out = run_benchmark(l, &seeds, &BenchConfig::default());
    assert_eq!(out.aggregate.failures, 0);
    assert!(out.aggregate.precision.mean >= 0.99, "{:?}", out.aggregate);
    assert!(out.aggregate.recall.mean >= 0.95, "{:?}", out.aggregate);
}
