mod common;

use std::collections::HashSet;

use common::builtin;
use gramforge::cfg::format::to_text;
use gramforge::decompose::{decompose, is_anchored_minimal};
use gramforge::oracle::Oracle;
use gramforge::refbench::{generate_golden, train_seed, LANGUAGES};
use gramforge::tokenizer::{tokenize, TokenizedCorpus};
use gramforge::Grammar;

fn corpora() -> Vec<(&'static str, Vec<String>, Oracle)> {
    LANGUAGES
        .iter()
        .map(|l| {
            let oracle = Oracle::builtin_from_grammar(&l.grammar()).unwrap();
            (l.name, generate_golden(l, l.train_size, train_seed(0)), oracle)
        })
        .collect()
}

fn check_table(name: &str, c: &TokenizedCorpus, oracle: &Oracle) {
    let mut seen = HashSet::new();
    for e in &c.table.entries {
        for v in &e.values {
            assert!(seen.insert(v.clone()), "{name}: {v} in two tokens");
        }
        for (_, probe) in &e.class_witnesses {
            assert!(oracle.check(probe).unwrap(), "{name}: {probe}");
        }
        assert_eq!(e.class_witnesses.len(), e.classes.len(), "{name}");
    }
    for w in &c.table.merges {
        assert!(!w.probes.is_empty());
        for p in &w.probes {
            assert!(oracle.check(p).unwrap(), "{name}: {} ~ {}: {p}", w.left, w.right);
        }
    }
}

#[test]
fn tokenizer_invariants_on_bundled_corpora() {
    for (name, xs, oracle) in corpora() {
        let c = tokenize(&xs, &oracle).unwrap();
        assert_eq!(c.sequences.len(), xs.len(), "{name}");
        for s in &c.sequences {
            assert!(oracle.check(&c.table.render(s).unwrap()).unwrap(), "{name}");
        }
        check_table(name, &c, &oracle);
    }
}

#[test]
fn decomposition_invariants_on_bundled_corpora() {
    for (name, xs, oracle) in corpora() {
        let c = tokenize(&xs, &oracle).unwrap();
        let d = decompose(&c, &oracle).unwrap();
        for (ex, seq) in c.sequences.iter().enumerate() {
            for i in 0..seq.len() {
                assert!(d.provenance.iter().any(|p| p.contains(&(ex, i))), "{name}: example {ex} index {i}");
            }
        }
        for s in &d.sequences {
            assert!(oracle.check(&c.table.render(s).unwrap()).unwrap(), "{name}");
            assert!(is_anchored_minimal(s, &c.table, &oracle).unwrap(), "{name}: {s:?}");
        }
    }
}

#[test]
fn decomposition_ignores_example_order() {
    let oracle = builtin("tinyc");
    let xs: Vec<String> = ["a=3+a;", "INT a;", "IF (a<3) a=a;"].iter().map(|s| s.to_string()).collect();
    let mut rev = xs.clone();
    rev.reverse();
    let a = tokenize(&xs, &oracle).unwrap();
    let b = tokenize(&rev, &oracle).unwrap();
    let render = |c: &TokenizedCorpus| -> Vec<String> {
        let mut v: Vec<String> = decompose(c, &oracle)
            .unwrap()
            .sequences
            .iter()
            .map(|s| c.table.render(s).unwrap())
            .collect();
        v.sort();
        v
    };
    assert_eq!(render(&a), render(&b));
}

/// Size sum from the serialized file: one per symbol of every alternative,
/// and one for an empty alternative.
fn scanned_size_sum(text: &str) -> usize {
    let mut total = 0;
    for line in text.lines() {
        let body = if let Some(rest) = line.strip_prefix("%token ") {
            rest.split_once('=').unwrap().1
        } else if line.starts_with('%') {
            continue;
        } else {
            line.split_once(':').unwrap().1
        };
        let body = body.trim().strip_suffix(';').unwrap();
        let mut symbols = 0;
        let (mut quoted, mut class, mut escaped) = (false, false, false);
        let mut in_symbol = false;
        for ch in body.chars() {
            if escaped {
                escaped = false;
                continue;
            }
            match ch {
                '\\' if quoted || class => escaped = true,
                '"' if !class => {
                    quoted = !quoted;
                    if quoted && !in_symbol {
                        in_symbol = true;
                        symbols += 1;
                    }
                }
                '[' if !quoted => {
                    class = true;
                    if !in_symbol {
                        in_symbol = true;
                        symbols += 1;
                    }
                }
                ']' if !quoted => class = false,
                '|' if !quoted && !class => {
                    total += symbols.max(1);
                    symbols = 0;
                    in_symbol = false;
                }
                c if c.is_whitespace() && !quoted && !class => in_symbol = false,
                _ if !in_symbol => {
                    in_symbol = true;
                    symbols += 1;
                }
                _ => {}
            }
        }
        total += symbols.max(1);
    }
    total
}

#[test]
fn size_sum_matches_the_serialized_file() {
    let mut grammars: Vec<Grammar> = LANGUAGES.iter().map(|l| l.grammar()).collect();
    let l = gramforge::refbench::language("while").unwrap();
    let (g, rep) = gramforge::refbench::run_seed(l, 0, &Default::default()).unwrap();
    assert_eq!(rep.eval.metrics, g.metrics());
    grammars.push(g);
    for g in grammars {
        let text = to_text(&g);
        assert_eq!(g.metrics().size_sum, scanned_size_sum(&text), "{text}");
    }
}
