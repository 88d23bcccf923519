use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gramforge::cfg::earley::Recognizer;
use gramforge::decompose::decompose;
use gramforge::infer::{infer_grammar, InferConfig};
use gramforge::oracle::Oracle;
use gramforge::refbench::{generate_golden, language, train_seed};
use gramforge::sampler::{sample_n, SamplerKind, SamplerSpec};
use gramforge::tokenizer::tokenize;

fn recognizer(c: &mut Criterion) {
    let l = language("tinyc").unwrap();
    let g = l.grammar();
    let r = Recognizer::new(&g);
    let xs = generate_golden(l, 100, 7);
    c.bench_function("earley/tinyc-100", |b| {
        b.iter(|| xs.iter().filter(|x| r.accepts_str(black_box(x))).count())
    });
}

fn sampler(c: &mut Criterion) {
    let g = language("while").unwrap().grammar();
    let spec = SamplerSpec {
        kind: SamplerKind::lpp10(),
        seed: 0,
    };
    c.bench_function("lpp10/while-100", |b| b.iter(|| sample_n(black_box(&g), &spec, 100).unwrap()));
}

fn inference(c: &mut Criterion) {
    let l = language("lisp").unwrap();
    let oracle = Oracle::builtin_from_grammar(&l.grammar()).unwrap();
    let train = generate_golden(l, l.train_size, train_seed(0));
    let corpus = tokenize(&train, &oracle).unwrap();
    let dec = decompose(&corpus, &oracle).unwrap();
    let cfg = InferConfig::default();
    let mut group = c.benchmark_group("infer");
    group.sample_size(10);
    group.bench_function("tokenize/lisp", |b| b.iter(|| tokenize(black_box(&train), &oracle).unwrap()));
    group.bench_function("infer/lisp", |b| {
        b.iter(|| infer_grammar(black_box(&dec), &corpus.table, &oracle, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, recognizer, sampler, inference);
criterion_main!(benches);
