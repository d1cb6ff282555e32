use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use monodiag::corpus::axiom_corpus;
use monodiag::{attach, check_coherence, eval_term, readout, resolve};
use monodiag_bench::{diagrams, model};

fn validation(c: &mut Criterion) {
    let corpus = axiom_corpus(4);
    c.bench_function("validate axiom corpus", |b| {
        b.iter(|| {
            corpus
                .closed
                .iter()
                .filter(|d| d.validate().is_valid())
                .count()
        })
    });
    c.bench_function("cc_closure axiom corpus", |b| {
        b.iter(|| corpus.raw.iter().filter(|d| d.cc_closure().is_ok()).count())
    });
}

fn pipeline(c: &mut Criterion) {
    let ds = diagrams();
    let model = model();
    c.bench_function("resolve readout corpus", |b| {
        b.iter(|| {
            for d in &ds {
                black_box(resolve(d).unwrap());
            }
        })
    });
    c.bench_function("readout and eval corpus", |b| {
        b.iter(|| {
            for d in &ds {
                black_box(eval_term(&model, &readout(d).unwrap()).unwrap());
            }
        })
    });
    let widest: Vec<_> = ds.iter().rev().take(2).cloned().collect();
    c.bench_function("attach and eval widest pair", |b| {
        b.iter(|| {
            let t = readout(&attach(&widest).unwrap()).unwrap();
            black_box(eval_term(&model, &t).unwrap())
        })
    });
}

fn coherence(c: &mut Criterion) {
    let mut g = c.benchmark_group("coherence");
    g.sample_size(10);
    g.bench_function("max alpha 4", |b| b.iter(|| check_coherence(black_box(4))));
    g.finish();
}

criterion_group!(benches, validation, pipeline, coherence);
criterion_main!(benches);
