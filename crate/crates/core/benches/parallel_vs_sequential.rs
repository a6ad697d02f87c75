//! Benchmarks comparing the rayon-backed map (what the crate uses when the
//! `parallel` feature is on, the default) against the plain sequential map
//! on the crate's data-parallel hot spots. Run with
//! `cargo bench -p noiselab-core`; to time the fully sequential build use
//! `cargo bench -p noiselab-core --no-default-features`.

use criterion::{criterion_group, criterion_main, Criterion};
use noiselab_core::channel::QuantumChannel;
use noiselab_core::experiments::logdepth_repetition_experiment;
use noiselab_core::mask::ErrorMaskDistribution;
use noiselab_core::par::{par_map, seq_map};
use noiselab_core::register::QubitRegister;
use noiselab_core::rng::haar_unitary;
use noiselab_core::spectrum::pauli_weight_spectrum;
use noiselab_core::sync::lemma1_lp_oracle;
use std::hint::black_box;

fn bench_spectrum(c: &mut Criterion) {
    let reg = QubitRegister::new(4);
    let dist = ErrorMaskDistribution::all_or_nothing(4, 0.2).unwrap();
    let chan = QuantumChannel::simple_error(reg, &dist).unwrap();
    let mut group = c.benchmark_group("pauli_weight_spectrum_n4");
    group.sample_size(20);
    group.bench_function("as_built", |b| {
        b.iter(|| black_box(pauli_weight_spectrum(black_box(&chan)).unwrap()))
    });
    group.finish();
}

fn bench_haar_batch(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..64).collect();
    let work = |s: &u64| haar_unitary(32, *s).trace().norm_sqr();
    let mut group = c.benchmark_group("haar_moment_batch_dim32");
    group.sample_size(20);
    group.bench_function("par_map", |b| {
        b.iter(|| black_box(par_map(black_box(&seeds), work)))
    });
    group.bench_function("seq_map", |b| {
        b.iter(|| black_box(seq_map(black_box(&seeds), work)))
    });
    group.finish();
}

fn bench_lemma_lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma_lp_oracle_n80");
    group.sample_size(10);
    group.bench_function("solve", |b| {
        b.iter(|| black_box(lemma1_lp_oracle(80, 0.04, 0.2).unwrap()))
    });
    group.finish();
}

fn bench_logdepth(c: &mut Criterion) {
    let mut group = c.benchmark_group("logdepth_trials_10k");
    group.sample_size(10);
    group.bench_function("run", |b| {
        b.iter(|| black_box(logdepth_repetition_experiment(10, 0.1, 50, 10_000, 7).unwrap()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_spectrum,
    bench_haar_batch,
    bench_lemma_lp,
    bench_logdepth
);
criterion_main!(benches);
