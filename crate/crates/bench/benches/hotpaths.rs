//! Benchmarks for the four hot paths: truncated propagation, tableau
//! conjugation, the noisy density-matrix simulator, and the ridge solve.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use cpdr_bench::{benchmark_circuit, dense_circuit, gate_sequence, word_batch, REFERENCE_M};
use cpdr_core::densesim::{noisy_expectation, NoiseModel};
use cpdr_core::pauli::CliffordTableau;
use cpdr_core::spd::{spd_expectation, SparseInitialState};
use cpdr_core::ridge_fit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn spd_propagation(c: &mut Criterion) {
    let (circuit, obs) = benchmark_circuit();
    let rho = SparseInitialState::zero_state(8).unwrap();
    c.bench_function("spd_reference_m13", |b| {
        b.iter(|| {
            spd_expectation(
                black_box(&circuit),
                black_box(&obs),
                black_box(&rho),
                REFERENCE_M,
            )
            .unwrap()
            .value
        })
    });
}

fn tableau_conjugation(c: &mut Criterion) {
    let n = 32;
    let tableau = CliffordTableau::from_gates(n, &gate_sequence(n, 200, 3)).unwrap();
    let words = word_batch(n, 64, 4);
    c.bench_function("tableau_conjugate_64_words_n32", |b| {
        b.iter(|| {
            for w in &words {
                black_box(tableau.conjugate(black_box(w)).unwrap());
            }
        })
    });
}

fn dense_noisy_simulation(c: &mut Criterion) {
    let (circuit, obs) = dense_circuit();
    let nm = NoiseModel::default();
    c.bench_function("noisy_expectation_n6", |b| {
        b.iter(|| noisy_expectation(black_box(&circuit), black_box(&obs), black_box(&nm)).unwrap())
    });
}

fn ridge_solve(c: &mut Criterion) {
    // The learned-PEC system shape: one row per Clifford training circuit,
    // one column per insertion.
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let features: Vec<Vec<f64>> = (0..2048)
        .map(|_| (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let targets: Vec<f64> = (0..2048).map(|_| rng.gen_range(-1.0..1.0)).collect();
    c.bench_function("ridge_fit_2048x21", |b| {
        b.iter_batched(
            || (features.clone(), targets.clone()),
            |(f, t)| ridge_fit(black_box(&f), black_box(&t), 1e-6).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(
    benches,
    spd_propagation,
    tableau_conjugation,
    dense_noisy_simulation,
    ridge_solve
);
criterion_main!(benches);
