//! Shared fixtures for the criterion benchmarks: the circuits and system
//! sizes mirror the production workloads (8-qubit Trotter benchmark, SPD
//! reference truncation 13, learned-PEC regression shape).

use cpdr_core::circuit::{build_ising_trotter, IsingSpec, ParamCircuit};
use cpdr_core::pauli::{Gate, Observable, PauliWord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub const REFERENCE_M: usize = 13;

/// The 8-qubit, 4-step benchmark circuit at mid-grid angles.
pub fn benchmark_circuit() -> (ParamCircuit, Observable) {
    let spec = IsingSpec::chain(8, 4, -0.9, 0.35);
    let c = build_ising_trotter(&spec, None).expect("valid spec");
    let o = Observable::magnetization_z(8).expect("valid width");
    (c, o)
}

/// Smaller instance for the density-matrix simulator, which scales as 4^n.
pub fn dense_circuit() -> (ParamCircuit, Observable) {
    let spec = IsingSpec::chain(6, 3, -0.7, 0.4);
    let c = build_ising_trotter(&spec, None).expect("valid spec");
    let o = Observable::magnetization_z(6).expect("valid width");
    (c, o)
}

/// Pseudorandom Clifford gate sequence on `n` qubits.
pub fn gate_sequence(n: usize, count: usize, seed: u64) -> Vec<Gate> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
            match rng.gen_range(0..5) {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Cx(a, b),
                3 => Gate::Cz(a, b),
                _ => Gate::Swap(a, b),
            }
        })
        .collect()
}

/// Pseudorandom Pauli words in canonical Hermitian form.
pub fn word_batch(n: usize, count: usize, seed: u64) -> Vec<PauliWord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mask = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    (0..count)
        .map(|_| {
            let x = rng.gen::<u128>() & mask;
            let mut z = rng.gen::<u128>() & mask;
            if x == 0 && z == 0 {
                z = 1;
            }
            let phase = ((x & z).count_ones() % 4) as u8;
            PauliWord::from_parts(n, x, z, phase).expect("canonical word")
        })
        .collect()
}
