//! Brute-force dense linear algebra used as an oracle by the integration
//! tests. Everything here is built entrywise from operator definitions:
//! no tableau, no strided kernels, no shared code with the library paths
//! under test. Keep circuits at 6 qubits or fewer.

// Shared by both integration suites; not every helper is used by both.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use cpdr_core::circuit::{CliffordOp, ParamCircuit};
use cpdr_core::pauli::{Gate, Observable, PauliWord};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone)]
pub struct CMat {
    pub dim: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat {
            dim,
            a: vec![C0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            m.a[r * dim + r] = C1;
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.a[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.a[r * self.dim + c] = v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let v = self.get(r, k);
                if v == C0 {
                    continue;
                }
                for c in 0..d {
                    out.a[r * d + c] += v * other.get(k, c);
                }
            }
        }
        out
    }

    /// First column: the image of |0...0>.
    pub fn col0(&self) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, 0)).collect()
    }
}

/// Largest entrywise difference after aligning global phase on the largest
/// entry of `a`.
pub fn phase_aligned_distance(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim, b.dim);
    let (mut best, mut idx) = (0.0f64, 0usize);
    for (i, v) in a.a.iter().enumerate() {
        if v.norm() > best {
            best = v.norm();
            idx = i;
        }
    }
    assert!(best > 1e-8, "reference matrix is numerically zero");
    let phase = b.a[idx] / a.a[idx];
    a.a.iter()
        .zip(&b.a)
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

/// Embed a k-qubit matrix (row-major, `qubits[j]` is local bit j) into the
/// full register.
pub fn embed(n: usize, qubits: &[usize], sub: &[Complex64]) -> CMat {
    let k = qubits.len();
    let sdim = 1usize << k;
    assert_eq!(sub.len(), sdim * sdim);
    let dim = 1usize << n;
    let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
    let mut m = CMat::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !mask != c & !mask {
                continue;
            }
            let mut sr = 0usize;
            let mut sc = 0usize;
            for (j, q) in qubits.iter().enumerate() {
                sr |= ((r >> q) & 1) << j;
                sc |= ((c >> q) & 1) << j;
            }
            m.set(r, c, sub[sr * sdim + sc]);
        }
    }
    m
}

pub fn gate_matrix(n: usize, g: Gate) -> CMat {
    let i = Complex64::new(0.0, 1.0);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match g {
        Gate::H(q) => embed(n, &[q], &[h, h, h, -h]),
        Gate::S(q) => embed(n, &[q], &[C1, C0, C0, i]),
        Gate::Sdg(q) => embed(n, &[q], &[C1, C0, C0, -i]),
        Gate::X(q) => embed(n, &[q], &[C0, C1, C1, C0]),
        Gate::Y(q) => embed(n, &[q], &[C0, -i, i, C0]),
        Gate::Z(q) => embed(n, &[q], &[C1, C0, C0, -C1]),
        // Control is local bit 0; basis order |00>, |10>, |01>, |11> in
        // (control, target) bit labels.
        Gate::Cx(a, b) => embed(
            n,
            &[a, b],
            &[
                C1, C0, C0, C0, //
                C0, C0, C0, C1, //
                C0, C0, C1, C0, //
                C0, C1, C0, C0,
            ],
        ),
        Gate::Cz(a, b) => embed(
            n,
            &[a, b],
            &[
                C1, C0, C0, C0, //
                C0, C1, C0, C0, //
                C0, C0, C1, C0, //
                C0, C0, C0, -C1,
            ],
        ),
        Gate::Swap(a, b) => embed(
            n,
            &[a, b],
            &[
                C1, C0, C0, C0, //
                C0, C0, C1, C0, //
                C0, C1, C0, C0, //
                C0, C0, C0, C1,
            ],
        ),
    }
}

/// Dense `i^phase prod X^x Z^z`: column `c` maps to row `c ^ x` with value
/// `i^phase (-1)^{|z & c|}`.
pub fn pauli_matrix(p: &PauliWord) -> CMat {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let i = Complex64::new(0.0, 1.0);
    let phase = i.powu(p.phase_exp() as u32);
    let mut m = CMat::zeros(dim);
    for c in 0..dim {
        let r = c ^ (p.x_mask() as usize);
        let sign = if ((p.z_mask() as usize & c).count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        m.set(r, c, phase * sign);
    }
    m
}

/// `exp(-i theta P / 2) = cos(theta/2) I - i sin(theta/2) P` for Hermitian
/// involutions.
pub fn rotation_matrix(axis: &PauliWord, theta: f64) -> CMat {
    let dim = 1usize << axis.n_qubits();
    let p = pauli_matrix(axis);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut m = CMat::zeros(dim);
    for r in 0..dim {
        for col in 0..dim {
            let mut v = p.get(r, col) * Complex64::new(0.0, -s);
            if r == col {
                v += Complex64::new(c, 0.0);
            }
            m.set(r, col, v);
        }
    }
    m
}

pub fn op_matrix(n: usize, op: &CliffordOp) -> CMat {
    match op {
        CliffordOp::Gate(g) => gate_matrix(n, *g),
        CliffordOp::PauliRot {
            axis,
            quarter_turns,
        } => rotation_matrix(axis, *quarter_turns as f64 * std::f64::consts::FRAC_PI_2),
    }
}

/// Full circuit unitary: ops compose left of everything earlier in time.
pub fn circuit_unitary(c: &ParamCircuit) -> CMat {
    let n = c.n_qubits();
    let mut u = CMat::identity(1 << n);
    for layer in c.layers() {
        for op in layer.clifford_ops() {
            u = op_matrix(n, op).mul(&u);
        }
        u = rotation_matrix(layer.axis(), layer.angle()).mul(&u);
    }
    for op in c.final_ops() {
        u = op_matrix(n, op).mul(&u);
    }
    u
}

/// `<0| U^dag O U |0>` via the dense unitary.
pub fn dense_expectation(c: &ParamCircuit, o: &Observable) -> f64 {
    let psi = circuit_unitary(c).col0();
    let mut total = 0.0;
    for (w, p) in o.terms() {
        let pm = pauli_matrix(p);
        let mut val = C0;
        for r in 0..psi.len() {
            let mut row = C0;
            for col in 0..psi.len() {
                row += pm.get(r, col) * psi[col];
            }
            val += psi[r].conj() * row;
        }
        total += w * val.re;
    }
    total
}

/// Random canonical Hermitian non-identity word.
pub fn random_word(rng: &mut impl Rng, n: usize) -> PauliWord {
    let mask = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    loop {
        let x = rng.gen::<u128>() & mask;
        let z = rng.gen::<u128>() & mask;
        if x | z == 0 {
            continue;
        }
        let phase = ((x & z).count_ones() % 4) as u8;
        return PauliWord::from_parts(n, x, z, phase).unwrap();
    }
}

/// Random canonical Hermitian word of weight 1 or 2, the axis class the
/// noisy gate model supports.
pub fn random_low_weight_word(rng: &mut impl Rng, n: usize) -> PauliWord {
    let weight = if n >= 2 && rng.gen_bool(0.5) { 2 } else { 1 };
    let mut qubits = vec![rng.gen_range(0..n)];
    if weight == 2 {
        let mut p = rng.gen_range(0..n - 1);
        if p >= qubits[0] {
            p += 1;
        }
        qubits.push(p);
    }
    let (mut x, mut z) = (0u128, 0u128);
    for q in qubits {
        match rng.gen_range(0..3) {
            0 => x |= 1 << q,
            1 => z |= 1 << q,
            _ => {
                x |= 1 << q;
                z |= 1 << q;
            }
        }
    }
    let phase = ((x & z).count_ones() % 4) as u8;
    PauliWord::from_parts(n, x, z, phase).unwrap()
}

pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let q = rng.gen_range(0..n);
    if n >= 2 && rng.gen_bool(0.4) {
        let mut p = rng.gen_range(0..n - 1);
        if p >= q {
            p += 1;
        }
        match rng.gen_range(0..3) {
            0 => Gate::Cx(q, p),
            1 => Gate::Cz(q, p),
            _ => Gate::Swap(q, p),
        }
    } else {
        match rng.gen_range(0..6) {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::Sdg(q),
            3 => Gate::X(q),
            4 => Gate::Y(q),
            _ => Gate::Z(q),
        }
    }
}

/// Random circuit: `depth` layers of 0..=2 Clifford gates plus one rotation
/// with |angle| <= theta_star, and a trailing Clifford block half the time.
pub fn random_circuit(
    rng: &mut impl Rng,
    n: usize,
    depth: usize,
    theta_star: f64,
) -> ParamCircuit {
    use cpdr_core::circuit::CircuitBuilder;
    let mut b = CircuitBuilder::new(n);
    for _ in 0..depth {
        for _ in 0..rng.gen_range(0..=2) {
            b.gate(random_gate(rng, n)).unwrap();
        }
        let axis = random_word(rng, n);
        let angle = rng.gen_range(-theta_star..=theta_star);
        b.rotation(axis, angle).unwrap();
    }
    if rng.gen_bool(0.5) {
        for _ in 0..rng.gen_range(1..=2) {
            b.gate(random_gate(rng, n)).unwrap();
        }
    }
    b.finish().unwrap()
}

/// Like `random_circuit` but every rotation axis has weight at most 2, so
/// the noisy density-matrix path accepts it.
pub fn random_hardware_circuit(
    rng: &mut impl Rng,
    n: usize,
    depth: usize,
    theta_star: f64,
) -> ParamCircuit {
    use cpdr_core::circuit::CircuitBuilder;
    let mut b = CircuitBuilder::new(n);
    for _ in 0..depth {
        for _ in 0..rng.gen_range(0..=2) {
            b.gate(random_gate(rng, n)).unwrap();
        }
        let axis = random_low_weight_word(rng, n);
        let angle = rng.gen_range(-theta_star..=theta_star);
        b.rotation(axis, angle).unwrap();
    }
    if rng.gen_bool(0.5) {
        b.gate(random_gate(rng, n)).unwrap();
    }
    b.finish().unwrap()
}
