//! Brute-force reference simulators.
//!
//! `Statevector` evolves pure states exactly (n <= 20) by direct amplitude
//! kernels; it shares no code with the tableau or sparse-propagation paths,
//! so it doubles as the oracle they are checked against. `DensityMatrix`
//! (n <= 12) adds the gate-based noise model: each gate is followed by
//! thermal relaxation on its qubits for the gate duration, then a
//! depolarizing channel on its support. `TermSampler` turns exact per-term
//! expectations into finite-shot estimates with optional readout flips.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{CliffordOp, ParamCircuit};
use crate::error::{Error, Result};
use crate::pauli::{Gate, Observable, PauliWord};

pub const MAX_STATEVECTOR_QUBITS: usize = 20;
pub const MAX_DENSITY_QUBITS: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

// --- noise model ----------------------------------------------------------

/// Gate-based noise parameters. `scale` is the ZNE amplification factor G:
/// effective intensities are `scale * lambda` and effective durations
/// `scale * t`, so `with_scale` realizes the amplified-noise circuits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub lambda_single: f64,
    pub lambda_double: f64,
    pub t1: f64,
    pub t2: f64,
    pub t_single: f64,
    pub t_double: f64,
    pub readout_flip: f64,
    pub scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            lambda_single: 0.01,
            lambda_double: 0.04,
            t1: 100e-6,
            t2: 50e-6,
            t_single: 300e-9,
            t_double: 800e-9,
            readout_flip: 0.0,
            scale: 1.0,
        }
    }
}

impl NoiseModel {
    /// All channels are exact identities: zero intensities, zero durations.
    pub fn ideal() -> Self {
        NoiseModel {
            lambda_single: 0.0,
            lambda_double: 0.0,
            t_single: 0.0,
            t_double: 0.0,
            ..NoiseModel::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidNoiseModel { reason });
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::NoiseScale { value: self.scale });
        }
        for (name, l) in [
            ("lambda_single", self.lambda_single),
            ("lambda_double", self.lambda_double),
        ] {
            if !(0.0..=1.0).contains(&l) || !l.is_finite() {
                return bad(format!("{name} = {l} outside [0, 1]"));
            }
            // Scaled intensity must stay a probability; refuse rather than clamp.
            if self.scale * l > 1.0 {
                return Err(Error::NoiseScale { value: self.scale });
            }
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return bad(format!("T1 = {}, T2 = {} must be positive", self.t1, self.t2));
        }
        // Complete positivity of the relaxation channel.
        if self.t2 > 2.0 * self.t1 * (1.0 + 1e-12) {
            return bad(format!("T2 = {} exceeds 2*T1 = {}", self.t2, 2.0 * self.t1));
        }
        if self.t_single < 0.0 || self.t_double < 0.0 {
            return bad("gate durations must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.readout_flip) {
            return bad(format!("readout_flip = {} outside [0, 1]", self.readout_flip));
        }
        Ok(())
    }

    /// Copy with the amplification factor replaced (not compounded).
    pub fn with_scale(&self, g: f64) -> Result<NoiseModel> {
        let nm = NoiseModel { scale: g, ..*self };
        nm.validate()?;
        Ok(nm)
    }

    /// Effective (intensity, duration) for a gate of the given qubit count.
    fn gate_noise(&self, weight: usize) -> Result<(f64, f64)> {
        match weight {
            1 => Ok((self.scale * self.lambda_single, self.scale * self.t_single)),
            2 => Ok((self.scale * self.lambda_double, self.scale * self.t_double)),
            w => Err(Error::UnsupportedAxisWeight { weight: w }),
        }
    }

    /// `(e^{-t/T1}, e^{-t/T2})` for an effective duration `t`.
    fn relaxation_factors(&self, t: f64) -> (f64, f64) {
        ((-t / self.t1).exp(), (-t / self.t2).exp())
    }

    /// True when every channel reduces to the identity.
    pub fn is_noiseless(&self) -> bool {
        self.scale * self.lambda_single == 0.0
            && self.scale * self.lambda_double == 0.0
            && self.scale * self.t_single == 0.0
            && self.scale * self.t_double == 0.0
    }
}

// --- shared index helpers -------------------------------------------------

fn support_qubits(p: &PauliWord) -> Vec<usize> {
    let mut qs = Vec::with_capacity(p.weight());
    let mut s = p.support();
    while s != 0 {
        qs.push(s.trailing_zeros() as usize);
        s &= s - 1;
    }
    qs
}

/// Scatter the low bits of `s` onto the listed qubit positions.
#[inline]
fn spread(s: usize, masks: &[usize]) -> usize {
    let mut idx = 0;
    for (j, &m) in masks.iter().enumerate() {
        if (s >> j) & 1 == 1 {
            idx |= m;
        }
    }
    idx
}

/// Apply a `2^k x 2^k` unitary (row-major, local bit j = `support[j]`) to
/// every block of the strided vector `data[offset + i * stride]`.
fn apply_small_unitary(
    data: &mut [Complex64],
    offset: usize,
    stride: usize,
    index_space: usize,
    support: &[usize],
    u: &[Complex64],
) {
    let k = support.len();
    let sub = 1usize << k;
    debug_assert_eq!(u.len(), sub * sub);
    let masks: Vec<usize> = support.iter().map(|&q| 1usize << q).collect();
    let sup_mask: usize = masks.iter().fold(0, |a, m| a | m);
    let offs: Vec<usize> = (0..sub).map(|s| spread(s, &masks)).collect();
    let mut scratch = [ZERO; 4];
    for base in 0..index_space {
        if base & sup_mask != 0 {
            continue;
        }
        for s in 0..sub {
            scratch[s] = data[offset + (base | offs[s]) * stride];
        }
        for (s_out, row) in u.chunks_exact(sub).enumerate() {
            let mut acc = ZERO;
            for s_in in 0..sub {
                acc += row[s_in] * scratch[s_in];
            }
            data[offset + (base | offs[s_out]) * stride] = acc;
        }
    }
}

fn gate_unitary(g: Gate) -> (Vec<usize>, Vec<Complex64>) {
    let r = |v: f64| Complex64::new(v, 0.0);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::H(q) => (vec![q], vec![r(s2), r(s2), r(s2), -r(s2)]),
        Gate::S(q) => (vec![q], vec![ONE, ZERO, ZERO, I]),
        Gate::Sdg(q) => (vec![q], vec![ONE, ZERO, ZERO, -I]),
        Gate::X(q) => (vec![q], vec![ZERO, ONE, ONE, ZERO]),
        Gate::Y(q) => (vec![q], vec![ZERO, -I, I, ZERO]),
        Gate::Z(q) => (vec![q], vec![ONE, ZERO, ZERO, -ONE]),
        // Local bit 0 is the first support qubit: with support [c, t] the
        // basis order is |t c> pairs (c varies fastest).
        Gate::Cx(c, t) => (
            vec![c, t],
            vec![
                ONE, ZERO, ZERO, ZERO, //
                ZERO, ZERO, ZERO, ONE, //
                ZERO, ZERO, ONE, ZERO, //
                ZERO, ONE, ZERO, ZERO,
            ],
        ),
        Gate::Cz(a, b) => (
            vec![a, b],
            vec![
                ONE, ZERO, ZERO, ZERO, //
                ZERO, ONE, ZERO, ZERO, //
                ZERO, ZERO, ONE, ZERO, //
                ZERO, ZERO, ZERO, -ONE,
            ],
        ),
        Gate::Swap(a, b) => (
            vec![a, b],
            vec![
                ONE, ZERO, ZERO, ZERO, //
                ZERO, ZERO, ONE, ZERO, //
                ZERO, ONE, ZERO, ZERO, //
                ZERO, ZERO, ZERO, ONE,
            ],
        ),
    }
}

/// `exp(-i theta/2 P)` restricted to the support of `axis` (which must be a
/// +signed Hermitian word): `cos(theta/2) I - i sin(theta/2) P_sub`.
fn rotation_unitary(axis: &PauliWord, theta: f64) -> Result<(Vec<usize>, Vec<Complex64>)> {
    let (sign, p) = axis.hermitian_sign()?;
    let qs = support_qubits(&p);
    let k = qs.len();
    let sub = 1usize << k;
    let mut subx: u128 = 0;
    let mut subz: u128 = 0;
    for (j, &q) in qs.iter().enumerate() {
        subx |= ((p.x_mask() >> q) & 1) << j;
        subz |= ((p.z_mask() >> q) & 1) << j;
    }
    // Restriction keeps the Y count, so the canonical Hermitian phase carries over.
    let sub_phase = ((subx & subz).count_ones() % 4) as u8;
    let sub_word = PauliWord::from_parts(k, subx, subz, sub_phase)?;
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin() * sign);
    let mut u = vec![ZERO; sub * sub];
    for row in 0..sub as u128 {
        let col = row ^ subx;
        if let Some((re, im)) = sub_word.matrix_element(row, col) {
            u[row as usize * sub + col as usize] = -I * s * Complex64::new(re, im);
        }
    }
    for d in 0..sub {
        u[d * sub + d] += Complex64::new(c, 0.0);
    }
    Ok((qs, u))
}

// --- pure statevector -----------------------------------------------------

#[derive(Debug, Clone)]
pub struct Statevector {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl Statevector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::DenseLimit {
                context: "statevector",
                n_qubits,
                max: MAX_STATEVECTOR_QUBITS,
            });
        }
        let mut data = vec![ZERO; 1 << n_qubits];
        data[0] = ONE;
        Ok(Statevector { n_qubits, data })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitude(&self, basis: usize) -> Complex64 {
        self.data[basis]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        let (support, u) = gate_unitary(g);
        apply_small_unitary(&mut self.data, 0, 1, 1 << self.n_qubits, &support, &u);
        Ok(())
    }

    /// `exp(-i theta/2 P)` for a Hermitian signed axis of any weight,
    /// applied pairwise without forming the matrix.
    pub fn apply_rotation(&mut self, axis: &PauliWord, theta: f64) -> Result<()> {
        self.check_width(axis)?;
        let (sign, p) = axis.hermitian_sign()?;
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let ms = -I * ((theta / 2.0).sin() * sign);
        let x = p.x_mask() as usize;
        let dim = self.data.len();
        if x == 0 {
            for r in 0..dim {
                let (re, im) = p.matrix_element(r as u128, r as u128).unwrap();
                self.data[r] *= c + ms * Complex64::new(re, im);
            }
            return Ok(());
        }
        let hi = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for r in 0..dim {
            if r & hi != 0 {
                continue;
            }
            let r2 = r ^ x;
            let (re1, im1) = p.matrix_element(r as u128, r2 as u128).unwrap();
            let (re2, im2) = p.matrix_element(r2 as u128, r as u128).unwrap();
            let (u, v) = (self.data[r], self.data[r2]);
            self.data[r] = c * u + ms * Complex64::new(re1, im1) * v;
            self.data[r2] = c * v + ms * Complex64::new(re2, im2) * u;
        }
        Ok(())
    }

    pub fn apply_clifford_op(&mut self, op: &CliffordOp) -> Result<()> {
        match op {
            CliffordOp::Gate(g) => self.apply_gate(*g),
            CliffordOp::PauliRot {
                axis,
                quarter_turns,
            } => self.apply_rotation(axis, *quarter_turns as f64 * std::f64::consts::FRAC_PI_2),
        }
    }

    pub fn apply_circuit(&mut self, c: &ParamCircuit) -> Result<()> {
        if c.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: c.n_qubits(),
                right: self.n_qubits,
            });
        }
        for layer in c.layers() {
            for op in layer.clifford_ops() {
                self.apply_clifford_op(op)?;
            }
            self.apply_rotation(layer.axis(), layer.angle())?;
        }
        for op in c.final_ops() {
            self.apply_clifford_op(op)?;
        }
        Ok(())
    }

    pub fn expectation(&self, p: &PauliWord) -> Result<f64> {
        self.check_width(p)?;
        let (sign, p) = p.hermitian_sign()?;
        let x = p.x_mask() as usize;
        let mut acc = ZERO;
        for r in 0..self.data.len() {
            let r2 = r ^ x;
            let (re, im) = p.matrix_element(r as u128, r2 as u128).unwrap();
            acc += self.data[r].conj() * Complex64::new(re, im) * self.data[r2];
        }
        debug_assert!(acc.im.abs() < 1e-9);
        Ok(sign * acc.re)
    }

    pub fn expectation_obs(&self, o: &Observable) -> Result<f64> {
        if o.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: o.n_qubits(),
                right: self.n_qubits,
            });
        }
        let mut acc = 0.0;
        for (w, p) in o.terms() {
            acc += w * self.expectation(p)?;
        }
        Ok(acc)
    }

    fn check_width(&self, p: &PauliWord) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: p.n_qubits(),
                right: self.n_qubits,
            });
        }
        Ok(())
    }
}

/// Noiseless expectation `<0| C^dag O C |0>` by statevector evolution.
pub fn exact_expectation(c: &ParamCircuit, o: &Observable) -> Result<f64> {
    let mut psi = Statevector::zero_state(c.n_qubits())?;
    psi.apply_circuit(c)?;
    psi.expectation_obs(o)
}

// --- density matrix -------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::DenseLimit {
                context: "density matrix",
                n_qubits,
                max: MAX_DENSITY_QUBITS,
            });
        }
        let dim = 1 << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        data[0] = ONE;
        Ok(DensityMatrix {
            n_qubits,
            dim,
            data,
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|d| self.data[d * self.dim + d]).sum()
    }

    /// `rho -> U rho U^dag` for a small unitary on listed qubits: transform
    /// every column by `U`, then every row by `conj(U)`.
    fn apply_unitary(&mut self, support: &[usize], u: &[Complex64]) {
        for col in 0..self.dim {
            apply_small_unitary(&mut self.data, col, self.dim, self.dim, support, u);
        }
        let u_conj: Vec<Complex64> = u.iter().map(|m| m.conj()).collect();
        for row in 0..self.dim {
            apply_small_unitary(&mut self.data, row * self.dim, 1, self.dim, support, &u_conj);
        }
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        let (support, u) = gate_unitary(g);
        self.apply_unitary(&support, &u);
        Ok(())
    }

    pub fn apply_rotation(&mut self, axis: &PauliWord, theta: f64) -> Result<()> {
        self.check_width(axis)?;
        if axis.weight() > 2 {
            return Err(Error::UnsupportedAxisWeight {
                weight: axis.weight(),
            });
        }
        let (support, u) = rotation_unitary(axis, theta)?;
        self.apply_unitary(&support, &u);
        Ok(())
    }

    /// Conjugation `rho -> P rho P` by a Pauli word (its phase cancels).
    /// Used for noiseless frame insertions between layers.
    pub fn apply_pauli(&mut self, p: &PauliWord) -> Result<()> {
        self.check_width(p)?;
        for q in support_qubits(p) {
            let m = 1usize << q;
            let x = (p.x_mask() >> q) & 1 == 1;
            let z = (p.z_mask() >> q) & 1 == 1;
            if z {
                // Phase (-1)^{row_bit xor col_bit}.
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        if (r & m != 0) != (c & m != 0) {
                            self.data[r * self.dim + c] = -self.data[r * self.dim + c];
                        }
                    }
                }
            }
            if x {
                // Swap the bit in both row and column index.
                for r in 0..self.dim {
                    if r & m != 0 {
                        continue;
                    }
                    for c in 0..self.dim {
                        let (a, b) = (r * self.dim + c, (r | m) * self.dim + (c ^ m));
                        self.data.swap(a, b);
                    }
                }
            }
        }
        Ok(())
    }

    /// Single-qubit relaxation block map with factors `e1 = e^{-t/T1}`,
    /// `e2 = e^{-t/T2}`: population flows from the qubit's 0-block into the
    /// 1-block and coherences shrink by `e2`.
    pub fn thermal_relax(&mut self, qubit: usize, e1: f64, e2: f64) {
        if e1 == 1.0 && e2 == 1.0 {
            return;
        }
        let m = 1usize << qubit;
        for r in 0..self.dim {
            if r & m != 0 {
                continue;
            }
            for c in 0..self.dim {
                if c & m != 0 {
                    continue;
                }
                let i00 = r * self.dim + c;
                let i01 = r * self.dim + (c | m);
                let i10 = (r | m) * self.dim + c;
                let i11 = (r | m) * self.dim + (c | m);
                let p00 = self.data[i00];
                self.data[i00] = e1 * p00;
                self.data[i11] += (1.0 - e1) * p00;
                self.data[i01] *= e2;
                self.data[i10] *= e2;
            }
        }
    }

    /// `rho -> (1 - lambda) rho + lambda tr_S(rho) (x) I/2^k` on the support.
    pub fn depolarize(&mut self, support: &[usize], lambda: f64) {
        if lambda == 0.0 || support.is_empty() {
            return;
        }
        let k = support.len();
        let sub = 1usize << k;
        let masks: Vec<usize> = support.iter().map(|&q| 1usize << q).collect();
        let sup_mask: usize = masks.iter().fold(0, |a, m| a | m);
        let offs: Vec<usize> = (0..sub).map(|s| spread(s, &masks)).collect();
        let keep = 1.0 - lambda;
        for rb in 0..self.dim {
            if rb & sup_mask != 0 {
                continue;
            }
            for cb in 0..self.dim {
                if cb & sup_mask != 0 {
                    continue;
                }
                let mut t = ZERO;
                for &o in &offs {
                    t += self.data[(rb | o) * self.dim + (cb | o)];
                }
                let mix = t * (lambda / sub as f64);
                for &ro in &offs {
                    for &co in &offs {
                        let idx = (rb | ro) * self.dim + (cb | co);
                        self.data[idx] *= keep;
                        if ro == co {
                            self.data[idx] += mix;
                        }
                    }
                }
            }
        }
    }

    /// `tr(rho P)`.
    pub fn expect(&self, p: &PauliWord) -> Result<f64> {
        self.check_width(p)?;
        let (sign, p) = p.hermitian_sign()?;
        let x = p.x_mask() as usize;
        let mut acc = ZERO;
        for b in 0..self.dim {
            let b2 = b ^ x;
            let (re, im) = p.matrix_element(b as u128, b2 as u128).unwrap();
            acc += Complex64::new(re, im) * self.data[b2 * self.dim + b];
        }
        debug_assert!(acc.im.abs() < 1e-9);
        Ok(sign * acc.re)
    }

    pub fn expect_obs(&self, o: &Observable) -> Result<f64> {
        if o.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: o.n_qubits(),
                right: self.n_qubits,
            });
        }
        let mut acc = 0.0;
        for (w, p) in o.terms() {
            acc += w * self.expect(p)?;
        }
        Ok(acc)
    }

    fn check_width(&self, p: &PauliWord) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: p.n_qubits(),
                right: self.n_qubits,
            });
        }
        Ok(())
    }
}

// --- noisy evolution ------------------------------------------------------

fn apply_gate_noise(rho: &mut DensityMatrix, support: &[usize], nm: &NoiseModel) -> Result<()> {
    let (lambda, t) = nm.gate_noise(support.len())?;
    let (e1, e2) = nm.relaxation_factors(t);
    for &q in support {
        rho.thermal_relax(q, e1, e2);
    }
    rho.depolarize(support, lambda);
    Ok(())
}

/// One Clifford gate followed by its noise channels.
pub fn apply_noisy_clifford_op(
    rho: &mut DensityMatrix,
    op: &CliffordOp,
    nm: &NoiseModel,
) -> Result<()> {
    match op {
        CliffordOp::Gate(g) => {
            rho.apply_gate(*g)?;
            let (a, b) = g.qubits();
            let mut support = vec![a];
            if let Some(b) = b {
                support.push(b);
            }
            apply_gate_noise(rho, &support, nm)
        }
        CliffordOp::PauliRot {
            axis,
            quarter_turns,
        } => apply_noisy_rotation(
            rho,
            axis,
            *quarter_turns as f64 * std::f64::consts::FRAC_PI_2,
            nm,
        ),
    }
}

/// One rotation layer, counted as a single gate of its axis weight.
/// The noise applies even at angle zero: the hardware still runs the gate.
pub fn apply_noisy_rotation(
    rho: &mut DensityMatrix,
    axis: &PauliWord,
    angle: f64,
    nm: &NoiseModel,
) -> Result<()> {
    rho.apply_rotation(axis, angle)?;
    let support = support_qubits(axis);
    apply_gate_noise(rho, &support, nm)
}

/// One full layer: Clifford block, then the rotation, each with noise.
pub fn apply_noisy_layer(
    rho: &mut DensityMatrix,
    layer: &crate::circuit::Layer,
    nm: &NoiseModel,
) -> Result<()> {
    for op in layer.clifford_ops() {
        apply_noisy_clifford_op(rho, op, nm)?;
    }
    apply_noisy_rotation(rho, layer.axis(), layer.angle(), nm)
}

/// Full noisy state of the circuit under the (scaled) noise model.
pub fn noisy_final_state(c: &ParamCircuit, nm: &NoiseModel) -> Result<DensityMatrix> {
    nm.validate()?;
    let mut rho = DensityMatrix::zero_state(c.n_qubits())?;
    for layer in c.layers() {
        apply_noisy_layer(&mut rho, layer, nm)?;
    }
    for op in c.final_ops() {
        apply_noisy_clifford_op(&mut rho, op, nm)?;
    }
    Ok(rho)
}

/// `tr(O rho_final)` under the gate noise model.
pub fn noisy_expectation(c: &ParamCircuit, o: &Observable, nm: &NoiseModel) -> Result<f64> {
    noisy_final_state(c, nm)?.expect_obs(o)
}

// --- finite-shot sampling -------------------------------------------------

/// Per-term measurement model: term t with Pauli weight w_t and exact value
/// mu_t is estimated from `shots` two-outcome draws with success probability
/// (1 + (1-2f)^{w_t} mu_t)/2, where f is the readout flip probability
/// applied independently per measured qubit.
#[derive(Debug, Clone)]
pub struct TermSampler {
    terms: Vec<(f64, f64)>,
}

impl TermSampler {
    /// Exact per-term values straight from a density matrix.
    pub fn from_density(rho: &DensityMatrix, o: &Observable, flip: f64) -> Result<Self> {
        let means = o
            .terms()
            .iter()
            .map(|(_, p)| rho.expect(p))
            .collect::<Result<Vec<_>>>()?;
        Self::from_term_means(o, &means, flip)
    }

    /// `means[t]` is the exact `tr(rho P_t)` for the t-th observable term.
    pub fn from_term_means(o: &Observable, means: &[f64], flip: f64) -> Result<Self> {
        if means.len() != o.terms().len() {
            return Err(Error::LengthMismatch {
                expected: o.terms().len(),
                got: means.len(),
            });
        }
        if !(0.0..=1.0).contains(&flip) {
            return Err(Error::InvalidNoiseModel {
                reason: format!("readout_flip = {flip} outside [0, 1]"),
            });
        }
        let mut terms = Vec::with_capacity(means.len());
        for ((w, p), &mu) in o.terms().iter().zip(means) {
            if mu.abs() > 1.0 + 1e-6 {
                return Err(Error::InvalidState {
                    reason: format!("term expectation {mu} outside [-1, 1]"),
                });
            }
            let damped = (1.0 - 2.0 * flip).powi(p.weight() as i32) * mu.clamp(-1.0, 1.0);
            terms.push((*w, damped));
        }
        Ok(TermSampler { terms })
    }

    /// Infinite-shot limit: the flip-damped expectation.
    pub fn mean(&self) -> f64 {
        self.terms.iter().map(|(w, m)| w * m).sum()
    }

    pub fn sample_with(&self, shots: u64, rng: &mut impl Rng) -> Result<f64> {
        if shots == 0 {
            return Err(Error::InvalidState {
                reason: "shots must be at least 1".into(),
            });
        }
        let mut acc = 0.0;
        for &(w, m) in &self.terms {
            let p = ((1.0 + m) / 2.0).clamp(0.0, 1.0);
            let dist = Binomial::new(shots, p).map_err(|e| Error::InvalidState {
                reason: format!("binomial parameters: {e}"),
            })?;
            let ups = dist.sample(rng);
            let outcome = (2.0 * ups as f64 - shots as f64) / shots as f64;
            acc += w * outcome;
        }
        Ok(acc)
    }

    pub fn sample(&self, shots: u64, seed: u64) -> Result<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        self.sample_with(shots, &mut rng)
    }
}

/// Finite-shot estimate of `tr(O rho)` with per-qubit readout flips.
pub fn sample_expectation(
    rho: &DensityMatrix,
    o: &Observable,
    shots: u64,
    seed: u64,
    readout_flip: f64,
) -> Result<f64> {
    TermSampler::from_density(rho, o, readout_flip)?.sample(shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ising_trotter, CircuitBuilder, IsingSpec};
    use approx::assert_abs_diff_eq;

    fn p(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    fn rx_circuit(theta: f64) -> ParamCircuit {
        let mut b = CircuitBuilder::new(1);
        b.rotation(p("X"), theta).unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn empty_circuit_measures_one() {
        let c = CircuitBuilder::new(3).finish().unwrap();
        let o = Observable::single(p("ZII")).unwrap();
        assert_abs_diff_eq!(exact_expectation(&c, &o).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn x_rotation_tilts_z() {
        for theta in [0.0, 0.3, -1.1, std::f64::consts::PI] {
            let c = rx_circuit(theta);
            let o = Observable::single(p("Z")).unwrap();
            assert_abs_diff_eq!(
                exact_expectation(&c, &o).unwrap(),
                theta.cos(),
                epsilon = 1e-12
            );
            let o = Observable::single(p("Y")).unwrap();
            assert_abs_diff_eq!(
                exact_expectation(&c, &o).unwrap(),
                -theta.sin(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn identity_angle_ising_is_identity() {
        let spec = IsingSpec::chain(9, 5, 0.0, 0.0);
        let c = build_ising_trotter(&spec, None).unwrap();
        let o = Observable::magnetization_z(9).unwrap();
        assert_abs_diff_eq!(exact_expectation(&c, &o).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gate_kernels_move_amplitudes_as_expected() {
        let mut psi = Statevector::zero_state(2).unwrap();
        psi.apply_gate(Gate::X(0)).unwrap();
        psi.apply_gate(Gate::Cx(0, 1)).unwrap();
        // |q0 q1> = |11> lives at index 3.
        assert_abs_diff_eq!(psi.amplitude(3).re, 1.0, epsilon = 1e-15);

        let mut psi = Statevector::zero_state(1).unwrap();
        psi.apply_gate(Gate::H(0)).unwrap();
        psi.apply_gate(Gate::S(0)).unwrap();
        assert_abs_diff_eq!(psi.expectation(&p("Y")).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotations_satisfy_period_and_composition() {
        let mut psi = Statevector::zero_state(2).unwrap();
        psi.apply_gate(Gate::H(0)).unwrap();
        let mut other = psi.clone();
        psi.apply_rotation(&p("ZZ"), 0.7).unwrap();
        psi.apply_rotation(&p("ZZ"), -0.7).unwrap();
        for b in 0..4 {
            assert_abs_diff_eq!(
                psi.amplitude(b).re,
                other.amplitude(b).re,
                epsilon = 1e-12
            );
        }
        // Quarter-turn composition: two pi/2 X-rotations flip Z.
        other.apply_rotation(&p("XI"), std::f64::consts::FRAC_PI_2).unwrap();
        other.apply_rotation(&p("XI"), std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(other.expectation(&p("IZ")).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_density_matrix_matches_statevector() {
        let spec = IsingSpec::chain(3, 2, -0.8, 0.5);
        let c = build_ising_trotter(&spec, None).unwrap();
        let o = Observable::magnetization_z(3).unwrap();
        let nm = NoiseModel::ideal();
        assert!(nm.is_noiseless());
        let exact = exact_expectation(&c, &o).unwrap();
        let noisy = noisy_expectation(&c, &o, &nm).unwrap();
        assert_abs_diff_eq!(exact, noisy, epsilon = 1e-10);
    }

    #[test]
    fn single_depolarizing_rotation_scales_cosine() {
        let lambda = 0.23;
        let nm = NoiseModel {
            lambda_single: lambda,
            t_single: 0.0,
            ..NoiseModel::ideal()
        };
        let theta = 0.9;
        let o = Observable::single(p("Z")).unwrap();
        let got = noisy_expectation(&rx_circuit(theta), &o, &nm).unwrap();
        assert_abs_diff_eq!(got, (1.0 - lambda) * theta.cos(), epsilon = 1e-12);
    }

    #[test]
    fn full_depolarizing_erases_traceless_observables() {
        let nm = NoiseModel {
            lambda_single: 1.0,
            lambda_double: 1.0,
            t_single: 0.0,
            t_double: 0.0,
            ..NoiseModel::ideal()
        };
        let o = Observable::single(p("Z")).unwrap();
        let got = noisy_expectation(&rx_circuit(0.4), &o, &nm).unwrap();
        assert_abs_diff_eq!(got, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_block_map_hand_values() {
        let (e1, e2) = (0.8, 0.65);
        let mut rho = DensityMatrix::zero_state(1).unwrap();
        rho.thermal_relax(0, e1, e2);
        // Population leaves the 0-block as printed in the channel matrix.
        assert_abs_diff_eq!(rho.entry(0, 0).re, e1, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.entry(1, 1).re, 1.0 - e1, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.expect(&p("Z")).unwrap(), 2.0 * e1 - 1.0, epsilon = 1e-12);

        let mut plus = DensityMatrix::zero_state(1).unwrap();
        plus.apply_gate(Gate::H(0)).unwrap();
        plus.thermal_relax(0, e1, e2);
        assert_abs_diff_eq!(plus.expect(&p("X")).unwrap(), e2, epsilon = 1e-12);
        assert_abs_diff_eq!(plus.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noise_grows_with_scale() {
        let nm = NoiseModel {
            lambda_single: 0.05,
            t_single: 0.0,
            ..NoiseModel::ideal()
        };
        let o = Observable::single(p("Z")).unwrap();
        let mut last = f64::INFINITY;
        for g in [1.0, 1.2, 1.6, 2.5] {
            let v = noisy_expectation(&rx_circuit(0.3), &o, &nm.with_scale(g).unwrap())
                .unwrap()
                .abs();
            assert!(v < last, "|value| should shrink as G grows");
            last = v;
        }
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::default().validate().is_ok());
        assert!(NoiseModel::default().with_scale(30.0).is_err());
        assert!(NoiseModel::default().with_scale(-1.0).is_err());
        assert!(NoiseModel::default().with_scale(0.0).is_err());
        let bad_t2 = NoiseModel {
            t2: 250e-6,
            ..NoiseModel::default()
        };
        assert!(bad_t2.validate().is_err());
        let bad_flip = NoiseModel {
            readout_flip: 1.5,
            ..NoiseModel::default()
        };
        assert!(bad_flip.validate().is_err());
    }

    #[test]
    fn high_weight_axes_rejected_in_noisy_path() {
        let mut b = CircuitBuilder::new(3);
        b.rotation(p("XXX"), 0.2).unwrap();
        let c = b.finish().unwrap();
        let o = Observable::single(p("ZII")).unwrap();
        let err = noisy_expectation(&c, &o, &NoiseModel::default());
        assert!(matches!(err, Err(Error::UnsupportedAxisWeight { weight: 3 })));
        // The weight-3 rotation is still fine noiselessly.
        assert!(exact_expectation(&c, &o).is_ok());
    }

    #[test]
    fn pauli_conjugation_flips_frames() {
        let spec = IsingSpec::chain(2, 1, -0.6, 0.4);
        let c = build_ising_trotter(&spec, None).unwrap();
        let mut rho = noisy_final_state(&c, &NoiseModel::default()).unwrap();
        let before = rho.expect(&p("ZI")).unwrap();
        rho.apply_pauli(&p("XI")).unwrap();
        assert_abs_diff_eq!(rho.expect(&p("ZI")).unwrap(), -before, epsilon = 1e-12);
        rho.apply_pauli(&p("XI")).unwrap();
        assert_abs_diff_eq!(rho.expect(&p("ZI")).unwrap(), before, epsilon = 1e-12);
    }

    #[test]
    fn sampler_is_exact_on_eigenstates_and_deterministic() {
        let rho = DensityMatrix::zero_state(2).unwrap();
        let o = Observable::single(p("ZZ")).unwrap();
        for seed in [0, 1, 99] {
            let v = sample_expectation(&rho, &o, 17, seed, 0.0).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        }
        let mut rho = rho;
        rho.apply_gate(Gate::H(0)).unwrap();
        let a = sample_expectation(&rho, &o, 1000, 7, 0.0).unwrap();
        let b = sample_expectation(&rho, &o, 1000, 7, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn readout_flips_damp_by_term_weight() {
        let rho = DensityMatrix::zero_state(2).unwrap();
        let f = 0.1;
        let o = Observable::new(2, vec![(1.0, p("ZZ")), (0.5, p("ZI"))]).unwrap();
        let sampler = TermSampler::from_density(&rho, &o, f).unwrap();
        let expect = (1.0 - 2.0 * f).powi(2) + 0.5 * (1.0 - 2.0 * f);
        assert_abs_diff_eq!(sampler.mean(), expect, epsilon = 1e-12);
        // Fully random readout erases every non-identity term.
        let dead = TermSampler::from_density(&rho, &o, 0.5).unwrap();
        assert_abs_diff_eq!(dead.mean(), 0.0, epsilon = 1e-15);
    }
}
