//! Sparse Pauli dynamics: Heisenberg back-propagation of an observable with
//! truncation on the number of sin factors, the analytic truncation-error
//! bounds, and Pauli-path utilities for the orthogonality diagnostics.
//!
//! A circuit layer is `R C` in time order, so back-propagation applies
//! `O <- C^dag (R^dag O R) C` per layer, last layer first. An anticommuting
//! rotation axis splits a term into a cos branch (same sin count) and a sin
//! branch (`i P sigma`, sin count + 1); branches beyond `M` sins are pruned.
//! Terms are kept canonical Hermitian with real coefficients and merged by
//! `(pauli, sin_count)` after every layer.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::ParamCircuit;
use crate::error::{Error, Result};
use crate::pauli::{CliffordTableau, Observable, PauliWord};

/// Coefficients with magnitude below this are dropped after each layer.
/// Purely numerical hygiene; unrelated to the truncation bounds.
const COEF_FLOOR: f64 = 1e-14;

// --- sparse initial state -------------------------------------------------

/// Initial density operator as an explicit list of nonzero entries
/// `(row, col, amplitude)`. The entry budget keeps trace evaluation cheap;
/// states denser than polynomial in n belong in the dense simulators.
#[derive(Debug, Clone)]
pub struct SparseInitialState {
    n_qubits: usize,
    entries: Vec<(u128, u128, Complex64)>,
}

impl SparseInitialState {
    /// `|0...0><0...0|`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, vec![(0, 0, Complex64::new(1.0, 0.0))])
    }

    pub fn new(n_qubits: usize, entries: Vec<(u128, u128, Complex64)>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::pauli::MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n_qubits,
                max: crate::pauli::MAX_QUBITS,
            });
        }
        let budget = 16 * n_qubits * n_qubits + 16;
        if entries.len() > budget {
            return Err(Error::EntryBudget {
                entries: entries.len(),
                budget,
            });
        }
        let in_range = |i: u128| n_qubits == 128 || i >> n_qubits == 0;
        let mut merged: std::collections::BTreeMap<(u128, u128), Complex64> =
            std::collections::BTreeMap::new();
        for &(a, b, v) in &entries {
            if !in_range(a) || !in_range(b) {
                return Err(Error::InvalidState {
                    reason: format!("basis index ({a}, {b}) outside {n_qubits} qubits"),
                });
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidState {
                    reason: "non-finite amplitude".into(),
                });
            }
            *merged.entry((a, b)).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        let mut trace = Complex64::new(0.0, 0.0);
        for (&(a, b), &v) in &merged {
            if a == b {
                trace += v;
            }
            let mirror = merged
                .get(&(b, a))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            if (mirror - v.conj()).norm() > 1e-9 {
                return Err(Error::InvalidState {
                    reason: format!("entry ({a}, {b}) breaks Hermiticity"),
                });
            }
        }
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::InvalidState {
                reason: format!("trace {trace} is not 1"),
            });
        }
        let entries = merged.into_iter().map(|((a, b), v)| (a, b, v)).collect();
        Ok(SparseInitialState { n_qubits, entries })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// `tr(rho sigma)` for a canonical Hermitian word.
    pub fn expectation_of(&self, word: &PauliWord) -> Result<f64> {
        if word.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                left: word.n_qubits(),
                right: self.n_qubits,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b, v) in &self.entries {
            if let Some((re, im)) = word.matrix_element(b, a) {
                acc += v * Complex64::new(re, im);
            }
        }
        debug_assert!(acc.im.abs() < 1e-9);
        Ok(acc.re)
    }
}

// --- truncated propagation ------------------------------------------------

/// Result of one truncated propagation; `value` is the estimate itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpdEstimate {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    /// Merged terms surviving at the input side, summed over observable terms.
    pub terms_alive: usize,
    /// Largest merged term count seen after any layer.
    pub peak_terms: usize,
    /// Sin branches discarded for exceeding M.
    pub pruned: u64,
    pub value: f64,
}

#[derive(Clone, Copy)]
struct Term {
    x: u128,
    z: u128,
    sin: u16,
    coef: f64,
}

#[inline]
fn canonical_phase(x: u128, z: u128) -> u8 {
    ((x & z).count_ones() % 4) as u8
}

/// Sign of the canonical Hermitian form of `i * P * sigma` for anticommuting
/// canonical words, along with the product masks.
#[inline]
fn sin_branch(px: u128, pz: u128, x: u128, z: u128) -> (u128, u128, f64) {
    let nx = px ^ x;
    let nz = pz ^ z;
    let phase = canonical_phase(px, pz) as u32
        + canonical_phase(x, z) as u32
        + 2 * ((pz & x).count_ones() & 1)
        + 1;
    let rel = (phase + 8 - canonical_phase(nx, nz) as u32) % 4;
    debug_assert!(rel % 2 == 0, "sin branch of anticommuting words must be Hermitian");
    let sign = if rel == 0 { 1.0 } else { -1.0 };
    (nx, nz, sign)
}

fn merge_terms(terms: &mut Vec<Term>) {
    terms.sort_unstable_by(|a, b| {
        (a.x, a.z, a.sin).cmp(&(b.x, b.z, b.sin))
    });
    let mut out = 0;
    let mut i = 0;
    while i < terms.len() {
        let mut acc = terms[i];
        let mut j = i + 1;
        while j < terms.len()
            && terms[j].x == acc.x
            && terms[j].z == acc.z
            && terms[j].sin == acc.sin
        {
            acc.coef += terms[j].coef;
            j += 1;
        }
        if acc.coef.abs() >= COEF_FLOOR {
            terms[out] = acc;
            out += 1;
        }
        i = j;
    }
    terms.truncate(out);
}

/// Truncated Heisenberg estimate of `tr(rho C^dag O C)` keeping only terms
/// with at most `m` sin factors. Exact when `m >= depth`.
pub fn spd_expectation(
    c: &ParamCircuit,
    o: &Observable,
    rho: &SparseInitialState,
    m: usize,
) -> Result<SpdEstimate> {
    let n = c.n_qubits();
    if o.n_qubits() != n {
        return Err(Error::SizeMismatch {
            left: o.n_qubits(),
            right: n,
        });
    }
    if rho.n_qubits() != n {
        return Err(Error::SizeMismatch {
            left: rho.n_qubits(),
            right: n,
        });
    }
    let l = c.depth();
    if l > u16::MAX as usize {
        return Err(Error::InvalidCircuit {
            reason: format!("depth {l} exceeds the propagation limit"),
        });
    }
    let m_cap = m.min(l) as u16;
    let final_identity = c.final_clifford().is_identity();
    let layer_identity: Vec<bool> = c.layers().iter().map(|lr| lr.clifford().is_identity()).collect();

    let mut est = SpdEstimate {
        m,
        l,
        terms_alive: 0,
        peak_terms: 0,
        pruned: 0,
        value: 0.0,
    };

    for (w, seed_word) in o.terms() {
        let mut terms = vec![Term {
            x: seed_word.x_mask(),
            z: seed_word.z_mask(),
            sin: 0,
            coef: 1.0,
        }];
        if !final_identity {
            conjugate_terms(&mut terms, n, c.final_clifford())?;
        }
        est.peak_terms = est.peak_terms.max(terms.len());

        for (idx, layer) in c.layers().iter().enumerate().rev() {
            let axis = layer.axis();
            let (px, pz) = (axis.x_mask(), axis.z_mask());
            let theta = layer.angle();
            if theta != 0.0 {
                let (ct, st) = (theta.cos(), theta.sin());
                let mut next = Vec::with_capacity(terms.len() * 2);
                for t in &terms {
                    let anticommutes =
                        ((t.x & pz).count_ones() + (t.z & px).count_ones()) % 2 == 1;
                    if !anticommutes {
                        next.push(*t);
                        continue;
                    }
                    next.push(Term { coef: t.coef * ct, ..*t });
                    if t.sin < m_cap {
                        let (nx, nz, sign) = sin_branch(px, pz, t.x, t.z);
                        next.push(Term {
                            x: nx,
                            z: nz,
                            sin: t.sin + 1,
                            coef: t.coef * st * sign,
                        });
                    } else {
                        est.pruned += 1;
                    }
                }
                terms = next;
            }
            if !layer_identity[idx] {
                conjugate_terms(&mut terms, n, layer.clifford())?;
            }
            merge_terms(&mut terms);
            est.peak_terms = est.peak_terms.max(terms.len());
        }

        let mut acc = 0.0;
        for t in &terms {
            let word = PauliWord::from_parts(n, t.x, t.z, canonical_phase(t.x, t.z))?;
            acc += t.coef * rho.expectation_of(&word)?;
        }
        est.terms_alive += terms.len();
        est.value += w * acc;
    }
    Ok(est)
}

fn conjugate_terms(terms: &mut [Term], n: usize, tableau: &CliffordTableau) -> Result<()> {
    for t in terms.iter_mut() {
        let word = PauliWord::from_parts(n, t.x, t.z, canonical_phase(t.x, t.z))?;
        let (sign, image) = tableau.conjugate(&word)?.hermitian_sign()?;
        t.x = image.x_mask();
        t.z = image.z_mask();
        t.coef *= sign;
    }
    Ok(())
}

// --- truncation-error bounds ----------------------------------------------

fn check_bound_args(l: usize, m: usize, theta_star: f64) -> Result<()> {
    if m > l {
        return Err(Error::InvalidState {
            reason: format!("truncation order M = {m} exceeds depth L = {l}"),
        });
    }
    if !(theta_star >= 0.0 && theta_star.is_finite()) {
        return Err(Error::InvalidState {
            reason: format!("theta_star = {theta_star} must be finite and nonnegative"),
        });
    }
    Ok(())
}

/// Worst-case truncation error `(1 + sin t)^L - (1 + sin t)^M` at `t = theta_star`.
pub fn worst_case_bound(l: usize, m: usize, theta_star: f64) -> Result<f64> {
    check_bound_args(l, m, theta_star)?;
    let base = 1.0 + theta_star.sin();
    Ok(base.powi(l as i32) - base.powi(m as i32))
}

/// `E[sin^2 theta]` for theta uniform on `[-t, t]`:
/// `1/2 - sin(2t)/(4t)`, with a series guard near zero.
pub fn mean_sin_sq(theta_star: f64) -> f64 {
    let a = theta_star;
    if a < 1e-4 {
        let a2 = a * a;
        return a2 / 3.0 - a2 * a2 / 15.0;
    }
    0.5 - (2.0 * a).sin() / (4.0 * a)
}

/// Mean-square truncation error bound `(1 + c)^L - (1 + c)^M` with
/// `c = E[sin^2 theta]` over angles uniform on `[-theta_star, theta_star]`.
pub fn mse_bound(l: usize, m: usize, theta_star: f64) -> Result<f64> {
    check_bound_args(l, m, theta_star)?;
    let base = 1.0 + mean_sin_sq(theta_star);
    Ok(base.powi(l as i32) - base.powi(m as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Per-draw guarantee from the worst-case bound.
    Worst,
    /// Mean-square guarantee over uniform angle draws.
    Average,
}

/// Largest angle window `theta_star` for which truncation at order M keeps
/// the (worst-case or mean-square) error within `delta`. Rejects parameter
/// combinations violating the side condition
/// `ln(1 + delta/2)/(L - M) <= ln 2 / M` in either mode.
pub fn theorem_threshold(delta: f64, l: usize, m: usize, mode: BoundMode) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidState {
            reason: format!("delta = {delta} must be positive"),
        });
    }
    if m >= l {
        return Err(Error::InvalidState {
            reason: format!("need M < L, got M = {m}, L = {l}"),
        });
    }
    let r = (1.0 + delta / 2.0).ln() / (l - m) as f64;
    if m > 0 {
        let rhs = std::f64::consts::LN_2 / m as f64;
        if r > rhs {
            return Err(Error::SideCondition { m, lhs: r, rhs });
        }
    }
    Ok(match mode {
        BoundMode::Worst => r,
        BoundMode::Average => (3.0 * r).sqrt(),
    })
}

// --- Pauli paths ----------------------------------------------------------

/// A back-propagation path `s_{L+1}, ..., s_1`: `words[0]` is the observable
/// end, `words[L]` the input end; all words canonical Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliPath {
    pub words: Vec<PauliWord>,
}

enum Step {
    /// Factor 1 (commuting pass-through) or cos theta, with a fixed sign.
    Pass(f64),
    Cos(f64),
    Sin(f64),
}

/// Per-layer factor structure of a path, checked against the circuit.
fn path_steps(c: &ParamCircuit, path: &PauliPath) -> Result<Vec<Step>> {
    let l = c.depth();
    if path.words.len() != l + 1 {
        return Err(Error::InvalidPath {
            reason: format!("path has {} words for {l} layers", path.words.len()),
        });
    }
    for w in &path.words {
        if w.n_qubits() != c.n_qubits() {
            return Err(Error::SizeMismatch {
                left: w.n_qubits(),
                right: c.n_qubits(),
            });
        }
    }
    let mut steps = Vec::with_capacity(l);
    for (k, layer) in c.layers().iter().rev().enumerate() {
        let from = &path.words[k];
        let to = &path.words[k + 1];
        let axis = layer.axis();
        let conj = |w: &PauliWord| -> Result<(f64, PauliWord)> {
            layer.clifford().conjugate(w)?.hermitian_sign()
        };
        if from.commutes(axis)? {
            let (sign, image) = conj(from)?;
            if &image != to {
                return Err(Error::InvalidPath {
                    reason: format!("layer {} cannot map {from} to {to}", l - k),
                });
            }
            steps.push(Step::Pass(sign));
        } else {
            let (cs, cw) = conj(from)?;
            let (sx, sz, ssign) = sin_branch(
                axis.x_mask(),
                axis.z_mask(),
                from.x_mask(),
                from.z_mask(),
            );
            let sin_word =
                PauliWord::from_parts(c.n_qubits(), sx, sz, canonical_phase(sx, sz))?;
            let (ss, sw) = layer.clifford().conjugate(&sin_word)?.hermitian_sign()?;
            if &cw == to {
                steps.push(Step::Cos(cs));
            } else if &sw == to {
                steps.push(Step::Sin(ssign * ss));
            } else {
                return Err(Error::InvalidPath {
                    reason: format!("layer {} cannot map {from} to {to}", l - k),
                });
            }
        }
    }
    Ok(steps)
}

/// Path weight `f(s, theta)` at the given per-layer angles
/// (angles[i] belongs to layer i in time order).
pub fn path_weight(c: &ParamCircuit, path: &PauliPath, angles: &[f64]) -> Result<f64> {
    if angles.len() != c.depth() {
        return Err(Error::LengthMismatch {
            expected: c.depth(),
            got: angles.len(),
        });
    }
    let steps = path_steps(c, path)?;
    let mut w = 1.0;
    for (k, step) in steps.iter().enumerate() {
        let theta = angles[c.depth() - 1 - k];
        w *= match step {
            Step::Pass(s) => *s,
            Step::Cos(s) => s * theta.cos(),
            Step::Sin(s) => s * theta.sin(),
        };
    }
    Ok(w)
}

/// All structurally valid back-propagation paths from `seed` (tiny circuits
/// only; the tree is exponential in depth).
pub fn enumerate_paths(c: &ParamCircuit, seed: &PauliWord) -> Result<Vec<PauliPath>> {
    if c.depth() > 8 {
        return Err(Error::InvalidPath {
            reason: "path enumeration is limited to depth <= 8".into(),
        });
    }
    let (_, start) = seed.hermitian_sign()?;
    let mut paths = vec![vec![start]];
    for layer in c.layers().iter().rev() {
        let axis = layer.axis();
        let mut next = Vec::new();
        for p in &paths {
            let last = *p.last().unwrap();
            let (_, cw) = layer.clifford().conjugate(&last)?.hermitian_sign()?;
            let mut push = |word: PauliWord| {
                let mut q = p.clone();
                q.push(word);
                next.push(q);
            };
            if last.commutes(axis)? {
                push(cw);
            } else {
                push(cw);
                let (sx, sz, _) =
                    sin_branch(axis.x_mask(), axis.z_mask(), last.x_mask(), last.z_mask());
                let sin_word =
                    PauliWord::from_parts(c.n_qubits(), sx, sz, canonical_phase(sx, sz))?;
                let (_, sw) = layer.clifford().conjugate(&sin_word)?.hermitian_sign()?;
                push(sw);
            }
        }
        paths = next;
    }
    Ok(paths
        .into_iter()
        .map(|words| PauliPath { words })
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct OrthogonalityCheck {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte-Carlo estimate of `E[f(s, theta) f(s', theta)]` over angles drawn
/// uniformly from `[-theta_star, theta_star]` per layer. For distinct paths
/// the expectation is zero; the caller tests `|estimate| <= 4 stderr`.
pub fn path_weight_orthogonality_check(
    c: &ParamCircuit,
    a: &PauliPath,
    b: &PauliPath,
    theta_star: f64,
    samples: u64,
    seed: u64,
) -> Result<OrthogonalityCheck> {
    if !(theta_star > 0.0 && theta_star.is_finite()) {
        return Err(Error::InvalidState {
            reason: format!("theta_star = {theta_star} must be positive"),
        });
    }
    if samples < 2 {
        return Err(Error::InvalidState {
            reason: "need at least 2 samples".into(),
        });
    }
    // Validate structure once up front.
    path_steps(c, a)?;
    path_steps(c, b)?;
    let l = c.depth();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut angles = vec![0.0; l];
    for _ in 0..samples {
        for t in angles.iter_mut() {
            *t = rng.gen_range(-theta_star..=theta_star);
        }
        let v = path_weight(c, a, &angles)? * path_weight(c, b, &angles)?;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) / (n - 1.0);
    Ok(OrthogonalityCheck {
        estimate: mean,
        stderr: var.sqrt(),
        samples,
    })
}
