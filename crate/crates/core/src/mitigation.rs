//! Error-mitigation protocols: Richardson and fitted zero-noise
//! extrapolation, ridge regression, Pauli-insertion sets, and the training
//! builders behind learned PEC and the CPDR variants.
//!
//! CPDR trains on circuits that share the target's structure but sit at
//! near-Clifford parameters, with references produced by truncated sparse
//! propagation; learned PEC trains on fully Clifford circuits. Both reduce
//! at inference time to a dot product between learned coefficients and the
//! target's feature vector (per-level or per-insertion noisy expectations).

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_ising_trotter, normalize_angles, Edge, IsingSpec, ParamCircuit};
use crate::densesim::{
    apply_noisy_clifford_op, apply_noisy_layer, noisy_final_state, DensityMatrix, NoiseModel,
};
use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliWord};
use crate::spd::{spd_expectation, SparseInitialState};

/// Ridge strength used by the CPDR fits.
pub const CPDR_ALPHA: f64 = 2e-5;
/// Learned PEC fits its objective unregularized.
pub const LEARNED_PEC_ALPHA: f64 = 0.0;

// --- noise levels ---------------------------------------------------------

/// Strictly increasing ZNE scale factors with base level 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NoiseLevelSet {
    levels: Vec<f64>,
}

impl NoiseLevelSet {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLevels {
                reason: "need at least one level".into(),
            });
        }
        if levels[0] != 1.0 {
            return Err(Error::InvalidLevels {
                reason: format!("base level must be 1, got {}", levels[0]),
            });
        }
        for w in levels.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidLevels {
                    reason: format!("levels must increase strictly: {} then {}", w[0], w[1]),
                });
            }
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidLevels {
                reason: "levels must be finite".into(),
            });
        }
        Ok(NoiseLevelSet { levels })
    }

    /// The benchmark default, G = {1, 1.2, 1.6}.
    pub fn default_zne() -> Self {
        NoiseLevelSet {
            levels: vec![1.0, 1.2, 1.6],
        }
    }

    #[inline]
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl TryFrom<Vec<f64>> for NoiseLevelSet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        NoiseLevelSet::new(v)
    }
}

impl From<NoiseLevelSet> for Vec<f64> {
    fn from(s: NoiseLevelSet) -> Vec<f64> {
        s.levels
    }
}

// --- Richardson and fitted extrapolation ----------------------------------

fn lagrange_weights(levels: &[f64]) -> Result<Vec<f64>> {
    for (i, a) in levels.iter().enumerate() {
        for b in &levels[i + 1..] {
            if a == b {
                return Err(Error::InvalidLevels {
                    reason: format!("duplicate level {a}"),
                });
            }
        }
    }
    Ok(levels
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            levels
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &lj)| -lj / (li - lj))
                .product()
        })
        .collect())
}

/// Richardson weights `prod_{j != i} -l_j / (l_i - l_j)`: the unique linear
/// rule with `sum x = 1` and `sum x l^k = 0` for `k = 1..len-1`.
pub fn richardson_weights(levels: &NoiseLevelSet) -> Vec<f64> {
    lagrange_weights(levels.levels()).expect("level set is duplicate-free")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZneModel {
    Richardson,
    Linear,
    Quadratic,
    Exponential,
    Auto,
}

fn require_points(model: &'static str, needed: usize, got: usize) -> Result<()> {
    if got < needed {
        return Err(Error::InsufficientPoints { model, needed, got });
    }
    Ok(())
}

/// Least-squares polynomial fit, returning the value at zero.
fn poly_intercept(points: &[(f64, f64)], degree: usize) -> Result<f64> {
    let k = degree + 1;
    let mut x = DMatrix::zeros(points.len(), k);
    let mut y = DVector::zeros(points.len());
    for (r, &(l, f)) in points.iter().enumerate() {
        let mut pow = 1.0;
        for c in 0..k {
            x[(r, c)] = pow;
            pow *= l;
        }
        y[r] = f;
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let coef = xtx
        .cholesky()
        .ok_or(Error::SingularSystem)?
        .solve(&xty);
    Ok(coef[0])
}

fn exponential_intercept(points: &[(f64, f64)]) -> Result<f64> {
    let sign = points[0].1.signum();
    if points.iter().any(|&(_, f)| f == 0.0 || f.signum() != sign) {
        return Err(Error::SignMixedExponential);
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(l, f)| (l, f.abs().ln())).collect();
    let log_intercept = poly_intercept(&logs, 1)?;
    Ok(sign * log_intercept.exp())
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.iter().any(|&(l, f)| !l.is_finite() || !f.is_finite()) {
        return Err(Error::InvalidLevels {
            reason: "non-finite extrapolation point".into(),
        });
    }
    Ok(())
}

fn raw_value(points: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .cloned()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, f)| f)
        .unwrap_or(0.0)
}

/// Mean squared leave-one-out prediction error of a fitting rule.
fn loo_error(points: &[(f64, f64)], predict: impl Fn(&[(f64, f64)]) -> Result<f64>) -> Option<f64> {
    let mut acc = 0.0;
    for i in 0..points.len() {
        let rest: Vec<(f64, f64)> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &p)| p)
            .collect();
        // The held-out point is predicted at its own level, not at zero.
        let pred = match predict_at(&rest, points[i].0, &predict) {
            Some(v) => v,
            None => return None,
        };
        acc += (pred - points[i].1).powi(2);
    }
    Some(acc / points.len() as f64)
}

/// Evaluate a zero-intercept rule at an arbitrary level by shifting the axis.
fn predict_at(
    points: &[(f64, f64)],
    level: f64,
    predict: &impl Fn(&[(f64, f64)]) -> Result<f64>,
) -> Option<f64> {
    let shifted: Vec<(f64, f64)> = points.iter().map(|&(l, f)| (l - level, f)).collect();
    predict(&shifted).ok()
}

/// Extrapolate measured `(level, value)` points to zero noise.
pub fn zne_extrapolate(points: &[(f64, f64)], model: ZneModel) -> Result<f64> {
    check_points(points)?;
    match model {
        ZneModel::Richardson => {
            require_points("richardson", 1, points.len())?;
            let weights = lagrange_weights(&points.iter().map(|p| p.0).collect::<Vec<_>>())?;
            Ok(weights.iter().zip(points).map(|(w, (_, f))| w * f).sum())
        }
        ZneModel::Linear => {
            require_points("linear", 2, points.len())?;
            poly_intercept(points, 1)
        }
        ZneModel::Quadratic => {
            require_points("quadratic", 3, points.len())?;
            poly_intercept(points, 2)
        }
        ZneModel::Exponential => {
            require_points("exponential", 2, points.len())?;
            exponential_intercept(points)
        }
        ZneModel::Auto => {
            require_points("auto", 1, points.len())?;
            let raw = raw_value(points);
            if points.len() < 3 {
                return Ok(raw);
            }
            let max_abs = points.iter().map(|&(_, f)| f.abs()).fold(0.0, f64::max);
            // Candidates ranked by leave-one-out error; raw predicts the
            // held-out point with the nearest-to-zero remaining value.
            let mut best: Option<(f64, f64)> = None;
            let mut consider = |err: Option<f64>, est: Result<f64>| {
                if let (Some(err), Ok(est)) = (err, est) {
                    if est.is_finite() && best.map_or(true, |(b, _)| err < b) {
                        best = Some((err, est));
                    }
                }
            };
            consider(
                loo_error(points, |pts| exponential_intercept(pts)),
                exponential_intercept(points),
            );
            consider(
                loo_error(points, |pts| poly_intercept(pts, 1)),
                poly_intercept(points, 1),
            );
            consider(
                loo_error(points, |pts| Ok(raw_value(pts))),
                Ok(raw),
            );
            let estimate = best.map(|(_, est)| est).unwrap_or(raw);
            if estimate.abs() > 2.0 * max_abs {
                return Ok(raw);
            }
            Ok(estimate)
        }
    }
}

// --- ridge regression -----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit {
    pub coefficients: Vec<f64>,
    pub alpha: f64,
    pub train_rmse: f64,
}

/// Minimize `sum_k (x_k . c - y_k)^2 + alpha |c|^2` through the regularized
/// normal equations. An exactly singular system at `alpha = 0` is reported,
/// not pseudo-solved.
pub fn ridge_fit(features: &[Vec<f64>], references: &[f64], alpha: f64) -> Result<RidgeFit> {
    if features.is_empty() {
        return Err(Error::EmptyGrid {
            reason: "ridge fit needs at least one sample".into(),
        });
    }
    if features.len() != references.len() {
        return Err(Error::LengthMismatch {
            expected: features.len(),
            got: references.len(),
        });
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidState {
            reason: format!("alpha = {alpha} must be finite and nonnegative"),
        });
    }
    let width = features[0].len();
    if width == 0 {
        return Err(Error::InvalidState {
            reason: "feature vectors are empty".into(),
        });
    }
    for row in features {
        if row.len() != width {
            return Err(Error::LengthMismatch {
                expected: width,
                got: row.len(),
            });
        }
    }
    let finite = features.iter().flatten().all(|v| v.is_finite())
        && references.iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidState {
            reason: "non-finite training data".into(),
        });
    }

    let x = DMatrix::from_fn(features.len(), width, |r, c| features[r][c]);
    let y = DVector::from_column_slice(references);
    let mut xtx = x.transpose() * &x;
    for d in 0..width {
        xtx[(d, d)] += alpha;
    }
    let xty = x.transpose() * &y;
    let coef = xtx
        .cholesky()
        .ok_or(Error::SingularSystem)?
        .solve(&xty);
    let residual = &x * &coef - y;
    let train_rmse = (residual.norm_squared() / features.len() as f64).sqrt();
    Ok(RidgeFit {
        coefficients: coef.iter().copied().collect(),
        alpha,
        train_rmse,
    })
}

fn apply_fit(features: &[f64], fit: &RidgeFit) -> Result<f64> {
    if features.len() != fit.coefficients.len() {
        return Err(Error::LengthMismatch {
            expected: fit.coefficients.len(),
            got: features.len(),
        });
    }
    Ok(features
        .iter()
        .zip(&fit.coefficients)
        .map(|(f, c)| f * c)
        .sum())
}

/// Combine per-level noisy expectations with trained coefficients.
pub fn cpdr_zne_mitigate(target_features: &[f64], fit: &RidgeFit) -> Result<f64> {
    apply_fit(target_features, fit)
}

/// Combine per-insertion noisy expectations with trained coefficients.
/// Learned PEC uses the same rule with a Clifford-only training set.
pub fn cpdr_pec_mitigate(target_features: &[f64], fit: &RidgeFit) -> Result<f64> {
    apply_fit(target_features, fit)
}

// --- Pauli insertions -----------------------------------------------------

/// A single-Pauli frame insertion after a layer's gate and noise, or the
/// distinguished no-op that reads out the bare circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertionOp {
    None,
    X { layer: usize, qubit: usize },
    Z { layer: usize, qubit: usize },
}

impl InsertionOp {
    fn validate(&self, c: &ParamCircuit) -> Result<()> {
        let (layer, qubit) = match self {
            InsertionOp::None => return Ok(()),
            InsertionOp::X { layer, qubit } | InsertionOp::Z { layer, qubit } => (*layer, *qubit),
        };
        if layer >= c.depth() {
            return Err(Error::InvalidCircuit {
                reason: format!("insertion layer {layer} out of range for depth {}", c.depth()),
            });
        }
        if qubit >= c.n_qubits() {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: c.n_qubits(),
            });
        }
        Ok(())
    }

    fn word(&self, n: usize) -> Result<Option<PauliWord>> {
        Ok(match self {
            InsertionOp::None => None,
            InsertionOp::X { qubit, .. } => Some(PauliWord::single_x(n, *qubit)?),
            InsertionOp::Z { qubit, .. } => Some(PauliWord::single_z(n, *qubit)?),
        })
    }
}

/// The no-op plus `count` distinct (layer, qubit, X|Z) insertions sampled
/// without replacement. Deterministic in the seed.
pub fn build_insertion_set(c: &ParamCircuit, count: usize, seed: u64) -> Result<Vec<InsertionOp>> {
    let available = 2 * c.depth() * c.n_qubits();
    if count > available {
        return Err(Error::InsertionCount {
            requested: count,
            available,
        });
    }
    let mut pool: Vec<InsertionOp> = Vec::with_capacity(available);
    for layer in 0..c.depth() {
        for qubit in 0..c.n_qubits() {
            pool.push(InsertionOp::X { layer, qubit });
            pool.push(InsertionOp::Z { layer, qubit });
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut out = vec![InsertionOp::None];
    out.extend(pool.into_iter().take(count));
    Ok(out)
}

// --- feature simulation ---------------------------------------------------

fn term_values(rho: &DensityMatrix, o: &Observable) -> Result<Vec<f64>> {
    o.terms().iter().map(|(_, p)| rho.expect(p)).collect()
}

fn combine(o: &Observable, values: &[f64]) -> f64 {
    o.terms()
        .iter()
        .zip(values)
        .map(|((w, _), v)| w * v)
        .sum()
}

/// Per-term noisy expectations at every scale factor: row j belongs to
/// `levels[j]`, column t to the t-th observable term. Levels multiply the
/// model's own scale.
pub fn level_term_features(
    c: &ParamCircuit,
    o: &Observable,
    nm: &NoiseModel,
    levels: &NoiseLevelSet,
) -> Result<Vec<Vec<f64>>> {
    levels
        .levels()
        .iter()
        .map(|&g| {
            let scaled = nm.with_scale(nm.scale * g)?;
            term_values(&noisy_final_state(c, &scaled)?, o)
        })
        .collect()
}

/// Per-term noisy expectations for every insertion op. The base evolution is
/// shared: each insertion forks the state after its layer's noise and only
/// replays the suffix.
pub fn insertion_term_features(
    c: &ParamCircuit,
    o: &Observable,
    nm: &NoiseModel,
    insertions: &[InsertionOp],
) -> Result<Vec<Vec<f64>>> {
    nm.validate()?;
    for op in insertions {
        op.validate(c)?;
    }
    let n = c.n_qubits();
    let mut results: Vec<Option<Vec<f64>>> = vec![None; insertions.len()];
    let mut rho = DensityMatrix::zero_state(n)?;
    for (li, layer) in c.layers().iter().enumerate() {
        apply_noisy_layer(&mut rho, layer, nm)?;
        for (idx, op) in insertions.iter().enumerate() {
            let at = match op {
                InsertionOp::X { layer, .. } | InsertionOp::Z { layer, .. } => *layer,
                InsertionOp::None => continue,
            };
            if at != li {
                continue;
            }
            let mut fork = rho.clone();
            if let Some(word) = op.word(n)? {
                fork.apply_pauli(&word)?;
            }
            for suffix in &c.layers()[li + 1..] {
                apply_noisy_layer(&mut fork, suffix, nm)?;
            }
            for fop in c.final_ops() {
                apply_noisy_clifford_op(&mut fork, fop, nm)?;
            }
            results[idx] = Some(term_values(&fork, o)?);
        }
    }
    for fop in c.final_ops() {
        apply_noisy_clifford_op(&mut rho, fop, nm)?;
    }
    let base = term_values(&rho, o)?;
    for (idx, op) in insertions.iter().enumerate() {
        if matches!(op, InsertionOp::None) {
            results[idx] = Some(base.clone());
        }
    }
    results
        .into_iter()
        .map(|r| {
            r.ok_or_else(|| Error::InvalidState {
                reason: "insertion feature left unevaluated".into(),
            })
        })
        .collect()
}

/// Sources of target/training feature vectors.
pub trait FeatureSource {
    fn feature_len(&self) -> usize;
    fn features_for(&self, c: &ParamCircuit) -> Result<Vec<f64>>;
}

/// Noisy simulation at each scale factor (CPDR-ZNE features).
pub struct LevelFeatures<'a> {
    pub observable: &'a Observable,
    pub noise: &'a NoiseModel,
    pub levels: &'a NoiseLevelSet,
}

impl FeatureSource for LevelFeatures<'_> {
    fn feature_len(&self) -> usize {
        self.levels.len()
    }

    fn features_for(&self, c: &ParamCircuit) -> Result<Vec<f64>> {
        let rows = level_term_features(c, self.observable, self.noise, self.levels)?;
        Ok(rows.iter().map(|r| combine(self.observable, r)).collect())
    }
}

/// Noisy simulation per insertion op (CPDR-PEC / learned-PEC features).
pub struct InsertionFeatures<'a> {
    pub observable: &'a Observable,
    pub noise: &'a NoiseModel,
    pub insertions: &'a [InsertionOp],
}

impl FeatureSource for InsertionFeatures<'_> {
    fn feature_len(&self) -> usize {
        self.insertions.len()
    }

    fn features_for(&self, c: &ParamCircuit) -> Result<Vec<f64>> {
        let rows = insertion_term_features(c, self.observable, self.noise, self.insertions)?;
        Ok(rows.iter().map(|r| combine(self.observable, r)).collect())
    }
}

// --- circuit families and training sets -----------------------------------

/// A parameterized circuit family sharing one gate structure.
pub trait CircuitFamily {
    fn n_qubits(&self) -> usize;
    fn param_len(&self) -> usize;
    fn build(&self, params: &[f64]) -> Result<ParamCircuit>;
}

/// Trotterized Ising circuits parameterized by `[theta_h, theta_j]`.
pub struct IsingFamily {
    pub spec: IsingSpec,
    pub partition: Option<Vec<Vec<Edge>>>,
}

impl CircuitFamily for IsingFamily {
    fn n_qubits(&self) -> usize {
        self.spec.n_qubits
    }

    fn param_len(&self) -> usize {
        2
    }

    fn build(&self, params: &[f64]) -> Result<ParamCircuit> {
        if params.len() != 2 {
            return Err(Error::LengthMismatch {
                expected: 2,
                got: params.len(),
            });
        }
        let spec = self.spec.with_angles(params[0], params[1]);
        build_ising_trotter(&spec, self.partition.as_deref())
    }
}

/// A fixed circuit re-bound with per-layer angles.
pub struct LayerAngleFamily {
    pub template: ParamCircuit,
}

impl CircuitFamily for LayerAngleFamily {
    fn n_qubits(&self) -> usize {
        self.template.n_qubits()
    }

    fn param_len(&self) -> usize {
        self.template.depth()
    }

    fn build(&self, params: &[f64]) -> Result<ParamCircuit> {
        self.template.bind_angles(params)
    }
}

/// One training circuit's parameters, features, and reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub params: Vec<f64>,
    pub features: Vec<f64>,
    pub reference: f64,
}

/// The near-Clifford angle window of the benchmark training grid:
/// `theta_h = i pi/120`, `theta_j = -j pi/120` with
/// `i, j in {0..5} union {54..59}`, 144 pairs.
pub fn default_ising_grid() -> Vec<Vec<f64>> {
    let idx: Vec<usize> = (0..=5).chain(54..=59).collect();
    let mut grid = Vec::with_capacity(idx.len() * idx.len());
    for &i in &idx {
        for &j in &idx {
            grid.push(vec![
                i as f64 * std::f64::consts::PI / 120.0,
                -(j as f64) * std::f64::consts::PI / 120.0,
            ]);
        }
    }
    grid
}

/// SPD reference on the normalized circuit.
fn spd_reference(c: &ParamCircuit, o: &Observable, m: usize) -> Result<f64> {
    let normalized = normalize_angles(c)?;
    let rho = SparseInitialState::zero_state(c.n_qubits())?;
    Ok(spd_expectation(&normalized, o, &rho, m)?.value)
}

/// Training set over an explicit parameter grid with truncated-propagation
/// references at order `reference_m`.
pub fn build_cpdr_training_set(
    family: &dyn CircuitFamily,
    grid: &[Vec<f64>],
    observable: &Observable,
    backend: &dyn FeatureSource,
    reference_m: usize,
) -> Result<Vec<TrainingSample>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid {
            reason: "training grid has no parameter points".into(),
        });
    }
    grid.iter()
        .map(|params| {
            let circuit = family.build(params)?;
            let features = backend.features_for(&circuit)?;
            let reference = spd_reference(&circuit, observable, reference_m)?;
            Ok(TrainingSample {
                params: params.clone(),
                features,
                reference,
            })
        })
        .collect()
}

/// Snap every layer angle independently to a uniform draw from
/// `{0, pi/2, -pi/2, pi}`.
pub fn snap_to_clifford_angles(
    c: &ParamCircuit,
    rng: &mut impl Rng,
) -> Result<ParamCircuit> {
    const CHOICES: [f64; 4] = [
        0.0,
        std::f64::consts::FRAC_PI_2,
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
    ];
    let angles: Vec<f64> = (0..c.depth())
        .map(|_| CHOICES[rng.gen_range(0..CHOICES.len())])
        .collect();
    c.bind_angles(&angles)
}

/// Clifford-only training set for learned PEC: `count` random snaps of the
/// target's layer angles, references exact at truncation order zero.
pub fn build_clifford_training_set(
    target: &ParamCircuit,
    observable: &Observable,
    backend: &dyn FeatureSource,
    count: usize,
    seed: u64,
) -> Result<Vec<TrainingSample>> {
    if count == 0 {
        return Err(Error::EmptyGrid {
            reason: "Clifford training set needs at least one circuit".into(),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let circuit = snap_to_clifford_angles(target, &mut rng)?;
            let features = backend.features_for(&circuit)?;
            let reference = spd_reference(&circuit, observable, 0)?;
            Ok(TrainingSample {
                params: circuit.angles(),
                features,
                reference,
            })
        })
        .collect()
}
