//! Parameterized circuits in alternating Clifford/rotation form.
//!
//! A circuit is a time-ordered product `U = F * U_L * ... * U_1` with
//! `U_i = exp(-i theta_i P_i / 2) * C_i`: each layer applies its Clifford
//! block first, then a rotation about a Hermitian Pauli axis. `F` is an
//! optional trailing Clifford for circuits that end in entangling gates.
//! Builders emit rotations with identity Cliffords and fuse explicit Clifford
//! gates into the next rotation layer (or into `F` at the end).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{CliffordTableau, Gate, PauliWord};

/// One element of a layer's Clifford block.
#[derive(Debug, Clone, PartialEq)]
pub enum CliffordOp {
    Gate(Gate),
    /// `exp(-i * quarter_turns * pi/4 * axis)`; produced when angle
    /// normalization folds a multiple of pi/2 out of a rotation.
    PauliRot { axis: PauliWord, quarter_turns: u8 },
}

impl CliffordOp {
    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            CliffordOp::Gate(g) => {
                let mut probe = CliffordTableau::identity(n_qubits)?;
                probe.apply_gate(*g)
            }
            CliffordOp::PauliRot { axis, .. } => {
                if axis.n_qubits() != n_qubits {
                    return Err(Error::SizeMismatch {
                        left: axis.n_qubits(),
                        right: n_qubits,
                    });
                }
                if axis.is_identity() {
                    return Err(Error::InvalidAxis {
                        reason: "PauliRot axis must not be the identity".into(),
                    });
                }
                axis.hermitian_sign().map(|_| ())
            }
        }
    }
}

fn tableau_from_ops(n_qubits: usize, ops: &[CliffordOp]) -> Result<CliffordTableau> {
    let mut t = CliffordTableau::identity(n_qubits)?;
    for op in ops {
        match op {
            CliffordOp::Gate(g) => t.apply_gate(*g)?,
            CliffordOp::PauliRot {
                axis,
                quarter_turns,
            } => t.apply_pauli_rot(axis, *quarter_turns)?,
        }
    }
    Ok(t)
}

/// A Clifford block followed by one Pauli rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    clifford_ops: Vec<CliffordOp>,
    clifford: CliffordTableau,
    axis: PauliWord,
    angle: f64,
}

impl Layer {
    pub fn new(n_qubits: usize, clifford_ops: Vec<CliffordOp>, axis: PauliWord, angle: f64) -> Result<Self> {
        for op in &clifford_ops {
            op.validate(n_qubits)?;
        }
        if axis.n_qubits() != n_qubits {
            return Err(Error::SizeMismatch {
                left: axis.n_qubits(),
                right: n_qubits,
            });
        }
        if axis.is_identity() {
            return Err(Error::InvalidAxis {
                reason: "rotation axis must not be the identity".into(),
            });
        }
        let (sign, axis) = axis.hermitian_sign()?;
        if sign < 0.0 {
            return Err(Error::InvalidAxis {
                reason: "rotation axis must carry a + sign; fold it into the angle".into(),
            });
        }
        if !angle.is_finite() {
            return Err(Error::InvalidCircuit {
                reason: format!("non-finite rotation angle {angle}"),
            });
        }
        let clifford = tableau_from_ops(n_qubits, &clifford_ops)?;
        Ok(Layer {
            clifford_ops,
            clifford,
            axis,
            angle,
        })
    }

    #[inline]
    pub fn clifford_ops(&self) -> &[CliffordOp] {
        &self.clifford_ops
    }

    #[inline]
    pub fn clifford(&self) -> &CliffordTableau {
        &self.clifford
    }

    #[inline]
    pub fn axis(&self) -> &PauliWord {
        &self.axis
    }

    #[inline]
    pub fn angle(&self) -> f64 {
        self.angle
    }
}

/// Time-ordered sequence of layers plus a trailing Clifford block.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    n_qubits: usize,
    layers: Vec<Layer>,
    final_ops: Vec<CliffordOp>,
    final_clifford: CliffordTableau,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize, layers: Vec<Layer>, final_ops: Vec<CliffordOp>) -> Result<Self> {
        for (i, layer) in layers.iter().enumerate() {
            if layer.axis.n_qubits() != n_qubits {
                return Err(Error::InvalidCircuit {
                    reason: format!("layer {i} is on {} qubits, circuit has {n_qubits}", layer.axis.n_qubits()),
                });
            }
        }
        for op in &final_ops {
            op.validate(n_qubits)?;
        }
        let final_clifford = tableau_from_ops(n_qubits, &final_ops)?;
        Ok(ParamCircuit {
            n_qubits,
            layers,
            final_ops,
            final_clifford,
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Number of rotation layers, written `L` in the truncation bounds.
    #[inline]
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    #[inline]
    pub fn final_ops(&self) -> &[CliffordOp] {
        &self.final_ops
    }

    #[inline]
    pub fn final_clifford(&self) -> &CliffordTableau {
        &self.final_clifford
    }

    /// Largest |angle| across layers, written `theta_*` in the bounds.
    pub fn max_abs_angle(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.angle.abs())
            .fold(0.0, f64::max)
    }

    /// Same structure with each layer's angle replaced in order.
    pub fn bind_angles(&self, angles: &[f64]) -> Result<Self> {
        if angles.len() != self.layers.len() {
            return Err(Error::LengthMismatch {
                expected: self.layers.len(),
                got: angles.len(),
            });
        }
        let mut out = self.clone();
        for (layer, &a) in out.layers.iter_mut().zip(angles) {
            if !a.is_finite() {
                return Err(Error::InvalidCircuit {
                    reason: format!("non-finite rotation angle {a}"),
                });
            }
            layer.angle = a;
        }
        Ok(out)
    }

    pub fn angles(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.angle).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = CircuitRepr::from(self);
        Ok(serde_json::to_string_pretty(&repr)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: CircuitRepr = serde_json::from_str(s)?;
        repr.try_into()
    }
}

/// Reduce every rotation angle to `(-pi/4, pi/4]` by folding multiples of
/// pi/2 into the layer's Clifford as quarter-turn rotations. The returned
/// circuit implements the same unitary up to global phase; applying the map
/// twice changes nothing.
pub fn normalize_angles(circuit: &ParamCircuit) -> Result<ParamCircuit> {
    let mut layers = Vec::with_capacity(circuit.layers.len());
    for layer in &circuit.layers {
        let (quarter_pairs, reduced) = reduce_angle(layer.angle);
        if quarter_pairs == 0 {
            layers.push(layer.clone());
            continue;
        }
        let mut ops = layer.clifford_ops.clone();
        ops.push(CliffordOp::PauliRot {
            axis: layer.axis,
            quarter_turns: quarter_pairs,
        });
        layers.push(Layer::new(circuit.n_qubits, ops, layer.axis, reduced)?);
    }
    ParamCircuit::new(circuit.n_qubits, layers, circuit.final_ops.clone())
}

/// Split `theta = theta' + k*pi/2` with `theta'` in `(-pi/4, pi/4]`.
/// Returns (k mod 4, theta').
fn reduce_angle(theta: f64) -> (u8, f64) {
    let mut k = (theta / FRAC_PI_2).round();
    let mut reduced = theta - k * FRAC_PI_2;
    if reduced > FRAC_PI_4 {
        k += 1.0;
        reduced -= FRAC_PI_2;
    } else if reduced <= -FRAC_PI_4 {
        k -= 1.0;
        reduced += FRAC_PI_2;
    }
    (k.rem_euclid(4.0) as u8 % 4, reduced)
}

// --- JSON representation -------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OpRepr {
    Gate { gate: String, qubits: Vec<usize> },
    PauliRot { pauli_rot: String, quarter_turns: u8 },
}

#[derive(Serialize, Deserialize)]
struct LayerRepr {
    clifford_gates: Vec<OpRepr>,
    axis: String,
    angle: f64,
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n: usize,
    layers: Vec<LayerRepr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    final_clifford_gates: Vec<OpRepr>,
}

impl From<&CliffordOp> for OpRepr {
    fn from(op: &CliffordOp) -> Self {
        match op {
            CliffordOp::Gate(g) => {
                let (a, b) = g.qubits();
                let mut qubits = vec![a];
                if let Some(b) = b {
                    qubits.push(b);
                }
                OpRepr::Gate {
                    gate: g.name().to_string(),
                    qubits,
                }
            }
            CliffordOp::PauliRot {
                axis,
                quarter_turns,
            } => OpRepr::PauliRot {
                pauli_rot: axis.to_string(),
                quarter_turns: *quarter_turns,
            },
        }
    }
}

impl TryFrom<OpRepr> for CliffordOp {
    type Error = Error;

    fn try_from(repr: OpRepr) -> Result<Self> {
        Ok(match repr {
            OpRepr::Gate { gate, qubits } => CliffordOp::Gate(Gate::from_name(&gate, &qubits)?),
            OpRepr::PauliRot {
                pauli_rot,
                quarter_turns,
            } => CliffordOp::PauliRot {
                axis: pauli_rot.parse()?,
                quarter_turns,
            },
        })
    }
}

impl From<&ParamCircuit> for CircuitRepr {
    fn from(c: &ParamCircuit) -> Self {
        CircuitRepr {
            n: c.n_qubits,
            layers: c
                .layers
                .iter()
                .map(|l| LayerRepr {
                    clifford_gates: l.clifford_ops.iter().map(OpRepr::from).collect(),
                    axis: l.axis.to_string(),
                    angle: l.angle,
                })
                .collect(),
            final_clifford_gates: c.final_ops.iter().map(OpRepr::from).collect(),
        }
    }
}

impl TryFrom<CircuitRepr> for ParamCircuit {
    type Error = Error;

    fn try_from(repr: CircuitRepr) -> Result<Self> {
        let mut layers = Vec::with_capacity(repr.layers.len());
        for l in repr.layers {
            let ops = l
                .clifford_gates
                .into_iter()
                .map(CliffordOp::try_from)
                .collect::<Result<Vec<_>>>()?;
            layers.push(Layer::new(repr.n, ops, l.axis.parse()?, l.angle)?);
        }
        let final_ops = repr
            .final_clifford_gates
            .into_iter()
            .map(CliffordOp::try_from)
            .collect::<Result<Vec<_>>>()?;
        ParamCircuit::new(repr.n, layers, final_ops)
    }
}

// --- incremental builder -------------------------------------------------

/// Accumulates time-ordered gates and rotations, fusing Clifford gates into
/// the next rotation layer.
pub struct CircuitBuilder {
    n_qubits: usize,
    pending: Vec<CliffordOp>,
    layers: Vec<Layer>,
}

impl CircuitBuilder {
    pub fn new(n_qubits: usize) -> Self {
        CircuitBuilder {
            n_qubits,
            pending: Vec::new(),
            layers: Vec::new(),
        }
    }

    pub fn gate(&mut self, g: Gate) -> Result<&mut Self> {
        let op = CliffordOp::Gate(g);
        op.validate(self.n_qubits)?;
        self.pending.push(op);
        Ok(self)
    }

    pub fn rotation(&mut self, axis: PauliWord, angle: f64) -> Result<&mut Self> {
        let ops = std::mem::take(&mut self.pending);
        self.layers.push(Layer::new(self.n_qubits, ops, axis, angle)?);
        Ok(self)
    }

    pub fn finish(self) -> Result<ParamCircuit> {
        ParamCircuit::new(self.n_qubits, self.layers, self.pending)
    }
}

// --- transverse-field Ising Trotter circuits ------------------------------

pub type Edge = (usize, usize);

/// First-order Trotter parameters for `H = -J sum ZZ + h sum X` evolution:
/// each step applies `R_X(theta_h)` on every qubit, then `R_ZZ(theta_j)` on
/// every edge. For time `T` in `N` steps, `theta_j = -2 J T / N` and
/// `theta_h = 2 h T / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    pub n_qubits: usize,
    pub edges: Vec<Edge>,
    pub steps: usize,
    pub theta_j: f64,
    pub theta_h: f64,
}

impl IsingSpec {
    /// Nearest-neighbor chain edges `(0,1), (1,2), ...`.
    pub fn chain(n_qubits: usize, steps: usize, theta_j: f64, theta_h: f64) -> Self {
        IsingSpec {
            n_qubits,
            edges: (0..n_qubits.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            steps,
            theta_j,
            theta_h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidCircuit {
                reason: "Trotter step count must be at least 1".into(),
            });
        }
        if self.n_qubits == 0 {
            return Err(Error::InvalidCircuit {
                reason: "circuit needs at least one qubit".into(),
            });
        }
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::InvalidCircuit {
                    reason: format!("self-loop edge ({a}, {b})"),
                });
            }
            if a >= self.n_qubits || b >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: a.max(b),
                    n_qubits: self.n_qubits,
                });
            }
        }
        if !self.theta_j.is_finite() || !self.theta_h.is_finite() {
            return Err(Error::InvalidCircuit {
                reason: "Trotter angles must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn with_angles(&self, theta_h: f64, theta_j: f64) -> Self {
        IsingSpec {
            theta_h,
            theta_j,
            ..self.clone()
        }
    }

    /// Greedy proper edge coloring; determines the default ZZ layer order.
    pub fn default_partition(&self) -> Vec<Vec<Edge>> {
        let mut groups: Vec<Vec<Edge>> = Vec::new();
        for &(a, b) in &self.edges {
            let slot = groups.iter().position(|g| {
                g.iter().all(|&(c, d)| a != c && a != d && b != c && b != d)
            });
            match slot {
                Some(i) => groups[i].push((a, b)),
                None => groups.push(vec![(a, b)]),
            }
        }
        groups
    }
}

fn validate_partition(spec: &IsingSpec, partition: &[Vec<Edge>]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    let canon = |e: Edge| (e.0.min(e.1), e.0.max(e.1));
    for group in partition {
        for &e in group {
            if !seen.insert(canon(e)) {
                return Err(Error::InvalidPartition {
                    reason: format!("edge ({}, {}) appears more than once", e.0, e.1),
                });
            }
        }
    }
    let expected: std::collections::HashSet<_> = spec.edges.iter().map(|&e| canon(e)).collect();
    if seen != expected {
        return Err(Error::InvalidPartition {
            reason: "partition does not cover exactly the circuit's edges".into(),
        });
    }
    Ok(())
}

/// Build the Trotterized Ising circuit: `steps` repetitions of an `R_X` layer
/// on every qubit followed by `R_ZZ` layers grouped by `partition` (greedy
/// edge coloring when absent). Every layer carries an identity Clifford.
pub fn build_ising_trotter(
    spec: &IsingSpec,
    partition: Option<&[Vec<Edge>]>,
) -> Result<ParamCircuit> {
    spec.validate()?;
    let default;
    let groups: &[Vec<Edge>] = match partition {
        Some(p) => {
            validate_partition(spec, p)?;
            p
        }
        None => {
            default = spec.default_partition();
            &default
        }
    };
    let mut b = CircuitBuilder::new(spec.n_qubits);
    for _ in 0..spec.steps {
        for q in 0..spec.n_qubits {
            b.rotation(PauliWord::single_x(spec.n_qubits, q)?, spec.theta_h)?;
        }
        for group in groups {
            for &(i, j) in group {
                b.rotation(PauliWord::zz(spec.n_qubits, i, j)?, spec.theta_j)?;
            }
        }
    }
    b.finish()
}

// --- hardware-efficient ansatz --------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotAxis {
    X,
    Y,
    Z,
}

/// One element of a hardware-efficient block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BlockOp {
    /// Single-qubit rotations about `axis` on every qubit, ascending order.
    RotLayer(RotAxis),
    /// CX ladder `(0,1), (1,2), ..., (n-2, n-1)`.
    CxChain,
    /// Explicit CX pairs.
    CxPairs(Vec<Edge>),
}

/// Sequence of block elements repeated per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTemplate {
    pub ops: Vec<BlockOp>,
}

impl Default for BlockTemplate {
    /// Per-qubit `R_Y` then `R_Z`, then a CX chain.
    fn default() -> Self {
        BlockTemplate {
            ops: vec![
                BlockOp::RotLayer(RotAxis::Y),
                BlockOp::RotLayer(RotAxis::Z),
                BlockOp::CxChain,
            ],
        }
    }
}

/// `blocks` repetitions of `template`, all rotations at the uniform angle
/// `theta_star`. Trailing entanglers land in the final Clifford block.
pub fn build_hardware_efficient(
    n_qubits: usize,
    blocks: usize,
    theta_star: f64,
    template: &BlockTemplate,
) -> Result<ParamCircuit> {
    if n_qubits == 0 || blocks == 0 {
        return Err(Error::InvalidCircuit {
            reason: "hardware-efficient circuits need at least one qubit and one block".into(),
        });
    }
    let mut b = CircuitBuilder::new(n_qubits);
    for _ in 0..blocks {
        for op in &template.ops {
            match op {
                BlockOp::RotLayer(axis) => {
                    for q in 0..n_qubits {
                        let word = match axis {
                            RotAxis::X => PauliWord::single_x(n_qubits, q)?,
                            RotAxis::Y => PauliWord::single_y(n_qubits, q)?,
                            RotAxis::Z => PauliWord::single_z(n_qubits, q)?,
                        };
                        b.rotation(word, theta_star)?;
                    }
                }
                BlockOp::CxChain => {
                    for q in 0..n_qubits.saturating_sub(1) {
                        b.gate(Gate::Cx(q, q + 1))?;
                    }
                }
                BlockOp::CxPairs(pairs) => {
                    for &(c, t) in pairs {
                        b.gate(Gate::Cx(c, t))?;
                    }
                }
            }
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    #[test]
    fn angle_reduction_lands_in_half_open_window() {
        let cases = [
            (0.3, 0, 0.3),
            (FRAC_PI_2, 1, 0.0),
            (FRAC_PI_4, 0, FRAC_PI_4),
            (-FRAC_PI_4, 3, FRAC_PI_4),
            (-3.0 * PI / 8.0, 3, PI / 8.0),
            (PI, 2, 0.0),
            (2.0 * PI, 0, 0.0),
        ];
        for (theta, k, reduced) in cases {
            let (got_k, got_r) = reduce_angle(theta);
            assert_eq!(got_k, k, "k for theta = {theta}");
            assert!((got_r - reduced).abs() < 1e-12, "reduced angle for {theta}");
            assert!(got_r > -FRAC_PI_4 && got_r <= FRAC_PI_4 + 1e-15);
        }
    }

    #[test]
    fn normalize_folds_quarter_turns_into_clifford() {
        let mut b = CircuitBuilder::new(1);
        b.rotation(p("X"), FRAC_PI_2).unwrap();
        let c = b.finish().unwrap();
        let norm = normalize_angles(&c).unwrap();
        assert_eq!(norm.layers()[0].angle(), 0.0);
        assert_eq!(norm.layers()[0].clifford_ops().len(), 1);
        // The folded exp(-i pi/4 X) maps Z to +Y under backward conjugation.
        assert_eq!(
            norm.layers()[0].clifford().conjugate(&p("Z")).unwrap(),
            p("Y")
        );
        // In-window angles are untouched and the map is idempotent.
        let twice = normalize_angles(&norm).unwrap();
        assert_eq!(twice, norm);
    }

    #[test]
    fn normalize_preserves_in_window_layers() {
        let mut b = CircuitBuilder::new(2);
        b.gate(Gate::Cx(0, 1)).unwrap();
        b.rotation(p("XI"), 0.3).unwrap();
        let c = b.finish().unwrap();
        let norm = normalize_angles(&c).unwrap();
        assert_eq!(norm, c);
    }

    #[test]
    fn ising_layer_structure() {
        let spec = IsingSpec::chain(2, 1, -0.4, 0.2);
        let c = build_ising_trotter(&spec, None).unwrap();
        assert_eq!(c.depth(), 3);
        assert_eq!(c.layers()[0].axis(), &p("XI"));
        assert_eq!(c.layers()[1].axis(), &p("IX"));
        assert_eq!(c.layers()[2].axis(), &p("ZZ"));
        assert_eq!(c.layers()[0].angle(), 0.2);
        assert_eq!(c.layers()[2].angle(), -0.4);
        assert!(c.final_clifford().is_identity());

        let spec3 = IsingSpec::chain(3, 2, -0.4, 0.2);
        let c3 = build_ising_trotter(&spec3, None).unwrap();
        assert_eq!(c3.depth(), 2 * (3 + 2));
    }

    #[test]
    fn chain_partition_uses_two_colors() {
        let spec = IsingSpec::chain(5, 1, 0.1, 0.1);
        let part = spec.default_partition();
        assert_eq!(part.len(), 2);
        assert_eq!(part[0], vec![(0, 1), (2, 3)]);
        assert_eq!(part[1], vec![(1, 2), (3, 4)]);
    }

    #[test]
    fn partition_must_cover_edges_exactly() {
        let spec = IsingSpec::chain(3, 1, 0.1, 0.1);
        let missing = vec![vec![(0, 1)]];
        assert!(build_ising_trotter(&spec, Some(&missing)).is_err());
        let duped = vec![vec![(0, 1)], vec![(1, 0), (1, 2)]];
        assert!(build_ising_trotter(&spec, Some(&duped)).is_err());
        let ok = vec![vec![(1, 2)], vec![(0, 1)]];
        let c = build_ising_trotter(&spec, Some(&ok)).unwrap();
        assert_eq!(c.layers()[3].axis(), &p("IZZ"));
        assert_eq!(c.layers()[4].axis(), &p("ZZI"));
    }

    #[test]
    fn ising_validation_rejects_bad_specs() {
        let mut spec = IsingSpec::chain(3, 0, 0.1, 0.1);
        assert!(build_ising_trotter(&spec, None).is_err());
        spec.steps = 1;
        spec.edges.push((1, 1));
        assert!(build_ising_trotter(&spec, None).is_err());
        spec.edges.pop();
        spec.edges.push((0, 7));
        assert!(build_ising_trotter(&spec, None).is_err());
    }

    #[test]
    fn hardware_efficient_default_counts() {
        let c = build_hardware_efficient(2, 1, 0.1, &BlockTemplate::default()).unwrap();
        assert_eq!(c.depth(), 4);
        assert_eq!(c.final_ops().len(), 1);
        assert_eq!(c.layers()[0].axis(), &p("YI"));
        assert_eq!(c.layers()[2].axis(), &p("ZI"));
        assert!(c.layers().iter().all(|l| l.angle() == 0.1));

        let c5 = build_hardware_efficient(15, 5, 0.2, &BlockTemplate::default()).unwrap();
        assert_eq!(c5.depth(), 150);
        // Inner blocks' CX chains fuse into the next block's first rotation.
        assert_eq!(c5.layers()[30].clifford_ops().len(), 14);
    }

    #[test]
    fn bind_angles_replaces_in_order() {
        let spec = IsingSpec::chain(2, 1, -0.4, 0.2);
        let c = build_ising_trotter(&spec, None).unwrap();
        let c2 = c.bind_angles(&[0.5, 0.5, -0.25]).unwrap();
        assert_eq!(c2.angles(), vec![0.5, 0.5, -0.25]);
        assert!(c.bind_angles(&[0.1]).is_err());
        assert!((c.max_abs_angle() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let spec = IsingSpec::chain(3, 1, -0.7, 0.9);
        let c = build_ising_trotter(&spec, None).unwrap();
        let norm = normalize_angles(&c).unwrap();
        for circuit in [&c, &norm] {
            let s = circuit.to_json().unwrap();
            let back = ParamCircuit::from_json(&s).unwrap();
            assert_eq!(&back, circuit);
        }
        let he = build_hardware_efficient(3, 2, 0.2, &BlockTemplate::default()).unwrap();
        let s = he.to_json().unwrap();
        assert_eq!(ParamCircuit::from_json(&s).unwrap(), he);
        assert!(s.contains("\"gate\": \"CX\""));
        assert!(s.contains("\"axis\": \"+YII\""));
    }

    #[test]
    fn layer_rejects_signed_or_identity_axes() {
        assert!(Layer::new(2, vec![], p("-XX"), 0.1).is_err());
        assert!(Layer::new(2, vec![], p("II"), 0.1).is_err());
        assert!(Layer::new(2, vec![], p("XX"), f64::NAN).is_err());
    }
}
