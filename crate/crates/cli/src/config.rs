//! Declarative TOML configs, one schema per subcommand. Every field has a
//! default, so an empty file runs the standard benchmark; the acceptance
//! profiles only override sizes and repeat counts.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use cpdr_core::densesim::NoiseModel;
use cpdr_core::error::Error as CoreError;
use cpdr_core::pauli::Observable;

use crate::{validation, Failure};

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| validation(format!("bad config {}: {e}", path.display())))
}

// --- spd-bench ------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpdBenchConfig {
    /// Register sizes to sweep.
    pub n_qubits: Vec<usize>,
    /// Hardware-efficient block counts.
    pub blocks: Vec<usize>,
    /// Uniform rotation angles theta_star.
    pub theta_star: Vec<f64>,
    /// Truncation orders.
    pub m: Vec<usize>,
    /// "magnetization", or "Z@k" / "X@k" / "Y@k" for a single-site word.
    pub observable: String,
}

impl Default for SpdBenchConfig {
    fn default() -> Self {
        SpdBenchConfig {
            n_qubits: (2..=10).collect(),
            blocks: vec![5],
            theta_star: vec![PI / 20.0],
            m: (0..=8).collect(),
            observable: "magnetization".into(),
        }
    }
}

impl SpdBenchConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let cfg: Self = parse_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.n_qubits.is_empty()
            || self.blocks.is_empty()
            || self.theta_star.is_empty()
            || self.m.is_empty()
        {
            return Err(validation("spd-bench sweep lists must be non-empty"));
        }
        if let Some(&n) = self.n_qubits.iter().find(|&&n| n == 0 || n > 15) {
            return Err(validation(format!(
                "n_qubits entries must lie in 1..=15 for the exact reference, got {n}"
            )));
        }
        if self.theta_star.iter().any(|t| !t.is_finite()) {
            return Err(validation("theta_star entries must be finite"));
        }
        for &n in &self.n_qubits {
            observable_for(&self.observable, n)?;
        }
        Ok(())
    }
}

/// Resolve an observable spec string at a given register size.
pub fn observable_for(spec: &str, n_qubits: usize) -> Result<Observable, Failure> {
    if spec == "magnetization" {
        return Observable::magnetization_z(n_qubits).map_err(from_core);
    }
    if let Some((letter, qubit)) = spec.split_once('@') {
        let q: usize = qubit
            .parse()
            .map_err(|_| validation(format!("bad observable qubit in {spec:?}")))?;
        let word = match letter {
            "X" | "x" => cpdr_core::pauli::PauliWord::single_x(n_qubits, q),
            "Y" | "y" => cpdr_core::pauli::PauliWord::single_y(n_qubits, q),
            "Z" | "z" => cpdr_core::pauli::PauliWord::single_z(n_qubits, q),
            other => {
                return Err(validation(format!(
                    "observable letter must be X, Y, or Z, got {other:?}"
                )))
            }
        }
        .map_err(from_core)?;
        return Observable::single(word).map_err(from_core);
    }
    Err(validation(format!(
        "observable must be \"magnetization\" or \"<letter>@<qubit>\", got {spec:?}"
    )))
}

fn from_core(e: CoreError) -> Failure {
    validation(e.to_string())
}

// --- ising-mse ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Noise,
    ZneLinear,
    ZneQuad,
    ZneExp,
    LearnedPec,
    CpdrZne,
    CpdrPec,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Noise => "noise",
            Protocol::ZneLinear => "zne-linear",
            Protocol::ZneQuad => "zne-quad",
            Protocol::ZneExp => "zne-exp",
            Protocol::LearnedPec => "learned-pec",
            Protocol::CpdrZne => "cpdr-zne",
            Protocol::CpdrPec => "cpdr-pec",
        }
    }

    pub fn all() -> Vec<Protocol> {
        vec![
            Protocol::Noise,
            Protocol::ZneLinear,
            Protocol::ZneQuad,
            Protocol::ZneExp,
            Protocol::LearnedPec,
            Protocol::CpdrZne,
            Protocol::CpdrPec,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpdrReference {
    Spd,
    Exact,
    Both,
}

/// CPDR training grid: the full near-Clifford benchmark grid, a coarse
/// subsample for smoke runs, or explicit pairs.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CpdrGrid {
    Named(String),
    Pairs(Vec<[f64; 2]>),
}

impl CpdrGrid {
    pub fn pairs(&self) -> Result<Vec<Vec<f64>>, Failure> {
        match self {
            CpdrGrid::Named(name) if name == "full" => Ok(cpdr_core::default_ising_grid()),
            CpdrGrid::Named(name) if name == "coarse" => {
                let idx = [0usize, 3, 5, 54, 57, 59];
                let mut out = Vec::with_capacity(idx.len() * idx.len());
                for &i in &idx {
                    for &j in &idx {
                        out.push(vec![i as f64 * PI / 120.0, -(j as f64) * PI / 120.0]);
                    }
                }
                Ok(out)
            }
            CpdrGrid::Named(name) => Err(validation(format!(
                "cpdr_grid must be \"full\", \"coarse\", or a list of pairs, got {name:?}"
            ))),
            CpdrGrid::Pairs(pairs) => {
                if pairs.is_empty() {
                    return Err(validation("cpdr_grid pair list is empty"));
                }
                Ok(pairs.iter().map(|p| p.to_vec()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsingMseConfig {
    pub n_qubits: usize,
    pub steps: usize,
    pub noise: NoiseModel,
    pub shots: u64,
    pub repeats: u64,
    /// Target transverse-field angles.
    pub theta_h: Vec<f64>,
    /// Target coupling angles.
    pub theta_j: Vec<f64>,
    pub protocols: Vec<Protocol>,
    pub levels: Vec<f64>,
    /// Random Pauli insertions for the PEC-style feature vectors
    /// (the no-op is always added on top).
    pub insertions: usize,
    /// Clifford training circuits for learned PEC.
    pub clifford_circuits: usize,
    /// Truncation order of the training references.
    pub reference_m: usize,
    pub cpdr_alpha: f64,
    pub pec_alpha: f64,
    pub cpdr_reference: CpdrReference,
    pub cpdr_grid: CpdrGrid,
}

impl Default for IsingMseConfig {
    fn default() -> Self {
        IsingMseConfig {
            n_qubits: 8,
            steps: 4,
            noise: NoiseModel::default(),
            shots: 10_000,
            repeats: 100,
            theta_h: (1..=6).map(|i| i as f64 * PI / 12.0).collect(),
            // Strong-coupling window of the hardware utility experiments:
            // theta_j near -pi/2 with theta_h swept across [0, pi/2].
            theta_j: vec![-2.0 * PI / 5.0, -9.0 * PI / 20.0, -PI / 2.0],
            protocols: Protocol::all(),
            levels: vec![1.0, 1.2, 1.6],
            insertions: 20,
            clifford_circuits: 2048,
            reference_m: 13,
            cpdr_alpha: cpdr_core::CPDR_ALPHA,
            pec_alpha: cpdr_core::LEARNED_PEC_ALPHA,
            cpdr_reference: CpdrReference::Spd,
            cpdr_grid: CpdrGrid::Named("full".into()),
        }
    }
}

impl IsingMseConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let cfg: Self = parse_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.n_qubits < 2 || self.n_qubits > 12 {
            return Err(validation(format!(
                "ising-mse needs 2..=12 qubits for the noisy reference, got {}",
                self.n_qubits
            )));
        }
        if self.steps == 0 {
            return Err(validation("steps must be at least 1"));
        }
        if self.shots == 0 || self.repeats == 0 {
            return Err(validation("shots and repeats must be at least 1"));
        }
        if self.theta_h.is_empty() || self.theta_j.is_empty() {
            return Err(validation("target angle grids must be non-empty"));
        }
        if self.protocols.is_empty() {
            return Err(validation("protocol list is empty"));
        }
        self.noise.validate().map_err(from_core)?;
        cpdr_core::NoiseLevelSet::new(self.levels.clone()).map_err(from_core)?;
        self.cpdr_grid.pairs()?;
        if !(self.cpdr_alpha.is_finite() && self.cpdr_alpha >= 0.0)
            || !(self.pec_alpha.is_finite() && self.pec_alpha >= 0.0)
        {
            return Err(validation("ridge strengths must be finite and nonnegative"));
        }
        let needs_clifford = self.protocols.contains(&Protocol::LearnedPec);
        if needs_clifford && self.clifford_circuits == 0 {
            return Err(validation("learned-pec needs clifford_circuits >= 1"));
        }
        Ok(())
    }
}

// --- bounds ---------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub n_qubits: usize,
    /// Number of random (L, M, theta_star) configurations.
    pub configs: usize,
    pub max_depth: usize,
    pub max_m: usize,
    pub theta_star_max: f64,
    /// Angle draws behind the worst-case column.
    pub worst_draws: usize,
    /// Angle draws behind the mean-squared column.
    pub mse_draws: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            n_qubits: 4,
            configs: 50,
            max_depth: 12,
            max_m: 6,
            theta_star_max: PI / 10.0,
            worst_draws: 100,
            mse_draws: 1000,
        }
    }
}

impl BoundsConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let cfg: Self = parse_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.n_qubits < 2 || self.n_qubits > 10 {
            return Err(validation("bounds sweeps need 2..=10 qubits"));
        }
        if self.configs == 0 || self.worst_draws == 0 || self.mse_draws == 0 {
            return Err(validation("configs and draw counts must be at least 1"));
        }
        if self.max_depth < 2 {
            return Err(validation("max_depth must be at least 2"));
        }
        if !(self.theta_star_max > 0.0 && self.theta_star_max <= PI) {
            return Err(validation("theta_star_max must lie in (0, pi]"));
        }
        Ok(())
    }
}

// --- mitigate-csv ---------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Trotterized Ising chain; the table must carry `theta_h` and `theta_j`
    /// columns.
    IsingChain { n_qubits: usize, steps: usize },
    /// Circuit template loaded from JSON; the table carries `theta_1..theta_L`.
    Circuit { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigateCsvConfig {
    /// Measurement table, resolved relative to the config file.
    pub input: PathBuf,
    #[serde(default = "default_mitigate_protocol")]
    pub protocol: String,
    #[serde(default = "default_cpdr_alpha")]
    pub alpha: f64,
    #[serde(default = "default_reference_m")]
    pub reference_m: usize,
    /// Observable spec as in spd-bench; references are computed for it.
    #[serde(default = "default_mitigate_observable")]
    pub observable: String,
    pub family: FamilySpec,
}

fn default_mitigate_observable() -> String {
    "magnetization".into()
}

fn default_mitigate_protocol() -> String {
    "cpdr-zne".into()
}

fn default_cpdr_alpha() -> f64 {
    cpdr_core::CPDR_ALPHA
}

fn default_reference_m() -> usize {
    13
}

impl MitigateCsvConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let mut cfg: Self = parse_toml(path)?;
        if cfg.input.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.input = dir.join(&cfg.input);
            }
        }
        if let FamilySpec::Circuit { path: circuit } = &mut cfg.family {
            if circuit.is_relative() {
                if let Some(dir) = path.parent() {
                    *circuit = dir.join(&*circuit);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.protocol != "cpdr-zne" {
            return Err(validation(format!(
                "mitigate-csv supports protocol \"cpdr-zne\", got {:?}",
                self.protocol
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(validation("alpha must be finite and nonnegative"));
        }
        if !self.input.exists() {
            return Err(validation(format!(
                "input table {} does not exist",
                self.input.display()
            )));
        }
        if let FamilySpec::Circuit { path } = &self.family {
            if !path.exists() {
                return Err(validation(format!(
                    "circuit template {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}
