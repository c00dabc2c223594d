//! Apply a CPDR-ZNE fit to an external measurement table: per-angle noisy
//! expectations at several noise levels, training rows flagged `train=1`,
//! references computed by truncated propagation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use cpdr_core::circuit::{build_ising_trotter, normalize_angles, IsingSpec, ParamCircuit};
use cpdr_core::error::Error as CoreError;
use cpdr_core::mitigation::{cpdr_zne_mitigate, ridge_fit, NoiseLevelSet};
use cpdr_core::pauli::Observable;
use cpdr_core::spd::{spd_expectation, SparseInitialState};

use crate::config::{observable_for, FamilySpec, MitigateCsvConfig};
use crate::{validation, Failure};

fn core(e: CoreError) -> Failure {
    validation(e.to_string())
}

/// One angle tuple's worth of rows, keyed by level.
struct AngleGroup {
    thetas: Vec<f64>,
    values: BTreeMap<u64, f64>,
    train: bool,
    exact_value: Option<f64>,
    first_row: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MitigatedPoint {
    pub thetas: Vec<f64>,
    pub train: u8,
    pub mitigated: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MitigateReport {
    pub protocol: String,
    pub alpha: f64,
    pub levels_or_ops: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub train_rmse: f64,
    pub n_train: usize,
    pub master_seed: u64,
    pub points: Vec<MitigatedPoint>,
}

enum Family {
    Ising(IsingSpec),
    Template(ParamCircuit),
}

impl Family {
    fn n_qubits(&self) -> usize {
        match self {
            Family::Ising(spec) => spec.n_qubits,
            Family::Template(c) => c.n_qubits(),
        }
    }

    /// Theta column names the table must provide, in binding order.
    fn theta_columns(&self) -> Vec<String> {
        match self {
            Family::Ising(_) => vec!["theta_h".into(), "theta_j".into()],
            Family::Template(c) => (1..=c.depth()).map(|i| format!("theta_{i}")).collect(),
        }
    }

    fn build(&self, thetas: &[f64]) -> Result<ParamCircuit, Failure> {
        match self {
            Family::Ising(spec) => {
                build_ising_trotter(&spec.with_angles(thetas[0], thetas[1]), None).map_err(core)
            }
            Family::Template(c) => c.bind_angles(thetas).map_err(core),
        }
    }
}

fn load_family(cfg: &MitigateCsvConfig) -> Result<Family, Failure> {
    match &cfg.family {
        FamilySpec::IsingChain { n_qubits, steps } => {
            if *steps == 0 {
                return Err(validation("family steps must be at least 1"));
            }
            Ok(Family::Ising(IsingSpec::chain(*n_qubits, *steps, 0.0, 0.0)))
        }
        FamilySpec::Circuit { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                validation(format!("cannot read circuit template {}: {e}", path.display()))
            })?;
            let circuit = ParamCircuit::from_json(&text).map_err(|e| {
                validation(format!("bad circuit template {}: {e}", path.display()))
            })?;
            Ok(Family::Template(circuit))
        }
    }
}

fn reference(c: &ParamCircuit, o: &Observable, m: usize) -> Result<f64, Failure> {
    let normalized = normalize_angles(c).map_err(core)?;
    let rho = SparseInitialState::zero_state(c.n_qubits()).map_err(core)?;
    Ok(spd_expectation(&normalized, o, &rho, m).map_err(core)?.value)
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn parse_field(record: &csv::StringRecord, idx: usize, name: &str, row: usize) -> Result<f64, Failure> {
    let raw = record.get(idx).ok_or_else(|| {
        validation(format!("row {row}: missing field {name}"))
    })?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| validation(format!("row {row}: field {name} is not a number: {raw:?}")))
}

pub fn run(
    cfg: &MitigateCsvConfig,
    out_dir: &Path,
    master_seed: u64,
) -> Result<MitigateReport, Failure> {
    cfg.validate()?;
    let family = load_family(cfg)?;
    let n = family.n_qubits();
    let observable = observable_for(&cfg.observable, n)?;
    let theta_columns = family.theta_columns();

    let mut reader = csv::Reader::from_path(&cfg.input)?;
    let headers = reader.headers()?.clone();
    let theta_idx: Vec<usize> = theta_columns
        .iter()
        .map(|name| {
            column_index(&headers, name)
                .ok_or_else(|| validation(format!("input table lacks column {name}")))
        })
        .collect::<Result<_, _>>()?;
    let level_idx = column_index(&headers, "level")
        .or_else(|| column_index(&headers, "level_or_op_id"))
        .ok_or_else(|| validation("input table lacks a level column"))?;
    let value_idx = column_index(&headers, "noisy_value")
        .ok_or_else(|| validation("input table lacks column noisy_value"))?;
    let train_idx = column_index(&headers, "train");
    let exact_idx = column_index(&headers, "exact_value");

    // Group rows by the bit pattern of their angle tuple; angles parse
    // exactly, so equal text means equal key.
    let mut groups: Vec<AngleGroup> = Vec::new();
    let mut by_key: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut level_bits: std::collections::BTreeSet<u64> = std::collections::BTreeSet::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let row = row + 2; // 1-based with header
        let thetas: Vec<f64> = theta_idx
            .iter()
            .zip(&theta_columns)
            .map(|(&idx, name)| parse_field(&record, idx, name, row))
            .collect::<Result<_, _>>()?;
        let level = parse_field(&record, level_idx, "level", row)?;
        if !level.is_finite() || level <= 0.0 {
            return Err(validation(format!("row {row}: bad noise level {level}")));
        }
        let value = parse_field(&record, value_idx, "noisy_value", row)?;
        let train = match train_idx {
            Some(idx) => {
                let raw = record.get(idx).unwrap_or("").trim();
                match raw {
                    "1" => true,
                    "" | "0" => false,
                    other => {
                        return Err(validation(format!(
                            "row {row}: train flag must be 0 or 1, got {other:?}"
                        )))
                    }
                }
            }
            None => false,
        };
        let exact_value = match exact_idx {
            Some(idx) if !record.get(idx).unwrap_or("").trim().is_empty() => {
                Some(parse_field(&record, idx, "exact_value", row)?)
            }
            _ => None,
        };

        level_bits.insert(level.to_bits());
        let key: Vec<u64> = thetas.iter().map(|t| t.to_bits()).collect();
        let gi = *by_key.entry(key).or_insert_with(|| {
            groups.push(AngleGroup {
                thetas: thetas.clone(),
                values: BTreeMap::new(),
                train: false,
                exact_value: None,
                first_row: row,
            });
            groups.len() - 1
        });
        let group = &mut groups[gi];
        if group.values.insert(level.to_bits(), value).is_some() {
            return Err(validation(format!(
                "row {row}: duplicate level {level} for this angle tuple"
            )));
        }
        group.train |= train;
        if group.exact_value.is_none() {
            group.exact_value = exact_value;
        }
    }

    if groups.is_empty() {
        return Err(validation("input table has no data rows"));
    }

    // The level set is global: every angle tuple must supply every level.
    let level_values: Vec<f64> = level_bits.iter().map(|&b| f64::from_bits(b)).collect();
    let mut sorted_levels = level_values.clone();
    sorted_levels.sort_by(f64::total_cmp);
    if sorted_levels.len() < 2 {
        return Err(validation("ZNE-style mitigation needs at least 2 noise levels"));
    }
    let levels = NoiseLevelSet::new(sorted_levels.clone()).map_err(core)?;
    for group in &groups {
        for level in levels.levels() {
            if !group.values.contains_key(&level.to_bits()) {
                return Err(validation(format!(
                    "angle tuple starting at row {} is missing level {level}; \
                     rows with missing levels are rejected, not imputed",
                    group.first_row
                )));
            }
        }
    }

    // Deterministic order: sort groups by angle tuple.
    groups.sort_by(|a, b| {
        a.thetas
            .iter()
            .zip(&b.thetas)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let features_of = |group: &AngleGroup| -> Vec<f64> {
        levels
            .levels()
            .iter()
            .map(|l| group.values[&l.to_bits()])
            .collect()
    };

    let mut train_features = Vec::new();
    let mut train_refs = Vec::new();
    for group in groups.iter().filter(|g| g.train) {
        let circuit = family.build(&group.thetas)?;
        train_features.push(features_of(group));
        train_refs.push(reference(&circuit, &observable, cfg.reference_m)?);
    }
    if train_features.is_empty() {
        return Err(validation("no training rows: flag at least one angle tuple with train=1"));
    }

    let fit = ridge_fit(&train_features, &train_refs, cfg.alpha).map_err(core)?;

    let points: Vec<MitigatedPoint> = groups
        .iter()
        .map(|group| -> Result<_, Failure> {
            let mitigated = cpdr_zne_mitigate(&features_of(group), &fit).map_err(core)?;
            Ok(MitigatedPoint {
                thetas: group.thetas.clone(),
                train: group.train as u8,
                mitigated,
                exact_value: group.exact_value,
                abs_error: group.exact_value.map(|e| (mitigated - e).abs()),
            })
        })
        .collect::<Result<_, _>>()?;

    let report = MitigateReport {
        protocol: cfg.protocol.clone(),
        alpha: fit.alpha,
        levels_or_ops: levels.levels().to_vec(),
        coefficients: fit.coefficients.clone(),
        train_rmse: fit.train_rmse,
        n_train: train_features.len(),
        master_seed,
        points,
    };

    std::fs::create_dir_all(out_dir)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(out_dir.join("mitigation_report.json"), text + "\n")?;

    Ok(report)
}
