//! Random-configuration sweep checking the truncation bounds empirically:
//! draw circuit structures, sample angles, and fail hard (exit 3) if any
//! empirical error exceeds its bound.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use cpdr_core::circuit::{CircuitBuilder, ParamCircuit};
use cpdr_core::densesim::exact_expectation;
use cpdr_core::pauli::{Gate, Observable, PauliWord};
use cpdr_core::spd::{mse_bound, spd_expectation, worst_case_bound, SparseInitialState};

use crate::config::BoundsConfig;
use crate::seed::job_seed;
use crate::{assertion, validation, Failure};

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub theta_star: f64,
    pub worst_bound: f64,
    pub mse_bound: f64,
    pub empirical_max_err: f64,
    pub empirical_mse: f64,
    /// Angle draws behind `empirical_mse`.
    pub samples: usize,
    pub master_seed: u64,
    pub job_seed: u64,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
}

/// Hermitian word of weight 1 or 2 with the canonical phase.
fn random_axis(n_qubits: usize, rng: &mut impl Rng) -> PauliWord {
    loop {
        let weight = rng.gen_range(1..=2usize.min(n_qubits));
        let mut x = 0u128;
        let mut z = 0u128;
        let mut placed = 0;
        while placed < weight {
            let q = rng.gen_range(0..n_qubits);
            if (x | z) >> q & 1 == 1 {
                continue;
            }
            match rng.gen_range(0..3) {
                0 => x |= 1 << q,
                1 => z |= 1 << q,
                _ => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
            }
            placed += 1;
        }
        let phase = ((x & z).count_ones() % 4) as u8;
        if let Ok(word) = PauliWord::from_parts(n_qubits, x, z, phase) {
            return word;
        }
    }
}

fn random_gate(n_qubits: usize, rng: &mut impl Rng) -> Gate {
    let a = rng.gen_range(0..n_qubits);
    let b = loop {
        let b = rng.gen_range(0..n_qubits);
        if b != a {
            break b;
        }
    };
    match rng.gen_range(0..8) {
        0 => Gate::H(a),
        1 => Gate::S(a),
        2 => Gate::Sdg(a),
        3 => Gate::X(a),
        4 => Gate::Y(a),
        5 => Gate::Z(a),
        6 => Gate::Cx(a, b),
        _ => Gate::Cz(a, b),
    }
}

/// Random structure with unit placeholder angles; draws rebind the angles.
fn random_structure(n_qubits: usize, depth: usize, rng: &mut impl Rng) -> ParamCircuit {
    let mut builder = CircuitBuilder::new(n_qubits);
    for _ in 0..depth {
        for _ in 0..rng.gen_range(0..=2) {
            builder.gate(random_gate(n_qubits, rng)).expect("valid gate");
        }
        builder
            .rotation(random_axis(n_qubits, rng), 1.0)
            .expect("valid axis");
    }
    builder.finish().expect("non-empty circuit")
}

struct ConfigResult {
    row: BoundsRow,
    violation: Option<String>,
}

fn run_config(cfg: &BoundsConfig, master_seed: u64, idx: usize) -> Result<ConfigResult, Failure> {
    let seed = job_seed(master_seed, "bounds", idx as u64);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let depth = rng.gen_range(2..=cfg.max_depth);
    let m = rng.gen_range(0..=cfg.max_m.min(depth));
    let theta_star = (rng.gen::<f64>() * cfg.theta_star_max).max(1e-6);

    let template = random_structure(cfg.n_qubits, depth, &mut rng);
    let axis = random_axis(cfg.n_qubits, &mut rng);
    let observable = Observable::single(axis).map_err(|e| validation(e.to_string()))?;
    let state =
        SparseInitialState::zero_state(cfg.n_qubits).map_err(|e| validation(e.to_string()))?;

    let worst = worst_case_bound(depth, m, theta_star).map_err(|e| validation(e.to_string()))?;
    let mse = mse_bound(depth, m, theta_star).map_err(|e| validation(e.to_string()))?;

    let draw_err = |rng: &mut ChaCha12Rng| -> Result<f64, Failure> {
        let angles: Vec<f64> = (0..depth)
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * theta_star)
            .collect();
        let bound_circuit = template
            .bind_angles(&angles)
            .map_err(|e| validation(e.to_string()))?;
        let exact = exact_expectation(&bound_circuit, &observable)
            .map_err(|e| validation(e.to_string()))?;
        let est = spd_expectation(&bound_circuit, &observable, &state, m)
            .map_err(|e| validation(e.to_string()))?;
        Ok((est.value - exact).abs())
    };

    let mut max_err: f64 = 0.0;
    for _ in 0..cfg.worst_draws {
        max_err = max_err.max(draw_err(&mut rng)?);
    }

    let mut sum_sq = 0.0;
    let mut sum_quad = 0.0;
    for _ in 0..cfg.mse_draws {
        let err = draw_err(&mut rng)?;
        sum_sq += err * err;
        sum_quad += err.powi(4);
    }
    let n = cfg.mse_draws as f64;
    let empirical_mse = sum_sq / n;
    let variance = (sum_quad / n - empirical_mse * empirical_mse).max(0.0);
    let stderr = (variance / n).sqrt();

    let mut violation = None;
    if max_err > worst + 1e-12 {
        violation = Some(format!(
            "config {idx}: max error {max_err:.6e} exceeds worst-case bound {worst:.6e} \
             (L={depth}, M={m}, theta_star={theta_star:.4})"
        ));
    } else if empirical_mse > mse + 3.0 * stderr + 1e-12 {
        violation = Some(format!(
            "config {idx}: MSE {empirical_mse:.6e} exceeds bound {mse:.6e} + 3se \
             (L={depth}, M={m}, theta_star={theta_star:.4})"
        ));
    }

    Ok(ConfigResult {
        row: BoundsRow {
            l: depth,
            m,
            theta_star,
            worst_bound: worst,
            mse_bound: mse,
            empirical_max_err: max_err,
            empirical_mse,
            samples: cfg.mse_draws,
            master_seed,
            job_seed: seed,
        },
        violation,
    })
}

pub fn run(cfg: &BoundsConfig, out_dir: &Path, master_seed: u64) -> Result<BoundsReport, Failure> {
    cfg.validate()?;

    let results: Vec<ConfigResult> = (0..cfg.configs)
        .into_par_iter()
        .map(|idx| run_config(cfg, master_seed, idx))
        .collect::<Result<_, _>>()?;

    let rows: Vec<BoundsRow> = results.iter().map(|r| r.row.clone()).collect();

    std::fs::create_dir_all(out_dir)?;
    let mut writer = csv::Writer::from_path(out_dir.join("bounds.csv"))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    // Write the table before failing so a violation leaves evidence behind.
    if let Some(msg) = results.into_iter().find_map(|r| r.violation) {
        return Err(assertion(msg));
    }

    Ok(BoundsReport { rows })
}
