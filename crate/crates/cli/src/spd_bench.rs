//! Truncation sweep on the hardware-efficient family: truncated estimate vs
//! dense statevector reference, one row per (n, blocks, theta_star, M).

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use cpdr_core::circuit::{build_hardware_efficient, BlockTemplate};
use cpdr_core::densesim::exact_expectation;
use cpdr_core::spd::{spd_expectation, SparseInitialState};

use crate::config::{observable_for, SpdBenchConfig};
use crate::seed::job_seed;
use crate::{validation, Failure};

#[derive(Debug, Clone, Serialize)]
pub struct SpdBenchRow {
    pub n: usize,
    pub blocks: usize,
    pub theta_star: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub spd_value: f64,
    pub exact_value: f64,
    pub abs_error: f64,
    pub terms: usize,
    pub master_seed: u64,
    pub job_seed: u64,
    /// Timing only; excluded from the reproducibility guarantee.
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SpdBenchReport {
    pub rows: Vec<SpdBenchRow>,
}

pub fn run(
    cfg: &SpdBenchConfig,
    out_dir: &Path,
    master_seed: u64,
) -> Result<SpdBenchReport, Failure> {
    cfg.validate()?;

    // One job per (n, blocks, theta_star); the exact reference is shared
    // across all M for that circuit.
    let mut jobs = Vec::new();
    for &n in &cfg.n_qubits {
        for &blocks in &cfg.blocks {
            for &theta_star in &cfg.theta_star {
                jobs.push((n, blocks, theta_star));
            }
        }
    }

    let rows: Vec<Vec<SpdBenchRow>> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(n, blocks, theta_star))| -> Result<_, Failure> {
            let seed = job_seed(master_seed, "spd-bench", idx as u64);
            let circuit = build_hardware_efficient(n, blocks, theta_star, &BlockTemplate::default())
                .map_err(|e| validation(e.to_string()))?;
            let observable = observable_for(&cfg.observable, n)?;
            let exact = exact_expectation(&circuit, &observable)
                .map_err(|e| validation(e.to_string()))?;
            let state = SparseInitialState::zero_state(n).map_err(|e| validation(e.to_string()))?;
            let mut out = Vec::with_capacity(cfg.m.len());
            for &m in &cfg.m {
                let start = Instant::now();
                let est = spd_expectation(&circuit, &observable, &state, m)
                    .map_err(|e| validation(e.to_string()))?;
                let wall_ms = start.elapsed().as_millis() as u64;
                out.push(SpdBenchRow {
                    n,
                    blocks,
                    theta_star,
                    m,
                    spd_value: est.value,
                    exact_value: exact,
                    abs_error: (est.value - exact).abs(),
                    terms: est.terms_alive,
                    master_seed,
                    job_seed: seed,
                    wall_ms,
                });
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;

    let mut rows: Vec<SpdBenchRow> = rows.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.n, a.blocks, a.m)
            .cmp(&(b.n, b.blocks, b.m))
            .then(a.theta_star.total_cmp(&b.theta_star))
    });

    std::fs::create_dir_all(out_dir)?;
    let mut writer = csv::Writer::from_path(out_dir.join("spd_bench.csv"))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;

    Ok(SpdBenchReport { rows })
}
