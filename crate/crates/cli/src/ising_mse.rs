//! Protocol-comparison benchmark on the Trotterized Ising chain: global
//! Z-magnetization under the gate noise model, finite shots, repeated fits,
//! MSE tables marginalized over each angle axis.
//!
//! Costly density-matrix work happens once per circuit (per-term means for
//! every noise level and insertion); repeats only redraw binomial shot noise
//! from those means and refit, which keeps 100 repeats cheap.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use cpdr_core::circuit::{build_ising_trotter, IsingSpec, ParamCircuit};
use cpdr_core::densesim::{exact_expectation, TermSampler};
use cpdr_core::error::Error as CoreError;
use cpdr_core::mitigation::{
    build_insertion_set, cpdr_pec_mitigate, cpdr_zne_mitigate, insertion_term_features,
    level_term_features, ridge_fit, snap_to_clifford_angles, zne_extrapolate, InsertionOp,
    NoiseLevelSet, RidgeFit, ZneModel,
};
use cpdr_core::pauli::Observable;
use cpdr_core::spd::{spd_expectation, SparseInitialState};

use crate::config::{CpdrReference, IsingMseConfig, Protocol};
use crate::seed::job_seed;
use crate::{validation, Failure};

fn core(e: CoreError) -> Failure {
    validation(e.to_string())
}

/// Output column identity. `CpdrZneExactRef` is the dense-reference variant
/// emitted alongside `cpdr-zne` when the config asks for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutProtocol {
    Noise,
    ZneLinear,
    ZneQuad,
    ZneExp,
    LearnedPec,
    CpdrZne,
    CpdrZneExactRef,
    CpdrPec,
}

impl OutProtocol {
    fn name(&self) -> &'static str {
        match self {
            OutProtocol::Noise => "noise",
            OutProtocol::ZneLinear => "zne-linear",
            OutProtocol::ZneQuad => "zne-quad",
            OutProtocol::ZneExp => "zne-exp",
            OutProtocol::LearnedPec => "learned-pec",
            OutProtocol::CpdrZne => "cpdr-zne",
            OutProtocol::CpdrZneExactRef => "cpdr-zne-exactref",
            OutProtocol::CpdrPec => "cpdr-pec",
        }
    }
}

/// Per-term samplers for one circuit's feature columns plus its references.
struct TrainPoint {
    samplers: Vec<TermSampler>,
    reference: f64,
    /// Dense-oracle reference, kept only when the config compares both.
    exact_reference: Option<f64>,
}

struct TargetPoint {
    h_idx: usize,
    j_idx: usize,
    level_samplers: Option<Vec<TermSampler>>,
    insertion_samplers: Option<Vec<TermSampler>>,
    ideal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MseByThetaHRow {
    pub protocol: String,
    pub theta_h: f64,
    pub mse: f64,
    pub repeats: u64,
    pub master_seed: u64,
    pub job_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MseByThetaJRow {
    pub protocol: String,
    pub theta_j: f64,
    pub mse: f64,
    pub repeats: u64,
    pub master_seed: u64,
    pub job_seed: u64,
}

#[derive(Serialize)]
struct FitRecord {
    protocol: String,
    alpha: f64,
    levels_or_ops: serde_json::Value,
    coefficients: Vec<f64>,
    train_rmse: f64,
}

#[derive(Debug, Clone)]
pub struct IsingMseReport {
    pub protocols: Vec<String>,
    pub mse_by_theta_h: Vec<MseByThetaHRow>,
    pub mse_by_theta_j: Vec<MseByThetaJRow>,
    /// Median over the theta_h rows, per protocol.
    pub median_mse: BTreeMap<String, f64>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn sample_features(
    samplers: &[TermSampler],
    shots: u64,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<f64>, Failure> {
    samplers
        .iter()
        .map(|s| s.sample_with(shots, rng).map_err(core))
        .collect()
}

/// Resample every training circuit's features and refit.
fn resample_and_fit(
    points: &[TrainPoint],
    shots: u64,
    alpha: f64,
    exact_refs: bool,
    rng: &mut ChaCha12Rng,
) -> Result<(RidgeFit, Option<RidgeFit>), Failure> {
    let mut features = Vec::with_capacity(points.len());
    let mut refs = Vec::with_capacity(points.len());
    let mut dense_refs = Vec::with_capacity(points.len());
    for point in points {
        features.push(sample_features(&point.samplers, shots, rng)?);
        refs.push(point.reference);
        if exact_refs {
            dense_refs.push(point.exact_reference.expect("exact reference present"));
        }
    }
    let fit = ridge_fit(&features, &refs, alpha).map_err(core)?;
    let exact_fit = if exact_refs {
        Some(ridge_fit(&features, &dense_refs, alpha).map_err(core)?)
    } else {
        None
    };
    Ok((fit, exact_fit))
}

struct Precompute {
    out_protocols: Vec<OutProtocol>,
    cpdr_zne_train: Vec<TrainPoint>,
    cpdr_pec_train: Vec<TrainPoint>,
    pec_train: Vec<TrainPoint>,
    targets: Vec<TargetPoint>,
    insertions: Vec<InsertionOp>,
    levels: NoiseLevelSet,
}

fn term_samplers(
    rows: &[Vec<f64>],
    observable: &Observable,
    flip: f64,
) -> Result<Vec<TermSampler>, Failure> {
    rows.iter()
        .map(|row| TermSampler::from_term_means(observable, row, flip).map_err(core))
        .collect()
}

fn spd_reference(c: &ParamCircuit, o: &Observable, m: usize) -> Result<f64, Failure> {
    let normalized = cpdr_core::circuit::normalize_angles(c).map_err(core)?;
    let rho = SparseInitialState::zero_state(c.n_qubits()).map_err(core)?;
    Ok(spd_expectation(&normalized, o, &rho, m).map_err(core)?.value)
}

fn precompute(cfg: &IsingMseConfig, master_seed: u64) -> Result<Precompute, Failure> {
    let spec = IsingSpec::chain(cfg.n_qubits, cfg.steps, 0.0, 0.0);
    let observable = Observable::magnetization_z(cfg.n_qubits).map_err(core)?;
    let nm = &cfg.noise;
    let flip = nm.readout_flip;
    let levels = NoiseLevelSet::new(cfg.levels.clone()).map_err(core)?;

    let build = |theta_h: f64, theta_j: f64| -> Result<ParamCircuit, Failure> {
        build_ising_trotter(&spec.with_angles(theta_h, theta_j), None).map_err(core)
    };

    // Structure is angle-independent, so one template pins the insertion
    // positions for every circuit in the run.
    let template = build(0.1, -0.1)?;
    let insertions = build_insertion_set(
        &template,
        cfg.insertions,
        job_seed(master_seed, "insertions", 0),
    )
    .map_err(core)?;

    let has = |p: Protocol| cfg.protocols.contains(&p);
    let need_target_levels = has(Protocol::Noise)
        || has(Protocol::ZneLinear)
        || has(Protocol::ZneQuad)
        || has(Protocol::ZneExp)
        || has(Protocol::CpdrZne);
    let need_target_insertions = has(Protocol::LearnedPec) || has(Protocol::CpdrPec);
    let both_refs = cfg.cpdr_reference == CpdrReference::Both;

    let mut out_protocols = Vec::new();
    for p in &cfg.protocols {
        let mapped = match p {
            Protocol::Noise => OutProtocol::Noise,
            Protocol::ZneLinear => OutProtocol::ZneLinear,
            Protocol::ZneQuad => OutProtocol::ZneQuad,
            Protocol::ZneExp => OutProtocol::ZneExp,
            Protocol::LearnedPec => OutProtocol::LearnedPec,
            Protocol::CpdrZne => OutProtocol::CpdrZne,
            Protocol::CpdrPec => OutProtocol::CpdrPec,
        };
        if !out_protocols.contains(&mapped) {
            out_protocols.push(mapped);
            if mapped == OutProtocol::CpdrZne && both_refs {
                out_protocols.push(OutProtocol::CpdrZneExactRef);
            }
        }
    }

    // CPDR training grid: per-term means per level and/or insertion, with
    // truncated-propagation references (dense references only when compared).
    let grid = cfg.cpdr_grid.pairs()?;
    let want_spd = cfg.cpdr_reference != CpdrReference::Exact;
    let grid_points: Vec<(Option<TrainPoint>, Option<TrainPoint>)> = grid
        .par_iter()
        .map(|pair| -> Result<_, Failure> {
            if !(has(Protocol::CpdrZne) || has(Protocol::CpdrPec)) {
                return Ok((None, None));
            }
            let circuit = build(pair[0], pair[1])?;
            let spd_ref = spd_reference(&circuit, &observable, cfg.reference_m)?;
            let dense_ref = if cfg.cpdr_reference != CpdrReference::Spd {
                Some(exact_expectation(&circuit, &observable).map_err(core)?)
            } else {
                None
            };
            let reference = if want_spd {
                spd_ref
            } else {
                dense_ref.expect("dense reference computed")
            };
            let zne = if has(Protocol::CpdrZne) {
                let rows = level_term_features(&circuit, &observable, nm, &levels).map_err(core)?;
                Some(TrainPoint {
                    samplers: term_samplers(&rows, &observable, flip)?,
                    reference,
                    exact_reference: if both_refs { dense_ref } else { None },
                })
            } else {
                None
            };
            let pec = if has(Protocol::CpdrPec) {
                let rows = insertion_term_features(&circuit, &observable, nm, &insertions)
                    .map_err(core)?;
                Some(TrainPoint {
                    samplers: term_samplers(&rows, &observable, flip)?,
                    reference,
                    exact_reference: None,
                })
            } else {
                None
            };
            Ok((zne, pec))
        })
        .collect::<Result<_, _>>()?;
    let mut cpdr_zne_train = Vec::new();
    let mut cpdr_pec_train = Vec::new();
    for (zne, pec) in grid_points {
        if let Some(p) = zne {
            cpdr_zne_train.push(p);
        }
        if let Some(p) = pec {
            cpdr_pec_train.push(p);
        }
    }

    // Clifford set for learned PEC: random snaps of the template's angles,
    // references exact by zero-order truncated propagation.
    let pec_train: Vec<TrainPoint> = if has(Protocol::LearnedPec) {
        (0..cfg.clifford_circuits)
            .into_par_iter()
            .map(|k| -> Result<TrainPoint, Failure> {
                let mut rng =
                    ChaCha12Rng::seed_from_u64(job_seed(master_seed, "clifford", k as u64));
                let circuit = snap_to_clifford_angles(&template, &mut rng).map_err(core)?;
                let rows =
                    insertion_term_features(&circuit, &observable, nm, &insertions).map_err(core)?;
                Ok(TrainPoint {
                    samplers: term_samplers(&rows, &observable, flip)?,
                    reference: spd_reference(&circuit, &observable, 0)?,
                    exact_reference: None,
                })
            })
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    // Evaluation grid: the two target angle axes crossed.
    let mut pairs = Vec::new();
    for (i, &theta_h) in cfg.theta_h.iter().enumerate() {
        for (j, &theta_j) in cfg.theta_j.iter().enumerate() {
            pairs.push((i, j, theta_h, theta_j));
        }
    }
    let targets: Vec<TargetPoint> = pairs
        .par_iter()
        .map(|&(h_idx, j_idx, theta_h, theta_j)| -> Result<_, Failure> {
            let circuit = build(theta_h, theta_j)?;
            let ideal = exact_expectation(&circuit, &observable).map_err(core)?;
            let level_samplers = if need_target_levels {
                let rows = level_term_features(&circuit, &observable, nm, &levels).map_err(core)?;
                Some(term_samplers(&rows, &observable, flip)?)
            } else {
                None
            };
            let insertion_samplers = if need_target_insertions {
                let rows = insertion_term_features(&circuit, &observable, nm, &insertions)
                    .map_err(core)?;
                Some(term_samplers(&rows, &observable, flip)?)
            } else {
                None
            };
            Ok(TargetPoint {
                h_idx,
                j_idx,
                level_samplers,
                insertion_samplers,
                ideal,
            })
        })
        .collect::<Result<_, _>>()?;

    Ok(Precompute {
        out_protocols,
        cpdr_zne_train,
        cpdr_pec_train,
        pec_train,
        targets,
        insertions,
        levels,
    })
}

struct RepeatFits {
    cpdr_zne: Option<RidgeFit>,
    cpdr_zne_exact: Option<RidgeFit>,
    cpdr_pec: Option<RidgeFit>,
    learned_pec: Option<RidgeFit>,
}

pub fn run(
    cfg: &IsingMseConfig,
    out_dir: &Path,
    master_seed: u64,
) -> Result<IsingMseReport, Failure> {
    cfg.validate()?;
    if cfg.protocols.contains(&Protocol::ZneQuad) && cfg.levels.len() < 3 {
        return Err(validation("zne-quad needs at least 3 noise levels"));
    }

    let pre = precompute(cfg, master_seed)?;
    let n_h = cfg.theta_h.len();
    let n_j = cfg.theta_j.len();
    let n_protocols = pre.out_protocols.len();
    let both_refs = cfg.cpdr_reference == CpdrReference::Both;

    let mut sums = vec![vec![vec![0.0f64; n_j]; n_h]; n_protocols];
    let mut first_fits: Option<RepeatFits> = None;

    for r in 0..cfg.repeats {
        let mut rng = ChaCha12Rng::seed_from_u64(job_seed(master_seed, "repeat", r));

        // Fits first, in a fixed order, so the draw sequence is stable.
        let (cpdr_zne, cpdr_zne_exact) = if pre.cpdr_zne_train.is_empty() {
            (None, None)
        } else {
            let (fit, exact_fit) = resample_and_fit(
                &pre.cpdr_zne_train,
                cfg.shots,
                cfg.cpdr_alpha,
                both_refs,
                &mut rng,
            )?;
            (Some(fit), exact_fit)
        };
        let cpdr_pec = if pre.cpdr_pec_train.is_empty() {
            None
        } else {
            let (fit, _) =
                resample_and_fit(&pre.cpdr_pec_train, cfg.shots, cfg.cpdr_alpha, false, &mut rng)?;
            Some(fit)
        };
        let learned_pec = if pre.pec_train.is_empty() {
            None
        } else {
            let (fit, _) =
                resample_and_fit(&pre.pec_train, cfg.shots, cfg.pec_alpha, false, &mut rng)?;
            Some(fit)
        };
        let fits = RepeatFits {
            cpdr_zne,
            cpdr_zne_exact,
            cpdr_pec,
            learned_pec,
        };

        for target in &pre.targets {
            let lv = match &target.level_samplers {
                Some(s) => Some(sample_features(s, cfg.shots, &mut rng)?),
                None => None,
            };
            let ins = match &target.insertion_samplers {
                Some(s) => Some(sample_features(s, cfg.shots, &mut rng)?),
                None => None,
            };
            let level_points = lv.as_ref().map(|vals| {
                pre.levels
                    .levels()
                    .iter()
                    .copied()
                    .zip(vals.iter().copied())
                    .collect::<Vec<_>>()
            });

            for (pi, proto) in pre.out_protocols.iter().enumerate() {
                let est = match proto {
                    OutProtocol::Noise => lv.as_ref().expect("level features")[0],
                    OutProtocol::ZneLinear => {
                        zne_extrapolate(level_points.as_ref().expect("points"), ZneModel::Linear)
                            .map_err(core)?
                    }
                    OutProtocol::ZneQuad => {
                        zne_extrapolate(level_points.as_ref().expect("points"), ZneModel::Quadratic)
                            .map_err(core)?
                    }
                    OutProtocol::ZneExp => {
                        // A sign-mixed decay has no log-linear fit; fall back
                        // to the unextrapolated level-1 value.
                        match zne_extrapolate(
                            level_points.as_ref().expect("points"),
                            ZneModel::Exponential,
                        ) {
                            Ok(v) => v,
                            Err(CoreError::SignMixedExponential) => {
                                lv.as_ref().expect("level features")[0]
                            }
                            Err(e) => return Err(core(e)),
                        }
                    }
                    OutProtocol::LearnedPec => cpdr_pec_mitigate(
                        ins.as_ref().expect("insertion features"),
                        fits.learned_pec.as_ref().expect("learned-pec fit"),
                    )
                    .map_err(core)?,
                    OutProtocol::CpdrZne => cpdr_zne_mitigate(
                        lv.as_ref().expect("level features"),
                        fits.cpdr_zne.as_ref().expect("cpdr-zne fit"),
                    )
                    .map_err(core)?,
                    OutProtocol::CpdrZneExactRef => cpdr_zne_mitigate(
                        lv.as_ref().expect("level features"),
                        fits.cpdr_zne_exact.as_ref().expect("dense-reference fit"),
                    )
                    .map_err(core)?,
                    OutProtocol::CpdrPec => cpdr_pec_mitigate(
                        ins.as_ref().expect("insertion features"),
                        fits.cpdr_pec.as_ref().expect("cpdr-pec fit"),
                    )
                    .map_err(core)?,
                };
                let err = est - target.ideal;
                sums[pi][target.h_idx][target.j_idx] += err * err;
            }
        }

        if first_fits.is_none() {
            first_fits = Some(fits);
        }
    }

    // Marginal tables: MSE(protocol, theta_h) averages over theta_j and
    // repeats; the other table swaps the roles.
    let denom_h = (n_j as u64 * cfg.repeats) as f64;
    let denom_j = (n_h as u64 * cfg.repeats) as f64;
    let mut mse_by_theta_h = Vec::with_capacity(n_protocols * n_h);
    let mut mse_by_theta_j = Vec::with_capacity(n_protocols * n_j);
    let mut median_mse = BTreeMap::new();
    for (pi, proto) in pre.out_protocols.iter().enumerate() {
        let mut h_values = Vec::with_capacity(n_h);
        for (i, &theta_h) in cfg.theta_h.iter().enumerate() {
            let mse = cfg.theta_j.iter().enumerate().map(|(j, _)| sums[pi][i][j]).sum::<f64>()
                / denom_h;
            h_values.push(mse);
            mse_by_theta_h.push(MseByThetaHRow {
                protocol: proto.name().to_string(),
                theta_h,
                mse,
                repeats: cfg.repeats,
                master_seed,
                job_seed: job_seed(master_seed, "mse-by-theta-h", (pi * n_h + i) as u64),
            });
        }
        for (j, &theta_j) in cfg.theta_j.iter().enumerate() {
            let mse = cfg.theta_h.iter().enumerate().map(|(i, _)| sums[pi][i][j]).sum::<f64>()
                / denom_j;
            mse_by_theta_j.push(MseByThetaJRow {
                protocol: proto.name().to_string(),
                theta_j,
                mse,
                repeats: cfg.repeats,
                master_seed,
                job_seed: job_seed(master_seed, "mse-by-theta-j", (pi * n_j + j) as u64),
            });
        }
        median_mse.insert(proto.name().to_string(), median(&mut h_values));
    }

    std::fs::create_dir_all(out_dir)?;
    let mut writer = csv::Writer::from_path(out_dir.join("mse_by_theta_h.csv"))?;
    for row in &mse_by_theta_h {
        writer.serialize(row)?;
    }
    writer.flush()?;
    let mut writer = csv::Writer::from_path(out_dir.join("mse_by_theta_j.csv"))?;
    for row in &mse_by_theta_j {
        writer.serialize(row)?;
    }
    writer.flush()?;

    // Fit snapshot from the first repeat, one record per learned protocol.
    let mut records = Vec::new();
    if let Some(fits) = &first_fits {
        let level_values = serde_json::to_value(pre.levels.levels()).expect("levels serialize");
        let op_values = serde_json::to_value(&pre.insertions).expect("ops serialize");
        if let Some(fit) = &fits.cpdr_zne {
            records.push(FitRecord {
                protocol: "cpdr-zne".into(),
                alpha: fit.alpha,
                levels_or_ops: level_values.clone(),
                coefficients: fit.coefficients.clone(),
                train_rmse: fit.train_rmse,
            });
        }
        if let Some(fit) = &fits.cpdr_zne_exact {
            records.push(FitRecord {
                protocol: "cpdr-zne-exactref".into(),
                alpha: fit.alpha,
                levels_or_ops: level_values.clone(),
                coefficients: fit.coefficients.clone(),
                train_rmse: fit.train_rmse,
            });
        }
        if let Some(fit) = &fits.cpdr_pec {
            records.push(FitRecord {
                protocol: "cpdr-pec".into(),
                alpha: fit.alpha,
                levels_or_ops: op_values.clone(),
                coefficients: fit.coefficients.clone(),
                train_rmse: fit.train_rmse,
            });
        }
        if let Some(fit) = &fits.learned_pec {
            records.push(FitRecord {
                protocol: "learned-pec".into(),
                alpha: fit.alpha,
                levels_or_ops: op_values,
                coefficients: fit.coefficients.clone(),
                train_rmse: fit.train_rmse,
            });
        }
    }
    let fits_json = serde_json::to_string_pretty(&records).expect("fit records serialize");
    std::fs::write(out_dir.join("fits.json"), fits_json + "\n")?;

    Ok(IsingMseReport {
        protocols: pre.out_protocols.iter().map(|p| p.name().to_string()).collect(),
        mse_by_theta_h,
        mse_by_theta_j,
        median_mse,
    })
}
