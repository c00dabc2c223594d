//! Sparse Pauli dynamics with truncation bounds, a dense reference
//! simulator with a parametric noise model, and learning-based error
//! mitigation (CPDR variants, ZNE, PEC) for layered Clifford + Pauli
//! rotation circuits.

pub mod circuit;
pub mod densesim;
pub mod error;
pub mod mitigation;
pub mod pauli;
pub mod spd;

pub use circuit::{
    build_hardware_efficient, build_ising_trotter, normalize_angles, BlockOp, BlockTemplate,
    CircuitBuilder, CliffordOp, Edge, IsingSpec, Layer, ParamCircuit, RotAxis,
};
pub use densesim::{
    exact_expectation, noisy_expectation, noisy_final_state, sample_expectation, DensityMatrix,
    NoiseModel, Statevector, TermSampler, MAX_DENSITY_QUBITS, MAX_STATEVECTOR_QUBITS,
};
pub use error::{Error, Result};
pub use mitigation::{
    build_clifford_training_set, build_cpdr_training_set, build_insertion_set, cpdr_pec_mitigate,
    cpdr_zne_mitigate, default_ising_grid, insertion_term_features, level_term_features,
    richardson_weights, ridge_fit, zne_extrapolate, CircuitFamily, FeatureSource, InsertionFeatures,
    InsertionOp, IsingFamily, LayerAngleFamily, LevelFeatures, NoiseLevelSet, RidgeFit,
    TrainingSample, ZneModel, CPDR_ALPHA, LEARNED_PEC_ALPHA,
};
pub use pauli::{CliffordTableau, Gate, Observable, PauliWord, MAX_QUBITS};
pub use spd::{
    enumerate_paths, mean_sin_sq, mse_bound, path_weight, path_weight_orthogonality_check,
    spd_expectation, theorem_threshold, worst_case_bound, BoundMode, OrthogonalityCheck, PauliPath,
    SparseInitialState, SpdEstimate,
};
