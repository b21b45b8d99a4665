//! Two-qubit Hamiltonian tomography with an inverse physics-informed
//! neural network.
//!
//! The crate recovers the 15 real coupling parameters `J[k][l]` of a general
//! two-qubit Hamiltonian from time series of Pauli expectation values. The
//! Heisenberg equation closes into a linear 15-dimensional ODE for the
//! observable vector; a small feedforward network is trained to satisfy both
//! that ODE (with the couplings as trainable unknowns) and the measured data,
//! so the fit yields the couplings themselves.
//!
//! Modules:
//! - [`pauli`] — exact two-qubit Pauli algebra and the ODE generator.
//! - [`sim`] — ground-truth simulator: exact evolution, sampling, datasets.
//! - [`nn`] — the surrogate network and its differentiation engine.
//! - [`train`] — loss assembly and the joint fit of weights + couplings.
//! - [`experiments`] — accuracy sweeps over collocation counts and noise.
//! - [`io`] — CSV/JSON schemas for datasets and coupling matrices.
//!
//! See the `examples/` directory for one runnable example per capability;
//! the `hamtom` binary exposes the same operations as subcommands.

pub mod experiments;
pub mod io;
pub mod nn;
pub mod pauli;
pub mod sim;
pub mod train;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pauli index {0} out of range (must be 0..=3)")]
    PauliIndexOutOfRange(usize),
    #[error("coupling matrix has nonzero J[0][0] = {0}")]
    NonzeroEnergyReference(f64),
    #[error("coupling matrix contains a non-finite entry")]
    NonFiniteCoupling,
    #[error("density matrix is not Hermitian (max deviation {0:.3e})")]
    NonHermitianState(f64),
    #[error("non-finite time value {0}")]
    NonFiniteTime(f64),
    #[error("dataset needs at least 2 collocation points, got {0}")]
    TooFewPoints(usize),
    #[error("dataset times must be strictly increasing (violated at row {row})")]
    NonMonotoneTimes { row: usize },
    #[error("negative noise level {0}")]
    NegativeSigma(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("optimization failed: all {0} restarts diverged")]
    OptimizationFailed(usize),
    #[error("MAE undefined: true parameter {label} is zero")]
    ZeroTrueParameter { label: String },
    #[error("schema error: expected column {expected:?} at position {position}, found {found:?}")]
    SchemaMismatch {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("value {value} out of range [-1.05, 1.05] at row {row}, column {column}")]
    ValueOutOfRange {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("preset {preset} forbids nonzero entry J[{k}][{l}]")]
    PresetViolation { preset: String, k: usize, l: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
