//! Exact non-Markovian decoherence of two identical optical modes coupled to a
//! common zero-temperature bosonic bath.
//!
//! The pipeline is: [`spectral`] supplies the bath kernel, [`volterra`] solves
//! the two memory-kernel amplitude equations, [`dynamics`] turns the
//! amplitudes into master-equation coefficients, [`states`] evolves the
//! entangled coherent states and measures their concurrence, and
//! [`fockcheck`] integrates the operator master equation in a truncated Fock
//! space as an independent oracle.

pub mod dynamics;
pub mod error;
pub mod fockcheck;
pub mod quad;
pub mod spectral;
pub mod states;
pub mod volterra;

pub use dynamics::{
    coefficients_derivative, coefficients_integral, markov_coefficients, markov_uv, solve_modes,
    uv_from_amplitudes, CoefficientTrack, Coefficients, MarkovConstants, ModeAmplitudes,
    PhaseBranch, SystemParams,
};
pub use error::{Error, Result};
pub use fockcheck::{
    closed_form_in_fock, embed_ecs, integrate_master, integrate_master_observed, run_oracle,
    trace_distance, DensityOperator, FockSpace, OracleReport, OracleSettings,
};
pub use spectral::{j_omega, kernel_mu, markov_decay, markov_shift, MemoryKernel, SpectralParams};

pub use states::{
    concurrence, concurrence_track, markov_concurrence_track, EcsKind, EcsState,
    QubitDensityMatrix,
};
pub use volterra::{solve, AmplitudeTrack, TimeGrid, VolterraProblem};

pub use num_complex::Complex64;
