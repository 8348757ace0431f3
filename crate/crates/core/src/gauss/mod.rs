//! Gaussian processes: covariances, diagnostics, sampling and Monte Carlo.

pub mod mc;
pub mod process;
pub mod rng;
pub mod sampling;

pub use mc::{mc_characteristic, mc_field_covariance, mc_fock_kernel, Estimate, FockReport, McReport};
pub use process::{
    check_dilation_invariance, check_dilation_stationarity, check_stationary_increments, covariance,
    increment_form, normalize_covariance, InvarianceVerdict, ProcessSpec,
};
pub use rng::RandomSeed;
pub use sampling::{empirical_covariance, sample_paths, EmpiricalCovariance, PathEnsemble};
