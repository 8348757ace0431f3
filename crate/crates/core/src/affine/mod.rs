//! Exact step functions in `L^2(R)` and the affine cocycles built from them.

pub mod cocycle;
pub mod step;

pub use cocycle::{
    check_cocycle_identity, check_duality, check_hat_triviality, check_hat_triviality_covariance,
    check_theta_equivariance, cocycle, dilation_correlation, normalized_one_sided, psi_of, theta, CocycleSpec,
    DistanceVerdict, DualityVerdict, HatVerdict,
};
pub use step::StepFunction;
