//! Positive and negative definiteness verdicts via symmetric eigensolves.
//!
//! A verdict always reports the extreme eigenvalue, so a failure carries
//! the size of the violation. Negative definiteness is tested on the
//! centered matrix `P G P`, `P = I - 11^T/n`, whose quadratic form is the
//! form of `G` restricted to coefficient vectors summing to zero.

use serde::Serialize;

use crate::error::Result;
use crate::kernel::GramMatrix;
use crate::linalg;
use crate::tolerance::{scale, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub pass: bool,
    pub min_eigenvalue: f64,
    /// Absolute threshold the minimum eigenvalue was compared against
    /// (`-tolerance` is the largest admissible violation).
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NdVerdict {
    pub pass: bool,
    pub max_projected_eigenvalue: f64,
    pub tolerance: f64,
    /// Set for `n < 2`, where the zero-sum constraint leaves only `c = 0`.
    pub degenerate: bool,
}

pub fn check_positive_semidefinite(g: &GramMatrix, tol: &ToleranceConfig) -> Result<PsdVerdict> {
    tol.validate()?;
    let values = linalg::eigenvalues(g.entries())?;
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_eigenvalue = *values.last().unwrap();
    let threshold = tol.psd_tol * scale(max_abs);
    Ok(PsdVerdict {
        pass: min_eigenvalue >= -threshold,
        min_eigenvalue,
        tolerance: threshold,
    })
}

pub fn check_negative_definite(g: &GramMatrix, tol: &ToleranceConfig) -> Result<NdVerdict> {
    tol.validate()?;
    if g.len() < 2 {
        return Ok(NdVerdict {
            pass: true,
            max_projected_eigenvalue: 0.0,
            tolerance: tol.nd_tol,
            degenerate: true,
        });
    }
    let projected = linalg::center(g.entries());
    let values = linalg::eigenvalues(&projected)?;
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol.nd_tol * scale(max_abs);
    let max_projected_eigenvalue = values[0];
    Ok(NdVerdict {
        pass: max_projected_eigenvalue <= threshold,
        max_projected_eigenvalue,
        tolerance: threshold,
        degenerate: false,
    })
}
