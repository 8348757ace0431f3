use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerances for the spectral checks. Each is multiplied by
/// `max(1, largest eigenvalue magnitude)` before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceConfig {
    pub psd_tol: f64,
    pub nd_tol: f64,
    pub rank_tol: f64,
    pub recon_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            psd_tol: 1e-9,
            nd_tol: 1e-9,
            rank_tol: 1e-10,
            recon_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("psd_tol", self.psd_tol),
            ("nd_tol", self.nd_tol),
            ("rank_tol", self.rank_tol),
            ("recon_tol", self.recon_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `max(1, magnitude)`: the scale every relative tolerance is applied to.
pub fn scale(magnitude: f64) -> f64 {
    magnitude.abs().max(1.0)
}
