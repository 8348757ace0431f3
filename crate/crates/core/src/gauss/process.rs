//! Centered Gaussian processes by covariance, and the closed-form
//! diagnostics on them: increment variance, stationary increments,
//! normalization and dilation invariance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::KernelSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    BrownianTwoSided,
    FractionalBrownian { hurst: f64 },
    BrownianOneSided,
    NormalizedOneSided,
    Custom(KernelSpec),
}

impl ProcessSpec {
    pub fn fractional_brownian(hurst: f64) -> Result<Self> {
        KernelSpec::fractional_brownian(hurst)?;
        Ok(ProcessSpec::FractionalBrownian { hurst })
    }

    pub fn kernel(&self) -> KernelSpec {
        match self {
            ProcessSpec::BrownianTwoSided => KernelSpec::BrownianTwoSided,
            ProcessSpec::FractionalBrownian { hurst } => KernelSpec::FractionalBrownian { hurst: *hurst },
            ProcessSpec::BrownianOneSided => KernelSpec::BrownianOneSided,
            ProcessSpec::NormalizedOneSided => KernelSpec::NormalizedOneSided,
            ProcessSpec::Custom(k) => k.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::BrownianTwoSided => "bm2",
            ProcessSpec::FractionalBrownian { .. } => "fbm",
            ProcessSpec::BrownianOneSided => "bm1",
            ProcessSpec::NormalizedOneSided => "nbm1",
            ProcessSpec::Custom(_) => "custom",
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.kernel().contains(t)
    }
}

/// `C(s, t)`.
pub fn covariance(p: &ProcessSpec, s: f64, t: f64) -> Result<f64> {
    let k = p.kernel();
    k.validate()?;
    k.eval(s, t)
}

/// `D(s, t) = C(t, t) + C(s, s) - 2 C(s, t)`. A value below `-1e-12` (relative)
/// means the covariance is not positive definite and is reported as such.
pub fn increment_form(p: &ProcessSpec, s: f64, t: f64) -> Result<f64> {
    let css = covariance(p, s, s)?;
    let ctt = covariance(p, t, t)?;
    let cst = covariance(p, s, t)?;
    let d = ctt + css - 2.0 * cst;
    if d < -1e-12 * (css.abs() + ctt.abs()).max(1.0) {
        return Err(Error::Numerical(format!(
            "negative increment variance D({s}, {t}) = {d:e}; covariance is not positive definite"
        )));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceVerdict {
    pub pass: bool,
    pub max_deviation: f64,
    pub comparisons: usize,
    /// Fewer than two admissible comparisons were available.
    pub degenerate: bool,
}

/// `D(s + h, t + h) = D(s, t)` for all grid pairs `s < t` and all shifts `h`
/// among the grid differences that keep both arguments in the domain.
pub fn check_stationary_increments(p: &ProcessSpec, grid: &Grid, tol: f64) -> Result<InvarianceVerdict> {
    let pts = grid.points();
    for &x in pts {
        if !p.contains(x) {
            return Err(Error::domain(p.name(), x, "grid point outside the process domain"));
        }
    }
    let mut shifts: Vec<f64> = pts
        .iter()
        .flat_map(|&a| pts.iter().map(move |&b| b - a))
        .filter(|&h| h != 0.0)
        .collect();
    shifts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    shifts.dedup();

    let mut max_deviation = 0.0f64;
    let mut comparisons = 0;
    let mut pass = true;
    for (i, &s) in pts.iter().enumerate() {
        for &t in &pts[i + 1..] {
            let base = increment_form(p, s, t)?;
            for &h in &shifts {
                if !(p.contains(s + h) && p.contains(t + h)) {
                    continue;
                }
                let dev = (increment_form(p, s + h, t + h)? - base).abs();
                comparisons += 1;
                max_deviation = max_deviation.max(dev);
                if dev > tol * base.abs().max(1.0) {
                    pass = false;
                }
            }
        }
    }
    Ok(InvarianceVerdict {
        pass,
        max_deviation,
        comparisons,
        degenerate: comparisons < 2,
    })
}

/// Process with covariance `C(s, t) / sqrt(C(s, s) C(t, t))`.
pub fn normalize_covariance(p: &ProcessSpec) -> ProcessSpec {
    match p {
        ProcessSpec::BrownianOneSided | ProcessSpec::NormalizedOneSided => {
            ProcessSpec::Custom(KernelSpec::NormalizedOneSided)
        }
        ProcessSpec::Custom(k @ (KernelSpec::NormalizedOneSided | KernelSpec::Normalized(_))) => {
            ProcessSpec::Custom(k.clone())
        }
        other => ProcessSpec::Custom(KernelSpec::Normalized(Box::new(other.kernel()))),
    }
}

/// `C(a s, a t) = C(s, t)` for every scale `a` and grid pair.
pub fn check_dilation_invariance(p: &ProcessSpec, grid: &Grid, scales: &[f64], tol: f64) -> Result<InvarianceVerdict> {
    if !grid.all_positive() {
        return Err(Error::InvalidGrid("dilation check needs a grid in (0, inf)".into()));
    }
    if let Some(a) = scales.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter(format!("dilation scale must be positive, got {a}")));
    }
    let mut max_deviation = 0.0f64;
    let mut comparisons = 0;
    let mut pass = true;
    for &s in grid.points() {
        for &t in grid.points() {
            let base = covariance(p, s, t)?;
            for &a in scales {
                let dev = (covariance(p, a * s, a * t)? - base).abs();
                comparisons += 1;
                max_deviation = max_deviation.max(dev);
                if dev > tol * base.abs().max(1.0) {
                    pass = false;
                }
            }
        }
    }
    Ok(InvarianceVerdict {
        pass,
        max_deviation,
        comparisons,
        degenerate: comparisons < 2,
    })
}

/// Dilation stationarity of the normalized one-sided Brownian motion.
pub fn check_dilation_stationarity(grid: &Grid, scales: &[f64], tol: f64) -> Result<InvarianceVerdict> {
    check_dilation_invariance(&ProcessSpec::NormalizedOneSided, grid, scales, tol)
}
