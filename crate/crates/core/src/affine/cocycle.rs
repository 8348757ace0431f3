//! The Brownian cocycle `b_t = sgn(t) chi_[t ^ 0, t v 0]` on the line, its
//! one-sided restriction `b_t = chi_[0, t]` (`t > 0`), and the identities
//! linking them to `psi(t) = |b_t|^2` and `C(s, t) = <b_s, b_t>`.

use serde::Serialize;

use super::step::StepFunction;
use crate::error::{Error, Result};
use crate::gauss::process::{covariance, ProcessSpec};
use crate::tolerance::scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocycleSpec {
    /// Two-sided, acted on by translations.
    Brownian,
    /// `chi_[0, t]` for `t > 0`.
    OneSided,
}

impl CocycleSpec {
    pub fn name(self) -> &'static str {
        match self {
            CocycleSpec::Brownian => "brownian",
            CocycleSpec::OneSided => "one-sided",
        }
    }

    fn check(self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::domain(self.name(), t, "must be finite"));
        }
        if self == CocycleSpec::OneSided && t <= 0.0 {
            return Err(Error::domain(self.name(), t, "requires t > 0"));
        }
        Ok(())
    }
}

pub fn cocycle(spec: CocycleSpec, t: f64) -> Result<StepFunction> {
    spec.check(t)?;
    if t == 0.0 {
        Ok(StepFunction::zero())
    } else if t > 0.0 {
        StepFunction::indicator(0.0, t, 1.0)
    } else {
        StepFunction::indicator(t, 0.0, -1.0)
    }
}

/// `t^{-1/2} chi_[0, t]`, unit norm.
pub fn normalized_one_sided(t: f64) -> Result<StepFunction> {
    Ok(cocycle(CocycleSpec::OneSided, t)?.scale(1.0 / t.sqrt()))
}

/// `|b_t|^2`.
pub fn psi_of(spec: CocycleSpec, t: f64) -> Result<f64> {
    Ok(cocycle(spec, t)?.norm_sq())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceVerdict {
    pub pass: bool,
    pub distance: f64,
    pub tolerance: f64,
}

impl DistanceVerdict {
    fn new(distance: f64, tolerance: f64) -> Self {
        DistanceVerdict {
            pass: distance <= tolerance,
            distance,
            tolerance,
        }
    }
}

/// `b_{s+t} = b_s + S_s b_t` with `S_s` the translation by `s`. The
/// one-sided variant is checked on the additive semigroup `s, t > 0`.
pub fn check_cocycle_identity(spec: CocycleSpec, s: f64, t: f64, tol: f64) -> Result<DistanceVerdict> {
    let lhs = cocycle(spec, s + t)?;
    let rhs = cocycle(spec, s)?.add(&cocycle(spec, t)?.shift(s));
    Ok(DistanceVerdict::new(lhs.l2_distance(&rhs), tol))
}

/// The involution `f -> -f(-x)`. It commutes with translations as
/// `theta S_t theta = S_{-t}`, and unlike the bare reflection it carries the
/// signed cocycle `b_t` to `b_{-t}`.
pub fn theta(f: &StepFunction) -> StepFunction {
    f.reflect().scale(-1.0)
}

/// `theta b_t = b_{-t}`.
pub fn check_theta_equivariance(spec: CocycleSpec, t: f64, tol: f64) -> Result<DistanceVerdict> {
    if spec != CocycleSpec::Brownian {
        return Err(Error::InvalidParameter(
            "reflection equivariance needs the two-sided cocycle".into(),
        ));
    }
    let lhs = theta(&cocycle(spec, t)?);
    let rhs = cocycle(spec, -t)?;
    Ok(DistanceVerdict::new(lhs.l2_distance(&rhs), tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityVerdict {
    pub pass: bool,
    /// `<b_s, b_t>`.
    pub covariance: f64,
    /// `(psi(s) + psi(t) - psi(t - s)) / 2`.
    pub from_psi: f64,
    /// `psi(t - s)`.
    pub psi_difference: f64,
    /// `|b_s - b_t|^2`.
    pub increment_norm_sq: f64,
    pub tolerance: f64,
}

/// Both identities `C(s, t) = (psi(s) + psi(t) - psi(t - s)) / 2` and
/// `psi(t - s) = |b_s - b_t|^2`. For the one-sided variant `psi(t - s)` is
/// read off the two-sided cocycle, which it restricts.
pub fn check_duality(spec: CocycleSpec, s: f64, t: f64, tol: f64) -> Result<DualityVerdict> {
    let (bs, bt) = (cocycle(spec, s)?, cocycle(spec, t)?);
    let covariance = bs.inner(&bt);
    let psi_difference = psi_of(CocycleSpec::Brownian, t - s)?;
    let from_psi = 0.5 * (bs.norm_sq() + bt.norm_sq() - psi_difference);
    let increment_norm_sq = bs.sub(&bt).norm_sq();
    let kernel_ok = (covariance - from_psi).abs() <= tol * scale(covariance.abs().max(from_psi.abs()));
    let increment_ok =
        (psi_difference - increment_norm_sq).abs() <= tol * scale(psi_difference.max(increment_norm_sq));
    Ok(DualityVerdict {
        pass: kernel_ok && increment_ok,
        covariance,
        from_psi,
        psi_difference,
        increment_norm_sq,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HatVerdict {
    pub all_orthogonal: bool,
    pub max_abs_inner: f64,
    pub comparisons: usize,
    /// No pairs were compared; the pass is vacuous.
    pub degenerate: bool,
}

fn hat_verdict(points: &[f64], tol: f64, mut inner: impl FnMut(f64, f64) -> Result<f64>) -> Result<HatVerdict> {
    if let Some(&x) = points.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidGrid(format!("orthogonality grid must be positive, got {x}")));
    }
    let mut max_abs_inner = 0.0f64;
    for &s in points {
        for &t in points {
            max_abs_inner = max_abs_inner.max(inner(s, -t)?.abs());
        }
    }
    Ok(HatVerdict {
        all_orthogonal: max_abs_inner <= tol,
        max_abs_inner,
        comparisons: points.len() * points.len(),
        degenerate: points.is_empty(),
    })
}

/// `<b_s, b_{-t}> = 0` for all `s, t` in the positive grid.
pub fn check_hat_triviality(spec: CocycleSpec, points: &[f64], tol: f64) -> Result<HatVerdict> {
    if spec != CocycleSpec::Brownian {
        return Err(Error::InvalidParameter(
            "orthogonality across the origin needs the two-sided cocycle".into(),
        ));
    }
    hat_verdict(points, tol, |s, t| Ok(cocycle(spec, s)?.inner(&cocycle(spec, t)?)))
}

/// The same test read off a covariance: `C(s, -t) = 0` for all grid `s, t`.
pub fn check_hat_triviality_covariance(process: &ProcessSpec, points: &[f64], tol: f64) -> Result<HatVerdict> {
    hat_verdict(points, tol, |s, t| covariance(process, s, t))
}

/// `<chi_[0,1], tau_t chi_[0,1]>` with `tau_t` the unitary dilation.
pub fn dilation_correlation(t: f64) -> Result<f64> {
    let b = normalized_one_sided(1.0)?;
    Ok(b.inner(&b.dilate(t)))
}
