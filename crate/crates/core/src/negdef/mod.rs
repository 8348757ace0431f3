//! Reflection-negative functions on `(R, R_+, -id)`.
//!
//! A symmetric `psi` is reflection negative when both kernels
//! `psi(s - t)` (on the line) and `psi(s + t)` (on the positive half-line)
//! are negative definite. On `(0, inf)` this is the Bernstein property,
//! checked here through alternating forward differences, and equivalently
//! the existence of Levy-Khintchine data (see [`lk`]).

pub mod lk;
pub mod nnls;

use serde::Serialize;

use crate::definiteness::{check_negative_definite, check_positive_semidefinite, NdVerdict, PsdVerdict};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::GramMatrix;
use crate::tolerance::ToleranceConfig;

pub use lk::{lk_eval, lk_fit, Atom, LkFit, LkFitOptions, LkTriple};

#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    /// `|t|^alpha`, with `|0|^0 = 0`.
    Power { alpha: f64 },
    AbsoluteValue,
    Lk(LkTriple),
    Tabulated(TabulatedPsi),
}

impl PsiSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("power exponent must be >= 0, got {alpha}")));
        }
        Ok(PsiSpec::Power { alpha })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PsiSpec::Power { .. } => "power",
            PsiSpec::AbsoluteValue => "abs",
            PsiSpec::Lk(_) => "lk",
            PsiSpec::Tabulated(_) => "tabulated",
        }
    }
}

/// `psi` sampled at finitely many points, extended evenly.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPsi {
    pairs: Vec<(f64, f64)>,
}

impl TabulatedPsi {
    /// Rejects repeated `t` and pairs `(t, x)`, `(-t, y)` with `x != y`.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidParameter("tabulated psi: non-finite entry".into()));
        }
        let mut by_abs: Vec<(f64, f64, f64)> = pairs.iter().map(|&(t, p)| (t.abs(), t, p)).collect();
        by_abs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in by_abs.windows(2) {
            if w[0].0 == w[1].0 {
                if w[0].1 == w[1].1 {
                    return Err(Error::InvalidParameter(format!("tabulated psi: repeated t = {}", w[0].1)));
                }
                if (w[0].2 - w[1].2).abs() > 1e-12 * w[0].2.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "tabulated psi is not even at |t| = {}",
                        w[0].0
                    )));
                }
            }
        }
        Ok(TabulatedPsi { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    fn lookup(&self, t: f64) -> Result<f64> {
        let target = t.abs();
        self.pairs
            .iter()
            .find(|(s, _)| s.abs() == target)
            .map(|&(_, p)| p)
            .ok_or(Error::TabulatedLookup(t))
    }
}

pub fn eval_psi(spec: &PsiSpec, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::domain(spec.name(), t, "argument must be finite"));
    }
    Ok(match spec {
        PsiSpec::Power { alpha } => {
            if t == 0.0 {
                0.0
            } else if *alpha == 0.0 {
                1.0
            } else if *alpha == 1.0 {
                t.abs()
            } else {
                t.abs().powf(*alpha)
            }
        }
        PsiSpec::AbsoluteValue => t.abs(),
        PsiSpec::Lk(triple) => lk_eval(triple, t),
        PsiSpec::Tabulated(table) => table.lookup(t)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub max_order_checked: usize,
    /// Most negative of `psi(t) / scale` and `(-1)^(k-1) D_h^k psi(t) / scale`
    /// over the grid, `scale = max(1, max |psi|)` over all evaluations.
    pub worst_violation: f64,
    /// Smallest order whose check failed; `Some(0)` means `psi < 0`.
    pub failing_order: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinOptions {
    pub h: f64,
    pub k_max: usize,
    pub tol: f64,
}

impl BernsteinOptions {
    /// `h` = min grid spacing / 10, `k_max = 8`, `tol = 1e-7`.
    pub fn for_grid(grid: &Grid) -> Self {
        let h = grid.min_spacing().map(|d| d / 10.0).unwrap_or(0.01);
        BernsteinOptions { h, k_max: 8, tol: 1e-7 }
    }
}

/// Finite-difference surrogate for `(-1)^(k-1) psi^(k) >= 0`, `k = 1..=k_max`,
/// together with `psi >= 0`, at every grid point.
pub fn check_bernstein(spec: &PsiSpec, grid: &Grid, options: &BernsteinOptions) -> Result<BernsteinReport> {
    let BernsteinOptions { h, k_max, tol } = *options;
    if !grid.all_positive() {
        return Err(Error::InvalidGrid("Bernstein check needs a grid in (0, inf)".into()));
    }
    if !(h > 0.0 && h.is_finite()) || k_max < 1 || !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Bernstein check needs h > 0, k_max >= 1, tol >= 0 (got {h}, {k_max}, {tol})"
        )));
    }

    // values[i][j] = psi(t_i + j h)
    let values = grid
        .iter()
        .map(|t| (0..=k_max).map(|j| eval_psi(spec, t + j as f64 * h)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let scale = values.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));

    let mut per_order = vec![f64::INFINITY; k_max + 1];
    for row in &values {
        per_order[0] = per_order[0].min(row[0] / scale);
        let mut diff = row.clone();
        for (k, worst) in per_order.iter_mut().enumerate().skip(1) {
            diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *worst = worst.min(sign * diff[0] / scale);
        }
    }
    let worst_violation = per_order.iter().copied().fold(f64::INFINITY, f64::min);
    let failing_order = per_order.iter().position(|&v| v < -tol);
    Ok(BernsteinReport {
        max_order_checked: k_max,
        worst_violation,
        failing_order,
        pass: failing_order.is_none(),
    })
}

fn psi_matrix(spec: &PsiSpec, points: &[f64], combine: impl Fn(f64, f64) -> f64) -> Result<GramMatrix> {
    let rows = points
        .iter()
        .map(|&s| points.iter().map(|&t| eval_psi(spec, combine(s, t))).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    GramMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionNegativeVerdict {
    pub nd_on_line: bool,
    pub nd_on_semigroup: bool,
    pub pass: bool,
    pub line: NdVerdict,
    pub semigroup: NdVerdict,
}

/// `psi(s_i - s_j)` over the grid and `psi(s_i + s_j)` over its positive
/// part must both be negative definite.
pub fn check_reflection_negative(
    spec: &PsiSpec,
    grid: &Grid,
    tol: &ToleranceConfig,
) -> Result<ReflectionNegativeVerdict> {
    let positive = grid
        .positive_part()
        .ok_or_else(|| Error::InvalidGrid("grid has no positive part".into()))?;
    let line = check_negative_definite(&psi_matrix(spec, grid.points(), |s, t| s - t)?, tol)?;
    let semigroup = check_negative_definite(&psi_matrix(spec, positive.points(), |s, t| s + t)?, tol)?;
    Ok(ReflectionNegativeVerdict {
        nd_on_line: line.pass,
        nd_on_semigroup: semigroup.pass,
        pass: line.pass && semigroup.pass,
        line,
        semigroup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchoenbergEntry {
    pub lambda: f64,
    pub line: PsdVerdict,
    pub semigroup: PsdVerdict,
    pub pass: bool,
}

/// For each `lambda`, PSD of `exp(-lambda psi(s_i - s_j))` on the grid and of
/// `exp(-lambda psi(s_i + s_j))` on its positive part.
pub fn schoenberg_bridge(
    spec: &PsiSpec,
    lambdas: &[f64],
    grid: &Grid,
    tol: &ToleranceConfig,
) -> Result<Vec<SchoenbergEntry>> {
    let positive = grid
        .positive_part()
        .ok_or_else(|| Error::InvalidGrid("grid has no positive part".into()))?;
    let on_line = psi_matrix(spec, grid.points(), |s, t| s - t)?;
    let on_semigroup = psi_matrix(spec, positive.points(), |s, t| s + t)?;
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
            }
            let line = check_positive_semidefinite(&on_line.map(|v| (-lambda * v).exp())?, tol)?;
            let semigroup = check_positive_semidefinite(&on_semigroup.map(|v| (-lambda * v).exp())?, tol)?;
            Ok(SchoenbergEntry {
                lambda,
                line,
                semigroup,
                pass: line.pass && semigroup.pass,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(p: &[f64]) -> Grid {
        Grid::new(p.to_vec()).unwrap()
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn eval_examples() {
        let lk = PsiSpec::Lk(LkTriple::from_pairs(0.0, 1.0, &[]).unwrap());
        assert_eq!(eval_psi(&lk, -3.0).unwrap(), 3.0);
        let lk = PsiSpec::Lk(LkTriple::from_pairs(1.0, 0.0, &[(1.0, 1.0)]).unwrap());
        assert!((eval_psi(&lk, 1.0).unwrap() - 1.632_120_558_828_557_7).abs() < 1e-15);
        let p0 = PsiSpec::power(0.0).unwrap();
        assert_eq!(eval_psi(&p0, 0.0).unwrap(), 0.0);
        assert_eq!(eval_psi(&p0, -2.5).unwrap(), 1.0);
        assert_eq!(eval_psi(&p0, 1e-300).unwrap(), 1.0);
        assert!(PsiSpec::power(-0.5).is_err());
    }

    #[test]
    fn tabulated_psi() {
        let t = TabulatedPsi::new(vec![(0.0, 0.0), (1.0, 2.0), (-1.0, 2.0), (3.0, 5.0)]).unwrap();
        let spec = PsiSpec::Tabulated(t);
        assert_eq!(eval_psi(&spec, -3.0).unwrap(), 5.0);
        assert!(matches!(eval_psi(&spec, 2.0), Err(Error::TabulatedLookup(_))));
        assert!(TabulatedPsi::new(vec![(1.0, 2.0), (-1.0, 3.0)]).is_err());
        assert!(TabulatedPsi::new(vec![(1.0, 2.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn bernstein_examples() {
        let g = grid(&[0.5, 1.0, 2.0, 4.0]);
        let opts = BernsteinOptions { h: 0.01, k_max: 6, tol: 1e-7 };
        let r = check_bernstein(&PsiSpec::power(0.5).unwrap(), &g, &opts).unwrap();
        assert!(r.pass, "{r:?}");
        let r = check_bernstein(&PsiSpec::power(2.0).unwrap(), &g, &opts).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failing_order, Some(2));
        let atom = PsiSpec::Lk(LkTriple::from_pairs(0.0, 0.0, &[(1.0, 1.0)]).unwrap());
        assert!(check_bernstein(&atom, &g, &opts).unwrap().pass);
        assert!(check_bernstein(&atom, &grid(&[-1.0, 1.0]), &opts).is_err());
    }

    #[test]
    fn default_bernstein_options() {
        let o = BernsteinOptions::for_grid(&grid(&[0.5, 1.0, 2.0]));
        assert_eq!((o.h, o.k_max, o.tol), (0.05, 8, 1e-7));
    }

    #[test]
    fn reflection_negative_examples() {
        let r = check_reflection_negative(&PsiSpec::power(1.0).unwrap(), &grid(&[-2.0, -1.0, 0.0, 1.0, 2.0]), &tol())
            .unwrap();
        assert!(r.pass);
        let g = grid(&[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]);
        assert!(check_reflection_negative(&PsiSpec::power(0.6).unwrap(), &g, &tol()).unwrap().pass);
        let r = check_reflection_negative(&PsiSpec::power(1.6).unwrap(), &g, &tol()).unwrap();
        assert!(r.nd_on_line && !r.nd_on_semigroup && !r.pass);
        assert!(check_reflection_negative(&PsiSpec::AbsoluteValue, &grid(&[-1.0, 0.0]), &tol()).is_err());
    }

    #[test]
    fn schoenberg_examples() {
        let r = schoenberg_bridge(&PsiSpec::power(1.0).unwrap(), &[1.0], &grid(&[-1.0, 0.0, 1.0]), &tol()).unwrap();
        assert!(r[0].pass);

        let g = grid(&[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let square = PsiSpec::power(2.0).unwrap();
        let r = schoenberg_bridge(&square, &[1.0], &g, &tol()).unwrap();
        assert!(r[0].line.pass && !r[0].semigroup.pass);
        assert!(!check_reflection_negative(&square, &g, &tol()).unwrap().pass);

        let r = schoenberg_bridge(&square, &[1e-12], &g, &tol()).unwrap();
        assert!(r[0].pass);
        assert!(schoenberg_bridge(&square, &[0.0], &g, &tol()).is_err());
    }
}
