//! Feature factorizations, the Osterwalder-Schrader quotient of a reflected
//! Gram matrix, and the contraction a positive shift induces on it.
//!
//! Both factorizations go through one truncated eigendecomposition: keep
//! eigenpairs with `lambda > rank_tol * lambda_max`, scale eigenvectors by
//! `sqrt(lambda)`, and verify the result reproduces the eigenvalue-clipped
//! matrix `G+` within `recon_tol`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::definiteness::check_positive_semidefinite;
use crate::error::{Error, Result};
use crate::kernel::{reflected_gram, GramMatrix, KernelSpec, Reflection, ReflectionSetup};
use crate::linalg::{self, Spectrum};
use crate::tolerance::{scale, ToleranceConfig};

/// Numerical rank and factor of a reflected Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OsQuotient {
    pub rank: usize,
    /// All eigenvalues of the reflected Gram matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// `rank x n`; `Q^T Q` reproduces the clipped reflected Gram matrix.
    pub factor: DMatrix<f64>,
    /// Sum of `|lambda|` over discarded negative eigenvalues.
    pub clipped_mass: f64,
    pub min_eigenvalue: f64,
}

/// Rows are the finite-sample feature vectors `gamma(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsFactor {
    /// `n x rank`.
    pub features: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl RkhsFactor {
    pub fn rank(&self) -> usize {
        self.features.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    pub shift: f64,
    pub operator_norm: f64,
    pub contraction: bool,
    pub rank: usize,
    /// Largest inconsistency met while descending the shift to the quotient.
    pub residual: f64,
}

struct Truncation {
    spectrum: Spectrum,
    rank: usize,
    /// `rank x n`, rows `sqrt(lambda_k) v_k^T`.
    factor: DMatrix<f64>,
    clipped_mass: f64,
    scale: f64,
}

fn truncate(g: &GramMatrix, tol: &ToleranceConfig) -> Result<Truncation> {
    let spectrum = linalg::spectrum(g.entries())?;
    let n = g.len();
    let sc = scale(spectrum.max_abs());
    let lambda_max = spectrum.max();
    let rank = if lambda_max <= tol.psd_tol * sc {
        0
    } else {
        spectrum
            .values
            .iter()
            .take_while(|&&l| l > tol.rank_tol * lambda_max)
            .count()
    };
    let factor = DMatrix::from_fn(rank, n, |k, i| spectrum.values[k].sqrt() * spectrum.vectors[(i, k)]);
    let clipped_mass = spectrum.values.iter().filter(|&&l| l < 0.0).fold(0.0, |acc, l| acc + l.abs());

    let positive = spectrum.values.iter().map(|&l| l.max(0.0));
    let clipped_diag = DMatrix::from_diagonal(&DVector::from_iterator(n, positive));
    let clipped = &spectrum.vectors * clipped_diag * spectrum.vectors.transpose();
    let recon = factor.transpose() * &factor;
    let err = linalg::max_abs_diff(&recon, &clipped);
    if err > tol.recon_tol * sc {
        return Err(Error::Numerical(format!(
            "factor reconstruction error {err:e} exceeds {:e}",
            tol.recon_tol * sc
        )));
    }
    Ok(Truncation {
        spectrum,
        rank,
        factor,
        clipped_mass,
        scale: sc,
    })
}

/// Feature matrix `Gamma` with `Gamma Gamma^T` equal to the clipped `g`.
pub fn factorize_rkhs(g: &GramMatrix, tol: &ToleranceConfig) -> Result<RkhsFactor> {
    let verdict = check_positive_semidefinite(g, tol)?;
    if !verdict.pass {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    let t = truncate(g, tol)?;
    Ok(RkhsFactor {
        features: t.factor.transpose(),
        eigenvalues: t.spectrum.values,
    })
}

/// Quotient of the positive part by the null space of `<theta u, v>`.
pub fn os_quotient(g_tau: &GramMatrix, tol: &ToleranceConfig) -> Result<OsQuotient> {
    let verdict = check_positive_semidefinite(g_tau, tol)?;
    if !verdict.pass {
        return Err(Error::NotReflectionPositive {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    let t = truncate(g_tau, tol)?;
    Ok(OsQuotient {
        rank: t.rank,
        min_eigenvalue: t.spectrum.min(),
        eigenvalues: t.spectrum.values,
        factor: t.factor,
        clipped_mass: t.clipped_mass,
    })
}

/// Operator norm of the map `q(v) -> q(S_shift v)` on the quotient.
///
/// With `Q = Lambda^{1/2} V^T` the quotient coordinates of the grid, the
/// shifted points are projected into the same coordinates by least squares,
/// `Y = Lambda^{-1/2} V^T B` where `B_ij = K(-x_i, x_j + shift)`, and the
/// induced matrix is `A = Y V Lambda^{-1/2}`. Three residuals are checked
/// against `recon_tol`: `B` lies in the retained eigenspace, `Y^T Y`
/// reproduces the reflected Gram matrix of the shifted grid, and `A Q = Y`
/// (null vectors map to null vectors).
pub fn hat_contraction(
    spec: &KernelSpec,
    setup: &ReflectionSetup,
    shift: f64,
    tol: &ToleranceConfig,
) -> Result<ContractionReport> {
    if !matches!(
        spec,
        KernelSpec::Exponential { .. } | KernelSpec::BrownianTwoSided | KernelSpec::FractionalBrownian { .. }
    ) {
        return Err(Error::InvalidParameter(format!(
            "hat_contraction needs a translation-covariant kernel on the line, got {}",
            spec.name()
        )));
    }
    if setup.reflection() != Reflection::Negation {
        return Err(Error::InvalidParameter(
            "hat_contraction needs the line reflection t -> -t".into(),
        ));
    }
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::InvalidParameter(format!("shift must be positive, got {shift}")));
    }

    let g_tau = reflected_gram(spec, setup)?;
    let verdict = check_positive_semidefinite(&g_tau, tol)?;
    if !verdict.pass {
        return Err(Error::NotReflectionPositive {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    let t = truncate(&g_tau, tol)?;
    if t.rank == 0 {
        return Ok(ContractionReport {
            shift,
            operator_norm: 0.0,
            contraction: true,
            rank: 0,
            residual: 0.0,
        });
    }

    let pts = setup.positive_part().points();
    let n = pts.len();
    let mut cross = DMatrix::zeros(n, n);
    let mut shifted = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            cross[(i, j)] = spec.eval(-pts[i], pts[j] + shift)?;
            shifted[(i, j)] = spec.eval(-(pts[i] + shift), pts[j] + shift)?;
        }
    }

    let r = t.rank;
    let v = t.spectrum.vectors.columns(0, r).into_owned();
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        r,
        t.spectrum.values[..r].iter().map(|l| 1.0 / l.sqrt()),
    ));
    let y = &inv_sqrt * v.transpose() * &cross;
    let a = &y * &v * &inv_sqrt;

    let in_span = linalg::max_abs_diff(&(t.factor.transpose() * &y), &cross);
    let norms = linalg::max_abs_diff(&(y.transpose() * &y), &shifted);
    let well_defined = linalg::max_abs_diff(&(&a * &t.factor), &y);
    let residual = in_span.max(norms).max(well_defined);
    let limit = tol.recon_tol * t.scale;
    if residual > limit {
        return Err(Error::ShiftDoesNotDescend {
            residual,
            tolerance: limit,
        });
    }

    let operator_norm = a.singular_values().max();
    Ok(ContractionReport {
        shift,
        operator_norm,
        contraction: operator_norm <= 1.0 + tol.psd_tol,
        rank: r,
        residual,
    })
}
