//! Dense symmetric eigensolves with failure diagnostics.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100_000;

/// Eigenpairs sorted by descending eigenvalue. Column `k` of `vectors`
/// belongs to `values[k]`.
#[derive(Debug)]
pub(crate) struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }
}

fn diagnostics(m: &DMatrix<f64>) -> String {
    let diag = m.diagonal();
    format!(
        "n = {}, frobenius norm = {:e}, diagonal range [{:e}, {:e}], non-finite entries = {}",
        m.nrows(),
        m.norm(),
        diag.min(),
        diag.max(),
        m.iter().filter(|v| !v.is_finite()).count()
    )
}

pub(crate) fn spectrum(m: &DMatrix<f64>) -> Result<Spectrum> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "eigensolve on a matrix with non-finite entries ({})",
            diagnostics(m)
        )));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS).ok_or_else(|| {
        Error::Numerical(format!("symmetric eigensolve did not converge ({})", diagnostics(m)))
    })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(Spectrum { values, vectors })
}

pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(spectrum(m)?.values)
}

/// `P M P` with `P = I - 11^T / n`, symmetrized.
pub(crate) fn center(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| m.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let c = DMatrix::from_fn(n, n, |i, j| m[(i, j)] - row_means[i] - col_means[j] + grand);
    crate::kernel::symmetrize(c).0
}

pub(crate) fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
