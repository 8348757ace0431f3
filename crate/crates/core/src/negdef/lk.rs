//! Levy-Khintchine data `(a, b, mu)` with a discrete measure
//! `mu = sum_i w_i delta_{lambda_i}`:
//!
//! `psi(t) = a + b|t| + sum_i w_i (1 - exp(-lambda_i |t|))`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::nnls::nnls;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct LkTriple {
    pub a: f64,
    pub b: f64,
    pub atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawTriple {
    a: f64,
    b: f64,
    #[serde(default)]
    atoms: Vec<Atom>,
}

impl TryFrom<RawTriple> for LkTriple {
    type Error = Error;

    fn try_from(raw: RawTriple) -> Result<Self> {
        LkTriple::new(raw.a, raw.b, raw.atoms)
    }
}

impl LkTriple {
    /// Atoms are sorted by `lambda`.
    pub fn new(a: f64, b: f64, mut atoms: Vec<Atom>) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("LK triple needs a, b >= 0, got a = {a}, b = {b}")));
        }
        for atom in &atoms {
            if !(atom.lambda > 0.0 && atom.lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!("atom location must be > 0, got {}", atom.lambda)));
            }
            if !(atom.weight > 0.0 && atom.weight.is_finite()) {
                return Err(Error::InvalidParameter(format!("atom weight must be > 0, got {}", atom.weight)));
            }
        }
        atoms.sort_by(|x, y| x.lambda.partial_cmp(&y.lambda).unwrap());
        if let Some(w) = atoms.windows(2).find(|w| w[0].lambda == w[1].lambda) {
            return Err(Error::InvalidParameter(format!("duplicate atom location {}", w[0].lambda)));
        }
        Ok(LkTriple { a, b, atoms })
    }

    pub fn from_pairs(a: f64, b: f64, atoms: &[(f64, f64)]) -> Result<Self> {
        LkTriple::new(
            a,
            b,
            atoms.iter().map(|&(lambda, weight)| Atom { lambda, weight }).collect(),
        )
    }

    /// `sum_i w_i min(1, lambda_i)`; finite for every finite atom list.
    pub fn integrability(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.lambda.min(1.0)).sum()
    }
}

/// `a + b|t| + sum_i w_i (1 - e^{-lambda_i |t|})`.
pub fn lk_eval(triple: &LkTriple, t: f64) -> f64 {
    let t = t.abs();
    triple.a
        + triple.b * t
        + triple
            .atoms
            .iter()
            .map(|atom| -atom.weight * (-atom.lambda * t).exp_m1())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LkFitOptions {
    pub include_a: bool,
    pub include_b: bool,
    /// Atoms below `weight_floor * max weight` are dropped.
    pub weight_floor: f64,
    pub kkt_tol: f64,
    /// Condition number above which the selected column set is flagged.
    pub condition_limit: f64,
}

impl Default for LkFitOptions {
    fn default() -> Self {
        LkFitOptions {
            include_a: true,
            include_b: true,
            weight_floor: 1e-10,
            kkt_tol: 1e-12,
            condition_limit: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LkFit {
    pub triple: LkTriple,
    /// `|A x - psi|_2` of the returned triple.
    pub residual: f64,
    /// Condition number of the columns carrying nonzero weight.
    pub condition_number: f64,
    pub ill_conditioned: bool,
    /// The full design matrix is numerically rank deficient: the optimum
    /// need not be unique.
    pub rank_deficient: bool,
    pub dropped_atoms: usize,
}

fn condition(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return 1.0;
    }
    let sv = m.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Nonnegative least-squares fit of `(a, b, mu)` with `mu` supported on
/// `lambda_grid`. Columns are `[1, t, 1 - e^{-lambda_j t} ...]`, the first
/// two only when requested.
pub fn lk_fit(samples: &[(f64, f64)], lambda_grid: &[f64], options: &LkFitOptions) -> Result<LkFit> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter("lk_fit needs at least 2 samples".into()));
    }
    if let Some(&(t, p)) = samples.iter().find(|(t, p)| !(*t > 0.0 && t.is_finite() && p.is_finite())) {
        return Err(Error::InvalidParameter(format!("sample ({t}, {p}): t must be positive and finite")));
    }
    let mut ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ts.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("sample t-values must be distinct".into()));
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter("lambda grid must be positive".into()));
    }
    let mut sorted = lambda_grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("lambda grid must be distinct".into()));
    }
    let offset = options.include_a as usize + options.include_b as usize;
    let ncols = offset + lambda_grid.len();
    if ncols == 0 {
        return Err(Error::InvalidParameter("lk_fit has no columns to fit".into()));
    }

    let m = samples.len();
    let design = DMatrix::from_fn(m, ncols, |i, j| {
        let t = samples[i].0;
        match (j, options.include_a, options.include_b) {
            (0, true, _) => 1.0,
            (0, false, true) | (1, true, true) => t,
            _ => -(-lambda_grid[j - offset] * t).exp_m1(),
        }
    });
    let y = DVector::from_iterator(m, samples.iter().map(|s| s.1));
    let sol = nnls(&design, &y, options.kkt_tol)?;

    let a = if options.include_a { sol.x[0] } else { 0.0 };
    let b = if options.include_b { sol.x[offset - 1] } else { 0.0 };
    let weights = &sol.x.as_slice()[offset..];
    let max_w = weights.iter().fold(0.0f64, |m, &w| m.max(w));
    let floor = options.weight_floor * max_w;
    let mut dropped_atoms = 0;
    let mut atoms = Vec::new();
    let mut selected: Vec<usize> = (0..offset).filter(|&j| sol.x[j] > 0.0).collect();
    for (k, (&lambda, &weight)) in lambda_grid.iter().zip(weights).enumerate() {
        if weight > floor && weight > 0.0 {
            atoms.push(Atom { lambda, weight });
            selected.push(offset + k);
        } else if weight > 0.0 {
            dropped_atoms += 1;
        }
    }
    let triple = LkTriple::new(a, b, atoms)?;
    let residual = samples
        .iter()
        .map(|&(t, p)| (lk_eval(&triple, t) - p).powi(2))
        .sum::<f64>()
        .sqrt();

    let condition_number = condition(&design.select_columns(&selected));
    let full = design.singular_values();
    let rank_deficient = full.min() <= full.max() * options.condition_limit.recip() || ncols > m;

    Ok(LkFit {
        triple,
        residual,
        condition_number,
        ill_conditioned: condition_number > options.condition_limit,
        rank_deficient,
        dropped_atoms,
    })
}
