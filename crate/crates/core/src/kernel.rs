//! Closed-form kernels, Gram matrices and reflected Gram matrices.
//!
//! Every kernel here is real and symmetric. The one-sided variants live on
//! `(0, inf)`; the rest accept any finite argument. `GaussianFock` is the
//! vector kernel `exp(-|x - y|^2 / 2)`; scalar arguments are treated as
//! one-dimensional vectors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Asymmetry above this (relative to the largest entry) rejects a table.
pub const TABLE_ASYMMETRY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `exp(-lambda |s - t|)`, `lambda >= 0`.
    Exponential { lambda: f64 },
    /// `(|s| + |t| - |s - t|) / 2`.
    BrownianTwoSided,
    /// `(|s|^2H + |t|^2H - |s - t|^2H) / 2`, `0 < H < 1`.
    FractionalBrownian { hurst: f64 },
    /// `min(s, t)` on `(0, inf)`.
    BrownianOneSided,
    /// `sqrt(min(s, t) / max(s, t))` on `(0, inf)`.
    NormalizedOneSided,
    GaussianFock,
    Tabulated(TabulatedKernel),
    /// `K(s, t) / sqrt(K(s, s) K(t, t))` for an inner kernel `K`.
    Normalized(Box<KernelSpec>),
}

impl KernelSpec {
    pub fn exponential(lambda: f64) -> Result<Self> {
        let k = KernelSpec::Exponential { lambda };
        k.validate()?;
        Ok(k)
    }

    pub fn fractional_brownian(hurst: f64) -> Result<Self> {
        let k = KernelSpec::FractionalBrownian { hurst };
        k.validate()?;
        Ok(k)
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Exponential { .. } => "exponential",
            KernelSpec::BrownianTwoSided => "brownian-two-sided",
            KernelSpec::FractionalBrownian { .. } => "fractional-brownian",
            KernelSpec::BrownianOneSided => "brownian-one-sided",
            KernelSpec::NormalizedOneSided => "normalized-one-sided",
            KernelSpec::GaussianFock => "gaussian-fock",
            KernelSpec::Tabulated(_) => "tabulated",
            KernelSpec::Normalized(_) => "normalized",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Exponential { lambda } if !(*lambda >= 0.0 && lambda.is_finite()) => Err(
                Error::InvalidParameter(format!("exponential: lambda must be >= 0, got {lambda}")),
            ),
            KernelSpec::FractionalBrownian { hurst } if !(*hurst > 0.0 && *hurst < 1.0) => Err(
                Error::InvalidParameter(format!("fractional-brownian: H must be in (0, 1), got {hurst}")),
            ),
            KernelSpec::Normalized(inner) => inner.validate(),
            _ => Ok(()),
        }
    }

    /// Whether `x` lies in the kernel's (scalar) domain.
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            KernelSpec::BrownianOneSided | KernelSpec::NormalizedOneSided => x > 0.0,
            KernelSpec::Tabulated(table) => table.index_of(x).is_some(),
            KernelSpec::Normalized(inner) => inner.contains(x),
            _ => true,
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            return Ok(());
        }
        if x.is_finite() && matches!(self, KernelSpec::Tabulated(_)) {
            return Err(Error::TabulatedLookup(x));
        }
        let reason = match self {
            _ if !x.is_finite() => "argument must be finite",
            KernelSpec::BrownianOneSided | KernelSpec::NormalizedOneSided => {
                "one-sided kernels need t > 0"
            }
            _ => "outside domain",
        };
        Err(Error::domain(self.name(), x, reason))
    }

    /// Evaluate at scalar arguments.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.check_domain(s)?;
        self.check_domain(t)?;
        let v = match self {
            KernelSpec::Exponential { lambda } => (-lambda * (s - t).abs()).exp(),
            KernelSpec::BrownianTwoSided => 0.5 * (s.abs() + t.abs() - (s - t).abs()),
            KernelSpec::FractionalBrownian { hurst } => {
                let p = 2.0 * hurst;
                0.5 * (abs_pow(s, p) + abs_pow(t, p) - abs_pow(s - t, p))
            }
            KernelSpec::BrownianOneSided => s.min(t),
            KernelSpec::NormalizedOneSided => (s.min(t) / s.max(t)).sqrt(),
            KernelSpec::GaussianFock => (-0.5 * (s - t) * (s - t)).exp(),
            KernelSpec::Tabulated(table) => table.value(s, t)?,
            KernelSpec::Normalized(inner) => {
                let vs = inner.eval(s, s)?;
                if !(vs > 0.0) {
                    return Err(Error::ZeroVariance(s));
                }
                let vt = inner.eval(t, t)?;
                if !(vt > 0.0) {
                    return Err(Error::ZeroVariance(t));
                }
                if s == t {
                    1.0
                } else {
                    inner.eval(s, t)? / (vs.sqrt() * vt.sqrt())
                }
            }
        };
        Ok(v)
    }

    /// Evaluate at vector arguments. Only `GaussianFock` accepts dimension
    /// other than one.
    pub fn eval_vec(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        if s.len() != t.len() {
            return Err(Error::domain(
                self.name(),
                format!("{s:?} / {t:?}"),
                "vector arguments must have equal length",
            ));
        }
        match self {
            KernelSpec::GaussianFock => {
                if s.iter().chain(t).any(|x| !x.is_finite()) {
                    return Err(Error::domain(self.name(), format!("{s:?}"), "argument must be finite"));
                }
                let d2: f64 = s.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok((-0.5 * d2).exp())
            }
            _ if s.len() == 1 => self.eval(s[0], t[0]),
            _ => Err(Error::domain(
                self.name(),
                format!("{s:?}"),
                "scalar kernel evaluated at a vector",
            )),
        }
    }
}

fn abs_pow(x: f64, p: f64) -> f64 {
    // powf(x, 1.0) is exact, but keep H = 1/2 independent of libm anyway.
    if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}

/// A kernel given by its values on a finite grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    grid: Grid,
    matrix: DMatrix<f64>,
    asymmetry: f64,
}

impl TabulatedKernel {
    /// Symmetrizes on ingestion; relative asymmetry above
    /// [`TABLE_ASYMMETRY_LIMIT`] is an error.
    pub fn new(grid: Grid, matrix: DMatrix<f64>) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "tabulated kernel: matrix is {}x{}, grid has {} points",
                matrix.nrows(),
                matrix.ncols(),
                n
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated kernel: non-finite entry".into()));
        }
        let (matrix, asymmetry) = symmetrize(matrix);
        let magnitude = matrix.amax().max(f64::MIN_POSITIVE);
        if asymmetry > TABLE_ASYMMETRY_LIMIT * magnitude {
            return Err(Error::InvalidParameter(format!(
                "tabulated kernel: asymmetry {asymmetry:e} exceeds {TABLE_ASYMMETRY_LIMIT:e} relative"
            )));
        }
        Ok(TabulatedKernel { grid, matrix, asymmetry })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest `|M_ij - M_ji| / 2` removed at ingestion.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pts = self.grid.points();
        let tol = 1e-12 * x.abs().max(1.0);
        let i = pts.partition_point(|&p| p < x - tol);
        (i < pts.len() && (pts[i] - x).abs() <= tol).then_some(i)
    }

    fn value(&self, s: f64, t: f64) -> Result<f64> {
        let i = self.index_of(s).ok_or(Error::TabulatedLookup(s))?;
        let j = self.index_of(t).ok_or(Error::TabulatedLookup(t))?;
        Ok(self.matrix[(i, j)])
    }
}

/// Returns `(M + M^T) / 2` and the largest entry-wise asymmetry removed.
pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = m.nrows();
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            asym = asym.max(0.5 * (a - b).abs());
            let mean = 0.5 * (a + b);
            m[(i, j)] = mean;
            m[(j, i)] = mean;
        }
    }
    (m, asym)
}

/// A symmetric matrix of kernel evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    grid: Option<Grid>,
    symmetrized: bool,
    asymmetry: f64,
}

impl GramMatrix {
    /// Wrap an arbitrary square matrix, symmetrizing it.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "Gram matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("Gram matrix has non-finite entries".into()));
        }
        let (entries, asymmetry) = symmetrize(m);
        Ok(GramMatrix {
            entries,
            grid: None,
            symmetrized: true,
            asymmetry,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("Gram matrix rows must form a square".into()));
        }
        GramMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    pub fn symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Entry-wise map, e.g. `exp(-lambda * N)` in the Schoenberg bridge.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GramMatrix> {
        let mut g = GramMatrix::from_matrix(self.entries.map(f))?;
        g.grid = self.grid.clone();
        Ok(g)
    }
}

/// `entries[i][j] = K(p_i, p_j)`, symmetrized.
pub fn gram(spec: &KernelSpec, grid: &Grid) -> Result<GramMatrix> {
    spec.validate()?;
    let pts = grid.points();
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = spec.eval(pts[i], pts[j])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(GramMatrix::from_matrix(m)?.with_grid(grid.clone()))
}

/// Gram matrix over vector-valued points (`GaussianFock`).
pub fn gram_vectors(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<GramMatrix> {
    spec.validate()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidGrid("need at least one point".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = spec.eval_vec(&points[i], &points[j])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    GramMatrix::from_matrix(m)
}

/// Involution on the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflection {
    /// `t -> -t` on the line, with `S = (0, inf)`.
    Negation,
    /// `t -> 1/t` on the dilation group, with `S = (0, 1)`.
    Inversion,
    Identity,
}

impl Reflection {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Reflection::Negation => -t,
            Reflection::Inversion => 1.0 / t,
            Reflection::Identity => t,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Reflection::Negation => "negation",
            Reflection::Inversion => "inversion",
            Reflection::Identity => "identity",
        }
    }
}

impl std::str::FromStr for Reflection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negation" | "negate" | "line" => Ok(Reflection::Negation),
            "inversion" | "invert" | "dilation" => Ok(Reflection::Inversion),
            "identity" | "id" => Ok(Reflection::Identity),
            _ => Err(Error::InvalidParameter(format!("unknown reflection '{s}'"))),
        }
    }
}

/// Reflection together with the positive part `X_+` it is tested on.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionSetup {
    reflection: Reflection,
    positive_part: Grid,
}

impl ReflectionSetup {
    pub fn new(reflection: Reflection, positive_part: Grid) -> Result<Self> {
        let ok = match reflection {
            Reflection::Negation => positive_part.iter().all(|p| p > 0.0),
            Reflection::Inversion => positive_part.iter().all(|p| p > 0.0 && p < 1.0),
            Reflection::Identity => true,
        };
        if !ok {
            let need = match reflection {
                Reflection::Negation => "(0, inf)",
                _ => "(0, 1)",
            };
            return Err(Error::InvalidGrid(format!(
                "positive part for {} must lie in {need}",
                reflection.name()
            )));
        }
        Ok(ReflectionSetup { reflection, positive_part })
    }

    /// The line `(R, R_+, -id)` on the given positive grid.
    pub fn line(positive_part: Grid) -> Result<Self> {
        ReflectionSetup::new(Reflection::Negation, positive_part)
    }

    pub fn reflection(&self) -> Reflection {
        self.reflection
    }

    pub fn positive_part(&self) -> &Grid {
        &self.positive_part
    }
}

/// `entries[i][j] = K(tau p_i, p_j)` over the positive part, symmetrized.
pub fn reflected_gram(spec: &KernelSpec, setup: &ReflectionSetup) -> Result<GramMatrix> {
    spec.validate()?;
    let pts = setup.positive_part.points();
    let tau = setup.reflection;
    let n = pts.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = spec.eval(tau.apply(pts[i]), pts[j])?;
        }
    }
    Ok(GramMatrix::from_matrix(m)?.with_grid(setup.positive_part.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(p: &[f64]) -> Grid {
        Grid::new(p.to_vec()).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(KernelSpec::BrownianTwoSided.eval(1.0, -1.0).unwrap(), 0.0);
        let fbm = KernelSpec::fractional_brownian(0.5).unwrap();
        assert_eq!(fbm.eval(2.0, 3.0).unwrap(), 2.0);
        let v = KernelSpec::NormalizedOneSided.eval(1.0, 4.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // cross-check against min / sqrt(st)
        assert!((v - 1.0 / (1.0f64 * 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kernels_are_symmetric() {
        let specs = [
            KernelSpec::exponential(0.7).unwrap(),
            KernelSpec::BrownianTwoSided,
            KernelSpec::fractional_brownian(0.3).unwrap(),
            KernelSpec::BrownianOneSided,
            KernelSpec::NormalizedOneSided,
            KernelSpec::GaussianFock,
        ];
        for k in &specs {
            for (s, t) in [(0.3, 2.5), (1.0, 7.0), (4.0, 0.1)] {
                assert_eq!(k.eval(s, t).unwrap(), k.eval(t, s).unwrap(), "{}", k.name());
            }
        }
    }

    #[test]
    fn one_sided_domain_errors_name_the_variant() {
        let err = KernelSpec::BrownianOneSided.eval(0.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("brownian-one-sided"));
        assert!(KernelSpec::NormalizedOneSided.eval(1.0, -2.0).is_err());
        assert!(KernelSpec::exponential(-1.0).is_err());
        assert!(KernelSpec::fractional_brownian(1.0).is_err());
        assert!(KernelSpec::GaussianFock.eval_vec(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn gram_examples() {
        let g = gram(&KernelSpec::BrownianOneSided, &grid(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(
            g.to_rows(),
            vec![vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 2.0], vec![1.0, 2.0, 3.0]]
        );
        let g = gram(&KernelSpec::exponential(0.0).unwrap(), &grid(&[-1.0, 0.3, 9.0])).unwrap();
        assert!(g.entries().iter().all(|&v| v == 1.0));
        let g = gram_vectors(&KernelSpec::GaussianFock, &[vec![0.0], vec![1.0]]).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(g.to_rows(), vec![vec![1.0, e], vec![e, 1.0]]);
        assert!(gram(&KernelSpec::BrownianOneSided, &grid(&[-1.0, 1.0])).is_err());
    }

    #[test]
    fn reflected_gram_examples() {
        let setup = ReflectionSetup::line(grid(&[0.5, 1.5])).unwrap();
        let g = reflected_gram(&KernelSpec::exponential(1.0).unwrap(), &setup).unwrap();
        for (i, s) in [0.5f64, 1.5].iter().enumerate() {
            for (j, t) in [0.5, 1.5].iter().enumerate() {
                assert!((g.entries()[(i, j)] - (-(s + t)).exp()).abs() < 1e-16);
            }
        }
        let setup = ReflectionSetup::line(grid(&[1.0, 2.0])).unwrap();
        let g = reflected_gram(&KernelSpec::BrownianTwoSided, &setup).unwrap();
        assert!(g.entries().iter().all(|&v| v == 0.0));

        let g3 = grid(&[1.0, 2.0, 3.0]);
        let table = TabulatedKernel::new(g3.clone(), DMatrix::identity(3, 3)).unwrap();
        let setup = ReflectionSetup::new(Reflection::Identity, g3).unwrap();
        let g = reflected_gram(&KernelSpec::Tabulated(table), &setup).unwrap();
        assert_eq!(g.entries(), &DMatrix::<f64>::identity(3, 3));
    }

    #[test]
    fn inversion_reflection_gives_sqrt_st() {
        let setup = ReflectionSetup::new(Reflection::Inversion, grid(&[0.2, 0.5, 0.9])).unwrap();
        let g = reflected_gram(&KernelSpec::NormalizedOneSided, &setup).unwrap();
        for (i, s) in [0.2f64, 0.5, 0.9].iter().enumerate() {
            for (j, t) in [0.2f64, 0.5, 0.9].iter().enumerate() {
                assert!((g.entries()[(i, j)] - (s * t).sqrt()).abs() < 1e-15);
            }
        }
        assert!(ReflectionSetup::new(Reflection::Inversion, grid(&[0.5, 2.0])).is_err());
        assert!(ReflectionSetup::line(grid(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn tabulated_ingestion() {
        let g = grid(&[0.0, 1.0]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5 + 1e-9, 0.5, 1.0]);
        let t = TabulatedKernel::new(g.clone(), m).unwrap();
        assert!((t.asymmetry() - 0.5e-9).abs() < 1e-15);
        assert_eq!(t.matrix()[(0, 1)], t.matrix()[(1, 0)]);
        let k = KernelSpec::Tabulated(t);
        assert!(matches!(k.eval(0.5, 0.0), Err(Error::TabulatedLookup(_))));

        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(TabulatedKernel::new(g.clone(), bad).is_err());
        assert!(TabulatedKernel::new(g, DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn normalized_kernel_has_unit_diagonal() {
        let k = KernelSpec::Normalized(Box::new(KernelSpec::fractional_brownian(0.3).unwrap()));
        for t in [0.1, 0.7, 3.0, -2.0] {
            assert_eq!(k.eval(t, t).unwrap(), 1.0);
        }
        assert!(matches!(k.eval(0.0, 1.0), Err(Error::ZeroVariance(t)) if t == 0.0));
    }
}
