//! Compactly supported step functions on the line, as exact elements of
//! `L^2(R)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance below which two breakpoints are the same point.
pub const BREAKPOINT_TOL: f64 = 1e-14;

fn coincide(a: f64, b: f64) -> bool {
    (a - b).abs() <= BREAKPOINT_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Right-continuous step function: `values[i]` on `[breakpoints[i], breakpoints[i + 1])`,
/// zero elsewhere. Always held in canonical form: no coincident breakpoints,
/// no two adjacent pieces with equal value, no zero piece at either end.
/// The zero function has no breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    /// `value` on `[a, b)`.
    pub fn indicator(a: f64, b: f64, value: f64) -> Result<Self> {
        StepFunction::new(vec![a, b], vec![value])
    }

    /// Validates and canonicalizes. Breakpoints must be nondecreasing;
    /// pieces of (near) zero length are dropped.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(StepFunction::zero());
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidParameter(format!(
                "step function needs one more breakpoint than values, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("step function data must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("breakpoints must be increasing".into()));
        }
        Ok(Self::canonical(breakpoints, values))
    }

    fn canonical(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        let mut bps: Vec<f64> = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<f64> = Vec::with_capacity(values.len());
        bps.push(breakpoints[0]);
        for (i, &v) in values.iter().enumerate() {
            let right = breakpoints[i + 1];
            let left = *bps.last().unwrap();
            if coincide(left, right) {
                continue;
            }
            match vals.last() {
                Some(&last) if last == v => *bps.last_mut().unwrap() = right,
                _ => {
                    vals.push(v);
                    bps.push(right);
                }
            }
        }
        let start = vals.iter().position(|&v| v != 0.0);
        let Some(start) = start else {
            return StepFunction::zero();
        };
        let end = vals.iter().rposition(|&v| v != 0.0).unwrap() + 1;
        StepFunction {
            breakpoints: bps[start..=end].to_vec(),
            values: vals[start..end].to_vec(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        if b.is_empty() || x < b[0] || x >= b[b.len() - 1] {
            return 0.0;
        }
        let i = b.partition_point(|&p| p <= x) - 1;
        self.values[i]
    }

    /// Applies `op` piecewise on the common refinement of `self` and `other`.
    fn combine(&self, other: &StepFunction, op: impl Fn(f64, f64) -> f64) -> StepFunction {
        let (reps, f, g) = common_refinement(self, other);
        if reps.is_empty() {
            return StepFunction::zero();
        }
        let values = reps.windows(2).map(|w| op(f.eval(w[0]), g.eval(w[0]))).collect();
        Self::canonical(reps, values)
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        if c == 0.0 || self.is_zero() {
            return StepFunction::zero();
        }
        Self::canonical(self.breakpoints.clone(), self.values.iter().map(|v| c * v).collect())
    }

    /// `sum value_f * value_g * length` over the common refinement.
    pub fn inner(&self, other: &StepFunction) -> f64 {
        let (reps, f, g) = common_refinement(self, other);
        reps.windows(2)
            .fold(0.0, |acc, w| acc + f.eval(w[0]) * g.eval(w[0]) * (w[1] - w[0]))
    }

    pub fn norm_sq(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .fold(0.0, |acc, (w, v)| acc + v * v * (w[1] - w[0]))
    }

    pub fn l2_distance(&self, other: &StepFunction) -> f64 {
        self.sub(other).norm_sq().sqrt()
    }

    /// `x -> f(x - t)`.
    pub fn shift(&self, t: f64) -> StepFunction {
        if self.is_zero() {
            return StepFunction::zero();
        }
        Self::canonical(self.breakpoints.iter().map(|b| b + t).collect(), self.values.clone())
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> StepFunction {
        StepFunction {
            breakpoints: self.breakpoints.iter().rev().map(|b| 0.0 - b).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// `x -> e^{t/2} f(e^t x)`.
    pub fn dilate(&self, t: f64) -> StepFunction {
        if self.is_zero() {
            return StepFunction::zero();
        }
        let (a, c) = ((-t).exp(), (0.5 * t).exp());
        Self::canonical(
            self.breakpoints.iter().map(|b| a * b).collect(),
            self.values.iter().map(|v| c * v).collect(),
        )
    }
}

/// Merged breakpoints of `f` and `g` (coincident ones collapsed to the
/// smallest) together with copies of `f` and `g` snapped onto them.
fn common_refinement(f: &StepFunction, g: &StepFunction) -> (Vec<f64>, StepFunction, StepFunction) {
    let mut all: Vec<f64> = f.breakpoints.iter().chain(&g.breakpoints).copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut reps: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match reps.last() {
            Some(&r) if coincide(r, x) => {}
            _ => reps.push(x),
        }
    }
    let snap = |h: &StepFunction| {
        if h.is_zero() {
            return StepFunction::zero();
        }
        let bps = h
            .breakpoints
            .iter()
            .map(|&b| reps[reps.partition_point(|&r| r <= b) - 1])
            .collect();
        StepFunction::canonical(bps, h.values.clone())
    };
    let (fs, gs) = (snap(f), snap(g));
    (reps, fs, gs)
}
