//! Finite, strictly increasing sample grids.

use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A nonempty, strictly increasing list of finite sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid must be nonempty".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {p}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Grid { points })
    }

    /// Sort and deduplicate arbitrary points before validating.
    pub fn from_unsorted(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| p.is_nan()) {
            return Err(Error::InvalidGrid("NaN point".into()));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        Grid::new(points)
    }

    /// Lattice `start, start + step, ...` up to `stop`. The stop value is
    /// included when it lies within `1e-12 * step` of a lattice point.
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("range bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if stop < start {
            return Err(Error::InvalidGrid(format!("stop {stop} is below start {start}")));
        }
        let span = (stop - start) / step;
        let count = (span + 1e-12).floor() as usize + 1;
        Grid::new((0..count).map(|k| start + k as f64 * step).collect())
    }

    /// Grid spaced evenly in log scale between `lo` and `hi` (both included).
    pub fn logspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidGrid(format!("log range needs 0 < lo < hi, got {lo}..{hi}")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid("log range needs at least 2 points".into()));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let last = (count - 1) as f64;
        let mut points: Vec<f64> = (0..count)
            .map(|k| (a + (b - a) * k as f64 / last).exp())
            .collect();
        points[0] = lo;
        points[count - 1] = hi;
        Grid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().copied()
    }

    pub fn min_spacing(&self) -> Option<f64> {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    /// The strictly positive points, if any.
    pub fn positive_part(&self) -> Option<Grid> {
        let pos: Vec<f64> = self.points.iter().copied().filter(|&p| p > 0.0).collect();
        Grid::new(pos).ok()
    }

    pub fn all_positive(&self) -> bool {
        self.points[0] > 0.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.points
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Accepts `start:stop:step`, `log:lo:hi:count`, or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let num = |x: &str| -> Result<f64> {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("cannot parse '{x}' as a number")))
        };
        if let Some(rest) = s.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidGrid(format!("expected log:lo:hi:count, got '{s}'")));
            }
            let count = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidGrid(format!("bad count '{}'", parts[2])))?;
            return Grid::logspace(num(parts[0])?, num(parts[1])?, count);
        }
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidGrid(format!("expected start:stop:step, got '{s}'")));
            }
            return Grid::range(num(parts[0])?, num(parts[1])?, num(parts[2])?);
        }
        let points = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<f64>>>()?;
        Grid::new(points)
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(serializer)
    }
}
