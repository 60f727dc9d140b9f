//! Piecewise-linear functions of time.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Piecewise-linear function through `(time_s, value)` breakpoints, held
/// constant before the first and after the last breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    points: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSchedule("no breakpoints".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite breakpoint".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidSchedule("breakpoint times must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn constant(value: f64) -> Self {
        Self { points: vec![(0.0, value)] }
    }

    /// Linear ramp from `from` at `start` to `to` at `rate` per second, then hold.
    pub fn ramp(start: f64, from: f64, to: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidSchedule("ramp rate must be positive".into()));
        }
        if from == to {
            return Ok(Self::constant(from));
        }
        Self::new(vec![(start, from), (start + (to - from).abs() / rate, to)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn value(&self, t: f64) -> f64 {
        let pts = &self.points;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let k = pts.partition_point(|p| p.0 <= t);
        let ((t0, v0), (t1, v1)) = (pts[k - 1], pts[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|&(t, v)| (t, v * factor)).collect(),
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            points: self.points.iter().map(|&(t, v)| (t, v + offset)).collect(),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.points.iter().all(|p| p.1 == self.points[0].1)
    }
}
