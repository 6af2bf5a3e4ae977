//! Uniform phase (or delay) sampling grids.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Inclusive uniform grid `phi_min, phi_min + step, ..., phi_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    phi_min: f64,
    phi_max: f64,
    n_points: usize,
}

impl ScanGrid {
    pub fn new(phi_min: f64, phi_max: f64, n_points: usize) -> Result<Self> {
        if !phi_min.is_finite() || !phi_max.is_finite() {
            return Err(Error::NonFinite("grid bounds"));
        }
        if phi_max <= phi_min {
            return Err(Error::InvalidGrid(format!(
                "phi_max ({phi_max}) must exceed phi_min ({phi_min})"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n_points}")));
        }
        Ok(Self {
            phi_min,
            phi_max,
            n_points,
        })
    }

    /// Grid over `[phi_min, phi_max]` whose step does not exceed `max_step`.
    pub fn with_max_step(phi_min: f64, phi_max: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) || !max_step.is_finite() {
            return Err(Error::InvalidGrid(format!("bad step bound {max_step}")));
        }
        let intervals = ((phi_max - phi_min) / max_step).ceil().max(1.0) as usize;
        Self::new(phi_min, phi_max, intervals + 1)
    }

    pub fn phi_min(&self) -> f64 {
        self.phi_min
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn span(&self) -> f64 {
        self.phi_max - self.phi_min
    }

    pub fn step(&self) -> f64 {
        self.span() / (self.n_points - 1) as f64
    }

    /// The k-th abscissa. The last point is pinned to `phi_max` exactly.
    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.phi_max
        } else {
            self.phi_min + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.point(k))
    }

    /// Largest step that keeps at least 40 samples per sin²(Nφ) period (π/N).
    pub fn max_step_for_order(n: usize) -> f64 {
        PI / (20.0 * n as f64)
    }

    /// Checks the sampling discipline `step <= π/(20N)`.
    pub fn check_resolves(&self, n: usize) -> Result<()> {
        let max_step = Self::max_step_for_order(n);
        // one part in 1e9 of slack absorbs rounding in grids built from π multiples
        if self.step() > max_step * (1.0 + 1e-9) {
            return Err(Error::GridTooCoarse {
                order: n,
                step: self.step(),
                max_step,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_endpoints() {
        let g = ScanGrid::new(0.0, 2.0 * PI, 4001).unwrap();
        assert_eq!(g.step(), 2.0 * PI / 4000.0);
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(4000), 2.0 * PI);
        assert_eq!(g.points().count(), 4001);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(ScanGrid::new(1.0, 1.0, 10).is_err());
        assert!(ScanGrid::new(0.0, 1.0, 1).is_err());
        assert!(ScanGrid::new(f64::NAN, 1.0, 10).is_err());
    }

    #[test]
    fn coarse_grid_flagged() {
        let g = ScanGrid::new(0.0, PI, 101).unwrap();
        assert!(g.check_resolves(5).is_ok());
        assert!(matches!(
            g.check_resolves(6),
            Err(Error::GridTooCoarse { order: 6, .. })
        ));
    }

    #[test]
    fn with_max_step_bound() {
        let g = ScanGrid::with_max_step(-PI / 2.0, PI / 2.0, PI / 400.0).unwrap();
        assert!(g.step() <= PI / 400.0 * (1.0 + 1e-12));
        assert_eq!(g.len(), 401);
    }
}
