//! Fringe slopes and the phase error they imply, `δφ = δI / |dI/dφ|`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::baselines::{nslit_trace, NSlitModel};
use crate::correlation::{closed_form_trace, CorrelationTrace};
use crate::error::{Error, Result};
use crate::grid::ScanGrid;

/// Default analysis window, one unit phase period.
pub const UNIT_PERIOD: (f64, f64) = (-FRAC_PI_2, FRAC_PI_2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeTrace {
    pub grid: ScanGrid,
    pub slope_values: Vec<f64>,
}

/// d(normalized value)/dφ by second-order finite differences.
///
/// A difference at the rounding level of its operands is reported as exactly
/// zero so that stationary points stay stationary.
pub fn differentiate(trace: &CorrelationTrace) -> Result<SlopeTrace> {
    let y = &trace.normalized_values;
    if y.len() != trace.grid.len() {
        return Err(Error::LengthMismatch(format!(
            "{} values for a {}-point grid",
            y.len(),
            trace.grid.len()
        )));
    }
    if y.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: y.len(),
        });
    }
    let h = trace.grid.step();
    let n = y.len();
    let diff = |terms: &[(f64, f64)], denom: f64| {
        let sum: f64 = terms.iter().map(|(c, v)| c * v).sum();
        let scale = terms.iter().map(|(c, v)| (c * v).abs()).fold(0.0, f64::max);
        if sum.abs() <= 4.0 * f64::EPSILON * scale {
            0.0
        } else {
            sum / denom
        }
    };
    let mut slope = Vec::with_capacity(n);
    slope.push(diff(&[(-3.0, y[0]), (4.0, y[1]), (-1.0, y[2])], 2.0 * h));
    for i in 1..n - 1 {
        slope.push(diff(&[(1.0, y[i + 1]), (-1.0, y[i - 1])], 2.0 * h));
    }
    slope.push(diff(&[(3.0, y[n - 1]), (-4.0, y[n - 2]), (1.0, y[n - 3])], 2.0 * h));
    Ok(SlopeTrace {
        grid: trace.grid,
        slope_values: slope,
    })
}

/// Differentiates samples given with explicit abscissae, which must be
/// uniformly spaced.
pub fn differentiate_samples(xs: &[f64], ys: &[f64]) -> Result<SlopeTrace> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(format!(
            "{} abscissae, {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: xs.len(),
        });
    }
    let grid = ScanGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    let h = grid.step();
    let uniform = xs.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    if !uniform {
        return Err(Error::NonUniformGrid);
    }
    let trace = CorrelationTrace {
        grid,
        log_values: ys.iter().map(|v| v.ln()).collect(),
        normalized_values: ys.to_vec(),
        order: 1,
    };
    differentiate(&trace)
}

/// Exact slope of `sin²(Nφ)`: `N sin(2Nφ)`.
pub fn analytic_slope(n: usize, grid: &ScanGrid) -> SlopeTrace {
    let nf = n as f64;
    SlopeTrace {
        grid: *grid,
        slope_values: grid.points().map(|phi| nf * (2.0 * nf * phi).sin()).collect(),
    }
}

/// Indices of grid points inside `[lo, hi]`, allowing half a step of slack.
fn window_range(grid: &ScanGrid, (lo, hi): (f64, f64)) -> Result<std::ops::RangeInclusive<usize>> {
    let h = grid.step();
    let slack = 0.5 * h;
    if !(lo < hi) || lo < grid.phi_min() - slack || hi > grid.phi_max() + slack {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let first = (((lo - grid.phi_min()) / h) - 1e-9).ceil().max(0.0) as usize;
    let last = ((((hi - grid.phi_min()) / h) + 1e-9).floor() as usize).min(grid.len() - 1);
    if last <= first {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(first..=last)
}

/// Trapezoidal mean of `|slope|` over the window.
pub fn mean_abs_slope(slope: &SlopeTrace, window: (f64, f64)) -> Result<f64> {
    let range = window_range(&slope.grid, window)?;
    let (first, last) = (*range.start(), *range.end());
    let s = &slope.slope_values[first..=last];
    let h = slope.grid.step();
    let integral: f64 = s.windows(2).map(|w| 0.5 * (w[0].abs() + w[1].abs()) * h).sum();
    Ok(integral / ((last - first) as f64 * h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub mean_abs_slope: f64,
    /// `δI/|slope|` per grid point; `+inf` at stationary points.
    pub phase_error: Vec<f64>,
    pub window: (f64, f64),
    /// Smallest phase error inside the window and where it occurs.
    pub min_phase_error: f64,
    pub best_phase: f64,
}

pub fn phase_error(slope: &SlopeTrace, delta_i: f64, window: Option<(f64, f64)>) -> Result<SensitivityReport> {
    if !(delta_i > 0.0) || !delta_i.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "intensity noise must be positive, got {delta_i}"
        )));
    }
    let window = window.unwrap_or((slope.grid.phi_min(), slope.grid.phi_max()));
    let errors: Vec<f64> = slope
        .slope_values
        .iter()
        .map(|s| if *s == 0.0 { f64::INFINITY } else { delta_i / s.abs() })
        .collect();
    let range = window_range(&slope.grid, window)?;
    let (best, min) = range
        .map(|k| (k, errors[k]))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("window holds at least two points");
    Ok(SensitivityReport {
        mean_abs_slope: mean_abs_slope(slope, window)?,
        phase_error: errors,
        window,
        min_phase_error: min,
        best_phase: slope.grid.point(best),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub n: usize,
    pub quantum: f64,
    pub classical: f64,
}

impl GainRow {
    pub fn ratio(&self) -> f64 {
        self.quantum / self.classical
    }
}

/// Grid over the unit period fine enough for slope work at order `n`.
pub fn slope_grid(n: usize) -> Result<ScanGrid> {
    let (lo, hi) = UNIT_PERIOD;
    let points = (200 * n).max(2000) + 1;
    ScanGrid::new(lo, hi, points)
}

/// Mean absolute slope over the unit period of the normalized superresolved
/// pattern and of the normalized point-slit grating, per N.
pub fn gain_curve(ns: &[usize]) -> Result<Vec<GainRow>> {
    if ns.is_empty() {
        return Err(Error::InvalidConfig("gain curve needs at least one N".into()));
    }
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::ZeroPixels);
            }
            let grid = slope_grid(n)?;
            let quantum = differentiate(&closed_form_trace(n, &grid)?)?;
            let classical = differentiate(&nslit_trace(&NSlitModel::point_slits(n)?, &grid)?)?;
            Ok(GainRow {
                n,
                quantum: mean_abs_slope(&quantum, UNIT_PERIOD)?,
                classical: mean_abs_slope(&classical, UNIT_PERIOD)?,
            })
        })
        .collect()
}

/// Ordinary least squares `y = slope·x + intercept`, with the coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(format!("{} x, {} y", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy },
    })
}
