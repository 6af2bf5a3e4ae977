//! Pairwise and all-pixel intensity products, accumulated in log domain.
//!
//! The order-2N product `Π_j I_A^j I_B^j` has 2N factors below one, which
//! underflows `f64` long before N = 10⁴. Everything here is a sum of logs;
//! exact nulls are carried as `-inf` and exponentiate to 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eraser::{measure_erasers, EraserRecord, SlmArray};
use crate::error::{Error, Result};
use crate::grid::ScanGrid;
use crate::optics::ApparatusConfig;

/// Whether to enforce the `step <= π/(20N)` sampling discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Enforced,
    AllowCoarse,
}

/// A sampled fringe pattern.
///
/// `normalized_values[k] = exp(log_values[k] − log_peak)`, where `log_peak`
/// is the pattern maximum (refined between grid points where the producer can
/// evaluate the pattern off-grid, otherwise the grid maximum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    pub grid: ScanGrid,
    pub log_values: Vec<f64>,
    pub normalized_values: Vec<f64>,
    /// Correlation order: 2N for the eraser product, 1 for classical patterns.
    pub order: usize,
}

impl CorrelationTrace {
    /// Builds a trace normalized to `log_peak`, or to the grid maximum when
    /// `log_peak` is `None` or below it.
    pub fn from_log_values(grid: ScanGrid, log_values: Vec<f64>, order: usize, log_peak: Option<f64>) -> Result<Self> {
        if log_values.len() != grid.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values for a {}-point grid",
                log_values.len(),
                grid.len()
            )));
        }
        if log_values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NonFinite("log values"));
        }
        let grid_max = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let peak = log_peak.map_or(grid_max, |p| p.max(grid_max));
        let normalized_values = if peak == f64::NEG_INFINITY {
            vec![0.0; log_values.len()]
        } else {
            log_values.iter().map(|&l| (l - peak).exp()).collect()
        };
        Ok(Self {
            grid,
            log_values,
            normalized_values,
            order,
        })
    }

    /// Trace from linear-domain values (`ln 0 = -inf`).
    pub fn from_values(grid: ScanGrid, values: &[f64], order: usize, peak: Option<f64>) -> Result<Self> {
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidConfig("negative intensity in trace".into()));
        }
        let logs = values.iter().map(|v| v.ln()).collect();
        Self::from_log_values(grid, logs, order, peak.map(f64::ln))
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    /// Linear-domain values `exp(log_value)`; may underflow to 0 at high order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_values.iter().map(|l| l.exp())
    }

    pub fn phis(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.points()
    }
}

/// `I_A^j · I_B^j`, proportional to `sin²(φ − ξ_j)`.
pub fn pair_product(record: &EraserRecord) -> f64 {
    record.intensity_a * record.intensity_b
}

/// `Σ_j ln(I_A^j I_B^j)` at the configured phase.
pub fn log_correlation(config: &ApparatusConfig, slm: &SlmArray) -> Result<f64> {
    let records = measure_erasers(config, slm)?;
    Ok(records.iter().map(|r| r.intensity_a.ln() + r.intensity_b.ln()).sum())
}

/// Order-2N intensity correlation over the scan grid.
pub fn correlation_trace(
    config: &ApparatusConfig,
    slm: &SlmArray,
    grid: &ScanGrid,
    sampling: Sampling,
) -> Result<CorrelationTrace> {
    config.validate()?;
    let n = slm.pixel_count();
    if sampling == Sampling::Enforced {
        grid.check_resolves(n)?;
    }
    let eval = |phi: f64| log_correlation(&config.with_phase(phi), slm);
    let log_values = grid
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(eval)
        .collect::<Result<Vec<_>>>()?;

    let best = argmax(&log_values);
    let log_peak = match best {
        Some(k) if log_values[k].is_finite() => {
            let lo = grid.point(k.saturating_sub(1));
            let hi = grid.point((k + 1).min(grid.len() - 1));
            Some(refine_maximum(&eval, lo, hi)?)
        }
        _ => None,
    };
    CorrelationTrace::from_log_values(*grid, log_values, 2 * n, log_peak)
}

/// `sin²(Nφ)` sampled on the grid; the analytic shape of the order-2N product.
pub fn closed_form_trace(n: usize, grid: &ScanGrid) -> Result<CorrelationTrace> {
    if n == 0 {
        return Err(Error::ZeroPixels);
    }
    let values: Vec<f64> = grid
        .points()
        .map(|phi| {
            let s = (n as f64 * phi).sin();
            s * s
        })
        .collect();
    let log_values = values.iter().map(|v| v.ln()).collect();
    Ok(CorrelationTrace {
        grid: *grid,
        log_values,
        normalized_values: values,
        order: 2 * n,
    })
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(k);
        }
    }
    best
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
fn refine_maximum<F>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut best = f(lo)?.max(f(hi)?);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    best = best.max(f1).max(f2);
    Ok(best)
}

/// Peak and resolution summary of a normalized fringe pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeMetrics {
    pub peak_count: usize,
    /// Interpolated peak positions, left to right; entry m is fringe order m.
    pub peak_positions: Vec<f64>,
    /// Mean peak-to-peak spacing; needs at least two peaks.
    pub mean_period: Option<f64>,
    /// Mean distance from a peak to its adjacent null (Rayleigh criterion).
    pub resolution_delta: Option<f64>,
}

/// Fraction of the normalized maximum a local maximum must exceed.
pub const PEAK_THRESHOLD: f64 = 0.5;

pub fn fringe_metrics(trace: &CorrelationTrace) -> Result<FringeMetrics> {
    let v = &trace.normalized_values;
    if v.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: v.len(),
        });
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if hi - lo <= f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NoFringes);
    }
    let threshold = PEAK_THRESHOLD * hi;
    let step = trace.grid.step();
    let position = |k: usize, offset: f64| trace.grid.point(k) + offset * step;

    let peaks: Vec<usize> = (1..v.len() - 1)
        .filter(|&i| v[i] > threshold && v[i] > v[i - 1] && v[i] >= v[i + 1])
        .collect();
    let peak_positions: Vec<f64> = peaks
        .iter()
        .map(|&i| position(i, vertex_offset(v[i - 1], v[i], v[i + 1])))
        .collect();

    let mean_period = (peak_positions.len() >= 2)
        .then(|| (peak_positions[peak_positions.len() - 1] - peak_positions[0]) / (peak_positions.len() - 1) as f64);

    let mut widths = Vec::new();
    for (&p, &x_peak) in peaks.iter().zip(&peak_positions) {
        let mut i = p;
        while i > 0 && v[i - 1] < v[i] {
            i -= 1;
        }
        let left_null = if i > 0 {
            Some(position(i, vertex_offset(v[i - 1], v[i], v[i + 1])))
        } else {
            boundary_minimum(v[0], v[1], v[2]).map(|off| position(1, off))
        };
        let mut i = p;
        while i + 1 < v.len() && v[i + 1] < v[i] {
            i += 1;
        }
        let last = v.len() - 1;
        let right_null = if i < last {
            Some(position(i, vertex_offset(v[i - 1], v[i], v[i + 1])))
        } else {
            boundary_minimum(v[last], v[last - 1], v[last - 2]).map(|off| position(last - 1, -off))
        };
        widths.extend(left_null.map(|x| x_peak - x));
        widths.extend(right_null.map(|x| x - x_peak));
    }
    let resolution_delta = (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64);

    Ok(FringeMetrics {
        peak_count: peaks.len(),
        peak_positions,
        mean_period,
        resolution_delta,
    })
}

/// Vertex of the parabola through three equally spaced samples, in steps
/// relative to the middle one.
fn vertex_offset(y0: f64, y1: f64, y2: f64) -> f64 {
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        0.0
    } else {
        (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5)
    }
}

/// Offset (in steps, relative to `y1`) of a minimum that the parabola through
/// `y0, y1, y2` places on the grid boundary at `y0`, if it does.
fn boundary_minimum(y0: f64, y1: f64, y2: f64) -> Option<f64> {
    let denom = y0 - 2.0 * y1 + y2;
    if denom <= 0.0 {
        return None;
    }
    let off = 0.5 * (y0 - y2) / denom;
    (-1.5..=-0.5).contains(&off).then_some(off)
}
