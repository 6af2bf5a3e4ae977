//! Beat-fringe wavemeter.
//!
//! Frequencies are phase rates per unit delay, `φ = f·τ`. Scans are expressed
//! in reference phase `φ0 = f0·τ`, so an unknown `f = f0 + δf` is seen at
//! phase `(f/f0)·φ0`. The product of the unknown and reference superresolved
//! patterns `sin²(N f τ)·sin²(N f0 τ)` carries a slow beat at rate `2N|δf|`
//! beneath carriers at `2N f0` and above.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::correlation::{closed_form_trace, correlation_trace, CorrelationTrace, Sampling};
use crate::eraser::{make_slm, ShotNoise};
use crate::error::{Error, Result};
use crate::grid::ScanGrid;
use crate::optics::ApparatusConfig;
use crate::spectral::dominant_rate;

/// Reference scan span in `φ0` used unless a longer one is needed: `[−10π, 10π]`.
pub const DEFAULT_SPAN: f64 = 20.0 * PI;

/// Minimum number of beat periods an auto-sized scan must contain.
pub const MIN_AUTO_BEATS: f64 = 4.0;

/// Samples per fastest superresolved fringe period `π/(N·max(f/f0, 1))` below
/// which a scan is rejected as aliased.
pub const MIN_SAMPLES_PER_FRINGE: f64 = 8.0;

/// Reference frequency, order, and scan grid: everything the estimator knows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSetup {
    pub reference_frequency: f64,
    pub order: usize,
    /// Grid over reference phase `φ0 = f0·τ`.
    pub grid: ScanGrid,
}

impl ReferenceSetup {
    pub fn new(reference_frequency: f64, order: usize, grid: ScanGrid) -> Result<Self> {
        if !(reference_frequency > 0.0) || !reference_frequency.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "reference frequency must be positive, got {reference_frequency}"
            )));
        }
        if order == 0 {
            return Err(Error::ZeroPixels);
        }
        Ok(Self {
            reference_frequency,
            order,
            grid,
        })
    }

    /// Delay span `τ_span = φ0_span / f0`.
    pub fn delay_span(&self) -> f64 {
        self.grid.span() / self.reference_frequency
    }

    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.points().map(move |p| p / self.reference_frequency)
    }

    fn check_sampling(&self, ratio: f64) -> Result<()> {
        let period = PI / (self.order as f64 * ratio.max(1.0));
        if self.grid.step() * MIN_SAMPLES_PER_FRINGE > period * (1.0 + 1e-9) {
            return Err(Error::Aliasing(format!(
                "step {:.3e} in reference phase under-samples fringe period {:.3e}",
                self.grid.step(),
                period
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatScanConfig {
    pub setup: ReferenceSetup,
    pub unknown_frequency: f64,
}

impl BeatScanConfig {
    pub fn new(setup: ReferenceSetup, unknown_frequency: f64) -> Result<Self> {
        if !(unknown_frequency > 0.0) || !unknown_frequency.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "unknown frequency must be positive, got {unknown_frequency}"
            )));
        }
        let config = Self {
            setup,
            unknown_frequency,
        };
        setup.check_sampling(config.ratio())?;
        Ok(config)
    }

    pub fn ratio(&self) -> f64 {
        self.unknown_frequency / self.setup.reference_frequency
    }
}

/// How the unknown-frequency pattern is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceSource {
    /// `sin²(N f τ)` directly.
    #[default]
    ClosedForm,
    /// Full field pipeline through every SLM pixel pair.
    Pipeline,
}

/// `φ0` grid for an auto-sized scan.
///
/// The span is `[−10π, 10π]`, lengthened when needed so that the smallest
/// relative offset `min_delta = |δf|/f0` yields at least [`MIN_AUTO_BEATS`]
/// beat periods. The step resolves the unknown at `f/f0 = 1 + max_delta`.
pub fn auto_scan_grid(order: usize, min_delta: f64, max_delta: f64) -> Result<ScanGrid> {
    if order == 0 {
        return Err(Error::ZeroPixels);
    }
    if !(min_delta > 0.0) || !(max_delta >= min_delta) || !max_delta.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "need 0 < min_delta <= max_delta, got {min_delta}, {max_delta}"
        )));
    }
    let n = order as f64;
    // beats over span S: 2N·δ·S / 2π
    let span = DEFAULT_SPAN.max(MIN_AUTO_BEATS * PI / (n * min_delta));
    let step = PI / (20.0 * n * (1.0 + max_delta));
    ScanGrid::with_max_step(-0.5 * span, 0.5 * span, step)
}

/// Superresolved patterns of the unknown and reference lights on the shared grid.
pub fn beat_traces(config: &BeatScanConfig, source: TraceSource) -> Result<(CorrelationTrace, CorrelationTrace)> {
    let setup = &config.setup;
    let reference = closed_form_trace(setup.order, &setup.grid)?;
    let ratio = config.ratio();
    let unknown = match source {
        TraceSource::ClosedForm => {
            let n = setup.order as f64;
            let values: Vec<f64> = setup.grid.points().map(|p| (n * ratio * p).sin().powi(2)).collect();
            CorrelationTrace {
                grid: setup.grid,
                log_values: values.iter().map(|v| v.ln()).collect(),
                normalized_values: values,
                order: 2 * setup.order,
            }
        }
        TraceSource::Pipeline => {
            let scaled = ScanGrid::new(
                ratio * setup.grid.phi_min(),
                ratio * setup.grid.phi_max(),
                setup.grid.len(),
            )?;
            let apparatus = ApparatusConfig::new(1.0, 0.0, setup.order)?;
            let trace = correlation_trace(&apparatus, &make_slm(setup.order)?, &scaled, Sampling::AllowCoarse)?;
            CorrelationTrace {
                grid: setup.grid,
                ..trace
            }
        }
    };
    Ok((unknown, reference))
}

fn ensure_shared_grid(a: &CorrelationTrace, b: &CorrelationTrace) -> Result<()> {
    if a.grid != b.grid || a.len() != b.len() {
        return Err(Error::LengthMismatch("traces are not on a shared grid".into()));
    }
    Ok(())
}

/// Number of beat-envelope periods of `unknown − reference` across the scan;
/// at least [`MIN_ESTIMATE_BEATS`] are needed to tell a beat from a drift.
///
/// The carrier rate is read off the reference pattern; the envelope rate is the
/// strongest tone of the squared difference below half that carrier.
pub fn count_beats(unknown: &CorrelationTrace, reference: &CorrelationTrace) -> Result<usize> {
    ensure_shared_grid(unknown, reference)?;
    if unknown.normalized_values == reference.normalized_values {
        return Ok(0);
    }
    let step = unknown.grid.step();
    let nyquist = PI / step;
    let carrier = dominant_rate(&reference.normalized_values, step, nyquist)?.rate;
    let envelope: Vec<f64> = unknown
        .normalized_values
        .iter()
        .zip(&reference.normalized_values)
        .map(|(u, r)| (u - r) * (u - r))
        .collect();
    let beat = dominant_rate(&envelope, step, 0.5 * carrier)?;
    if beat.amplitude < MIN_BEAT_CONTRAST * std_dev(&envelope) {
        return Err(Error::InsufficientScan(format!(
            "no beat envelope resolved (tone amplitude {:.2e})",
            beat.amplitude
        )));
    }
    let cycles = beat.rate * unknown.grid.span() / (2.0 * PI);
    if cycles < MIN_ESTIMATE_BEATS {
        return Err(Error::InsufficientScan(format!(
            "only {cycles:.2} beat periods in the scan; need {MIN_ESTIMATE_BEATS}"
        )));
    }
    Ok(cycles.round() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub delta_f_magnitude: f64,
    /// `(f0 − |δf|, f0 + |δf|)`; a single beat measurement cannot pick the sign.
    pub candidates: (f64, f64),
    pub beat_count: usize,
    /// `1/(2N|δf|τ_span)`; `None` when no beat is present.
    pub relative_uncertainty: Option<f64>,
}

/// Beat periods the scan must span for a beat count or frequency estimate.
pub const MIN_ESTIMATE_BEATS: f64 = 2.0;

/// Smallest beat-tone amplitude, as a fraction of the trace's standard
/// deviation, accepted as a resolved beat. Anything weaker is window leakage
/// from the carrier or from a beat slower than the scan.
pub const MIN_BEAT_CONTRAST: f64 = 1e-2;

/// Recovers `|δf|` from a measured superresolved pattern on the setup's grid.
pub fn estimate_frequency(setup: &ReferenceSetup, measured: &CorrelationTrace) -> Result<FrequencyEstimate> {
    if measured.grid != setup.grid || measured.len() != setup.grid.len() {
        return Err(Error::LengthMismatch("measured trace is not on the setup grid".into()));
    }
    let f0 = setup.reference_frequency;
    let reference = closed_form_trace(setup.order, &setup.grid)?;
    let no_beat = FrequencyEstimate {
        delta_f_magnitude: 0.0,
        candidates: (f0, f0),
        beat_count: 0,
        relative_uncertainty: None,
    };
    if measured.normalized_values == reference.normalized_values {
        return Ok(no_beat);
    }

    let product: Vec<f64> = measured
        .normalized_values
        .iter()
        .zip(&reference.normalized_values)
        .map(|(m, r)| m * r)
        .collect();
    let n = setup.order as f64;
    let step = setup.grid.step();
    // the reference carrier sits at 2N in φ0 units; beats live below half of it
    let cutoff = n;
    let beat = dominant_rate(&product, step, cutoff)?;

    let spread = std_dev(&measured.normalized_values).max(f64::MIN_POSITIVE);
    if beat.amplitude <= 1e-9 * spread {
        return Ok(no_beat);
    }
    if beat.amplitude < MIN_BEAT_CONTRAST * spread {
        return Err(Error::InsufficientScan(format!(
            "no beat resolved below the carrier (tone amplitude {:.2e}); scan too short for this offset",
            beat.amplitude
        )));
    }
    let cycles = beat.rate * setup.grid.span() / (2.0 * PI);
    if cycles < MIN_ESTIMATE_BEATS {
        return Err(Error::InsufficientScan(format!(
            "only {cycles:.2} beat periods in the scan; need {MIN_ESTIMATE_BEATS}"
        )));
    }
    let relative = beat.rate / (2.0 * n);
    if relative >= 1.0 {
        return Err(Error::Aliasing(format!(
            "beat rate {:.3e} reaches the carrier band",
            beat.rate
        )));
    }
    let delta_f = relative * f0;
    Ok(FrequencyEstimate {
        delta_f_magnitude: delta_f,
        candidates: (f0 - delta_f, f0 + delta_f),
        beat_count: cycles.round() as usize,
        relative_uncertainty: Some(1.0 / (2.0 * n * delta_f * setup.delay_span())),
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// Replaces a pattern with Poisson photon counts, `peak_counts` at its maximum,
/// rescaled back to unit peak.
pub fn add_shot_noise(trace: &CorrelationTrace, peak_counts: f64, seed: u64) -> Result<CorrelationTrace> {
    if !(peak_counts > 0.0) || !peak_counts.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "peak counts must be positive, got {peak_counts}"
        )));
    }
    let mut noise = ShotNoise::new(seed);
    let values = trace
        .normalized_values
        .iter()
        .map(|&v| Ok(noise.sample(v, peak_counts)? as f64 / peak_counts))
        .collect::<Result<Vec<f64>>>()?;
    CorrelationTrace::from_values(trace.grid, &values, trace.order, None)
}
