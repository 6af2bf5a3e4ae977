//! Experiment dispatch. Every result is computed before any file is written,
//! so a failed run leaves the output directory untouched.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use slmspec::baselines::{fabry_perot_trace, measure_fwhm, nslit_trace, FabryPerotModel, NSlitModel};
use slmspec::sensitivity::{
    differentiate, gain_curve, mean_abs_slope, phase_error, slope_grid, SlopeTrace, UNIT_PERIOD,
};
use slmspec::spectrometer::{
    add_shot_noise, auto_scan_grid, beat_traces, count_beats, estimate_frequency, BeatScanConfig, ReferenceSetup,
};
use slmspec::{
    closed_form_trace, correlation_trace, fringe_metrics, make_slm, ApparatusConfig, CorrelationTrace, Sampling,
    ScanGrid,
};

use crate::config::{BaselineKind, Command, Convention, RunConfig};
use crate::output::{csv, json};
use crate::CliError;

pub const SCHEMA_TAG: &str = "slmspec/run-summary/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeSummary {
    pub n: usize,
    pub points: usize,
    pub peak_count: usize,
    pub peak_positions: Vec<f64>,
    pub mean_period: Option<f64>,
    pub resolution_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub kind: BaselineKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reflectance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fwhm: Option<f64>,
    pub measured_fwhm: Option<f64>,
    pub peak_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub quantum_gain: f64,
    pub classical_gain: f64,
    pub window: (f64, f64),
    pub delta_i: f64,
    /// `null` when every point in the window is stationary.
    pub min_phase_error: Option<f64>,
    pub best_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainEntry {
    #[serde(rename = "N")]
    pub n: usize,
    pub quantum_gain: f64,
    pub classical_gain: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub delta_f: f64,
    pub candidates: (f64, f64),
    pub beat_count: usize,
    pub uncertainty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: String,
    pub command: Command,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fringes: Option<Vec<FringeSummary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivitySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_table: Option<Vec<GainEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateSummary>,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
}

/// Files a run produces, still in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub summary: RunSummary,
    pub files: Vec<(String, String)>,
}

impl Emission {
    fn new(config: &RunConfig) -> Self {
        let echo = RunConfig {
            out_dir: None,
            ..config.clone()
        };
        Self {
            summary: RunSummary {
                schema: SCHEMA_TAG.to_string(),
                command: config.command,
                config: echo,
                fringes: None,
                baseline: None,
                sensitivity: None,
                gain_table: None,
                estimate: None,
                files: Vec::new(),
                duration_ms: None,
            },
            files: Vec::new(),
        }
    }

    fn push(&mut self, name: String, contents: String) {
        self.summary.files.push(name.clone());
        self.files.push((name, contents));
    }
}

/// Grid used when the configuration does not give one.
pub fn default_grid(config: &RunConfig, n: usize) -> Result<ScanGrid, CliError> {
    let grid = match config.command {
        Command::Fringes => ScanGrid::new(0.0, 2.0 * PI, (80 * n + 1).max(4001))?,
        Command::Baseline => match config.baseline {
            BaselineKind::Nslit => ScanGrid::new(-PI, PI, (80 * n + 1).max(4001))?,
            BaselineKind::FabryPerot => ScanGrid::new(-2.0 * PI, 2.0 * PI, 8001)?,
        },
        Command::Sensitivity | Command::Sweep => slope_grid(n)?,
        Command::Wavemeter => {
            let delta = config.delta_f.unwrap_or(0.0).abs() / config.f0;
            if delta > 0.0 {
                auto_scan_grid(n, delta, delta)?
            } else {
                ScanGrid::with_max_step(-10.0 * PI, 10.0 * PI, PI / (20.0 * n as f64))?
            }
        }
    };
    Ok(grid)
}

fn grid_for(config: &RunConfig, n: usize) -> Result<ScanGrid, CliError> {
    match &config.grid {
        Some(g) if !config.auto_scan => Ok(ScanGrid::new(g.phi_min, g.phi_max, g.points)?),
        _ => default_grid(config, n),
    }
}

fn single_n(config: &RunConfig) -> usize {
    config.n[0]
}

/// Computes a run without touching the filesystem.
pub fn execute(config: &RunConfig) -> Result<Emission, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut out = Emission::new(config);
    match config.command {
        Command::Fringes => fringes(config, &mut out)?,
        Command::Baseline => baseline(config, &mut out)?,
        Command::Sensitivity => sensitivity(config, &mut out)?,
        Command::Wavemeter => wavemeter(config, &mut out)?,
        Command::Sweep => sweep(config, &mut out)?,
    }
    let summary_name = format!("{}_summary.json", config.command.name());
    out.summary.files.push(summary_name);
    if config.timing {
        out.summary.duration_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(out)
}

/// Computes a run and writes its CSV files and JSON summary into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let emission = execute(config)?;
    fs::create_dir_all(out_dir)?;
    for (name, contents) in &emission.files {
        fs::write(out_dir.join(name), contents)?;
    }
    let summary_name = format!("{}_summary.json", config.command.name());
    fs::write(out_dir.join(summary_name), json(&emission.summary))?;
    Ok(emission.summary)
}

fn apparatus(config: &RunConfig, n: usize) -> Result<ApparatusConfig, CliError> {
    let apparatus = ApparatusConfig {
        input_amplitude: config.input_amplitude,
        hwp_angle: config.hwp_angle,
        mzi_phase: 0.0,
        pixel_count: n,
    };
    apparatus.validate()?;
    Ok(apparatus)
}

fn with_noise(config: &RunConfig, trace: CorrelationTrace) -> Result<CorrelationTrace, CliError> {
    match &config.noise {
        Some(noise) => Ok(add_shot_noise(&trace, noise.exposure, noise.seed)?),
        None => Ok(trace),
    }
}

fn fringes(config: &RunConfig, out: &mut Emission) -> Result<(), CliError> {
    let sampling = if config.allow_coarse {
        Sampling::AllowCoarse
    } else {
        Sampling::Enforced
    };
    let mut rows = Vec::with_capacity(config.n.len());
    for &n in &config.n {
        let grid = grid_for(config, n)?;
        let trace = correlation_trace(&apparatus(config, n)?, &make_slm(n)?, &grid, sampling)?;
        let trace = with_noise(config, trace)?;
        let metrics = fringe_metrics(&trace)?;
        let phis: Vec<f64> = trace.phis().collect();
        out.push(
            format!("fringes_n{n}.csv"),
            csv(
                &["phi", "normalized", "log_value"],
                &[&phis, &trace.normalized_values, &trace.log_values],
            ),
        );
        rows.push(FringeSummary {
            n,
            points: grid.len(),
            peak_count: metrics.peak_count,
            peak_positions: metrics.peak_positions,
            mean_period: metrics.mean_period,
            resolution_delta: metrics.resolution_delta,
        });
    }
    out.summary.fringes = Some(rows);
    Ok(())
}

fn baseline(config: &RunConfig, out: &mut Emission) -> Result<(), CliError> {
    let (name, trace, raw, summary) = match config.baseline {
        BaselineKind::Nslit => {
            let n = single_n(config);
            let grid = grid_for(config, n)?;
            let model = NSlitModel::new(n, config.beta)?;
            let trace = nslit_trace(&model, &grid)?;
            let raw: Vec<f64> = grid.points().map(|p| model.value(p)).collect();
            let summary = BaselineSummary {
                kind: BaselineKind::Nslit,
                n: Some(n),
                beta: Some(config.beta),
                reflectance: None,
                finesse: None,
                fwhm: None,
                measured_fwhm: measure_fwhm(&trace).ok(),
                peak_value: model.peak_value(),
            };
            (format!("baseline_nslit_n{n}.csv"), trace, raw, summary)
        }
        BaselineKind::FabryPerot => {
            let grid = match &config.grid {
                Some(g) => ScanGrid::new(g.phi_min, g.phi_max, g.points)?,
                None => default_grid(config, 1)?,
            };
            let model = FabryPerotModel::new(config.reflectance)?;
            let trace = fabry_perot_trace(&model, &grid)?;
            let raw: Vec<f64> = grid.points().map(|p| model.value(p)).collect();
            let summary = BaselineSummary {
                kind: BaselineKind::FabryPerot,
                n: None,
                beta: None,
                reflectance: Some(config.reflectance),
                finesse: Some(model.finesse()),
                fwhm: Some(model.fwhm()),
                measured_fwhm: measure_fwhm(&trace).ok(),
                peak_value: 1.0,
            };
            ("baseline_fabry_perot.csv".to_string(), trace, raw, summary)
        }
    };
    let phis: Vec<f64> = trace.phis().collect();
    out.push(
        name,
        csv(
            &["phi", "value", "normalized"],
            &[&phis, &raw, &trace.normalized_values],
        ),
    );
    out.summary.baseline = Some(summary);
    Ok(())
}

fn slope_csv(slope: &SlopeTrace) -> String {
    let phis: Vec<f64> = slope.grid.points().collect();
    csv(&["phi", "slope"], &[&phis, &slope.slope_values])
}

fn sensitivity(config: &RunConfig, out: &mut Emission) -> Result<(), CliError> {
    let n = single_n(config);
    let grid = grid_for(config, n)?;
    let window = config.window.unwrap_or(UNIT_PERIOD);
    let quantum = differentiate(&closed_form_trace(n, &grid)?)?;
    let classical = differentiate(&nslit_trace(&NSlitModel::point_slits(n)?, &grid)?)?;
    let report = phase_error(&quantum, config.delta_i, Some(window))?;
    out.push(format!("sensitivity_quantum_n{n}.csv"), slope_csv(&quantum));
    out.push(format!("sensitivity_nslit_n{n}.csv"), slope_csv(&classical));
    out.summary.sensitivity = Some(SensitivitySummary {
        n,
        quantum_gain: report.mean_abs_slope,
        classical_gain: mean_abs_slope(&classical, window)?,
        window,
        delta_i: config.delta_i,
        min_phase_error: Some(report.min_phase_error).filter(|e| e.is_finite()),
        best_phase: report.best_phase,
    });
    Ok(())
}

fn sweep(config: &RunConfig, out: &mut Emission) -> Result<(), CliError> {
    let rows = gain_curve(&config.n)?;
    for &n in &config.n {
        let grid = slope_grid(n)?;
        let quantum = differentiate(&closed_form_trace(n, &grid)?)?;
        let classical = differentiate(&nslit_trace(&NSlitModel::point_slits(n)?, &grid)?)?;
        out.push(format!("sweep_quantum_n{n}.csv"), slope_csv(&quantum));
        out.push(format!("sweep_nslit_n{n}.csv"), slope_csv(&classical));
    }
    out.summary.gain_table = Some(
        rows.iter()
            .map(|r| GainEntry {
                n: r.n,
                quantum_gain: r.quantum,
                classical_gain: r.classical,
                ratio: Some(r.ratio()).filter(|x| x.is_finite()),
            })
            .collect(),
    );
    Ok(())
}

fn wavemeter(config: &RunConfig, out: &mut Emission) -> Result<(), CliError> {
    let n = single_n(config);
    let scale = match config.convention {
        Convention::Angular => 1.0,
        Convention::Cyclical => 2.0 * PI,
    };
    let f0 = config.f0 * scale;
    let delta = config.delta_f.unwrap_or(0.0) * scale;
    let grid = grid_for(config, n)?;
    let setup = ReferenceSetup::new(f0, n, grid)?;
    let scan = BeatScanConfig::new(setup, f0 + delta)?;
    let (unknown, reference) = beat_traces(&scan, config.source)?;
    let unknown = with_noise(config, unknown)?;
    let beats = count_beats(&unknown, &reference)?;
    let estimate = estimate_frequency(&setup, &unknown)?;

    let taus: Vec<f64> = setup.delays().collect();
    let product: Vec<f64> = unknown
        .normalized_values
        .iter()
        .zip(&reference.normalized_values)
        .map(|(u, r)| u * r)
        .collect();
    out.push(
        format!("wavemeter_n{n}.csv"),
        csv(
            &["tau", "unknown", "reference", "product"],
            &[
                &taus,
                &unknown.normalized_values,
                &reference.normalized_values,
                &product,
            ],
        ),
    );
    out.summary.estimate = Some(EstimateSummary {
        delta_f: estimate.delta_f_magnitude / scale,
        candidates: (estimate.candidates.0 / scale, estimate.candidates.1 / scale),
        beat_count: beats,
        uncertainty: estimate.relative_uncertainty,
    });
    Ok(())
}
