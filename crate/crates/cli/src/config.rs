//! Run configuration shared by the command line and `--config` JSON files.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use slmspec::spectrometer::TraceSource;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Fringes,
    Baseline,
    Sensitivity,
    Wavemeter,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fringes => "fringes",
            Command::Baseline => "baseline",
            Command::Sensitivity => "sensitivity",
            Command::Wavemeter => "wavemeter",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    #[default]
    Nslit,
    FabryPerot,
}

/// Frequency units: phase rate per unit delay (`φ = fτ`) or cycles (`φ = 2πfτ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    Angular,
    Cyclical,
}

/// Scan grid in radians of phase (reference phase for `wavemeter`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub phi_min: f64,
    pub phi_max: f64,
    pub points: usize,
}

/// Poisson photon-count noise, `exposure` counts at the pattern maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub exposure: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub allow_coarse: bool,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub source: TraceSource,
    #[serde(default = "default_one")]
    pub input_amplitude: f64,
    /// Half-wave-plate angle in radians.
    #[serde(default = "default_hwp")]
    pub hwp_angle: f64,
    #[serde(default)]
    pub baseline: BaselineKind,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_reflectance")]
    pub reflectance: f64,
    #[serde(default = "default_delta_i")]
    pub delta_i: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(default = "default_one")]
    pub f0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f: Option<f64>,
    #[serde(default)]
    pub auto_scan: bool,
    #[serde(default)]
    pub timing: bool,
}

fn default_one() -> f64 {
    1.0
}

fn default_hwp() -> f64 {
    std::f64::consts::FRAC_PI_8
}

fn default_reflectance() -> f64 {
    0.9
}

fn default_delta_i() -> f64 {
    0.01
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            n: Vec::new(),
            grid: None,
            noise: None,
            out_dir: None,
            allow_coarse: false,
            convention: Convention::Angular,
            source: TraceSource::default(),
            input_amplitude: 1.0,
            hwp_angle: default_hwp(),
            baseline: BaselineKind::Nslit,
            beta: 0.0,
            reflectance: default_reflectance(),
            delta_i: default_delta_i(),
            window: None,
            f0: 1.0,
            delta_f: None,
            auto_scan: false,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let needs_n = !(self.command == Command::Baseline && self.baseline == BaselineKind::FabryPerot);
        if needs_n && self.n.is_empty() {
            return bad(format!("{} needs at least one N (--n)", self.command.name()));
        }
        if self.n.contains(&0) {
            return bad("N must be at least 1".into());
        }
        if !matches!(self.command, Command::Sweep | Command::Fringes) && self.n.len() > 1 {
            return bad(format!("{} takes a single N; use sweep for lists", self.command.name()));
        }
        if let Some(g) = &self.grid {
            if !g.phi_min.is_finite() || !g.phi_max.is_finite() || g.phi_max <= g.phi_min {
                return bad(format!(
                    "grid range must satisfy phi_min < phi_max, got {}:{}",
                    g.phi_min, g.phi_max
                ));
            }
            if g.points < 3 {
                return bad(format!("grid needs at least 3 points, got {}", g.points));
            }
        }
        if let Some(noise) = &self.noise {
            if !(noise.exposure > 0.0) || !noise.exposure.is_finite() {
                return bad(format!("noise exposure must be positive, got {}", noise.exposure));
            }
        }
        if !(self.input_amplitude > 0.0) || !self.input_amplitude.is_finite() {
            return bad(format!(
                "input amplitude must be positive, got {}",
                self.input_amplitude
            ));
        }
        if !self.hwp_angle.is_finite() || !self.beta.is_finite() {
            return bad("angles must be finite".into());
        }
        if !(self.reflectance > 0.0 && self.reflectance < 1.0) {
            return bad(format!("reflectance must lie in (0, 1), got {}", self.reflectance));
        }
        if !(self.delta_i > 0.0) || !self.delta_i.is_finite() {
            return bad(format!("delta_i must be positive, got {}", self.delta_i));
        }
        if let Some((lo, hi)) = self.window {
            if !(lo < hi) {
                return bad(format!("window must satisfy lo < hi, got {lo}:{hi}"));
            }
        }
        if !(self.f0 > 0.0) || !self.f0.is_finite() {
            return bad(format!("f0 must be positive, got {}", self.f0));
        }
        if self.command == Command::Wavemeter {
            match self.delta_f {
                None => return bad("wavemeter needs --delta-f".into()),
                Some(d) if !d.is_finite() || d.abs() >= 0.5 * self.f0 => {
                    return bad(format!("delta_f must satisfy |delta_f| < f0/2, got {d}"))
                }
                _ => {}
            }
            if self.auto_scan && self.grid.is_some() {
                return bad("--auto-scan and an explicit grid are mutually exclusive".into());
            }
        }
        Ok(())
    }
}
