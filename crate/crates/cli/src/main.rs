use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use slmspec::spectrometer::TraceSource;
use slmspec_cli::run::default_grid;
use slmspec_cli::{run, BaselineKind, CliError, Command, Convention, GridSpec, NoiseSpec, RunConfig};

const OUT_DIR_ENV: &str = "SLMSPEC_OUT_DIR";

/// Superresolved interferometry and beat-frequency wavemeter simulator.
#[derive(Debug, Parser)]
#[command(name = "slmspec", version)]
struct Cli {
    /// JSON run configuration; replaces the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides SLMSPEC_OUT_DIR and the config file).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Record wall-clock duration in the summary (makes it non-deterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Order-2N correlation fringes through the SLM eraser array.
    Fringes(FringesArgs),
    /// Classical N-slit or Fabry-Perot reference pattern.
    Baseline(BaselineArgs),
    /// Slope and phase error of the quantum and classical patterns.
    Sensitivity(SensitivityArgs),
    /// Beat-frequency estimate of an unknown laser against a reference.
    Wavemeter(WavemeterArgs),
    /// Gain table over a list of N.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Phase range `min:max` in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "phi_range_deg")]
    phi_range: Option<String>,
    /// Phase range `min:max` in degrees.
    #[arg(long, allow_hyphen_values = true)]
    phi_range_deg: Option<String>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Poisson shot noise with this many counts at the pattern maximum.
    #[arg(long)]
    noise_counts: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct FringesArgs {
    /// Pixel pairs; a comma-separated list runs each.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Permit grids coarser than 20 points per fringe.
    #[arg(long)]
    allow_coarse: bool,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Half-wave-plate angle in degrees.
    #[arg(long, default_value_t = 22.5, allow_hyphen_values = true)]
    hwp_deg: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Nslit,
    FabryPerot,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long, value_enum, default_value = "nslit")]
    kind: KindArg,
    /// Slit count (N-slit only).
    #[arg(long)]
    n: Option<usize>,
    /// Single-slit envelope argument of sinc²(beta).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// Mirror reflectance (Fabry-Perot only).
    #[arg(long, default_value_t = 0.9)]
    reflectance: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct SensitivityArgs {
    #[arg(long)]
    n: usize,
    /// Intensity noise on the normalized pattern.
    #[arg(long, default_value_t = 0.01)]
    delta_i: f64,
    /// Averaging window `min:max` in radians.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    ClosedForm,
    Pipeline,
}

#[derive(Debug, Args)]
struct WavemeterArgs {
    #[arg(long)]
    n: usize,
    /// Reference frequency.
    #[arg(long, default_value_t = 1.0)]
    f0: f64,
    /// Offset of the unknown from the reference, same units as f0.
    #[arg(long, allow_hyphen_values = true)]
    delta_f: f64,
    /// Size the scan from delta-f (default unless a grid is given).
    #[arg(long)]
    auto_scan: bool,
    /// Frequencies in cycles per unit delay instead of radians.
    #[arg(long)]
    cyclic: bool,
    #[arg(long, value_enum, default_value = "closed-form")]
    source: SourceArg,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated list of N.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    n: Vec<usize>,
}

fn parse_range(text: &str, scale: f64) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("range must be `min:max`, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a * scale, b * scale))
}

fn apply_grid(config: &mut RunConfig, args: &GridArgs) -> Result<(), CliError> {
    let range = match (&args.phi_range, &args.phi_range_deg) {
        (Some(r), _) => Some(parse_range(r, 1.0)?),
        (None, Some(r)) => Some(parse_range(r, 1f64.to_radians())?),
        (None, None) => None,
    };
    if range.is_none() && args.points.is_none() {
        return Ok(());
    }
    if config.n.is_empty() && config.command != Command::Baseline {
        return Ok(());
    }
    let n = config.n.iter().copied().max().unwrap_or(1).max(1);
    let default = default_grid(config, n)?;
    let (phi_min, phi_max) = range.unwrap_or((default.phi_min(), default.phi_max()));
    let points = match args.points {
        Some(p) => p,
        None if range.is_some() && config.command == Command::Wavemeter => {
            let cells = ((phi_max - phi_min) / default.step()).ceil().max(2.0);
            cells as usize + 1
        }
        None => default.len(),
    };
    config.grid = Some(GridSpec {
        phi_min,
        phi_max,
        points,
    });
    Ok(())
}

fn apply_noise(config: &mut RunConfig, args: &NoiseArgs) {
    config.noise = args.noise_counts.map(|exposure| NoiseSpec {
        exposure,
        seed: args.seed,
    });
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let config = match (&cli.config, &cli.command) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "--config and a subcommand are mutually exclusive".into(),
            ))
        }
        (None, None) => return Err(CliError::Config("a subcommand or --config is required".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        (None, Some(sub)) => from_subcommand(sub)?,
    };
    Ok(RunConfig {
        timing: config.timing || cli.timing,
        ..config
    })
}

fn from_subcommand(sub: &Sub) -> Result<RunConfig, CliError> {
    let config = match sub {
        Sub::Fringes(a) => {
            let mut c = RunConfig::new(Command::Fringes);
            c.n = a.n.clone();
            c.allow_coarse = a.allow_coarse;
            c.input_amplitude = a.amplitude;
            c.hwp_angle = a.hwp_deg.to_radians();
            apply_noise(&mut c, &a.noise);
            c.validate()?;
            apply_grid(&mut c, &a.grid)?;
            c
        }
        Sub::Baseline(a) => {
            let mut c = RunConfig::new(Command::Baseline);
            c.baseline = match a.kind {
                KindArg::Nslit => BaselineKind::Nslit,
                KindArg::FabryPerot => BaselineKind::FabryPerot,
            };
            c.n = a.n.into_iter().collect();
            c.beta = a.beta;
            c.reflectance = a.reflectance;
            c.validate()?;
            apply_grid(&mut c, &a.grid)?;
            c
        }
        Sub::Sensitivity(a) => {
            let mut c = RunConfig::new(Command::Sensitivity);
            c.n = vec![a.n];
            c.delta_i = a.delta_i;
            c.window = a.window.as_deref().map(|w| parse_range(w, 1.0)).transpose()?;
            c.validate()?;
            apply_grid(&mut c, &a.grid)?;
            c
        }
        Sub::Wavemeter(a) => {
            let mut c = RunConfig::new(Command::Wavemeter);
            c.n = vec![a.n];
            c.f0 = a.f0;
            c.delta_f = Some(a.delta_f);
            c.auto_scan = a.auto_scan;
            if a.cyclic {
                c.convention = Convention::Cyclical;
            }
            c.source = match a.source {
                SourceArg::ClosedForm => TraceSource::ClosedForm,
                SourceArg::Pipeline => TraceSource::Pipeline,
            };
            apply_noise(&mut c, &a.noise);
            c.validate()?;
            if !a.auto_scan {
                apply_grid(&mut c, &a.grid)?;
            } else if a.grid.phi_range.is_some() || a.grid.phi_range_deg.is_some() || a.grid.points.is_some() {
                return Err(CliError::Config(
                    "--auto-scan and an explicit grid are mutually exclusive".into(),
                ));
            }
            c
        }
        Sub::Sweep(a) => {
            let mut c = RunConfig::new(Command::Sweep);
            c.n = a.n.clone();
            c
        }
    };
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|config| {
        let out_dir = cli
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        run(&config, &out_dir)
    });
    match result {
        Ok(summary) => {
            eprintln!("wrote {}", summary.files.join(", "));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
