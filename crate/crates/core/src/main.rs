//! `quietclock` command-line interface: `simulate`, `compare`, `sweep`.
//!
//! Exit codes: 0 success (comparison passed), 1 comparison failed,
//! 2 invalid usage or configuration, 3 runtime failure (I/O, resources).

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use quietclock::error::{Error, Result};
use quietclock::model::{ClockParams, DampingRule, LaserAnalogParams, PoissonParams};
use quietclock::output::{read_psd_file, PsdRow};
use quietclock::runner::{
    run_single, run_sweep, Artifact, ModelConfig, PsdConfig, RunConfig, RunResult, SweepConfig,
};
use quietclock::spectral::{analytic_psd, fit_corner, Window};

/// Simulator and spectral analyzer for a quiet-oscillator clock model.
#[derive(Parser)]
#[command(name = "quietclock", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one generator and write psd/summary/events artifacts.
    Simulate(Box<SimulateArgs>),
    /// Check a psd.csv against the analytic reference curve.
    Compare(CompareArgs),
    /// Run a parameter-sweep grid from a TOML config.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Clock,
    Poisson,
    Laser,
}

#[derive(Clone, Copy, ValueEnum)]
enum DampingArg {
    Linearized,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Rectangular,
    Hann,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArtifactArg {
    Psd,
    Summary,
    Events,
}

impl From<ArtifactArg> for Artifact {
    fn from(a: ArtifactArg) -> Self {
        match a {
            ArtifactArg::Psd => Artifact::Psd,
            ArtifactArg::Summary => Artifact::Summary,
            ArtifactArg::Events => Artifact::Events,
        }
    }
}

#[derive(Parser)]
#[command(after_help = "\
Examples:
  quietclock simulate --model clock --delta 1e-5 --p 0.01 --w 1e-3 \\
      --periods 1000000 --seed 42 --out runs
  quietclock simulate --config run.toml --seed 7
  quietclock simulate --model laser --delta 1e-5 --quantum 1e-3 --periods 1000000")]
struct SimulateArgs {
    /// TOML run configuration; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Generator to run (required unless --config provides one).
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Measured periods (after burn-in).
    #[arg(long)]
    periods: Option<u64>,
    /// Seed of the draw stream (clock, poisson).
    #[arg(long)]
    seed: Option<u64>,
    /// Periods to simulate and discard before measuring.
    #[arg(long)]
    burn_in: Option<u64>,
    /// Escapement input per period (clock, laser).
    #[arg(long)]
    delta: Option<f64>,
    /// Event probability per period (clock, poisson).
    #[arg(long)]
    p: Option<f64>,
    /// Relative energy loss per event (clock).
    #[arg(long)]
    w: Option<f64>,
    /// Event mark (poisson) / firing threshold (laser).
    #[arg(long)]
    quantum: Option<f64>,
    /// Damping rule (clock).
    #[arg(long, value_enum)]
    damping: Option<DampingArg>,
    /// Initial stored energy (clock); defaults to the stationary mean.
    #[arg(long)]
    e0: Option<f64>,
    /// PSD segment length M (power of two); defaults to min(2^20, periods/8).
    #[arg(long)]
    psd_segment_len: Option<usize>,
    /// Segment taper.
    #[arg(long, value_enum)]
    psd_window: Option<WindowArg>,
    /// Log-binning density of psd.csv.
    #[arg(long)]
    bins_per_decade: Option<u32>,
    /// Artifacts to write (comma separated: psd,summary,events).
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<ArtifactArg>>,
    /// Counting-window lengths for the Fano table (comma separated).
    #[arg(long, value_delimiter = ',')]
    fano_windows: Option<Vec<u64>>,
    /// Bin width of the inter-event gap histogram.
    #[arg(long)]
    gap_bin_width: Option<u64>,
    /// Output directory; artifacts land in OUT/<run_id>/.
    /// [default: $QUIETCLOCK_OUT_DIR or ./runs]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Analyze in memory only; write no artifacts.
    #[arg(long)]
    no_write: bool,
}

#[derive(Parser)]
struct CompareArgs {
    /// psd.csv produced by `simulate`.
    #[arg(long, value_name = "FILE")]
    psd: PathBuf,
    /// Recompute the reference from these clock parameters (give all three)
    /// instead of trusting the table's s_analytic column.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    /// Per-band relative tolerance against the reference.
    #[arg(long, default_value_t = 0.25)]
    tolerance: f64,
    /// Ignore bands below this angular frequency (rad/period).
    #[arg(long)]
    min_omega: Option<f64>,
    /// Ignore bands above this angular frequency (rad/period).
    #[arg(long)]
    max_omega: Option<f64>,
}

#[derive(Parser)]
struct SweepArgs {
    /// TOML sweep configuration (base run + axes).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Worker threads (result is independent of the count).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for cell artifacts and the aggregate table.
    /// [default: $QUIETCLOCK_OUT_DIR or ./runs, joined with sweep-<id>]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run the sweep in memory only; write no artifacts.
    #[arg(long)]
    no_write: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            if e.is_usage() {
                2
            } else {
                3
            }
        }
    };
    std::process::exit(code);
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(args) => {
            cmd_simulate(&args)?;
            Ok(0)
        }
        Command::Compare(args) => Ok(if cmd_compare(&args)? { 0 } else { 1 }),
        Command::Sweep(args) => {
            cmd_sweep(&args)?;
            Ok(0)
        }
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os("QUIETCLOCK_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| "runs".into())
}

fn load_toml<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.clone(), e))?;
    toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
}

/// Build the effective run config from an optional file plus flag overrides.
fn build_run_config(args: &SimulateArgs) -> Result<RunConfig> {
    let mut config = match (&args.config, args.model) {
        (Some(path), _) => {
            let mut config: RunConfig = load_toml(path)?;
            if let Some(kind) = args.model {
                if kind_of(&config.model) != kind {
                    config.model = model_from_flags(kind, args)?;
                }
            }
            config
        }
        (None, Some(kind)) => {
            let model = model_from_flags(kind, args)?;
            let periods = args
                .periods
                .ok_or_else(|| Error::Config("simulate requires --periods".into()))?;
            RunConfig::new(model, periods, 0)
        }
        (None, None) => {
            return Err(Error::Config("simulate requires --model or --config".into()))
        }
    };
    apply_model_flags(&mut config.model, args)?;

    if let Some(periods) = args.periods {
        config.periods = periods;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(burn_in) = args.burn_in {
        config.burn_in = burn_in;
    }
    if args.psd_segment_len.is_some() || args.psd_window.is_some() || args.bins_per_decade.is_some()
    {
        let current = config.psd;
        let segment_len = args
            .psd_segment_len
            .or(current.map(|c| c.segment_len))
            .ok_or_else(|| Error::Config("--psd-window/--bins-per-decade need --psd-segment-len or a [psd] config section".into()))?;
        config.psd = Some(PsdConfig {
            segment_len,
            window: match args.psd_window {
                Some(WindowArg::Rectangular) => Window::Rectangular,
                Some(WindowArg::Hann) => Window::Hann,
                None => current.map(|c| c.window).unwrap_or_default(),
            },
            bins_per_decade: args
                .bins_per_decade
                .or(current.map(|c| c.bins_per_decade))
                .unwrap_or(10),
        });
    }
    if let Some(outputs) = &args.outputs {
        config.outputs = Some(outputs.iter().map(|&a| a.into()).collect());
    }
    if let Some(windows) = &args.fano_windows {
        config.fano_windows = windows.clone();
    }
    if let Some(width) = args.gap_bin_width {
        config.gap_bin_width = width;
    }
    Ok(config)
}

fn kind_of(model: &ModelConfig) -> ModelKind {
    match model {
        ModelConfig::Clock(_) => ModelKind::Clock,
        ModelConfig::Poisson(_) => ModelKind::Poisson,
        ModelConfig::Laser(_) => ModelKind::Laser,
    }
}

fn require(flag: &str, model: &str, value: Option<f64>) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("{model} model requires {flag}")))
}

fn model_from_flags(kind: ModelKind, args: &SimulateArgs) -> Result<ModelConfig> {
    Ok(match kind {
        ModelKind::Clock => {
            let mut params = ClockParams::new(
                require("--delta", "clock", args.delta)?,
                require("--p", "clock", args.p)?,
                require("--w", "clock", args.w)?,
                match args.damping {
                    Some(DampingArg::Exact) => DampingRule::Exact,
                    _ => DampingRule::Linearized,
                },
            )?;
            if let Some(e0) = args.e0 {
                params = params.with_initial_energy(e0)?;
            }
            ModelConfig::Clock(params)
        }
        ModelKind::Poisson => ModelConfig::Poisson(PoissonParams::new(
            require("--p", "poisson", args.p)?,
            require("--quantum", "poisson (event mark)", args.quantum)?,
        )?),
        ModelKind::Laser => ModelConfig::Laser(LaserAnalogParams::new(
            require("--delta", "laser", args.delta)?,
            require("--quantum", "laser", args.quantum)?,
        )?),
    })
}

/// Fold parameter flags into an existing model, rejecting ones that don't
/// apply to its kind.
fn apply_model_flags(model: &mut ModelConfig, args: &SimulateArgs) -> Result<()> {
    let reject = |flag: &str, kind: &str| -> Result<()> {
        Err(Error::Config(format!("{flag} does not apply to the {kind} model")))
    };
    match model {
        ModelConfig::Clock(params) => {
            if let Some(v) = args.delta {
                params.delta = v;
            }
            if let Some(v) = args.p {
                params.p = v;
            }
            if let Some(v) = args.w {
                params.w = v;
            }
            if let Some(d) = args.damping {
                params.damping = match d {
                    DampingArg::Linearized => DampingRule::Linearized,
                    DampingArg::Exact => DampingRule::Exact,
                };
            }
            if let Some(e0) = args.e0 {
                params.e0 = Some(e0);
            }
            if args.quantum.is_some() {
                return reject("--quantum", "clock");
            }
        }
        ModelConfig::Poisson(params) => {
            if let Some(v) = args.p {
                params.p = v;
            }
            if let Some(v) = args.quantum {
                params.mark = v;
            }
            for (flag, given) in
                [("--delta", args.delta.is_some()), ("--w", args.w.is_some()), ("--e0", args.e0.is_some())]
            {
                if given {
                    return reject(flag, "poisson");
                }
            }
            if args.damping.is_some() {
                return reject("--damping", "poisson");
            }
        }
        ModelConfig::Laser(params) => {
            if let Some(v) = args.delta {
                params.delta = v;
            }
            if let Some(v) = args.quantum {
                params.quantum = v;
            }
            for (flag, given) in
                [("--p", args.p.is_some()), ("--w", args.w.is_some()), ("--e0", args.e0.is_some())]
            {
                if given {
                    return reject(flag, "laser");
                }
            }
            if args.damping.is_some() {
                return reject("--damping", "laser");
            }
        }
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let config = build_run_config(args)?;
    let out_base = if args.no_write {
        None
    } else {
        Some(args.out.clone().unwrap_or_else(default_out_dir))
    };
    let result = run_single(&config, out_base.as_deref())?;
    print_run_report(&result);
    Ok(())
}

fn print_run_report(result: &RunResult) {
    let s = &result.summary;
    let config = &result.config;
    println!("run {}", result.manifest.run_id);
    match s.seed {
        Some(seed) => println!(
            "  periods: {} (+{} burn-in), seed {seed} [{}]",
            s.periods, s.burn_in, result.manifest.rng_algorithm
        ),
        None => println!("  periods: {} (+{} burn-in), deterministic", s.periods, s.burn_in),
    }
    println!(
        "  events: {} (rate {:.6}, expected {:.6})",
        s.event_count,
        s.event_rate,
        config.model.analytic_event_rate()
    );
    println!(
        "  dissipated/period: {:.6e}{}",
        s.mean_dissipated_per_period,
        config
            .model
            .input_per_period()
            .map(|d| format!(" (input {d:e})"))
            .unwrap_or_default()
    );
    println!(
        "  ledger: input {:e} = dissipated {:e} + stored {:e} (defect {:.3e})",
        s.ledger.input_total, s.ledger.dissipated_total, s.ledger.stored_delta,
        s.ledger_relative_defect
    );
    if let (Some(measured), Some(analytic)) = (s.mean_energy, s.analytic_mean_energy) {
        println!("  mean energy: {measured:.6} (stationary {analytic:.6})");
    }
    if let Some(gaps) = &s.gaps {
        println!("  gaps: mean {:.4} periods, var {:.4} ({} gaps)", gaps.mean, gaps.var, gaps.count);
    }
    if let Some(r) = s.gap_mark_correlation {
        println!("  gap-mark correlation: {r:.4}");
    }
    for c in &s.counting {
        println!(
            "  fano[{}]: {:.4} (mean count {:.3} over {} windows)",
            c.window, c.fano, c.mean_count, c.windows
        );
    }
    if let (Some(raw), Some(binned)) = (&result.psd, &result.psd_binned) {
        println!(
            "  psd: {} segments of {}, {} bands after log-binning",
            raw.segments,
            result.config.psd.map(|c| c.segment_len).unwrap_or_default(),
            binned.freqs.len()
        );
    }
    match &result.out_dir {
        Some(dir) => {
            let names: Vec<&str> =
                result.manifest.artifacts.iter().map(|a| a.name.as_str()).collect();
            println!("  wrote {} + manifest.json -> {}", names.join(", "), dir.display());
        }
        None => println!("  (in-memory run, nothing written)"),
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<bool> {
    if !(args.tolerance.is_finite() && args.tolerance > 0.0) {
        return Err(Error::Config("--tolerance must be finite and > 0".into()));
    }
    let params = match (args.delta, args.p, args.w) {
        (Some(delta), Some(p), Some(w)) => {
            Some(ClockParams::new(delta, p, w, DampingRule::Linearized)?)
        }
        (None, None, None) => None,
        _ => {
            return Err(Error::Config(
                "recomputing the reference needs all of --delta, --p, --w".into(),
            ))
        }
    };

    let rows = read_psd_file(&args.psd)?;
    let lo = args.min_omega.unwrap_or(0.0);
    let hi = args.max_omega.unwrap_or(f64::INFINITY);
    let rows: Vec<&PsdRow> = rows.iter().filter(|r| r.omega >= lo && r.omega <= hi).collect();
    if rows.is_empty() {
        return Err(Error::Config("no bands in the selected frequency range".into()));
    }

    let mut checked = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let reference = match &params {
            Some(p) => analytic_psd(p, row.omega)?,
            None => row.s_analytic,
        };
        if !(reference.is_finite() && reference > 0.0) {
            return Err(Error::Config(format!(
                "band {} (omega {:e}) has no usable reference value ({reference})",
                i + 1,
                row.omega
            )));
        }
        checked.push((row.omega, row.s_est / reference));
    }

    let worst = checked
        .iter()
        .copied()
        .max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
        .unwrap();
    let offenders: Vec<(f64, f64)> =
        checked.iter().copied().filter(|(_, r)| (r - 1.0).abs() > args.tolerance).collect();

    println!(
        "compared {} bands over omega [{:e}, {:e}] rad/period",
        checked.len(),
        checked.first().unwrap().0,
        checked.last().unwrap().0
    );
    println!(
        "  reference: {}",
        if params.is_some() { "analytic curve from --delta/--p/--w" } else { "s_analytic column" }
    );
    println!(
        "  worst band: omega {:e} (f {:e} cycles/period), est/ref = {:.4}",
        worst.0,
        worst.0 / (2.0 * std::f64::consts::PI),
        worst.1
    );
    if let Ok(fit) = fit_corner(
        &rows.iter().map(|r| r.omega).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.s_est).collect::<Vec<_>>(),
    ) {
        print!("  fitted corner {:e} rad/period, plateau {:e}", fit.corner, fit.plateau);
        match &params {
            Some(p) => println!(
                " (expected corner {:e}, plateau {:e})",
                p.corner_frequency(),
                quietclock::spectral::analytic_plateau(p)
            ),
            None => println!(),
        }
    }
    for (omega, ratio) in offenders.iter().take(8) {
        println!("  out of tolerance: omega {omega:e}, est/ref = {ratio:.4}");
    }
    if offenders.len() > 8 {
        println!("  ... and {} more", offenders.len() - 8);
    }
    let pass = offenders.is_empty();
    println!(
        "{}: {} of {} bands within {:.0}% of reference",
        if pass { "PASS" } else { "FAIL" },
        checked.len() - offenders.len(),
        checked.len(),
        args.tolerance * 100.0
    );
    Ok(pass)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut config: SweepConfig = load_toml(&args.config)?;
    if let Some(workers) = args.workers {
        if workers == 0 {
            return Err(Error::Config("--workers must be >= 1".into()));
        }
        config.workers = workers;
    }
    let out_base = if args.no_write {
        None
    } else {
        Some(args.out.clone().unwrap_or_else(|| {
            default_out_dir().join(format!("sweep-{}", config.base.run_id()))
        }))
    };
    let report = run_sweep(&config, out_base.as_deref())?;
    for cell in &report.cells {
        let model = toml::to_string(&cell.model)
            .unwrap_or_default()
            .lines()
            .filter(|l| !l.starts_with("kind"))
            .collect::<Vec<_>>()
            .join(" ")
            .replace(" = ", "=");
        match (&cell.error, cell.corner) {
            (Some(err), _) => println!("cell {:>3} [{model}] FAILED: {err}", cell.index),
            (None, Some(corner)) => println!(
                "cell {:>3} [{model}] events {} corner {:.3e} plateau {:.3e}",
                cell.index,
                cell.event_count.unwrap_or_default(),
                corner,
                cell.plateau.unwrap_or(f64::NAN)
            ),
            (None, None) => println!(
                "cell {:>3} [{model}] events {} mean dissipated {:.4e}",
                cell.index,
                cell.event_count.unwrap_or_default(),
                cell.mean_dissipated_per_period.unwrap_or(f64::NAN)
            ),
        }
    }
    println!(
        "sweep complete: {} cells, {} failed{}",
        report.cells.len(),
        report.failed_cells(),
        out_base
            .as_ref()
            .map(|d| format!(", aggregate -> {}", d.join("sweep.csv").display()))
            .unwrap_or_default()
    );
    Ok(())
}
