//! Config-driven runs: one pass over the period stream feeds every
//! accumulator at once (PSD, ledger, counting windows, gap/mark statistics,
//! event log), so run length is bounded by patience rather than memory.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::accum::KahanSum;
use crate::error::{Error, Result};
use crate::model::{
    ClockParams, ClockProcess, LaserAnalogParams, LaserProcess, PeriodProcess, PoissonParams,
    PoissonProcess,
};
use crate::output::{
    write_json_file, write_psd_file, write_summary_file, EventsFileWriter, PsdRow, Summary,
};
use crate::rng::{derive_cell_seed, RNG_ALGORITHM};
use crate::spectral::{
    analytic_psd, fit_corner, log_bin, MeanPolicy, PsdAccumulator, PsdEstimate, Window,
};
use crate::stats::{
    CountingStats, GapMarkCorrelation, GapTracker, MarkTracker, RunLedger, WindowCounter,
};

/// Which generator a run drives, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Clock(ClockParams),
    Poisson(PoissonParams),
    Laser(LaserAnalogParams),
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Clock(_) => "clock",
            ModelConfig::Poisson(_) => "poisson",
            ModelConfig::Laser(_) => "laser",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelConfig::Clock(p) => p.validate(),
            ModelConfig::Poisson(p) => p.validate(),
            ModelConfig::Laser(p) => p.validate(),
        }
    }

    /// Whether the generator consumes random draws at all.
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, ModelConfig::Laser(_))
    }

    /// Escapement input per period; the memoryless train has no storage, so
    /// its "input" is whatever it dissipates.
    pub fn input_per_period(&self) -> Option<f64> {
        match self {
            ModelConfig::Clock(p) => Some(p.delta),
            ModelConfig::Laser(p) => Some(p.delta),
            ModelConfig::Poisson(_) => None,
        }
    }

    /// Expected events per period.
    pub fn analytic_event_rate(&self) -> f64 {
        match self {
            ModelConfig::Clock(p) => p.p,
            ModelConfig::Poisson(p) => p.p,
            ModelConfig::Laser(p) => p.delta / p.quantum,
        }
    }

    /// Reference curve written into the `s_analytic` column: the clock's
    /// Lorentzian; for the contrast trains, the white level of a Bernoulli
    /// train with the same rate and mark.
    pub fn analytic_curve(&self, omega: f64) -> Result<f64> {
        match self {
            ModelConfig::Clock(p) => analytic_psd(p, omega),
            ModelConfig::Poisson(p) => Ok(p.p * (1.0 - p.p) * p.mark * p.mark),
            ModelConfig::Laser(p) => {
                let rate = (p.delta / p.quantum).min(1.0);
                Ok(rate * (1.0 - rate) * p.quantum * p.quantum)
            }
        }
    }

    pub fn analytic_mean_energy(&self) -> Option<f64> {
        match self {
            ModelConfig::Clock(p) => Some(p.mean_energy()),
            _ => None,
        }
    }

    pub fn build_process(&self, seed: u64) -> Result<Box<dyn PeriodProcess>> {
        Ok(match self {
            ModelConfig::Clock(p) => Box::new(ClockProcess::new(*p, seed)?),
            ModelConfig::Poisson(p) => Box::new(PoissonProcess::new(*p, seed)?),
            ModelConfig::Laser(p) => Box::new(LaserProcess::new(*p)?),
        })
    }
}

/// Spectral-analysis settings of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdConfig {
    /// Segment length `M` (power of two, >= 8). The estimate resolves
    /// angular frequencies down to `2 pi / M`.
    pub segment_len: usize,
    #[serde(default)]
    pub window: Window,
    /// Log-binning density of the written table.
    #[serde(default = "default_bins_per_decade")]
    pub bins_per_decade: u32,
}

fn default_bins_per_decade() -> u32 {
    10
}

/// Which artifacts a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Artifact {
    Psd,
    Summary,
    Events,
}

/// Full description of a single run. Deserializable from TOML; see the
/// crate README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    /// Measured periods (after burn-in).
    pub periods: u64,
    #[serde(default)]
    pub seed: u64,
    /// Periods simulated and discarded before measurement starts.
    #[serde(default)]
    pub burn_in: u64,
    /// `None` means "derive a default when the PSD artifact is wanted".
    #[serde(default)]
    pub psd: Option<PsdConfig>,
    /// `None` means the default artifact set (psd when it fits + summary).
    #[serde(default)]
    pub outputs: Option<Vec<Artifact>>,
    /// Counting-window lengths; windows that don't fit the run are skipped.
    #[serde(default = "default_fano_windows")]
    pub fano_windows: Vec<u64>,
    /// Bin width of the inter-event gap histogram.
    #[serde(default = "default_gap_bin_width")]
    pub gap_bin_width: u64,
}

fn default_fano_windows() -> Vec<u64> {
    vec![100, 1_000, 10_000]
}

fn default_gap_bin_width() -> u64 {
    10
}

impl RunConfig {
    pub fn new(model: ModelConfig, periods: u64, seed: u64) -> Self {
        Self {
            model,
            periods,
            seed,
            burn_in: 0,
            psd: None,
            outputs: None,
            fano_windows: default_fano_windows(),
            gap_bin_width: default_gap_bin_width(),
        }
    }

    /// Largest power of two `<= 2^20` that fits at least eight times into
    /// `n` — a sensible default segment length when none is configured.
    fn default_segment_len(periods: u64) -> Option<usize> {
        let cap = periods / 8;
        if cap < 8 {
            return None;
        }
        let m = if cap >= (1 << 20) { 1 << 20 } else { 1u64 << (63 - cap.leading_zeros()) };
        Some(m as usize)
    }

    /// Validate and fill in derived defaults (artifact list, PSD segment
    /// length). Errors here are usage errors.
    pub fn normalize(&mut self) -> Result<()> {
        self.model.validate()?;
        if self.periods == 0 {
            return Err(Error::InvalidParam { name: "periods", reason: "must be >= 1".into() });
        }
        if self.gap_bin_width == 0 {
            return Err(Error::InvalidParam { name: "gap_bin_width", reason: "must be >= 1".into() });
        }
        let explicit_outputs = self.outputs.is_some();
        let outputs = self
            .outputs
            .get_or_insert_with(|| vec![Artifact::Psd, Artifact::Summary]);
        outputs.dedup();
        let wants_psd = outputs.contains(&Artifact::Psd);
        if wants_psd && self.psd.is_none() {
            match Self::default_segment_len(self.periods) {
                Some(segment_len) => {
                    self.psd = Some(PsdConfig {
                        segment_len,
                        window: Window::default(),
                        bins_per_decade: default_bins_per_decade(),
                    })
                }
                // Too short for any spectrum: drop the default artifact,
                // reject an explicit request.
                None if !explicit_outputs => {
                    self.outputs.as_mut().unwrap().retain(|a| *a != Artifact::Psd)
                }
                None => {
                    return Err(Error::Config(format!(
                        "psd requested but {} periods cannot fill a segment (need >= 64)",
                        self.periods
                    )))
                }
            }
        }
        if let Some(psd) = &self.psd {
            if psd.segment_len < 8 || !psd.segment_len.is_power_of_two() {
                return Err(Error::BadSegmentLen(psd.segment_len));
            }
            if psd.bins_per_decade == 0 {
                return Err(Error::InvalidParam {
                    name: "bins_per_decade",
                    reason: "must be >= 1".into(),
                });
            }
            if self.wants(Artifact::Psd) && (psd.segment_len as u64) > self.periods {
                return Err(Error::StreamTooShort {
                    len: self.periods,
                    segment_len: psd.segment_len,
                });
            }
        }
        Ok(())
    }

    fn wants(&self, artifact: Artifact) -> bool {
        self.outputs.as_ref().is_some_and(|o| o.contains(&artifact))
    }

    /// Directory name a run with this config writes into.
    pub fn run_id(&self) -> String {
        if self.model.is_stochastic() {
            format!("{}-n{}-s{}", self.model.kind(), self.periods, self.seed)
        } else {
            format!("{}-n{}", self.model.kind(), self.periods)
        }
    }
}

/// Checksum of one written artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactDigest {
    pub name: String,
    pub sha256: String,
}

/// Reproducibility record written beside the artifacts. Everything needed
/// to regenerate the run (and verify the regeneration) is in here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub code_version: String,
    /// Draw-stream algorithm identifier, or "none" for deterministic runs.
    pub rng_algorithm: String,
    pub seed: Option<u64>,
    /// The effective (normalized) configuration.
    pub config: RunConfig,
    pub event_count: u64,
    pub wall_time_secs: f64,
    pub artifacts: Vec<ArtifactDigest>,
}

/// Outcome of a single run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Normalized configuration the run actually used.
    pub config: RunConfig,
    /// Full-resolution spectrum (when PSD analysis ran).
    pub psd: Option<PsdEstimate>,
    /// Log-binned spectrum (what `psd.csv` holds).
    pub psd_binned: Option<PsdEstimate>,
    pub summary: Summary,
    pub manifest: RunManifest,
    /// Where artifacts were written, if anywhere.
    pub out_dir: Option<PathBuf>,
}

/// Execute one run. With `out_base` set, artifacts land in
/// `out_base/<run_id>/`; without it the run is in-memory only.
pub fn run_single(config: &RunConfig, out_base: Option<&Path>) -> Result<RunResult> {
    let started = Instant::now();
    let mut config = config.clone();
    config.normalize()?;
    let n = config.periods;
    let is_clock = matches!(config.model, ModelConfig::Clock(_));

    let out_dir = match out_base {
        Some(base) => {
            let dir = base.join(config.run_id());
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            Some(dir)
        }
        None => None,
    };

    let mut process = config.model.build_process(config.seed)?;
    for _ in 0..config.burn_in {
        process.next_period();
    }
    let initial_energy = process.stored_energy();

    let mut psd_acc = match (&config.psd, config.wants(Artifact::Psd)) {
        (Some(psd), true) => {
            Some(PsdAccumulator::new(psd.segment_len, psd.window, MeanPolicy::Streamed)?)
        }
        _ => None,
    };
    let mut counters: Vec<WindowCounter> = Vec::new();
    for &window in &config.fano_windows {
        if window >= 1 && n / window >= 2 {
            counters.push(WindowCounter::new(window)?);
        }
    }
    let mut gaps = GapTracker::new(config.gap_bin_width)?;
    let mut marks = MarkTracker::new();
    let mut corr = GapMarkCorrelation::new();
    let mut dissipated = KahanSum::new();
    let mut energy_sum = KahanSum::new();
    let mut event_count = 0u64;
    let mut events_file = match (&out_dir, config.wants(Artifact::Events)) {
        (Some(dir), true) => Some(EventsFileWriter::create(&dir.join("events.csv"))?),
        _ => None,
    };

    for period in 0..n {
        let d = process.next_period();
        if let Some(acc) = &mut psd_acc {
            acc.push(d.total());
        }
        for _ in 0..d.count {
            event_count += 1;
            dissipated.add(d.mark);
            for counter in &mut counters {
                counter.push(period);
            }
            gaps.push(period);
            marks.push(d.mark);
            corr.push(period, d.mark);
            if let Some(w) = &mut events_file {
                w.push(period, d.mark)?;
            }
        }
        if is_clock {
            energy_sum.add(process.stored_energy());
        }
    }

    let dissipated_total = dissipated.total();
    let ledger = RunLedger {
        // The memoryless train stores nothing; its input is its output.
        input_total: match config.model.input_per_period() {
            Some(delta) => n as f64 * delta,
            None => dissipated_total,
        },
        dissipated_total,
        stored_delta: process.stored_energy() - initial_energy,
    };

    let psd = psd_acc.map(|acc| acc.finalize()).transpose()?;
    let psd_binned = match (&psd, &config.psd) {
        (Some(est), Some(cfg)) => Some(log_bin(est, cfg.bins_per_decade)?),
        _ => None,
    };

    let counting: Vec<CountingStats> =
        counters.into_iter().filter_map(|c| c.finish(n).ok()).collect();
    let summary = Summary {
        model: config.model.kind().into(),
        periods: n,
        burn_in: config.burn_in,
        seed: config.model.is_stochastic().then_some(config.seed),
        event_count,
        event_rate: event_count as f64 / n as f64,
        mean_dissipated_per_period: dissipated_total / n as f64,
        ledger,
        ledger_relative_defect: ledger.relative_defect(),
        mean_energy: is_clock.then(|| energy_sum.total() / n as f64),
        analytic_mean_energy: config.model.analytic_mean_energy(),
        gaps: gaps.finish().ok(),
        marks: marks.finish().ok(),
        gap_mark_correlation: corr.finish().ok(),
        counting,
    };

    // Write artifacts and collect their digests.
    let mut artifacts = Vec::new();
    if let Some(w) = events_file {
        let (_, sha256) = w.finish()?;
        artifacts.push(ArtifactDigest { name: "events.csv".into(), sha256 });
    }
    if let Some(dir) = &out_dir {
        if let Some(est) = &psd_binned {
            let rows: Vec<PsdRow> = est
                .freqs
                .iter()
                .zip(&est.values)
                .map(|(&omega, &s_est)| {
                    Ok(PsdRow {
                        omega,
                        s_est,
                        s_analytic: config.model.analytic_curve(omega)?,
                        n_segments: est.segments,
                    })
                })
                .collect::<Result<_>>()?;
            let sha256 = write_psd_file(&dir.join("psd.csv"), &rows)?;
            artifacts.push(ArtifactDigest { name: "psd.csv".into(), sha256 });
        }
        if config.wants(Artifact::Summary) {
            let sha256 = write_summary_file(&dir.join("summary.json"), &summary)?;
            artifacts.push(ArtifactDigest { name: "summary.json".into(), sha256 });
        }
    }

    let manifest = RunManifest {
        run_id: config.run_id(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        rng_algorithm: if config.model.is_stochastic() { RNG_ALGORITHM.into() } else { "none".into() },
        seed: config.model.is_stochastic().then_some(config.seed),
        config: config.clone(),
        event_count,
        wall_time_secs: started.elapsed().as_secs_f64(),
        artifacts,
    };
    if let Some(dir) = &out_dir {
        write_json_file(&dir.join("manifest.json"), &manifest)?;
    }

    Ok(RunResult { config, psd, psd_binned, summary, manifest, out_dir })
}

/// Which model parameter a sweep axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Delta,
    P,
    W,
    Mark,
    Quantum,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::P => "p",
            SweepParam::W => "w",
            SweepParam::Mark => "mark",
            SweepParam::Quantum => "quantum",
        }
    }

    /// Apply the override; errors when the parameter does not exist on the
    /// cell's model (an invalid-cell condition, not a sweep-fatal one).
    fn apply(self, model: &mut ModelConfig, value: f64) -> Result<()> {
        let kind = model.kind();
        match (self, model) {
            (SweepParam::Delta, ModelConfig::Clock(p)) => p.delta = value,
            (SweepParam::Delta, ModelConfig::Laser(p)) => p.delta = value,
            (SweepParam::P, ModelConfig::Clock(p)) => p.p = value,
            (SweepParam::P, ModelConfig::Poisson(p)) => p.p = value,
            (SweepParam::W, ModelConfig::Clock(p)) => p.w = value,
            (SweepParam::Mark, ModelConfig::Poisson(p)) => p.mark = value,
            (SweepParam::Quantum, ModelConfig::Laser(p)) => p.quantum = value,
            _ => {
                return Err(Error::Config(format!(
                    "parameter `{}` does not apply to the {kind} model",
                    self.name()
                )))
            }
        }
        Ok(())
    }
}

/// One sweep axis: a parameter and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// A full sweep: a base run plus axes forming a cartesian grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub axes: Vec<SweepAxis>,
    /// Worker threads; results are identical for any worker count.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

/// Per-cell outcome row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub index: usize,
    pub seed: u64,
    /// The cell's full model parameters after overrides.
    pub model: ModelConfig,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_dissipated_per_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_energy: Option<f64>,
    /// Fitted spectral plateau, when a PSD was estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau: Option<f64>,
    /// Fitted corner frequency, when a PSD was estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<f64>,
}

/// Aggregate result of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<CellSummary>,
}

impl SweepReport {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.ok).count()
    }
}

/// Expand the grid: cartesian product with the last axis varying fastest.
fn cell_values(axes: &[SweepAxis], index: usize) -> Vec<(SweepParam, f64)> {
    let mut values = Vec::with_capacity(axes.len());
    let mut rem = index;
    for axis in axes.iter().rev() {
        values.push((axis.param, axis.values[rem % axis.values.len()]));
        rem /= axis.values.len();
    }
    values.reverse();
    values
}

/// Run every cell of the grid; cell failures are recorded, not propagated.
/// With `out_base` set, cell `i` writes under `out_base/cell-<i>/` and the
/// aggregate lands in `out_base/sweep.csv` + `sweep.json`.
pub fn run_sweep(config: &SweepConfig, out_base: Option<&Path>) -> Result<SweepReport> {
    if config.axes.is_empty() || config.axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::Config("sweep grid is empty: every axis needs values".into()));
    }
    let mut seen = Vec::new();
    for axis in &config.axes {
        if seen.contains(&axis.param) {
            return Err(Error::Config(format!("duplicate sweep axis `{}`", axis.param.name())));
        }
        seen.push(axis.param);
    }
    let cells: usize = config.axes.iter().map(|a| a.values.len()).product();
    if let Some(base) = out_base {
        std::fs::create_dir_all(base).map_err(|e| Error::io(base, e))?;
    }

    let results: Mutex<Vec<Option<CellSummary>>> = Mutex::new(vec![None; cells]);
    let next = AtomicUsize::new(0);
    let workers = config.workers.clamp(1, cells);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= cells {
                    break;
                }
                let summary = run_cell(config, index, out_base);
                results.lock().unwrap()[index] = Some(summary);
            });
        }
    });
    let report = SweepReport {
        cells: results.into_inner().unwrap().into_iter().map(|c| c.expect("cell ran")).collect(),
    };

    if let Some(base) = out_base {
        write_sweep_table(&base.join("sweep.csv"), &report)?;
        write_json_file(&base.join("sweep.json"), &report)?;
    }
    Ok(report)
}

fn run_cell(config: &SweepConfig, index: usize, out_base: Option<&Path>) -> CellSummary {
    let mut cell_config = config.base.clone();
    cell_config.seed = derive_cell_seed(config.base.seed, index as u64);
    let mut failure: Option<Error> = None;
    for (param, value) in cell_values(&config.axes, index) {
        if let Err(e) = param.apply(&mut cell_config.model, value) {
            failure = Some(e);
            break;
        }
    }
    let outcome = match failure {
        Some(e) => Err(e),
        None => {
            let cell_dir = out_base.map(|b| b.join(format!("cell-{index}")));
            run_single(&cell_config, cell_dir.as_deref())
        }
    };
    match outcome {
        Ok(result) => {
            let fit = result
                .psd_binned
                .as_ref()
                .and_then(|est| fit_corner(&est.freqs, &est.values).ok());
            CellSummary {
                index,
                seed: cell_config.seed,
                model: cell_config.model,
                ok: true,
                error: None,
                event_count: Some(result.summary.event_count),
                mean_dissipated_per_period: Some(result.summary.mean_dissipated_per_period),
                mean_energy: result.summary.mean_energy,
                plateau: fit.map(|f| f.plateau),
                corner: fit.map(|f| f.corner),
            }
        }
        Err(e) => CellSummary {
            index,
            seed: cell_config.seed,
            model: cell_config.model,
            ok: false,
            error: Some(e.to_string()),
            event_count: None,
            mean_dissipated_per_period: None,
            mean_energy: None,
            plateau: None,
            corner: None,
        },
    }
}

fn write_sweep_table(path: &Path, report: &SweepReport) -> Result<String> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = crate::output::DigestWriter::new(std::io::BufWriter::new(file));
    let body = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(
            out,
            "cell,seed,ok,error,delta,p,w,mark,quantum,event_count,mean_dissipated,mean_energy,plateau,corner"
        )?;
        for c in &report.cells {
            let (delta, p, w, mark, quantum) = match c.model {
                ModelConfig::Clock(m) => {
                    (fmt_opt(Some(m.delta)), fmt_opt(Some(m.p)), fmt_opt(Some(m.w)), String::new(), String::new())
                }
                ModelConfig::Poisson(m) => {
                    (String::new(), fmt_opt(Some(m.p)), String::new(), fmt_opt(Some(m.mark)), String::new())
                }
                ModelConfig::Laser(m) => {
                    (fmt_opt(Some(m.delta)), String::new(), String::new(), String::new(), fmt_opt(Some(m.quantum)))
                }
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.index,
                c.seed,
                c.ok,
                // Commas inside error text would break the row shape.
                c.error.as_deref().unwrap_or("").replace(',', ";"),
                delta,
                p,
                w,
                mark,
                quantum,
                c.event_count.map(|v| v.to_string()).unwrap_or_default(),
                fmt_opt(c.mean_dissipated_per_period),
                fmt_opt(c.mean_energy),
                fmt_opt(c.plateau),
                fmt_opt(c.corner),
            )?;
        }
        out.flush()
    };
    body(&mut out).map_err(|e| Error::io(path, e))?;
    Ok(out.finish())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
