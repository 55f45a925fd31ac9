//! The clock model and its contrast generators.
//!
//! One oscillation period is one tick of discrete time. Each period the
//! escapement injects a fixed energy `delta`; with probability `p` a damping
//! event then removes a fraction of the stored energy and the removed amount
//! is recorded as the event's *mark*. The dissipated-power process is the
//! per-period sequence of marks (zero on quiet periods).
//!
//! Two contrast generators bracket the clock's behaviour: a memoryless
//! Poisson train with constant marks (no energy feedback, flat spectrum) and
//! a deterministic integrate-and-fire accumulator (the "quiet laser" analog,
//! zero counting variance).

use serde::{Deserialize, Serialize};

use crate::accum::KahanSum;
use crate::error::{Error, Result};
use crate::rng::UniformStream;

/// How a damping event maps stored energy to retained energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingRule {
    /// `e' = (1 - w) * e_in`: first-order in `w`, the default.
    #[default]
    Linearized,
    /// `e' = e_in / (1 + w)`: exact balance `mark = w * e'`.
    Exact,
}

/// Parameters of the clock model. `delta` is the escapement quantum per
/// period, `p` the per-period event probability, `w` the relative energy
/// loss per event. All three are dimensionless ratios except `delta`,
/// which carries the energy unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockParams {
    pub delta: f64,
    pub p: f64,
    pub w: f64,
    #[serde(default)]
    pub damping: DampingRule,
    /// Starting energy; defaults to the stationary mean `delta / (p * w)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
}

impl ClockParams {
    pub fn new(delta: f64, p: f64, w: f64, damping: DampingRule) -> Result<Self> {
        let params = Self { delta, p, w, damping, e0: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_initial_energy(mut self, e0: f64) -> Result<Self> {
        self.e0 = Some(e0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive_finite("delta", self.delta)?;
        check_open_unit("p", self.p)?;
        check_open_unit("w", self.w)?;
        if let Some(e0) = self.e0 {
            check_positive_finite("e0", e0)?;
        }
        Ok(())
    }

    /// Starting energy for a run: explicit `e0`, or the stationary mean.
    pub fn initial_energy(&self) -> f64 {
        self.e0.unwrap_or_else(|| mean_energy(self.delta, self.p, self.w))
    }

    /// Stationary mean stored energy for these parameters.
    pub fn mean_energy(&self) -> f64 {
        mean_energy(self.delta, self.p, self.w)
    }

    /// Corner (angular) frequency `p * w` of the dissipation spectrum,
    /// in radians per period.
    pub fn corner_frequency(&self) -> f64 {
        self.p * self.w
    }
}

/// Memoryless reference train: each period fires with probability `p`,
/// always with the same `mark`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    pub p: f64,
    pub mark: f64,
}

impl PoissonParams {
    pub fn new(p: f64, mark: f64) -> Result<Self> {
        let params = Self { p, mark };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("p", self.p)?;
        check_positive_finite("mark", self.mark)
    }
}

/// Deterministic integrate-and-fire analog: `delta` accumulates every
/// period, and each time the accumulator reaches `quantum` an event of that
/// exact size is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserAnalogParams {
    pub delta: f64,
    pub quantum: f64,
}

impl LaserAnalogParams {
    pub fn new(delta: f64, quantum: f64) -> Result<Self> {
        let params = Self { delta, quantum };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive_finite("delta", self.delta)?;
        check_positive_finite("quantum", self.quantum)
    }
}

fn check_positive_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam { name, reason: format!("must be finite and > 0, got {x}") })
    }
}

fn check_open_unit(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam { name, reason: format!("must lie in (0, 1), got {x}") })
    }
}

/// Stored energy and period counter of a clock run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyState {
    pub energy: f64,
    pub period: u64,
}

impl EnergyState {
    pub fn new(energy: f64) -> Self {
        Self { energy, period: 0 }
    }
}

/// One damping event: the period it happened in and the energy it removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationEvent {
    pub period: u64,
    pub mark: f64,
}

/// What one simulated period dissipated: `count` events of size `mark`
/// (`count` is 0 or 1 except for the integrate-and-fire analog, which can
/// fire several times in a period when `quantum < delta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodDissipation {
    pub mark: f64,
    pub count: u32,
}

impl PeriodDissipation {
    pub const QUIET: Self = Self { mark: 0.0, count: 0 };

    /// Total energy dissipated this period — the PSD sample.
    pub fn total(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.mark * self.count as f64
        }
    }
}

/// Advance the clock by one period given a uniform draw `u` in `[0, 1)`.
///
/// The escapement quantum is added first; the damping test applies to the
/// topped-up energy. Returns the new state and the event, if one fired.
///
/// # Panics
///
/// Panics if `u` is outside `[0, 1)` (NaN included) — callers own the draw
/// stream and must not feed garbage into the recurrence.
pub fn step_clock(
    state: EnergyState,
    params: &ClockParams,
    u: f64,
) -> (EnergyState, Option<DissipationEvent>) {
    assert!((0.0..1.0).contains(&u), "uniform draw out of range: {u}");
    let energy_in = state.energy + params.delta;
    let period = state.period;
    if u < params.p {
        let energy_out = match params.damping {
            DampingRule::Linearized => (1.0 - params.w) * energy_in,
            DampingRule::Exact => energy_in / (1.0 + params.w),
        };
        // For w <= 1/2 both rules leave energy_out in [energy_in/2, energy_in],
        // so by Sterbenz's lemma the subtraction below is exact and the energy
        // ledger balances bit-for-bit: energy_in == energy_out + mark.
        let mark = energy_in - energy_out;
        (
            EnergyState { energy: energy_out, period: period + 1 },
            Some(DissipationEvent { period, mark }),
        )
    } else {
        (EnergyState { energy: energy_in, period: period + 1 }, None)
    }
}

/// Stationary mean stored energy `delta / (p * w)`: in steady state the
/// input per period `delta` equals the mean dissipation `p * w * <E>`.
pub fn mean_energy(delta: f64, p: f64, w: f64) -> f64 {
    delta / (p * w)
}

/// Small-amplitude pendulum period `T = 2 pi sqrt(length / g)` in seconds,
/// for mapping per-period frequencies onto wall-clock hertz.
pub fn period_from_length(length: f64, g: f64) -> Result<f64> {
    check_positive_finite("length", length)?;
    check_positive_finite("g", g)?;
    Ok(2.0 * std::f64::consts::PI * (length / g).sqrt())
}

/// A generator that yields one [`PeriodDissipation`] per simulated period.
pub trait PeriodProcess {
    fn next_period(&mut self) -> PeriodDissipation;

    /// Energy currently held back from dissipation (pendulum energy for the
    /// clock, accumulator level for the integrate-and-fire analog, zero for
    /// the memoryless train).
    fn stored_energy(&self) -> f64;
}

/// The clock model driven by a seeded draw stream.
#[derive(Debug, Clone)]
pub struct ClockProcess {
    params: ClockParams,
    state: EnergyState,
    draws: UniformStream,
}

impl ClockProcess {
    pub fn new(params: ClockParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            state: EnergyState::new(params.initial_energy()),
            params,
            draws: UniformStream::new(seed),
        })
    }

    pub fn state(&self) -> EnergyState {
        self.state
    }
}

impl PeriodProcess for ClockProcess {
    fn next_period(&mut self) -> PeriodDissipation {
        let u = self.draws.next_unit();
        let (next, event) = step_clock(self.state, &self.params, u);
        self.state = next;
        match event {
            Some(ev) => PeriodDissipation { mark: ev.mark, count: 1 },
            None => PeriodDissipation::QUIET,
        }
    }

    fn stored_energy(&self) -> f64 {
        self.state.energy
    }
}

/// Memoryless Bernoulli train with constant marks.
#[derive(Debug, Clone)]
pub struct PoissonProcess {
    params: PoissonParams,
    draws: UniformStream,
}

impl PoissonProcess {
    pub fn new(params: PoissonParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, draws: UniformStream::new(seed) })
    }
}

impl PeriodProcess for PoissonProcess {
    fn next_period(&mut self) -> PeriodDissipation {
        if self.draws.next_unit() < self.params.p {
            PeriodDissipation { mark: self.params.mark, count: 1 }
        } else {
            PeriodDissipation::QUIET
        }
    }

    fn stored_energy(&self) -> f64 {
        0.0
    }
}

/// Deterministic integrate-and-fire analog. The accumulator is compensated
/// so the fire pattern matches exact rational arithmetic for any realistic
/// run length.
#[derive(Debug, Clone)]
pub struct LaserProcess {
    params: LaserAnalogParams,
    acc: KahanSum,
}

impl LaserProcess {
    pub fn new(params: LaserAnalogParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, acc: KahanSum::new() })
    }
}

impl PeriodProcess for LaserProcess {
    fn next_period(&mut self) -> PeriodDissipation {
        self.acc.add(self.params.delta);
        let mut count = 0u32;
        while self.acc.total() >= self.params.quantum {
            self.acc.add(-self.params.quantum);
            count += 1;
        }
        PeriodDissipation { mark: self.params.quantum, count }
    }

    fn stored_energy(&self) -> f64 {
        self.acc.total()
    }
}

/// A fully materialized run: the per-period dissipation samples plus the
/// event list. Equality is bitwise, which is what the determinism
/// guarantees are stated in.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationSeries {
    /// One sample per period: total energy dissipated during that period.
    pub samples: Vec<f64>,
    /// Every damping event in period order.
    pub events: Vec<DissipationEvent>,
    /// Stored energy when generation started.
    pub initial_energy: f64,
    /// Stored energy and period count when generation ended.
    pub final_state: EnergyState,
}

impl DissipationSeries {
    pub fn n(&self) -> u64 {
        self.samples.len() as u64
    }
}

/// Default cap on materialized samples (~512 MiB of `f64`). Longer runs go
/// through the streaming runner, which never holds the series in memory.
pub const DEFAULT_SAMPLE_BUDGET: u64 = 1 << 26;

/// Drive any process for `n` periods and materialize the result.
pub fn collect_series<P: PeriodProcess + ?Sized>(
    process: &mut P,
    n: u64,
    budget: u64,
) -> Result<DissipationSeries> {
    if n == 0 {
        return Err(Error::InvalidParam { name: "n", reason: "must be >= 1".into() });
    }
    if n > budget {
        return Err(Error::MemoryBudget { requested: n, budget });
    }
    let initial_energy = process.stored_energy();
    let mut samples = Vec::with_capacity(n as usize);
    let mut events = Vec::new();
    for period in 0..n {
        let d = process.next_period();
        samples.push(d.total());
        for _ in 0..d.count {
            events.push(DissipationEvent { period, mark: d.mark });
        }
    }
    Ok(DissipationSeries {
        samples,
        events,
        initial_energy,
        final_state: EnergyState { energy: process.stored_energy(), period: n },
    })
}

/// Clock run of `n` periods under the default in-memory budget.
pub fn gen_clock_series(params: &ClockParams, seed: u64, n: u64) -> Result<DissipationSeries> {
    let mut process = ClockProcess::new(*params, seed)?;
    collect_series(&mut process, n, DEFAULT_SAMPLE_BUDGET)
}

/// Bernoulli reference train of `n` periods.
pub fn gen_poisson_series(params: &PoissonParams, seed: u64, n: u64) -> Result<DissipationSeries> {
    let mut process = PoissonProcess::new(*params, seed)?;
    collect_series(&mut process, n, DEFAULT_SAMPLE_BUDGET)
}

/// Integrate-and-fire run of `n` periods; fully deterministic, no seed.
pub fn gen_laser_series(params: &LaserAnalogParams, n: u64) -> Result<DissipationSeries> {
    let mut process = LaserProcess::new(*params)?;
    collect_series(&mut process, n, DEFAULT_SAMPLE_BUDGET)
}

/// Canonical parameter set used in the documentation and the acceptance
/// runs: `delta = 1e-5` J, `p = 0.01`, `w = 1e-3`, so `<E> = 1` J, the mean
/// inter-event gap is 100 periods and the spectral corner sits at `1e-5`
/// rad/period.
pub fn reference_params() -> ClockParams {
    ClockParams::new(1e-5, 0.01, 1e-3, DampingRule::Linearized)
        .expect("reference parameters are valid")
}
