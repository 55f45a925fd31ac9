//! Energy bookkeeping and event statistics.
//!
//! Everything here exists in two shapes: a streaming builder the runner
//! feeds event-by-event (constant memory over 1e8-period runs), and a
//! slice-based function over a materialized [`DissipationSeries`]. Tests
//! hold the two shapes to the same answers.

use serde::{Deserialize, Serialize};

use crate::accum::{KahanSum, Moments};
use crate::error::{Error, Result};
use crate::model::{DissipationEvent, DissipationSeries};

/// Closing balance of a run: energy in, energy dissipated, and the change
/// in stored energy. Conservation demands the three net to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    /// Total energy fed in by the escapement: `n * delta`.
    pub input_total: f64,
    /// Sum of all event marks.
    pub dissipated_total: f64,
    /// Final minus initial stored energy.
    pub stored_delta: f64,
}

impl RunLedger {
    /// `|input - dissipated - stored|` relative to the largest of the three
    /// magnitudes. A run of nothing has zero defect.
    pub fn relative_defect(&self) -> f64 {
        let defect = self.input_total - self.dissipated_total - self.stored_delta;
        let scale = self
            .input_total
            .abs()
            .max(self.dissipated_total.abs())
            .max(self.stored_delta.abs())
            .max(f64::MIN_POSITIVE);
        defect.abs() / scale
    }
}

/// Balance a materialized series against a constant per-period input.
pub fn ledger(series: &DissipationSeries, input_per_period: f64) -> RunLedger {
    let dissipated: KahanSum = series.events.iter().map(|e| e.mark).collect();
    RunLedger {
        input_total: series.n() as f64 * input_per_period,
        dissipated_total: dissipated.total(),
        stored_delta: series.final_state.energy - series.initial_energy,
    }
}

/// Event-count statistics over disjoint windows of fixed length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingStats {
    /// Window length in periods.
    pub window: u64,
    /// Number of complete windows the run was carved into.
    pub windows: u64,
    pub mean_count: f64,
    /// Unbiased variance of the per-window counts.
    pub var_count: f64,
    /// `var / mean`; 0 by convention when no events arrived at all.
    pub fano: f64,
}

/// Streaming tally of events into disjoint windows. Feed event periods in
/// nondecreasing order, then close with the run length.
#[derive(Debug, Clone)]
pub struct WindowCounter {
    window: u64,
    next_boundary: u64,
    in_window: u64,
    moments: Moments,
}

impl WindowCounter {
    pub fn new(window: u64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParam { name: "window", reason: "must be >= 1".into() });
        }
        Ok(Self { window, next_boundary: window, in_window: 0, moments: Moments::new() })
    }

    pub fn push(&mut self, period: u64) {
        debug_assert!(period + 1 >= self.next_boundary.saturating_sub(self.window));
        while period >= self.next_boundary {
            self.moments.push(self.in_window as f64);
            self.in_window = 0;
            self.next_boundary += self.window;
        }
        self.in_window += 1;
    }

    /// Close out at run length `n`: complete windows beyond the last event
    /// count as zeros, the trailing partial window is dropped.
    pub fn finish(mut self, n: u64) -> Result<CountingStats> {
        while self.next_boundary <= n {
            self.moments.push(self.in_window as f64);
            self.in_window = 0;
            self.next_boundary += self.window;
        }
        let windows = self.moments.count();
        if windows < 2 {
            return Err(Error::TooFewWindows { window: self.window, n, got: windows, min: 2 });
        }
        let mean_count = self.moments.mean();
        let var_count = self.moments.variance();
        let fano = if mean_count > 0.0 { var_count / mean_count } else { 0.0 };
        Ok(CountingStats { window: self.window, windows, mean_count, var_count, fano })
    }
}

/// Fano factor of the event train over disjoint windows of `window`
/// periods, for a run of `n` periods total.
pub fn fano_factor(events: &[DissipationEvent], window: u64, n: u64) -> Result<CountingStats> {
    let mut counter = WindowCounter::new(window)?;
    for e in events {
        debug_assert!(e.period < n, "event beyond run length");
        counter.push(e.period);
    }
    counter.finish(n)
}

/// Fixed-width histogram of nonnegative integers (inter-event gaps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: u64,
    /// `counts[i]` covers values in `[i * bin_width, (i+1) * bin_width)`.
    pub counts: Vec<u64>,
}

impl Histogram {
    fn new(bin_width: u64) -> Self {
        Self { bin_width, counts: Vec::new() }
    }

    fn record(&mut self, value: u64) {
        let idx = (value / self.bin_width) as usize;
        if idx >= self.counts.len() {
            self.counts.resize(idx + 1, 0);
        }
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Inter-event gap statistics. Gaps are differences of consecutive event
/// periods; simultaneous events (multi-fire periods) contribute zero gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    /// Number of gaps (one less than the number of events).
    pub count: u64,
    pub mean: f64,
    /// Unbiased variance of the gaps.
    pub var: f64,
    pub histogram: Histogram,
}

/// Streaming gap tracker; feed event periods in order.
#[derive(Debug, Clone)]
pub struct GapTracker {
    last: Option<u64>,
    moments: Moments,
    histogram: Histogram,
}

impl GapTracker {
    pub fn new(bin_width: u64) -> Result<Self> {
        if bin_width == 0 {
            return Err(Error::InvalidParam { name: "bin_width", reason: "must be >= 1".into() });
        }
        Ok(Self { last: None, moments: Moments::new(), histogram: Histogram::new(bin_width) })
    }

    pub fn push(&mut self, period: u64) {
        if let Some(last) = self.last {
            debug_assert!(period >= last);
            let gap = period - last;
            self.moments.push(gap as f64);
            self.histogram.record(gap);
        }
        self.last = Some(period);
    }

    pub fn finish(self) -> Result<GapStats> {
        if self.moments.count() == 0 {
            return Err(Error::TooFewEvents {
                need: 2,
                found: if self.last.is_some() { 1 } else { 0 },
            });
        }
        Ok(GapStats {
            count: self.moments.count(),
            mean: self.moments.mean(),
            var: self.moments.variance(),
            histogram: self.histogram,
        })
    }
}

/// Gap statistics of a materialized event list.
pub fn interevent_stats(events: &[DissipationEvent], bin_width: u64) -> Result<GapStats> {
    let mut tracker = GapTracker::new(bin_width)?;
    for e in events {
        tracker.push(e.period);
    }
    tracker.finish()
}

/// Moments and range of the event marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkStats {
    pub count: u64,
    pub mean: f64,
    /// Unbiased variance of the marks.
    pub var: f64,
    pub min: f64,
    pub max: f64,
}

/// Streaming mark tracker.
#[derive(Debug, Clone, Default)]
pub struct MarkTracker {
    moments: Moments,
    min: f64,
    max: f64,
}

impl MarkTracker {
    pub fn new() -> Self {
        Self { moments: Moments::new(), min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    pub fn push(&mut self, mark: f64) {
        self.moments.push(mark);
        self.min = self.min.min(mark);
        self.max = self.max.max(mark);
    }

    pub fn finish(self) -> Result<MarkStats> {
        if self.moments.count() == 0 {
            return Err(Error::TooFewEvents { need: 1, found: 0 });
        }
        Ok(MarkStats {
            count: self.moments.count(),
            mean: self.moments.mean(),
            var: self.moments.variance(),
            min: self.min,
            max: self.max,
        })
    }
}

/// Mark statistics of a materialized event list.
pub fn mark_stats(events: &[DissipationEvent]) -> Result<MarkStats> {
    let mut tracker = MarkTracker::new();
    for e in events {
        tracker.push(e.mark);
    }
    tracker.finish()
}

/// Streaming Pearson correlation between each event's preceding gap and its
/// mark, via one-pass co-moment updates.
#[derive(Debug, Clone, Default)]
pub struct GapMarkCorrelation {
    last_period: Option<u64>,
    count: u64,
    mean_gap: f64,
    mean_mark: f64,
    c_gap: f64,
    c_mark: f64,
    c_cross: f64,
}

impl GapMarkCorrelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, period: u64, mark: f64) {
        if let Some(last) = self.last_period {
            debug_assert!(period >= last);
            let gap = (period - last) as f64;
            self.count += 1;
            let n = self.count as f64;
            let d_gap = gap - self.mean_gap;
            let d_mark = mark - self.mean_mark;
            self.mean_gap += d_gap / n;
            self.mean_mark += d_mark / n;
            self.c_gap += d_gap * (gap - self.mean_gap);
            self.c_mark += d_mark * (mark - self.mean_mark);
            self.c_cross += d_gap * (mark - self.mean_mark);
        }
        self.last_period = Some(period);
    }

    /// Pearson r; 0 by convention when either coordinate is constant
    /// (deterministic trains have no correlation structure to report).
    pub fn finish(self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::TooFewEvents {
                need: 3,
                found: self.count as usize + if self.last_period.is_some() { 1 } else { 0 },
            });
        }
        let denom = self.c_gap * self.c_mark;
        if denom <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.c_cross / denom.sqrt())
    }
}

/// Correlation between each event's waiting time and its mark. The clock
/// couples the two through the stored energy: long waits pile up escapement
/// input, so the next event removes more.
pub fn gap_mark_correlation(events: &[DissipationEvent]) -> Result<f64> {
    let mut corr = GapMarkCorrelation::new();
    for e in events {
        corr.push(e.period, e.mark);
    }
    corr.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        gen_clock_series, gen_laser_series, gen_poisson_series, reference_params, EnergyState,
        LaserAnalogParams, PoissonParams,
    };
    use approx::assert_relative_eq;

    fn events_at(periods: &[u64]) -> Vec<DissipationEvent> {
        periods.iter().map(|&period| DissipationEvent { period, mark: 1.0 }).collect()
    }

    #[test]
    fn ledger_balances_a_hand_built_series() {
        let series = DissipationSeries {
            samples: vec![0.0, 2.0, 0.0, 3.0],
            events: vec![
                DissipationEvent { period: 1, mark: 2.0 },
                DissipationEvent { period: 3, mark: 3.0 },
            ],
            initial_energy: 10.0,
            final_state: EnergyState { energy: 9.0, period: 4 },
        };
        let ledger = ledger(&series, 1.0);
        assert_eq!(ledger.input_total, 4.0);
        assert_eq!(ledger.dissipated_total, 5.0);
        assert_eq!(ledger.stored_delta, -1.0);
        assert_eq!(ledger.relative_defect(), 0.0);
    }

    #[test]
    fn ledger_defect_is_zero_for_an_empty_balance() {
        let ledger =
            RunLedger { input_total: 0.0, dissipated_total: 0.0, stored_delta: 0.0 };
        assert_eq!(ledger.relative_defect(), 0.0);
    }

    #[test]
    fn ledger_stays_within_tolerance_on_real_runs() {
        let params = reference_params();
        for seed in [1, 7, 42] {
            let series = gen_clock_series(&params, seed, 100_000).unwrap();
            let defect = ledger(&series, params.delta).relative_defect();
            assert!(defect <= 1e-9, "seed {seed}: defect {defect:e}");
        }
        // Single quiet period: input parked in storage, nothing dissipated.
        let series = gen_clock_series(&params, 3, 1).unwrap();
        let l = ledger(&series, params.delta);
        assert!(l.relative_defect() <= 1e-9, "defect {:e}", l.relative_defect());
    }

    #[test]
    fn fano_of_a_single_event_run_is_one() {
        // Counts over 10 windows: one 1 and nine 0s. Mean 0.1, unbiased
        // variance 0.1, Fano exactly 1 — same as a Poisson train.
        let stats = fano_factor(&events_at(&[5]), 10, 100).unwrap();
        assert_eq!(stats.windows, 10);
        assert_relative_eq!(stats.mean_count, 0.1, max_relative = 1e-12);
        assert_relative_eq!(stats.var_count, 0.1, max_relative = 1e-12);
        assert_relative_eq!(stats.fano, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn fano_handles_empty_and_partial_windows() {
        // No events: zero mean, zero variance, Fano 0 by convention.
        let stats = fano_factor(&[], 10, 100).unwrap();
        assert_eq!(stats.fano, 0.0);
        assert_eq!(stats.windows, 10);

        // Events in the trailing partial window are dropped with it:
        // n = 100, window 30 -> 3 windows covering periods 0..90.
        let stats = fano_factor(&events_at(&[10, 95, 97]), 30, 100).unwrap();
        assert_eq!(stats.windows, 3);
        assert_relative_eq!(stats.mean_count, 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn fano_rejects_degenerate_windowing() {
        assert!(matches!(
            fano_factor(&[], 0, 100),
            Err(Error::InvalidParam { name: "window", .. })
        ));
        assert!(matches!(
            fano_factor(&[], 200, 100),
            Err(Error::TooFewWindows { got: 0, .. })
        ));
        assert!(matches!(
            fano_factor(&[], 100, 199),
            Err(Error::TooFewWindows { got: 1, .. })
        ));
    }

    #[test]
    fn fano_of_poisson_train_approaches_one_minus_p() {
        // Bernoulli counting: Fano = 1 - p exactly in expectation.
        let params = PoissonParams::new(0.1, 1.0).unwrap();
        let series = gen_poisson_series(&params, 9, 1_000_000).unwrap();
        let stats = fano_factor(&series.events, 500, series.n()).unwrap();
        assert_relative_eq!(stats.mean_count, 50.0, max_relative = 0.05);
        assert!((stats.fano - 0.9).abs() < 0.1, "fano {}", stats.fano);
    }

    #[test]
    fn fano_of_deterministic_train_is_zero() {
        let params = LaserAnalogParams::new(1e-5, 1e-3).unwrap();
        let series = gen_laser_series(&params, 100_000).unwrap();
        // Window a multiple of the 100-period cadence: identical counts.
        let stats = fano_factor(&series.events, 1000, series.n()).unwrap();
        assert_eq!(stats.var_count, 0.0);
        assert_eq!(stats.fano, 0.0);
        assert_relative_eq!(stats.mean_count, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn gap_stats_match_hand_computation() {
        // Gaps 1, 2, 3, 4: mean 2.5, unbiased variance 5/3.
        let stats = interevent_stats(&events_at(&[0, 1, 3, 6, 10]), 2).unwrap();
        assert_eq!(stats.count, 4);
        assert_relative_eq!(stats.mean, 2.5, max_relative = 1e-12);
        assert_relative_eq!(stats.var, 5.0 / 3.0, max_relative = 1e-12);
        // Bins [0,2), [2,4), [4,6): gap 1 | gaps 2,3 | gap 4.
        assert_eq!(stats.histogram.counts, vec![1, 2, 1]);
        assert_eq!(stats.histogram.total(), 4);
    }

    #[test]
    fn gap_stats_require_two_events_and_positive_bins() {
        assert!(matches!(
            interevent_stats(&events_at(&[3]), 10),
            Err(Error::TooFewEvents { need: 2, found: 1 })
        ));
        assert!(matches!(
            interevent_stats(&[], 0),
            Err(Error::InvalidParam { name: "bin_width", .. })
        ));
    }

    #[test]
    fn geometric_gaps_have_matching_mean_and_variance() {
        // Bernoulli event train: gaps are geometric with mean 1/p and
        // variance (1-p)/p^2.
        let p = 0.02;
        let params = PoissonParams::new(p, 1.0).unwrap();
        let series = gen_poisson_series(&params, 4, 2_000_000).unwrap();
        let stats = interevent_stats(&series.events, 10).unwrap();
        assert_relative_eq!(stats.mean, 1.0 / p, max_relative = 0.02);
        assert_relative_eq!(stats.var, (1.0 - p) / (p * p), max_relative = 0.05);
    }

    #[test]
    fn laser_gaps_are_deterministic() {
        let params = LaserAnalogParams::new(1e-5, 1e-3).unwrap();
        let series = gen_laser_series(&params, 200_000).unwrap();
        let stats = interevent_stats(&series.events, 10).unwrap();
        assert_eq!(stats.mean, 100.0);
        assert_eq!(stats.var, 0.0);
        // Every gap lands in the same bin.
        assert_eq!(stats.histogram.counts.iter().filter(|&&c| c > 0).count(), 1);
    }

    #[test]
    fn mark_stats_match_hand_computation() {
        let events = vec![
            DissipationEvent { period: 0, mark: 1.0 },
            DissipationEvent { period: 5, mark: 2.0 },
            DissipationEvent { period: 9, mark: 3.0 },
        ];
        let stats = mark_stats(&events).unwrap();
        assert_eq!(stats.count, 3);
        assert_relative_eq!(stats.mean, 2.0, max_relative = 1e-12);
        assert_relative_eq!(stats.var, 1.0, max_relative = 1e-12);
        assert_eq!(stats.min, 1.0);
        assert_eq!(stats.max, 3.0);
        assert!(matches!(mark_stats(&[]), Err(Error::TooFewEvents { need: 1, found: 0 })));
    }

    #[test]
    fn clock_marks_concentrate_near_w_times_mean_energy() {
        let params = reference_params();
        let series = gen_clock_series(&params, 17, 1_000_000).unwrap();
        let stats = mark_stats(&series.events).unwrap();
        // Marks are w * stationary energy ~ w * delta/(p*w) = delta/p.
        assert_relative_eq!(stats.mean, params.delta / params.p, max_relative = 0.02);
        assert!(stats.min > 0.0);
        assert!(stats.max < 2.0 * params.delta / params.p);
    }

    #[test]
    fn correlation_detects_linear_and_inverse_relations() {
        // Marks exactly proportional to the preceding gap -> r = 1.
        let mut events = Vec::new();
        let mut period = 0u64;
        for (i, gap) in [3u64, 7, 2, 9, 5, 4, 8, 1].iter().enumerate() {
            period += gap;
            let mark = *gap as f64 * 0.5;
            let _ = i;
            events.push(DissipationEvent { period, mark });
        }
        let events_with_lead =
            std::iter::once(DissipationEvent { period: 0, mark: 123.0 }).chain(events).collect::<Vec<_>>();
        let r = gap_mark_correlation(&events_with_lead).unwrap();
        assert_relative_eq!(r, 1.0, max_relative = 1e-12);

        // Inverted marks -> r = -1.
        let inverted: Vec<DissipationEvent> = events_with_lead
            .iter()
            .map(|e| DissipationEvent { period: e.period, mark: -e.mark })
            .collect();
        let r = gap_mark_correlation(&inverted).unwrap();
        assert_relative_eq!(r, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn correlation_degenerate_cases() {
        // Constant marks: no variance, r = 0 by convention.
        let r = gap_mark_correlation(&events_at(&[0, 3, 9, 12, 20])).unwrap();
        assert_eq!(r, 0.0);
        // Fewer than two gap/mark pairs is an error.
        assert!(matches!(
            gap_mark_correlation(&events_at(&[0, 5])),
            Err(Error::TooFewEvents { need: 3, .. })
        ));
    }

    #[test]
    fn streaming_builders_match_slice_functions() {
        let params = reference_params();
        let series = gen_clock_series(&params, 23, 200_000).unwrap();

        let mut counter = WindowCounter::new(1000).unwrap();
        let mut gaps = GapTracker::new(10).unwrap();
        let mut marks = MarkTracker::new();
        let mut corr = GapMarkCorrelation::new();
        for e in &series.events {
            counter.push(e.period);
            gaps.push(e.period);
            marks.push(e.mark);
            corr.push(e.period, e.mark);
        }
        assert_eq!(
            counter.finish(series.n()).unwrap(),
            fano_factor(&series.events, 1000, series.n()).unwrap()
        );
        assert_eq!(gaps.finish().unwrap(), interevent_stats(&series.events, 10).unwrap());
        assert_eq!(marks.finish().unwrap(), mark_stats(&series.events).unwrap());
        assert_eq!(corr.finish().unwrap(), gap_mark_correlation(&series.events).unwrap());
    }
}
