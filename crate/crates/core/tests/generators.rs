//! Long-run statistical checks on the three per-period generators.
//!
//! Unit tests pin the per-step arithmetic; these runs are long enough for
//! the *distributional* claims to bind: Bernoulli event statistics,
//! stationarity of the stored-energy process, the damping-rule contrast,
//! and the exact periodicity of the integrate-and-fire analog.
//!
//! Seeds are pinned, so every bound below is deterministic. The margins
//! quoted in comments are rough sampling-theory scales (the runs were
//! checked to sit several standard errors inside each bound).

use quietclock::accum::{KahanSum, Moments};
use quietclock::model::{
    gen_clock_series, gen_laser_series, gen_poisson_series, reference_params, ClockParams,
    ClockProcess, DampingRule, LaserAnalogParams, PeriodProcess, PoissonParams,
};
use quietclock::stats::{
    fano_factor, gap_mark_correlation, interevent_stats, ledger, mark_stats,
};

/// |x/reference - 1|
fn rel_err(x: f64, reference: f64) -> f64 {
    (x / reference - 1.0).abs()
}

#[test]
fn clock_event_statistics_match_bernoulli_rates() {
    let params = reference_params();
    let n: u64 = 10_000_000;
    let series = gen_clock_series(&params, 101, n).unwrap();

    // Event count: Binomial(n, p), sigma = sqrt(n p (1-p)) ~ 315. Allow 5 sigma.
    let expected = n as f64 * params.p;
    let sigma = (n as f64 * params.p * (1.0 - params.p)).sqrt();
    let count = series.events.len() as f64;
    assert!(
        (count - expected).abs() < 5.0 * sigma,
        "event count {count} vs expected {expected} (sigma {sigma:.0})"
    );

    // Inter-event gaps are geometric: mean 1/p = 100, var (1-p)/p^2 = 9900.
    let gaps = interevent_stats(&series.events, 10).unwrap();
    assert!(rel_err(gaps.mean, 100.0) < 0.01, "gap mean {}", gaps.mean);
    assert!(rel_err(gaps.var, 9900.0) < 0.05, "gap var {}", gaps.var);
    // The histogram of a geometric distribution decays monotonically at
    // this resolution: the first decade of gaps outnumbers the second.
    assert!(gaps.histogram.counts[0] > gaps.histogram.counts[10]);

    // Marks average delta/p = 1e-3 (the stationary energy loss per event).
    let marks = mark_stats(&series.events).unwrap();
    assert!(rel_err(marks.mean, params.delta / params.p) < 0.02, "mark mean {}", marks.mean);
    assert!(marks.min > 0.0 && marks.max < 2.0 * marks.mean);

    // Dissipated power averages to the input power to high precision: the
    // imbalance is only the stored-energy drift, ~|dE| / (n delta) <~ 1e-4.
    assert!(
        rel_err(series.samples.iter().copied().collect::<KahanSum>().total() / n as f64, params.delta)
            < 1e-3
    );

    // Energy-conservation ledger, the same identity the acceptance gate
    // checks on every run.
    let defect = ledger(&series, params.delta).relative_defect();
    assert!(defect <= 1e-9, "ledger defect {defect:e}");
}

#[test]
fn clock_energy_process_is_stationary_around_the_analytic_mean() {
    let params = reference_params();
    let mut process = ClockProcess::new(params, 202).unwrap();
    let n: u64 = 10_000_000;
    let mut energy = Moments::new();
    for _ in 0..n {
        process.next_period();
        energy.push(process.stored_energy());
    }

    // <E> = delta / (p w) = 1 J. The process decorrelates over ~1/(p w)
    // = 1e5 periods, so n = 1e7 gives ~200 effective samples of a process
    // with sigma_E ~ 0.022 J: the mean lands within ~0.3% typically.
    assert!(rel_err(energy.mean(), params.mean_energy()) < 0.01, "mean {}", energy.mean());

    // Linearizing the recurrence gives Var(E) ~ delta^2 (1-p) / (2 p^2 w),
    // i.e. a relative energy spread of sqrt(w/2) ~ 2.2%. The sample
    // variance of ~200 effective draws is itself noisy; ±35% brackets it.
    let predicted_var = params.delta * params.delta * (1.0 - params.p)
        / (2.0 * params.p * params.p * params.w);
    assert!(
        rel_err(energy.variance(), predicted_var) < 0.35,
        "energy variance {} vs predicted {predicted_var}",
        energy.variance()
    );
}

#[test]
fn damping_rules_share_event_times_and_differ_at_second_order() {
    // The event decision is `u < p` regardless of the rule, so with the
    // same seed both rules fire on exactly the same periods; only the
    // marks differ, by w^2 * e_in / (1 + w) per event.
    let delta = 1e-5;
    let (p, w) = (0.01, 1e-3);
    let lin = ClockParams::new(delta, p, w, DampingRule::Linearized).unwrap();
    let exact = ClockParams::new(delta, p, w, DampingRule::Exact).unwrap();
    let n = 100_000;
    let a = gen_clock_series(&lin, 7, n).unwrap();
    let b = gen_clock_series(&exact, 7, n).unwrap();

    assert_eq!(a.events.len(), b.events.len());
    assert!(!a.events.is_empty());
    for (ea, eb) in a.events.iter().zip(&b.events) {
        assert_eq!(ea.period, eb.period, "event times must not depend on the rule");
        // mark_lin = w e_in, mark_exact = w e_in / (1 + w):
        // the gap is w * mark_lin / (1 + w) < w * mark_lin.
        let diff = (ea.mark - eb.mark).abs();
        assert!(diff > 0.0, "rules must stay distinct routes");
        assert!(diff <= 1.01 * w * ea.mark, "mark gap {diff:e} beyond second order");
    }
}

#[test]
fn poisson_reference_is_memoryless() {
    let params = PoissonParams::new(0.01, 1e-3).unwrap();
    let n: u64 = 4_000_000;
    let series = gen_poisson_series(&params, 303, n).unwrap();

    let expected = n as f64 * params.p;
    let sigma = (expected * (1.0 - params.p)).sqrt();
    assert!((series.events.len() as f64 - expected).abs() < 5.0 * sigma);

    // Geometric gaps again.
    let gaps = interevent_stats(&series.events, 10).unwrap();
    assert!(rel_err(gaps.mean, 100.0) < 0.02, "gap mean {}", gaps.mean);
    assert!(rel_err(gaps.var, 9900.0) < 0.05, "gap var {}", gaps.var);

    // Counting in windows of 100 is Binomial(100, p): Fano = 1 - p. With
    // 4e4 windows the estimator's own spread is ~0.007.
    let counting = fano_factor(&series.events, 100, n).unwrap();
    assert!((counting.fano - 0.99).abs() < 0.03, "fano {}", counting.fano);
    assert!(rel_err(counting.mean_count, 1.0) < 0.05);

    // Marks are constant, so there is nothing for a gap to correlate with.
    let r = gap_mark_correlation(&series.events).unwrap();
    assert_eq!(r, 0.0, "constant marks must give exactly zero correlation");
}

#[test]
fn laser_analog_is_exactly_periodic_at_scale() {
    let params = LaserAnalogParams::new(1e-5, 1e-3).unwrap();
    let n: u64 = 1_000_000;
    let series = gen_laser_series(&params, n).unwrap();

    // quantum / delta = 100 exactly in floating point (100 * fl(1e-5)
    // accumulates past fl(1e-3) on the hundredth period): the train is a
    // strict comb with no drift over at least 1e6 periods.
    assert_eq!(series.events.len(), 10_000);
    let gaps = interevent_stats(&series.events, 10).unwrap();
    assert_eq!(gaps.mean, 100.0);
    assert_eq!(gaps.var, 0.0);
    assert!(series.events.iter().all(|e| e.mark == params.quantum));

    // Counting windows that are multiples of the gap always hold the same
    // count, so the Fano factor is exactly zero — not merely small.
    for window in [100, 300, 10_000] {
        let counting = fano_factor(&series.events, window, n).unwrap();
        assert_eq!(counting.fano, 0.0, "window {window}");
        assert_eq!(counting.var_count, 0.0);
    }

    let defect = ledger(&series, params.delta).relative_defect();
    assert!(defect <= 1e-9, "ledger defect {defect:e}");
}

#[test]
fn gap_mark_correlation_grows_with_relative_loss() {
    // A long gap lets the escapement rebuild more energy before the next
    // event, so gaps and the following marks correlate positively, with
    // strength ~ sqrt(2 w) for small w.
    let n: u64 = 10_000_000;
    let reference = gen_clock_series(&reference_params(), 404, n).unwrap();
    let r_small = gap_mark_correlation(&reference.events).unwrap();
    assert!(
        r_small > 0.02 && r_small < 0.09,
        "w = 1e-3 should give a weak positive correlation, got {r_small}"
    );

    // At w = 0.3 each event resets a third of the stored energy, so the
    // next mark is dominated by what the current gap rebuilt.
    let lossy = ClockParams::new(1.5e-2, 0.05, 0.3, DampingRule::Linearized).unwrap();
    let series = gen_clock_series(&lossy, 404, 1_000_000).unwrap();
    let r_large = gap_mark_correlation(&series.events).unwrap();
    assert!(r_large > 0.5, "w = 0.3 should correlate strongly, got {r_large}");
    assert!(r_large > 5.0 * r_small);
}
