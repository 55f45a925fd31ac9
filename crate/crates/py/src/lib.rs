//! Python bindings for the quietclock core: the three generators, the
//! spectral estimators, the analytic curve and the counting statistics.
//!
//! The module is a plain `cdylib`; build it with `cargo build -p
//! quietclock-py` and import the resulting shared object as
//! `quietclock_py` (see `python/smoke_test.py` for a loader that works
//! straight out of the target directory, no packaging step needed).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use quietclock::model::{
    collect_series, ClockParams, ClockProcess, DampingRule, DissipationSeries, LaserAnalogParams,
    LaserProcess, PoissonParams, PoissonProcess, DEFAULT_SAMPLE_BUDGET,
};
use quietclock::spectral::{self, Window};
use quietclock::stats;

/// Map core errors onto Python exceptions: unusable caller input becomes
/// `ValueError`, everything else `RuntimeError`.
fn to_py_err(e: quietclock::Error) -> PyErr {
    use quietclock::Error::*;
    match e {
        InvalidParam { .. } | BadSegmentLen(_) | StreamTooShort { .. } | EmptyEstimate
        | TooFewWindows { .. } | TooFewEvents { .. } | Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_window(name: &str) -> PyResult<Window> {
    match name.to_ascii_lowercase().as_str() {
        "hann" => Ok(Window::Hann),
        "rectangular" | "rect" | "boxcar" => Ok(Window::Rectangular),
        other => Err(PyValueError::new_err(format!(
            "unknown window {other:?} (expected \"hann\" or \"rectangular\")"
        ))),
    }
}

fn parse_damping(name: &str) -> PyResult<DampingRule> {
    match name.to_ascii_lowercase().as_str() {
        "linearized" => Ok(DampingRule::Linearized),
        "exact" => Ok(DampingRule::Exact),
        other => Err(PyValueError::new_err(format!(
            "unknown damping rule {other:?} (expected \"linearized\" or \"exact\")"
        ))),
    }
}

fn window_name(window: Window) -> &'static str {
    match window {
        Window::Hann => "hann",
        Window::Rectangular => "rectangular",
    }
}

/// A materialized run: one dissipation sample per period plus the event
/// list and the stored-energy endpoints.
#[pyclass(frozen)]
struct Series {
    inner: DissipationSeries,
}

#[pymethods]
impl Series {
    /// Total energy dissipated in each period, one float per period.
    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.inner.samples.clone()
    }

    /// Damping events as `(period, mark)` tuples, in period order.
    #[getter]
    fn events(&self) -> Vec<(u64, f64)> {
        self.inner.events.iter().map(|e| (e.period, e.mark)).collect()
    }

    /// Number of simulated periods.
    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    /// Stored energy when the run started.
    #[getter]
    fn initial_energy(&self) -> f64 {
        self.inner.initial_energy
    }

    /// Stored energy when the run ended.
    #[getter]
    fn final_energy(&self) -> f64 {
        self.inner.final_state.energy
    }

    /// Conservation balance against a constant per-period input:
    /// returns `(input_total, dissipated_total, stored_delta,
    /// relative_defect)`.
    fn ledger(&self, input_per_period: f64) -> (f64, f64, f64, f64) {
        let l = stats::ledger(&self.inner, input_per_period);
        (l.input_total, l.dissipated_total, l.stored_delta, l.relative_defect())
    }

    /// Welch PSD of the samples; see `estimate_psd`.
    #[pyo3(signature = (segment_len, window = "hann"))]
    fn psd(&self, segment_len: usize, window: &str) -> PyResult<Psd> {
        let est = spectral::estimate_psd(&self.inner.samples, segment_len, parse_window(window)?)
            .map_err(to_py_err)?;
        Ok(Psd { inner: est })
    }

    /// Counting statistics on disjoint windows of `window` periods:
    /// returns `(windows, mean_count, var_count, fano)`.
    fn fano(&self, window: u64) -> PyResult<(u64, f64, f64, f64)> {
        let c = stats::fano_factor(&self.inner.events, window, self.inner.n()).map_err(to_py_err)?;
        Ok((c.windows, c.mean_count, c.var_count, c.fano))
    }

    /// Inter-event gap statistics: returns `(count, mean, var)`.
    #[pyo3(signature = (bin_width = 10))]
    fn gap_stats(&self, bin_width: u64) -> PyResult<(u64, f64, f64)> {
        let g = stats::interevent_stats(&self.inner.events, bin_width).map_err(to_py_err)?;
        Ok((g.count, g.mean, g.var))
    }

    /// Event mark statistics: returns `(count, mean, var, min, max)`.
    fn mark_stats(&self) -> PyResult<(u64, f64, f64, f64, f64)> {
        let m = stats::mark_stats(&self.inner.events).map_err(to_py_err)?;
        Ok((m.count, m.mean, m.var, m.min, m.max))
    }

    /// Pearson correlation between each gap and the mark that closes it.
    fn gap_mark_correlation(&self) -> PyResult<f64> {
        stats::gap_mark_correlation(&self.inner.events).map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Series(n={}, events={}, final_energy={:.6e})",
            self.inner.n(),
            self.inner.events.len(),
            self.inner.final_state.energy
        )
    }
}

/// A power spectral density estimate on the positive-frequency grid.
#[pyclass(frozen)]
struct Psd {
    inner: spectral::PsdEstimate,
}

#[pymethods]
impl Psd {
    /// Angular frequencies in radians per period, strictly increasing.
    #[getter]
    fn freqs(&self) -> Vec<f64> {
        self.inner.freqs.clone()
    }

    /// Spectral density at each frequency (energy^2 per period).
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    /// Number of segments averaged.
    #[getter]
    fn segments(&self) -> usize {
        self.inner.segments
    }

    #[getter]
    fn window(&self) -> &'static str {
        window_name(self.inner.window)
    }

    /// Average into log-spaced bands, `bins_per_decade` per decade.
    #[pyo3(signature = (bins_per_decade = 10))]
    fn log_bin(&self, bins_per_decade: u32) -> PyResult<Psd> {
        let binned = spectral::log_bin(&self.inner, bins_per_decade).map_err(to_py_err)?;
        Ok(Psd { inner: binned })
    }

    /// Fit a high-pass Lorentzian; returns `(plateau, corner,
    /// rms_residual)`.
    fn fit_corner(&self) -> PyResult<(f64, f64, f64)> {
        let fit = spectral::fit_corner(&self.inner.freqs, &self.inner.values).map_err(to_py_err)?;
        Ok((fit.plateau, fit.corner, fit.rms_residual))
    }

    fn __len__(&self) -> usize {
        self.inner.freqs.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Psd(bins={}, segments={}, window={:?})",
            self.inner.freqs.len(),
            self.inner.segments,
            window_name(self.inner.window)
        )
    }
}

/// Simulate the clock: feed `delta` per period, dissipate a fraction `w`
/// of the stored energy with probability `p` each period.
#[pyfunction]
#[pyo3(signature = (delta, p, w, periods, seed, damping = "linearized", initial_energy = None))]
fn clock_series(
    delta: f64,
    p: f64,
    w: f64,
    periods: u64,
    seed: u64,
    damping: &str,
    initial_energy: Option<f64>,
) -> PyResult<Series> {
    let mut params = ClockParams::new(delta, p, w, parse_damping(damping)?).map_err(to_py_err)?;
    if let Some(e0) = initial_energy {
        params = params.with_initial_energy(e0).map_err(to_py_err)?;
    }
    let mut process = ClockProcess::new(params, seed).map_err(to_py_err)?;
    let inner = collect_series(&mut process, periods, DEFAULT_SAMPLE_BUDGET).map_err(to_py_err)?;
    Ok(Series { inner })
}

/// Memoryless reference: an event of fixed `mark` with probability `p`
/// per period.
#[pyfunction]
fn poisson_series(p: f64, mark: f64, periods: u64, seed: u64) -> PyResult<Series> {
    let params = PoissonParams::new(p, mark).map_err(to_py_err)?;
    let mut process = PoissonProcess::new(params, seed).map_err(to_py_err)?;
    let inner = collect_series(&mut process, periods, DEFAULT_SAMPLE_BUDGET).map_err(to_py_err)?;
    Ok(Series { inner })
}

/// Deterministic integrate-and-fire analog: accumulate `delta` per
/// period, emit a `quantum` whenever the buffer holds one.
#[pyfunction]
fn laser_series(delta: f64, quantum: f64, periods: u64) -> PyResult<Series> {
    let params = LaserAnalogParams::new(delta, quantum).map_err(to_py_err)?;
    let mut process = LaserProcess::new(params).map_err(to_py_err)?;
    let inner = collect_series(&mut process, periods, DEFAULT_SAMPLE_BUDGET).map_err(to_py_err)?;
    Ok(Series { inner })
}

/// Stationary mean stored energy `delta / (p w)`.
#[pyfunction]
fn mean_energy(delta: f64, p: f64, w: f64) -> f64 {
    quietclock::model::mean_energy(delta, p, w)
}

/// Oscillation period `2 pi sqrt(length / g)` in seconds.
#[pyfunction]
#[pyo3(signature = (length, g = 9.81))]
fn period_from_length(length: f64, g: f64) -> PyResult<f64> {
    quietclock::model::period_from_length(length, g).map_err(to_py_err)
}

/// Analytic dissipation spectrum
/// `(delta^2 / p) / (1 + (p w / omega)^2)` at one frequency.
#[pyfunction]
fn analytic_psd(delta: f64, p: f64, w: f64, omega: f64) -> PyResult<f64> {
    let params = ClockParams::new(delta, p, w, DampingRule::Linearized).map_err(to_py_err)?;
    spectral::analytic_psd(&params, omega).map_err(to_py_err)
}

/// Shot plateau `delta^2 / p`.
#[pyfunction]
fn analytic_plateau(delta: f64, p: f64, w: f64) -> PyResult<f64> {
    let params = ClockParams::new(delta, p, w, DampingRule::Linearized).map_err(to_py_err)?;
    Ok(spectral::analytic_plateau(&params))
}

/// White level of the finite-rate process, `(1 - p) delta^2 / p`.
#[pyfunction]
fn finite_rate_plateau(delta: f64, p: f64, w: f64) -> PyResult<f64> {
    let params = ClockParams::new(delta, p, w, DampingRule::Linearized).map_err(to_py_err)?;
    Ok(spectral::finite_rate_plateau(&params))
}

/// Welch PSD: average the periodogram of disjoint `segment_len`-sample
/// segments after removing the streamed mean. `segment_len` must be a
/// power of two; the trailing partial segment is dropped.
#[pyfunction]
#[pyo3(signature = (samples, segment_len, window = "hann"))]
fn estimate_psd(samples: Vec<f64>, segment_len: usize, window: &str) -> PyResult<Psd> {
    let est = spectral::estimate_psd(&samples, segment_len, parse_window(window)?)
        .map_err(to_py_err)?;
    Ok(Psd { inner: est })
}

/// Direct-sum DFT oracle with the same contract as `estimate_psd`; slow
/// but free of FFT machinery, kept for cross-checks.
#[pyfunction]
#[pyo3(signature = (samples, segment_len, window = "hann"))]
fn brute_force_psd(samples: Vec<f64>, segment_len: usize, window: &str) -> PyResult<Psd> {
    let est = spectral::brute_force_psd(&samples, segment_len, parse_window(window)?)
        .map_err(to_py_err)?;
    Ok(Psd { inner: est })
}

#[pymodule]
fn quietclock_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Series>()?;
    m.add_class::<Psd>()?;
    m.add_function(wrap_pyfunction!(clock_series, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_series, m)?)?;
    m.add_function(wrap_pyfunction!(laser_series, m)?)?;
    m.add_function(wrap_pyfunction!(mean_energy, m)?)?;
    m.add_function(wrap_pyfunction!(period_from_length, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_psd, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_plateau, m)?)?;
    m.add_function(wrap_pyfunction!(finite_rate_plateau, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_psd, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_psd, m)?)?;
    Ok(())
}
