//! Simulation and spectral analysis of a "quiet" oscillator: a pendulum-style
//! clock whose escapement feeds in a fixed energy quantum every period while
//! damping removes a random fraction at Bernoulli-distributed instants.
//!
//! The dissipated power, viewed as a train of marked events, is spectrally
//! quieter at low frequencies than a Poisson train of the same rate: energy
//! conservation forces the long-run dissipation to track the steady input, so
//! fluctuations are suppressed below the corner frequency `p * w` (event
//! probability times relative damping). The crate provides
//!
//! * [`model`] — the per-period energy recurrence and the three event
//!   generators (clock, Poisson reference, integrate-and-fire analog),
//! * [`spectral`] — streaming Welch-style PSD estimation, a brute-force DFT
//!   oracle, the analytic Lorentzian reference curve, log-frequency binning
//!   and a corner-frequency fitter,
//! * [`stats`] — energy ledger, counting statistics (Fano factor),
//!   inter-event and mark statistics,
//! * [`runner`] — config-driven single runs and parameter sweeps with
//!   reproducibility manifests,
//! * [`output`] — the on-disk artifact formats (PSD table, summary document,
//!   event log) with exact float round-tripping.
//!
//! The `quietclock` binary exposes `simulate`, `compare` and `sweep`
//! subcommands on top of [`runner`].

pub mod accum;
pub mod error;
pub mod model;
pub mod output;
pub mod rng;
pub mod runner;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
