//! Monte Carlo harness for one-bit channel estimation experiments.
//!
//! Wraps the `amp-retrieval` estimators in a reproducible experiment
//! pipeline: scenario configuration ([`config`]), per-trial seeding and
//! execution ([`trial`]), parallel sweeps with CSV output ([`sweep`]),
//! the NMSE metric ([`metrics`]), and a fast invariant suite ([`check`]).
//!
//! Determinism contract: every trial derives its RNG stream from
//! `(base_seed, training-length index, SNR index, trial index)`, so the
//! emitted aggregate CSV is a pure function of the configuration —
//! independent of thread count and stable across runs.

pub mod check;
pub mod config;
pub mod metrics;
pub mod sweep;
pub mod trial;
