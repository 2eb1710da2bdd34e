//! Amplitude-retrieval channel estimation from one-bit array measurements.
//!
//! The crate is organized around a single pipeline:
//!
//! * [`channel`] — geometric multipath channel synthesis, training blocks,
//!   and the one-bit quantized observation model;
//! * [`estimator`] — the amplitude-retrieval alternating minimization
//!   (amplitude step, gridless angle refinement, norm-constrained channel
//!   step with structure-aware dispatch);
//! * [`biht`] — the on-grid binary iterative hard thresholding baseline;
//! * [`mat`], [`linalg`] — the small dense complex-matrix kernel the rest is
//!   built on.

pub mod biht;
pub mod channel;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod mat;

pub use error::{Error, Result};
pub use mat::ComplexMatrix;
