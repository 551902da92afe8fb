//! Core library for challenge-response fingerprinting of analog sensors.
//!
//! An analog sensor is stimulated with a fixed-frequency AC challenge while
//! its output voltage is recorded. Features of the output waveform (RMS and
//! variance) form a fingerprint of the device: a full fingerprint is a sweep
//! over a frequency grid recorded before deployment, a partial fingerprint is
//! a small set of probe points recorded in the field. A verifier matches the
//! partial fingerprint against the enrolled full fingerprint under an RMSE
//! threshold.
//!
//! The crate is split into three layers:
//!
//! - [`signal`]: waveform synthesis, RMS/variance extraction, and DAC/ADC
//!   quantization models.
//! - [`sensor`]: a parametric simulator of analog sensor circuits with
//!   per-instance process variation, temperature drift, and noise.
//! - [`fingerprint`]: the fingerprint data model, bootstrap sweep,
//!   timestamp-hash challenge scheduling, and RMSE matching.
//!
//! Everything here is deterministic given explicit seeds, allocation-only
//! (`no_std` + `alloc` compatible), and free of IO. File formats, the
//! authentication protocol, and the CLI live in the companion `sensorprint`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("enable either the `std` or the `libm` feature");

mod error;
mod math;

pub mod fingerprint;
pub mod seed;
pub mod sensor;
pub mod signal;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
