//! Authentication of analog sensors by frequency-swept fingerprinting:
//! the IO half of the workspace.
//!
//! The `sensorprint-core` crate holds the pure algorithmic layer (waveform
//! features, sensor simulation, fingerprint matching). This crate adds
//! everything that touches the outside world:
//!
//! - [`capture`], [`fpfile`], [`modelfile`]: plain-text file formats for
//!   waveform captures, full fingerprints, and sensor models.
//! - [`registry`]: verifier-side enrollment storage, replay protection, and
//!   the verification decision.
//! - [`wire`], [`server`], [`agent`], [`session`]: the length-prefixed
//!   binary protocol, the verifier TCP server, device agents, and the
//!   retrying authentication session.
//! - [`eval`]: the experiment harness behind the `sweep`, `p-sweep`,
//!   `theta-sweep`, `confusion`, and `ingest` CLI subcommands.

pub mod agent;
pub mod capture;
mod error;
pub mod eval;
pub mod fpfile;
pub mod modelfile;
pub mod registry;
pub mod server;
pub mod session;
pub mod wire;

pub use error::{valid_device_id, Error, Result};
