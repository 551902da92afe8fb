//! Bridge lab captures into the fingerprint pipeline.
//!
//! A capture directory holds one waveform file per grid frequency, named
//! `<hz>.csv` (see [`crate::capture`] for the file shape). Ingestion
//! computes RMS and variance per file and assembles a single-repeat full
//! fingerprint.

use std::path::Path;

use sensorprint_core::fingerprint::{FingerprintEntry, FrequencyGrid, FullFingerprint};
use sensorprint_core::seed::derive_seed;
use sensorprint_core::sensor::{CaptureSpec, ChallengeTemplate, Environment, SensorInstance};
use sensorprint_core::signal::ResponseStats;

use crate::capture::{read_capture, write_capture};
use crate::error::{Error, Result};

/// Name of the capture file for one grid frequency.
pub fn capture_file_name(frequency_hz: f64) -> String {
    format!("{frequency_hz}.csv")
}

/// Assemble a full fingerprint from a directory of captures.
///
/// Every grid frequency must have its capture file; the first gap is
/// reported as [`Error::MissingFrequency`].
pub fn ingest_captures(
    dir: &Path,
    grid: &FrequencyGrid,
    device_id: &str,
    temperature_c: f64,
) -> Result<FullFingerprint> {
    let mut entries = Vec::with_capacity(grid.len());
    for frequency_hz in grid.frequencies() {
        let path = dir.join(capture_file_name(frequency_hz));
        if !path.exists() {
            return Err(Error::MissingFrequency { frequency_hz, path });
        }
        let waveform = read_capture(&path)?;
        let stats = ResponseStats::from_waveform(&waveform)?;
        entries.push(FingerprintEntry {
            frequency_hz,
            mean_rms_v: stats.rms_v,
            mean_variance_v2: stats.variance_v2,
            std_rms_v: 0.0,
        });
    }
    let fp = FullFingerprint {
        device_id: device_id.to_string(),
        grid: *grid,
        entries,
        n_repeats: 1,
        bootstrap_temperature_c: temperature_c,
    };
    fp.validate()?;
    Ok(fp)
}

/// Export one single-shot capture per grid frequency for a simulated
/// instance, mirroring what lab equipment would record.
pub fn export_sweep_captures(
    dir: &Path,
    instance: &SensorInstance,
    grid: &FrequencyGrid,
    template: ChallengeTemplate,
    env: &Environment,
    capture: &CaptureSpec,
    seed: u64,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for frequency_hz in grid.frequencies() {
        let challenge = template.at(frequency_hz);
        let meas_seed = derive_seed(seed, "capture-export", &[frequency_hz.to_bits()]);
        let waveform = instance.respond(&challenge, env, capture, meas_seed)?;
        write_capture(&dir.join(capture_file_name(frequency_hz)), &waveform)?;
    }
    Ok(())
}
