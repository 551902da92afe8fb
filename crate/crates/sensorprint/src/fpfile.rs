//! Full-fingerprint files.
//!
//! Versioned plain text:
//!
//! ```text
//! version=1
//! device_id=<id>
//! grid=<f_min>:<f_max>:<step>
//! n_repeats=<n>
//! bootstrap_temperature_c=<real>
//! <hz>,<mean_rms>,<mean_var>,<std_rms>
//! ...                                      # one line per grid frequency
//! ```
//!
//! Floats are written with shortest round-trip precision; reading a written
//! file reproduces the fingerprint bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sensorprint_core::fingerprint::{FingerprintEntry, FrequencyGrid, FullFingerprint};

use crate::error::{Error, Result};

pub fn fingerprint_to_string(fp: &FullFingerprint) -> String {
    let mut out = String::with_capacity(fp.entries.len() * 64 + 128);
    out.push_str("version=1\n");
    let _ = writeln!(out, "device_id={}", fp.device_id);
    let _ = writeln!(
        out,
        "grid={}:{}:{}",
        fp.grid.f_min_hz(),
        fp.grid.f_max_hz(),
        fp.grid.step_hz()
    );
    let _ = writeln!(out, "n_repeats={}", fp.n_repeats);
    let _ = writeln!(out, "bootstrap_temperature_c={}", fp.bootstrap_temperature_c);
    for e in &fp.entries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.frequency_hz, e.mean_rms_v, e.mean_variance_v2, e.std_rms_v
        );
    }
    out
}

pub fn fingerprint_from_str(text: &str, origin: &Path) -> Result<FullFingerprint> {
    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<String> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 0, format!("missing '{key}=' header")))?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .map(str::to_owned)
            .ok_or_else(|| Error::parse(origin, i + 1, format!("expected '{key}=<value>'")))
    };

    let version = header("version")?;
    if version != "1" {
        return Err(Error::parse(origin, 1, format!("unsupported version '{version}'")));
    }
    let device_id = header("device_id")?;
    let grid_spec = header("grid")?;
    let n_repeats: u32 = header("n_repeats")?
        .parse()
        .map_err(|_| Error::parse(origin, 4, "bad n_repeats"))?;
    let bootstrap_temperature_c: f64 = header("bootstrap_temperature_c")?
        .parse()
        .map_err(|_| Error::parse(origin, 5, "bad bootstrap_temperature_c"))?;

    let grid = parse_grid(&grid_spec)
        .ok_or_else(|| Error::parse(origin, 3, "expected grid=<f_min>:<f_max>:<step>"))?;

    let mut entries = Vec::with_capacity(grid.len());
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = || -> Result<f64> {
            fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::parse(origin, i + 1, "expected 4 comma-separated reals"))
        };
        let frequency_hz = next()?;
        let mean_rms_v = next()?;
        let mean_variance_v2 = next()?;
        let std_rms_v = next()?;
        if fields.next().is_some() {
            return Err(Error::parse(origin, i + 1, "expected 4 comma-separated reals"));
        }
        entries.push(FingerprintEntry {
            frequency_hz,
            mean_rms_v,
            mean_variance_v2,
            std_rms_v,
        });
    }

    let fp = FullFingerprint {
        device_id,
        grid,
        entries,
        n_repeats,
        bootstrap_temperature_c,
    };
    fp.validate().map_err(|e| Error::CorruptFingerprint {
        path: origin.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(fp)
}

/// Parse `<f_min>:<f_max>:<step>`.
pub fn parse_grid(spec: &str) -> Option<FrequencyGrid> {
    let mut parts = spec.split(':');
    let f_min: f64 = parts.next()?.parse().ok()?;
    let f_max: f64 = parts.next()?.parse().ok()?;
    let step: f64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    FrequencyGrid::new(f_min, f_max, step).ok()
}

pub fn write_fingerprint(path: &Path, fp: &FullFingerprint) -> Result<()> {
    fs::write(path, fingerprint_to_string(fp)).map_err(|e| Error::io(path, e))
}

pub fn read_fingerprint(path: &Path) -> Result<FullFingerprint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    fingerprint_from_str(&text, path)
}
