//! Waveform capture files.
//!
//! Plain text, one file per capture: a header line `sample_rate_hz=<real>`
//! followed by one voltage per line. Lab equipment exports in this shape
//! feed the same feature pipeline as the simulator. Voltages are written
//! with shortest round-trip precision, so write/read is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use sensorprint_core::signal::Waveform;

use crate::error::{Error, Result};

pub fn write_capture(path: &Path, waveform: &Waveform) -> Result<()> {
    let mut out = String::with_capacity(waveform.len() * 20 + 32);
    out.push_str("sample_rate_hz=");
    out.push_str(&waveform.sample_rate_hz().to_string());
    out.push('\n');
    for s in waveform.samples() {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_capture(path: &Path) -> Result<Waveform> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty capture file"))?;
    let rate: f64 = header
        .strip_prefix("sample_rate_hz=")
        .ok_or_else(|| Error::parse(path, 1, "expected 'sample_rate_hz=<real>' header"))?
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, 1, "bad sample rate"))?;
    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad voltage '{line}'")))?;
        samples.push(v);
    }
    Waveform::new(samples, rate).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sensorprint_core::signal::{synthesize_sine, ConverterSpec};

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let spec = ConverterSpec::new(16, -2.0, 2.0, 1_000_000.0).unwrap();
        let w = synthesize_sine(1_000.0, 0.5, 0.25, &spec, 4).unwrap();
        write_capture(&path, &w).unwrap();
        let back = read_capture(&path).unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn missing_header_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, "1.0\n2.0\n").unwrap();
        let err = read_capture(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn non_finite_voltage_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, "sample_rate_hz=1000\nNaN\n").unwrap();
        assert!(read_capture(&path).is_err());
    }
}
