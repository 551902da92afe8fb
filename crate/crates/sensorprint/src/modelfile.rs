//! Sensor model files.
//!
//! Plain-text key-value, one parameter per line, `#` starts a comment:
//!
//! ```text
//! # custom sensor
//! name=XTS-1
//! supply_min_v=2.7
//! supply_max_v=5.5
//! temp_min_c=-40
//! temp_max_c=125
//! dc_output_at_25c_v=0.75
//! temp_slope_v_per_c=0.01
//! resonant_freq_hz=120000
//! damping=0.7
//! gain=0.9
//! output_offset_v=0.75
//! variation_resonant_freq=0.01
//! variation_damping=0.01
//! variation_gain=0.01
//! variation_output_offset=0.03
//! noise_rms_v=0.0002
//! quirk=none
//! ```
//!
//! `quirk` is one of `none`, `shutdown_band:<f_lo>:<f_hi>`,
//! `flat_high_band:<f_knee>`, `saturating_variance:<cap>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sensorprint_core::sensor::{CircuitParams, ParamVariation, Quirk, SensorModel};

use crate::error::{Error, Result};

pub fn model_to_string(model: &SensorModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name={}", model.name);
    let _ = writeln!(out, "supply_min_v={}", model.supply_min_v);
    let _ = writeln!(out, "supply_max_v={}", model.supply_max_v);
    let _ = writeln!(out, "temp_min_c={}", model.temp_min_c);
    let _ = writeln!(out, "temp_max_c={}", model.temp_max_c);
    let _ = writeln!(out, "dc_output_at_25c_v={}", model.dc_output_at_25c_v);
    let _ = writeln!(out, "temp_slope_v_per_c={}", model.temp_slope_v_per_c);
    let _ = writeln!(out, "resonant_freq_hz={}", model.base_params.resonant_freq_hz);
    let _ = writeln!(out, "damping={}", model.base_params.damping);
    let _ = writeln!(out, "gain={}", model.base_params.gain);
    let _ = writeln!(out, "output_offset_v={}", model.base_params.output_offset_v);
    let _ = writeln!(out, "variation_resonant_freq={}", model.variation.resonant_freq);
    let _ = writeln!(out, "variation_damping={}", model.variation.damping);
    let _ = writeln!(out, "variation_gain={}", model.variation.gain);
    let _ = writeln!(out, "variation_output_offset={}", model.variation.output_offset);
    let _ = writeln!(out, "noise_rms_v={}", model.noise_rms_v);
    let quirk = match model.quirk {
        Quirk::None => "none".to_string(),
        Quirk::ShutdownBand { f_lo_hz, f_hi_hz } => format!("shutdown_band:{f_lo_hz}:{f_hi_hz}"),
        Quirk::FlatHighBand { f_knee_hz } => format!("flat_high_band:{f_knee_hz}"),
        Quirk::SaturatingVariance { cap_v2 } => format!("saturating_variance:{cap_v2}"),
    };
    let _ = writeln!(out, "quirk={quirk}");
    out
}

pub fn model_from_str(text: &str, origin: &Path) -> Result<SensorModel> {
    let mut pairs: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(origin, i + 1, "expected key=value"))?;
        if pairs.insert(key.trim(), (i + 1, value.trim())).is_some() {
            return Err(Error::parse(origin, i + 1, format!("duplicate key '{}'", key.trim())));
        }
    }

    fn take(
        pairs: &mut BTreeMap<&str, (usize, &str)>,
        origin: &Path,
        key: &str,
    ) -> Result<(usize, String)> {
        pairs
            .remove(key)
            .map(|(line, v)| (line, v.to_string()))
            .ok_or_else(|| Error::parse(origin, 0, format!("missing key '{key}'")))
    }
    fn take_f64(
        pairs: &mut BTreeMap<&str, (usize, &str)>,
        origin: &Path,
        key: &str,
    ) -> Result<f64> {
        let (line, v) = take(pairs, origin, key)?;
        v.parse()
            .map_err(|_| Error::parse(origin, line, format!("bad number for '{key}'")))
    }
    let p = &mut pairs;

    let model = SensorModel {
        name: take(p, origin, "name")?.1,
        supply_min_v: take_f64(p, origin, "supply_min_v")?,
        supply_max_v: take_f64(p, origin, "supply_max_v")?,
        temp_min_c: take_f64(p, origin, "temp_min_c")?,
        temp_max_c: take_f64(p, origin, "temp_max_c")?,
        dc_output_at_25c_v: take_f64(p, origin, "dc_output_at_25c_v")?,
        temp_slope_v_per_c: take_f64(p, origin, "temp_slope_v_per_c")?,
        base_params: CircuitParams {
            resonant_freq_hz: take_f64(p, origin, "resonant_freq_hz")?,
            damping: take_f64(p, origin, "damping")?,
            gain: take_f64(p, origin, "gain")?,
            output_offset_v: take_f64(p, origin, "output_offset_v")?,
        },
        variation: ParamVariation {
            resonant_freq: take_f64(p, origin, "variation_resonant_freq")?,
            damping: take_f64(p, origin, "variation_damping")?,
            gain: take_f64(p, origin, "variation_gain")?,
            output_offset: take_f64(p, origin, "variation_output_offset")?,
        },
        noise_rms_v: take_f64(p, origin, "noise_rms_v")?,
        quirk: {
            let (line, spec) = take(p, origin, "quirk")?;
            parse_quirk(&spec)
                .ok_or_else(|| Error::parse(origin, line, format!("bad quirk '{spec}'")))?
        },
    };

    if let Some((&key, &(line, _))) = pairs.iter().next() {
        return Err(Error::parse(origin, line, format!("unknown key '{key}'")));
    }
    model
        .validate()
        .map_err(|e| Error::parse(origin, 0, e.to_string()))?;
    Ok(model)
}

fn parse_quirk(spec: &str) -> Option<Quirk> {
    let mut parts = spec.split(':');
    let kind = parts.next()?;
    let mut num = || -> Option<f64> { parts.next()?.parse().ok() };
    let quirk = match kind {
        "none" => Quirk::None,
        "shutdown_band" => Quirk::ShutdownBand {
            f_lo_hz: num()?,
            f_hi_hz: num()?,
        },
        "flat_high_band" => Quirk::FlatHighBand { f_knee_hz: num()? },
        "saturating_variance" => Quirk::SaturatingVariance { cap_v2: num()? },
        _ => return None,
    };
    if parts.next().is_some() {
        return None;
    }
    Some(quirk)
}

pub fn write_model(path: &Path, model: &SensorModel) -> Result<()> {
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<SensorModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text, path)
}
