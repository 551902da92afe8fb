//! Builtin sensor models.
//!
//! Four synthetic temperature-sensor models. Supply and temperature ratings
//! follow the respective datasheets; circuit parameters, variation spreads,
//! noise levels, and quirks are calibration constants chosen so the four
//! models produce clearly distinct sweep curves and reproducible
//! identification behavior:
//!
//! - `TMP36`: variance-limited output (AC component saturates), wide
//!   per-instance DC spread.
//! - `LM61`: strong resonance high in the band, instance-separating
//!   structure across the whole grid.
//! - `MCP9700`: resonance low in the band and a total shutdown between
//!   90 and 110 kHz.
//! - `LMT85`: weak, heavily damped response that goes flat above 200 kHz;
//!   instances of this model are hard to tell apart.

use alloc::string::String;
use alloc::vec::Vec;

use super::{CircuitParams, ParamVariation, Quirk, SensorModel};

fn tmp36() -> SensorModel {
    SensorModel {
        name: String::from("TMP36"),
        supply_min_v: 2.7,
        supply_max_v: 5.5,
        temp_min_c: -40.0,
        temp_max_c: 125.0,
        dc_output_at_25c_v: 0.75,
        temp_slope_v_per_c: 0.010,
        base_params: CircuitParams {
            resonant_freq_hz: 120_000.0,
            damping: 0.7,
            gain: 0.9,
            output_offset_v: 0.75,
        },
        variation: ParamVariation {
            resonant_freq: 0.01,
            damping: 0.01,
            gain: 0.01,
            output_offset: 0.03,
        },
        noise_rms_v: 0.0002,
        quirk: Quirk::SaturatingVariance { cap_v2: 7e-7 },
    }
}

fn lm61() -> SensorModel {
    SensorModel {
        name: String::from("LM61"),
        supply_min_v: 2.7,
        supply_max_v: 10.0,
        temp_min_c: -30.0,
        temp_max_c: 100.0,
        dc_output_at_25c_v: 0.90,
        temp_slope_v_per_c: 0.010,
        base_params: CircuitParams {
            resonant_freq_hz: 700_000.0,
            damping: 0.08,
            gain: 0.6,
            output_offset_v: 0.90,
        },
        variation: ParamVariation {
            resonant_freq: 0.03,
            damping: 0.02,
            gain: 0.02,
            output_offset: 0.02,
        },
        noise_rms_v: 0.18,
        quirk: Quirk::None,
    }
}

fn mcp9700() -> SensorModel {
    SensorModel {
        name: String::from("MCP9700"),
        supply_min_v: 2.3,
        supply_max_v: 5.5,
        temp_min_c: -40.0,
        temp_max_c: 150.0,
        dc_output_at_25c_v: 0.50,
        temp_slope_v_per_c: 0.010,
        base_params: CircuitParams {
            resonant_freq_hz: 70_000.0,
            damping: 0.05,
            gain: 0.32,
            output_offset_v: 0.50,
        },
        variation: ParamVariation {
            resonant_freq: 0.09,
            damping: 0.025,
            gain: 0.05,
            output_offset: 0.012,
        },
        noise_rms_v: 0.07,
        quirk: Quirk::ShutdownBand {
            f_lo_hz: 90_000.0,
            f_hi_hz: 110_000.0,
        },
    }
}

fn lmt85() -> SensorModel {
    SensorModel {
        name: String::from("LMT85"),
        supply_min_v: 1.8,
        supply_max_v: 5.5,
        temp_min_c: -50.0,
        temp_max_c: 150.0,
        dc_output_at_25c_v: 1.565,
        temp_slope_v_per_c: -0.0082,
        base_params: CircuitParams {
            resonant_freq_hz: 30_000.0,
            damping: 0.06,
            gain: 0.48,
            output_offset_v: 1.565,
        },
        variation: ParamVariation {
            resonant_freq: 0.15,
            damping: 0.004,
            gain: 0.004,
            output_offset: 0.0015,
        },
        noise_rms_v: 0.05,
        quirk: Quirk::FlatHighBand {
            f_knee_hz: 200_000.0,
        },
    }
}

/// The four builtin sensor models.
pub fn builtin_presets() -> Vec<SensorModel> {
    alloc::vec![tmp36(), lm61(), mcp9700(), lmt85()]
}

impl SensorModel {
    /// Look up a builtin model by name.
    pub fn preset(name: &str) -> Option<SensorModel> {
        builtin_presets().into_iter().find(|m| m.name == name)
    }
}
