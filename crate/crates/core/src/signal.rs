//! Waveform synthesis, feature extraction, and converter models.
//!
//! A [`Waveform`] is a uniformly sampled voltage record. [`ConverterSpec`]
//! describes a DAC or ADC (resolution, voltage range, sample rate) and drives
//! the quantization model shared by the stimulus and capture paths. The
//! features used for fingerprinting are the RMS (effective voltage: the DC
//! level with the same power dissipation) and the population variance of the
//! output waveform.
//!
//! Feature computations use compensated summation so results are stable to
//! ~1e-12 even for million-sample windows, independent of accumulation order.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Maximum converter resolution supported by the quantization model.
pub const MAX_CONVERTER_BITS: u32 = 24;

/// A uniformly sampled voltage waveform.
///
/// Invariants (enforced at construction): the sample rate is positive and
/// finite, and every sample is finite. Waveforms are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Waveform {
    /// Build a waveform, validating the sample rate and every sample.
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidWaveform {
                reason: "sample rate must be positive and finite",
            });
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Resolution, voltage range, and sample rate of a DAC or ADC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterSpec {
    bits: u32,
    v_min: f64,
    v_max: f64,
    sample_rate_hz: f64,
}

impl ConverterSpec {
    /// Build a converter spec. Requires `1 <= bits <= 24`, `v_min < v_max`,
    /// and a positive finite sample rate.
    pub fn new(bits: u32, v_min: f64, v_max: f64, sample_rate_hz: f64) -> Result<Self> {
        if bits < 1 || bits > MAX_CONVERTER_BITS {
            return Err(Error::InvalidConverter {
                reason: "bits must be in 1..=24",
            });
        }
        if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
            return Err(Error::InvalidConverter {
                reason: "voltage range must be finite with v_min < v_max",
            });
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidConverter {
                reason: "sample rate must be positive and finite",
            });
        }
        Ok(Self {
            bits,
            v_min,
            v_max,
            sample_rate_hz,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Number of the highest code, `2^bits - 1`.
    pub fn max_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    /// Voltage difference between adjacent codes.
    pub fn step_v(&self) -> f64 {
        (self.v_max - self.v_min) / self.max_code() as f64
    }

    /// Quantize a single voltage: clamp to the range, round to the nearest
    /// code (ties away from zero), and map back to a voltage.
    pub fn quantize_value(&self, v: f64) -> f64 {
        let clamped = v.clamp(self.v_min, self.v_max);
        let span = self.v_max - self.v_min;
        let levels = self.max_code() as f64;
        let code = math::round((clamped - self.v_min) / span * levels);
        self.v_min + code / levels * span
    }
}

/// RMS and variance of one response waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseStats {
    /// Effective voltage, `sqrt(mean(v^2))`.
    pub rms_v: f64,
    /// Population variance, `mean(v^2) - mean(v)^2`.
    pub variance_v2: f64,
    pub n_samples: usize,
}

impl ResponseStats {
    pub fn from_waveform(w: &Waveform) -> Result<Self> {
        Ok(Self {
            rms_v: rms(w)?,
            variance_v2: variance(w)?,
            n_samples: w.len(),
        })
    }
}

/// Synthesize a quantized sine tone: `offset + amplitude * sin(2*pi*f*t)`.
///
/// The tone covers exactly `n_periods` periods sampled at the converter's
/// rate, with a floor of 8 samples per period: if the converter rate would
/// give fewer, the waveform is sampled at `8 * frequency` instead and its
/// `sample_rate_hz` reflects that. Samples are quantized through `spec`.
///
/// Errors: [`Error::NyquistViolation`] if `frequency > rate / 2`,
/// [`Error::RangeViolation`] if `offset +/- amplitude` leaves the converter
/// range.
pub fn synthesize_sine(
    frequency_hz: f64,
    amplitude_v: f64,
    offset_v: f64,
    spec: &ConverterSpec,
    n_periods: u32,
) -> Result<Waveform> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(Error::InvalidArgument {
            reason: "frequency must be positive and finite",
        });
    }
    if !(amplitude_v.is_finite() && amplitude_v >= 0.0) {
        return Err(Error::InvalidArgument {
            reason: "amplitude must be non-negative and finite",
        });
    }
    if !offset_v.is_finite() {
        return Err(Error::InvalidArgument {
            reason: "offset must be finite",
        });
    }
    if n_periods < 1 {
        return Err(Error::InvalidArgument {
            reason: "n_periods must be at least 1",
        });
    }
    let nyquist = spec.sample_rate_hz() / 2.0;
    if frequency_hz > nyquist {
        return Err(Error::NyquistViolation {
            frequency_hz,
            nyquist_hz: nyquist,
        });
    }
    let lo = offset_v - amplitude_v;
    let hi = offset_v + amplitude_v;
    if lo < spec.v_min() || hi > spec.v_max() {
        return Err(Error::RangeViolation {
            lo,
            hi,
            v_min: spec.v_min(),
            v_max: spec.v_max(),
        });
    }

    let ideal = math::round(n_periods as f64 * spec.sample_rate_hz() / frequency_hz);
    let min_count = 8 * n_periods as usize;
    let (count, rate) = if (ideal as usize) < min_count {
        (min_count, 8.0 * frequency_hz)
    } else {
        (ideal as usize, spec.sample_rate_hz())
    };

    let omega = 2.0 * core::f64::consts::PI * frequency_hz;
    let mut samples = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 / rate;
        let v = offset_v + amplitude_v * math::sin(omega * t);
        samples.push(spec.quantize_value(v));
    }
    Waveform::new(samples, rate)
}

/// Quantize every sample of a waveform through a converter.
///
/// Out-of-range samples clamp to the range; the operation is idempotent.
pub fn quantize(w: &Waveform, spec: &ConverterSpec) -> Waveform {
    let samples = w.samples().iter().map(|&v| spec.quantize_value(v)).collect();
    Waveform {
        samples,
        sample_rate_hz: w.sample_rate_hz(),
    }
}

/// Mean sample value.
pub fn mean(w: &Waveform) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    Ok(math::compensated_sum(w.samples().iter().copied()) / w.len() as f64)
}

/// Effective voltage: `sqrt(mean(v^2))`.
pub fn rms(w: &Waveform) -> Result<f64> {
    Ok(math::sqrt(mean_square(w)?))
}

/// Population variance: `mean(v^2) - mean(v)^2`, clamped at zero against
/// floating-point cancellation.
pub fn variance(w: &Waveform) -> Result<f64> {
    let ms = mean_square(w)?;
    let m = mean(w)?;
    Ok((ms - m * m).max(0.0))
}

fn mean_square(w: &Waveform) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyWaveform);
    }
    Ok(math::compensated_sum(w.samples().iter().map(|&v| v * v)) / w.len() as f64)
}
