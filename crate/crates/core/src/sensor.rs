//! Parametric simulator of analog sensor circuits.
//!
//! A [`SensorModel`] describes one sensor product: supply and temperature
//! ratings, nominal DC output, temperature slope, a second-order oscillator
//! characterizing its AC behavior, per-parameter process-variation spreads,
//! output noise, and an optional behavioral quirk. [`instantiate`] draws a
//! concrete [`SensorInstance`] whose circuit parameters are perturbed by
//! process variation, deterministically from a seed. [`SensorInstance::respond`]
//! simulates the challenge-response path: a fixed-frequency AC stimulus is
//! applied and the output voltage is captured through an ADC model.
//!
//! All randomness is ChaCha8 seeded from explicit `u64` seeds, with a fixed
//! draw order, so identical inputs give bit-identical outputs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math;
use crate::seed::derive_seed;
use crate::signal::{ConverterSpec, Waveform};
use crate::{Error, Result};

mod presets;

pub use presets::builtin_presets;

/// Second-order oscillator parameters of one circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Resonant frequency of the oscillator, Hz.
    pub resonant_freq_hz: f64,
    /// Damping ratio (dimensionless, > 0).
    pub damping: f64,
    /// Low-frequency magnitude gain (dimensionless, > 0).
    pub gain: f64,
    /// DC output level of this circuit at 25 degC, volts.
    pub output_offset_v: f64,
}

impl CircuitParams {
    /// Magnitude response of the second-order oscillator at `frequency_hz`:
    /// `gain / sqrt((1 - r^2)^2 + (2*zeta*r)^2)` with `r = f / f0`.
    pub fn magnitude_at(&self, frequency_hz: f64) -> f64 {
        let r = frequency_hz / self.resonant_freq_hz;
        let a = 1.0 - r * r;
        let b = 2.0 * self.damping * r;
        self.gain / math::sqrt(a * a + b * b)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.resonant_freq_hz > 0.0
            && self.damping > 0.0
            && self.gain > 0.0
            && self.resonant_freq_hz.is_finite()
            && self.damping.is_finite()
            && self.gain.is_finite()
            && self.output_offset_v.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel {
                reason: "circuit parameters must be finite and positive",
            })
        }
    }
}

/// Relative standard deviation of process variation, per circuit parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamVariation {
    pub resonant_freq: f64,
    pub damping: f64,
    pub gain: f64,
    pub output_offset: f64,
}

impl ParamVariation {
    /// Uniform relative spread on all four parameters.
    pub fn uniform(rel_std: f64) -> Self {
        Self {
            resonant_freq: rel_std,
            damping: rel_std,
            gain: rel_std,
            output_offset: rel_std,
        }
    }

    fn validate(&self) -> Result<()> {
        let vals = [
            self.resonant_freq,
            self.damping,
            self.gain,
            self.output_offset,
        ];
        // Spreads are small fractions; anything near 1 would let a draw flip
        // a parameter's sign and break the circuit invariants.
        if vals.iter().all(|v| v.is_finite() && (0.0..=0.2).contains(v)) {
            Ok(())
        } else {
            Err(Error::InvalidModel {
                reason: "variation spreads must lie in [0, 0.2]",
            })
        }
    }
}

/// Behavioral quirks observed on real parts, reproduced phenomenologically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quirk {
    None,
    /// Output collapses to 0 V for challenge frequencies inside the band.
    ShutdownBand { f_lo_hz: f64, f_hi_hz: f64 },
    /// Above the knee the magnitude response freezes at its knee value.
    FlatHighBand { f_knee_hz: f64 },
    /// AC output is rescaled so the waveform variance never exceeds the cap.
    SaturatingVariance { cap_v2: f64 },
}

/// One sensor product: ratings, nominal behavior, and variation statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub name: String,
    pub supply_min_v: f64,
    pub supply_max_v: f64,
    pub temp_min_c: f64,
    pub temp_max_c: f64,
    /// Nominal DC output at 25 degC, volts.
    pub dc_output_at_25c_v: f64,
    /// Output shift per degree of ambient temperature, volts/degC.
    pub temp_slope_v_per_c: f64,
    pub base_params: CircuitParams,
    pub variation: ParamVariation,
    /// Standard deviation of additive white output noise, volts.
    pub noise_rms_v: f64,
    pub quirk: Quirk,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidModel {
                reason: "model name must not be empty",
            });
        }
        if !(self.supply_min_v < self.supply_max_v) {
            return Err(Error::InvalidModel {
                reason: "supply range requires supply_min < supply_max",
            });
        }
        if !(self.temp_min_c < self.temp_max_c) {
            return Err(Error::InvalidModel {
                reason: "temperature range requires temp_min < temp_max",
            });
        }
        if !(self.noise_rms_v.is_finite() && self.noise_rms_v >= 0.0) {
            return Err(Error::InvalidModel {
                reason: "noise_rms must be non-negative",
            });
        }
        if !(self.dc_output_at_25c_v.is_finite() && self.temp_slope_v_per_c.is_finite()) {
            return Err(Error::InvalidModel {
                reason: "dc output and temperature slope must be finite",
            });
        }
        self.base_params.validate()?;
        self.variation.validate()?;
        match self.quirk {
            Quirk::ShutdownBand { f_lo_hz, f_hi_hz } => {
                if !(f_lo_hz > 0.0 && f_lo_hz <= f_hi_hz) {
                    return Err(Error::InvalidModel {
                        reason: "shutdown band requires 0 < f_lo <= f_hi",
                    });
                }
            }
            Quirk::FlatHighBand { f_knee_hz } => {
                if !(f_knee_hz > 0.0) {
                    return Err(Error::InvalidModel {
                        reason: "flat-band knee must be positive",
                    });
                }
            }
            Quirk::SaturatingVariance { cap_v2 } => {
                if !(cap_v2 >= 0.0) {
                    return Err(Error::InvalidModel {
                        reason: "variance cap must be non-negative",
                    });
                }
            }
            Quirk::None => {}
        }
        Ok(())
    }

    /// Stimulus parameters used by default for this model: 0.3 V amplitude
    /// riding on the minimum rated supply, 16 periods per capture.
    pub fn default_challenge(&self) -> ChallengeTemplate {
        ChallengeTemplate {
            amplitude_v: 0.3,
            offset_v: self.supply_min_v,
            n_periods: 16,
        }
    }
}

/// Ambient conditions during a measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub temperature_c: f64,
    /// Per-measurement jitter of the effective temperature, degC (std dev).
    pub temp_jitter_std_c: f64,
}

impl Environment {
    pub const fn new(temperature_c: f64, temp_jitter_std_c: f64) -> Self {
        Self {
            temperature_c,
            temp_jitter_std_c,
        }
    }

    /// Room temperature with the default 0.25 degC per-measurement jitter.
    pub const fn room() -> Self {
        Self::new(25.0, 0.25)
    }

    fn validate(&self) -> Result<()> {
        if self.temperature_c.is_finite()
            && self.temp_jitter_std_c.is_finite()
            && self.temp_jitter_std_c >= 0.0
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument {
                reason: "environment temperature must be finite, jitter non-negative",
            })
        }
    }
}

/// One AC stimulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Challenge {
    pub frequency_hz: f64,
    pub amplitude_v: f64,
    pub offset_v: f64,
    pub n_periods: u32,
}

impl Challenge {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(Error::InvalidChallenge {
                reason: "frequency must be positive and finite",
            });
        }
        if !(self.amplitude_v.is_finite() && self.amplitude_v >= 0.0) {
            return Err(Error::InvalidChallenge {
                reason: "amplitude must be non-negative and finite",
            });
        }
        if !self.offset_v.is_finite() {
            return Err(Error::InvalidChallenge {
                reason: "offset must be finite",
            });
        }
        if self.n_periods < 1 {
            return Err(Error::InvalidChallenge {
                reason: "n_periods must be at least 1",
            });
        }
        Ok(())
    }
}

/// A challenge with the frequency left open; sweeps fill it per grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChallengeTemplate {
    pub amplitude_v: f64,
    pub offset_v: f64,
    pub n_periods: u32,
}

impl ChallengeTemplate {
    pub fn at(&self, frequency_hz: f64) -> Challenge {
        Challenge {
            frequency_hz,
            amplitude_v: self.amplitude_v,
            offset_v: self.offset_v,
            n_periods: self.n_periods,
        }
    }
}

/// ADC model used to capture responses.
///
/// Captures follow the challenge like an oscilloscope timebase: the sample
/// rate is `samples_per_period * frequency`, so every capture holds an exact
/// integer number of periods with uniform estimator quality across a grid
/// spanning three decades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureSpec {
    pub bits: u32,
    pub v_min: f64,
    pub v_max: f64,
    pub samples_per_period: u32,
}

impl CaptureSpec {
    pub fn new(bits: u32, v_min: f64, v_max: f64, samples_per_period: u32) -> Result<Self> {
        if samples_per_period < 8 {
            return Err(Error::InvalidConverter {
                reason: "captures need at least 8 samples per period",
            });
        }
        // Reuse the converter validation for bits and range.
        ConverterSpec::new(bits, v_min, v_max, 1.0)?;
        Ok(Self {
            bits,
            v_min,
            v_max,
            samples_per_period,
        })
    }

    /// Converter spec for capturing a tone at `frequency_hz`.
    pub fn converter_for(&self, frequency_hz: f64) -> Result<ConverterSpec> {
        ConverterSpec::new(
            self.bits,
            self.v_min,
            self.v_max,
            self.samples_per_period as f64 * frequency_hz,
        )
    }
}

impl Default for CaptureSpec {
    /// 12-bit capture over [0, 3.3] V, 64 samples per period.
    fn default() -> Self {
        Self {
            bits: 12,
            v_min: 0.0,
            v_max: 3.3,
            samples_per_period: 64,
        }
    }
}

/// A concrete sensor: a model plus process-variation-perturbed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorInstance {
    pub instance_id: String,
    pub model: SensorModel,
    pub params: CircuitParams,
    pub seed: u64,
}

/// Draw a sensor instance from a model and a seed.
///
/// Each circuit parameter `p` becomes `base_p * (1 + z * sigma_p)` with `z`
/// standard normal. The generator is ChaCha8 seeded from
/// `derive_seed(seed, model.name, [])`; draws happen in the fixed order
/// resonant frequency, damping, gain, output offset. Identical `(model, seed)`
/// pairs therefore reproduce bit-identical instances.
pub fn instantiate(model: &SensorModel, seed: u64) -> Result<SensorInstance> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &model.name, &[]));
    let mut draw = |base: f64, rel_std: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        base * (1.0 + z * rel_std)
    };
    let params = CircuitParams {
        resonant_freq_hz: draw(model.base_params.resonant_freq_hz, model.variation.resonant_freq),
        damping: draw(model.base_params.damping, model.variation.damping),
        gain: draw(model.base_params.gain, model.variation.gain),
        output_offset_v: draw(model.base_params.output_offset_v, model.variation.output_offset),
    };
    params.validate()?;
    Ok(SensorInstance {
        instance_id: format!("{}-{:016x}", model.name, seed),
        model: model.clone(),
        params,
        seed,
    })
}

impl SensorInstance {
    /// Simulate one challenge-response measurement.
    ///
    /// The output is `dc + H(f) * amplitude * sin(2*pi*f*t) + noise` where
    /// `H` is the instance's oscillator magnitude response and
    /// `dc = output_offset + temp_slope * (T_eff - 25)` with
    /// `T_eff = env.temperature + z * env.temp_jitter_std` drawn once per
    /// measurement. Quirks apply to the clean output, then the waveform is
    /// quantized through the capture ADC.
    ///
    /// Draw order from `measurement_seed` (ChaCha8): the temperature jitter
    /// `z`, then one noise `z` per sample in index order. The same seed and
    /// inputs give a bit-identical waveform.
    pub fn respond(
        &self,
        challenge: &Challenge,
        env: &Environment,
        capture: &CaptureSpec,
        measurement_seed: u64,
    ) -> Result<Waveform> {
        challenge.validate()?;
        env.validate()?;
        if env.temperature_c < self.model.temp_min_c || env.temperature_c > self.model.temp_max_c {
            return Err(Error::OutOfOperatingRange {
                temperature_c: env.temperature_c,
                min_c: self.model.temp_min_c,
                max_c: self.model.temp_max_c,
            });
        }
        let spec = capture.converter_for(challenge.frequency_hz)?;
        let f = challenge.frequency_hz;
        let spp = capture.samples_per_period as usize;
        let count = spp * challenge.n_periods as usize;

        let mut rng = ChaCha8Rng::seed_from_u64(measurement_seed);
        let t_jitter: f64 = StandardNormal.sample(&mut rng);
        let t_eff = env.temperature_c + t_jitter * env.temp_jitter_std_c;
        let dc = self.params.output_offset_v + self.model.temp_slope_v_per_c * (t_eff - 25.0);

        if let Quirk::ShutdownBand { f_lo_hz, f_hi_hz } = self.model.quirk {
            if f >= f_lo_hz && f <= f_hi_hz {
                let zero = spec.quantize_value(0.0);
                return Waveform::new(alloc::vec![zero; count], spec.sample_rate_hz());
            }
        }

        let magnitude = match self.model.quirk {
            Quirk::FlatHighBand { f_knee_hz } if f > f_knee_hz => {
                self.params.magnitude_at(f_knee_hz)
            }
            _ => self.params.magnitude_at(f),
        };
        let mut ac_amp = magnitude * challenge.amplitude_v;
        if let Quirk::SaturatingVariance { cap_v2 } = self.model.quirk {
            let noise_var = self.model.noise_rms_v * self.model.noise_rms_v;
            if ac_amp * ac_amp / 2.0 + noise_var > cap_v2 {
                ac_amp = math::sqrt(2.0 * (cap_v2 - noise_var).max(0.0));
            }
        }

        // One period of the sine, reused across periods: the capture clock is
        // an exact multiple of the challenge frequency.
        let mut period = Vec::with_capacity(spp);
        for j in 0..spp {
            let phase = 2.0 * core::f64::consts::PI * j as f64 / spp as f64;
            period.push(ac_amp * math::sin(phase));
        }

        let noise = self.model.noise_rms_v;
        let mut samples = Vec::with_capacity(count);
        for k in 0..count {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = dc + period[k % spp] + z * noise;
            samples.push(spec.quantize_value(v));
        }
        Waveform::new(samples, spec.sample_rate_hz())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal;

    fn plain_model() -> SensorModel {
        SensorModel {
            name: String::from("plain"),
            supply_min_v: 2.7,
            supply_max_v: 5.5,
            temp_min_c: -40.0,
            temp_max_c: 125.0,
            dc_output_at_25c_v: 0.75,
            temp_slope_v_per_c: 0.01,
            base_params: CircuitParams {
                resonant_freq_hz: 50_000.0,
                damping: 0.5,
                gain: 0.8,
                output_offset_v: 0.75,
            },
            variation: ParamVariation::uniform(0.01),
            noise_rms_v: 0.0,
            quirk: Quirk::None,
        }
    }

    fn quiet_env() -> Environment {
        Environment::new(25.0, 0.0)
    }

    #[test]
    fn zero_variation_reproduces_base_params() {
        let mut model = plain_model();
        model.variation = ParamVariation::default();
        let instance = instantiate(&model, 1234).unwrap();
        assert_eq!(instance.params, model.base_params);
    }

    #[test]
    fn instantiation_is_deterministic() {
        let model = plain_model();
        let a = instantiate(&model, 7).unwrap();
        let b = instantiate(&model, 7).unwrap();
        assert_eq!(a, b);
        let c = instantiate(&model, 8).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn no_stimulus_no_noise_gives_constant_dc() {
        let mut model = plain_model();
        model.variation = ParamVariation::default();
        let instance = instantiate(&model, 0).unwrap();
        let challenge = Challenge {
            frequency_hz: 10_000.0,
            amplitude_v: 0.0,
            offset_v: model.supply_min_v,
            n_periods: 16,
        };
        let capture = CaptureSpec::default();
        let w = instance
            .respond(&challenge, &quiet_env(), &capture, 99)
            .unwrap();
        let spec = capture.converter_for(challenge.frequency_hz).unwrap();
        let expected = spec.quantize_value(model.dc_output_at_25c_v);
        assert!(w.samples().iter().all(|&s| s == expected));
    }

    #[test]
    fn respond_is_deterministic() {
        let model = plain_model();
        let instance = instantiate(&model, 3).unwrap();
        let challenge = model.default_challenge().at(40_000.0);
        let env = Environment::room();
        let capture = CaptureSpec::default();
        let a = instance.respond(&challenge, &env, &capture, 42).unwrap();
        let b = instance.respond(&challenge, &env, &capture, 42).unwrap();
        assert_eq!(a, b);
        let c = instance.respond(&challenge, &env, &capture, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn resonance_beats_double_frequency() {
        let mut model = plain_model();
        model.base_params.damping = 0.1;
        model.variation = ParamVariation::default();
        model.noise_rms_v = 0.0;
        let instance = instantiate(&model, 0).unwrap();
        let capture = CaptureSpec::default();
        let template = model.default_challenge();
        let f0 = model.base_params.resonant_freq_hz;
        let at_res = instance
            .respond(&template.at(f0), &quiet_env(), &capture, 1)
            .unwrap();
        let at_double = instance
            .respond(&template.at(2.0 * f0), &quiet_env(), &capture, 1)
            .unwrap();
        assert!(signal::rms(&at_res).unwrap() > signal::rms(&at_double).unwrap());
    }

    #[test]
    fn out_of_range_temperature_rejected() {
        let model = plain_model();
        let instance = instantiate(&model, 0).unwrap();
        let challenge = model.default_challenge().at(1000.0);
        let env = Environment::new(140.0, 0.0);
        let err = instance
            .respond(&challenge, &env, &CaptureSpec::default(), 0)
            .unwrap_err();
        assert!(matches!(err, Error::OutOfOperatingRange { .. }));
    }

    #[test]
    fn temperature_shift_is_linear() {
        let mut model = plain_model();
        model.variation = ParamVariation::default();
        let instance = instantiate(&model, 0).unwrap();
        // Fine capture so quantization does not mask the slope.
        let capture = CaptureSpec::new(24, 0.0, 3.3, 64).unwrap();
        let challenge = model.default_challenge().at(5000.0);
        let w1 = instance
            .respond(&challenge, &Environment::new(40.0, 0.0), &capture, 5)
            .unwrap();
        let w2 = instance
            .respond(&challenge, &Environment::new(10.0, 0.0), &capture, 5)
            .unwrap();
        let d = signal::mean(&w1).unwrap() - signal::mean(&w2).unwrap();
        let expected = model.temp_slope_v_per_c * 30.0;
        let spec = capture.converter_for(challenge.frequency_hz).unwrap();
        assert!((d - expected).abs() <= 2.0 * spec.step_v(), "d = {d}");
    }

    #[test]
    fn shutdown_band_is_contained() {
        let mut model = plain_model();
        model.quirk = Quirk::ShutdownBand {
            f_lo_hz: 90_000.0,
            f_hi_hz: 110_000.0,
        };
        let mut bare = plain_model();
        bare.quirk = Quirk::None;
        let a = instantiate(&model, 11).unwrap();
        let b = instantiate(&bare, 11).unwrap();
        let capture = CaptureSpec::default();
        let env = Environment::room();
        let template = model.default_challenge();

        let inside = a
            .respond(&template.at(100_000.0), &env, &capture, 17)
            .unwrap();
        assert!(inside.samples().iter().all(|&s| s == 0.0));

        for f in [89_000.0, 90_000.0, 110_000.0, 111_000.0, 500_000.0] {
            let wa = a.respond(&template.at(f), &env, &capture, 17).unwrap();
            let wb = b.respond(&template.at(f), &env, &capture, 17).unwrap();
            if (90_000.0..=110_000.0).contains(&f) {
                assert!(wa.samples().iter().all(|&s| s == 0.0));
            } else {
                assert_eq!(wa, wb, "quirk leaked outside the band at {f} Hz");
            }
        }
    }

    #[test]
    fn variance_cap_is_enforced() {
        let mut model = plain_model();
        model.quirk = Quirk::SaturatingVariance { cap_v2: 1e-6 };
        model.noise_rms_v = 0.0;
        let instance = instantiate(&model, 2).unwrap();
        let capture = CaptureSpec::new(24, 0.0, 3.3, 64).unwrap();
        let env = quiet_env();
        let template = model.default_challenge();
        for f in [1000.0, 30_000.0, 50_000.0, 200_000.0, 1_000_000.0] {
            let w = instance.respond(&template.at(f), &env, &capture, 3).unwrap();
            let var = signal::variance(&w).unwrap();
            assert!(var <= 1e-6 + 1e-9, "variance {var} at {f} Hz");
        }
    }

    #[test]
    fn flat_band_freezes_response() {
        let mut model = plain_model();
        model.quirk = Quirk::FlatHighBand {
            f_knee_hz: 200_000.0,
        };
        model.noise_rms_v = 0.0;
        let instance = instantiate(&model, 4).unwrap();
        let capture = CaptureSpec::new(24, 0.0, 3.3, 64).unwrap();
        let env = quiet_env();
        let template = model.default_challenge();
        let at_knee = instance
            .respond(&template.at(200_000.0), &env, &capture, 5)
            .unwrap();
        let above = instance
            .respond(&template.at(700_000.0), &env, &capture, 5)
            .unwrap();
        let r1 = signal::rms(&at_knee).unwrap();
        let r2 = signal::rms(&above).unwrap();
        assert!((r1 - r2).abs() < 1e-9, "rms {r1} vs {r2}");
    }
}
