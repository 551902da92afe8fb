//! Fingerprint data model, bootstrap sweep, challenge scheduling, and
//! RMSE matching.
//!
//! A full fingerprint records, for every frequency of a [`FrequencyGrid`],
//! the mean RMS, mean variance, and RMS spread over repeated measurements.
//! A partial fingerprint holds single-shot RMS readings at `P` probe
//! frequencies. Matching computes the root-mean-square error between the
//! partial readings and the enrolled means at the same frequencies and
//! accepts when it does not exceed a threshold.
//!
//! Probe frequencies are derived from a timestamp without any transmission
//! of the challenge: both sides hash the timestamp and device id with
//! SHA-256 and map the digest words onto grid indices (see
//! [`schedule_challenges`] for the byte-exact rule).

use alloc::string::String;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::math;
use crate::sensor::{Challenge, ChallengeTemplate, Environment};
use crate::signal::{ResponseStats, Waveform};
use crate::{Error, Result};

/// Uniform frequency grid `f_min, f_min + step, ..., f_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    f_min_hz: f64,
    f_max_hz: f64,
    step_hz: f64,
    len: usize,
}

impl FrequencyGrid {
    /// Build a grid. `f_min` and `step` must be positive and `f_max - f_min`
    /// an integer multiple of `step`.
    pub fn new(f_min_hz: f64, f_max_hz: f64, step_hz: f64) -> Result<Self> {
        if !(f_min_hz.is_finite() && f_min_hz > 0.0) {
            return Err(Error::InvalidGrid {
                reason: "f_min must be positive and finite",
            });
        }
        if !(step_hz.is_finite() && step_hz > 0.0) {
            return Err(Error::InvalidGrid {
                reason: "step must be positive and finite",
            });
        }
        if !(f_max_hz.is_finite() && f_max_hz >= f_min_hz) {
            return Err(Error::InvalidGrid {
                reason: "f_max must be finite and not below f_min",
            });
        }
        let steps = (f_max_hz - f_min_hz) / step_hz;
        let rounded = math::round(steps);
        if (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidGrid {
                reason: "f_max - f_min must be an integer multiple of step",
            });
        }
        Ok(Self {
            f_min_hz,
            f_max_hz,
            step_hz,
            len: rounded as usize + 1,
        })
    }

    pub fn f_min_hz(&self) -> f64 {
        self.f_min_hz
    }

    pub fn f_max_hz(&self) -> f64 {
        self.f_max_hz
    }

    pub fn step_hz(&self) -> f64 {
        self.step_hz
    }

    /// Number of grid frequencies.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency of grid index `idx` (must be `< len`).
    pub fn frequency(&self, idx: usize) -> f64 {
        debug_assert!(idx < self.len);
        self.f_min_hz + idx as f64 * self.step_hz
    }

    /// Index of a frequency, if it lies on the grid.
    pub fn index_of(&self, frequency_hz: f64) -> Option<usize> {
        if !frequency_hz.is_finite() {
            return None;
        }
        let pos = (frequency_hz - self.f_min_hz) / self.step_hz;
        let idx = math::round(pos);
        if idx < 0.0 || idx as usize >= self.len {
            return None;
        }
        let exact = self.frequency(idx as usize);
        if (frequency_hz - exact).abs() <= 1e-9 * exact.abs().max(1.0) {
            Some(idx as usize)
        } else {
            None
        }
    }

    pub fn contains(&self, frequency_hz: f64) -> bool {
        self.index_of(frequency_hz).is_some()
    }

    /// Iterate the grid frequencies in ascending order.
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.frequency(i))
    }
}

impl Default for FrequencyGrid {
    /// 1 kHz to 1 MHz in 1 kHz steps (1000 frequencies).
    fn default() -> Self {
        Self::new(1_000.0, 1_000_000.0, 1_000.0).expect("default grid is valid")
    }
}

/// Aggregated response at one grid frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerprintEntry {
    pub frequency_hz: f64,
    pub mean_rms_v: f64,
    pub mean_variance_v2: f64,
    pub std_rms_v: f64,
}

/// The complete sweep recorded at enrollment.
#[derive(Debug, Clone, PartialEq)]
pub struct FullFingerprint {
    pub device_id: String,
    pub grid: FrequencyGrid,
    /// One entry per grid frequency, ascending.
    pub entries: Vec<FingerprintEntry>,
    pub n_repeats: u32,
    pub bootstrap_temperature_c: f64,
}

impl FullFingerprint {
    /// Check the one-entry-per-grid-frequency invariant.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.grid.len() {
            return Err(Error::InvalidFingerprint {
                reason: "entry count does not match the grid",
            });
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.frequency_hz != self.grid.frequency(i) {
                return Err(Error::InvalidFingerprint {
                    reason: "entry frequencies must follow the grid in order",
                });
            }
            if !(e.std_rms_v >= 0.0) || !e.mean_rms_v.is_finite() || !e.mean_variance_v2.is_finite()
            {
                return Err(Error::InvalidFingerprint {
                    reason: "entry statistics must be finite with std >= 0",
                });
            }
        }
        if self.n_repeats < 1 {
            return Err(Error::InvalidFingerprint {
                reason: "n_repeats must be at least 1",
            });
        }
        Ok(())
    }

    /// Mean RMS at a grid frequency.
    pub fn mean_rms_at(&self, frequency_hz: f64) -> Option<f64> {
        self.grid
            .index_of(frequency_hz)
            .map(|i| self.entries[i].mean_rms_v)
    }
}

/// One probe reading of a partial fingerprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbePoint {
    pub frequency_hz: f64,
    pub rms_v: f64,
}

/// A small set of single-shot probe readings recorded in the field.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFingerprint {
    pub device_id: String,
    pub points: Vec<ProbePoint>,
    /// Seconds since epoch at which the probe set was scheduled.
    pub timestamp: u64,
}

/// Outcome of matching a partial fingerprint against a full one.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Root-mean-square error between probe readings and enrolled means.
    pub epsilon: f64,
    /// Acceptance threshold the decision was made against.
    pub theta: f64,
    /// `epsilon <= theta`.
    pub accepted: bool,
    /// Signed residual (enrolled mean minus probe reading) per point.
    pub per_point_residuals: Vec<f64>,
}

/// Sweep the grid and record a full fingerprint.
///
/// For every grid frequency, `measure` is called `n_repeats` times with the
/// challenge, the environment, and the repeat index; the entry stores the
/// mean RMS, mean variance, and population standard deviation of the RMS
/// over the repeats. Entries are ordered by ascending frequency.
pub fn bootstrap<F>(
    device_id: &str,
    grid: &FrequencyGrid,
    n_repeats: u32,
    template: ChallengeTemplate,
    env: &Environment,
    mut measure: F,
) -> Result<FullFingerprint>
where
    F: FnMut(&Challenge, &Environment, u32) -> Result<Waveform>,
{
    if n_repeats < 1 {
        return Err(Error::InvalidArgument {
            reason: "bootstrap needs at least one repeat per frequency",
        });
    }
    let mut entries = Vec::with_capacity(grid.len());
    let mut rms_values = Vec::with_capacity(n_repeats as usize);
    for frequency_hz in grid.frequencies() {
        let challenge = template.at(frequency_hz);
        rms_values.clear();
        let mut var_sum = 0.0;
        for repeat in 0..n_repeats {
            let waveform = measure(&challenge, env, repeat)?;
            let stats = ResponseStats::from_waveform(&waveform)?;
            rms_values.push(stats.rms_v);
            var_sum += stats.variance_v2;
        }
        let n = n_repeats as f64;
        // Identical repeats must aggregate to the identical value with zero
        // spread; (r + r + r) / 3 rounds away from r for most r.
        let all_equal = rms_values.iter().all(|r| *r == rms_values[0]);
        let mean_rms = if all_equal {
            rms_values[0]
        } else {
            math::compensated_sum(rms_values.iter().copied()) / n
        };
        let spread = if all_equal {
            0.0
        } else {
            rms_values
                .iter()
                .map(|r| (r - mean_rms) * (r - mean_rms))
                .sum::<f64>()
                / n
        };
        entries.push(FingerprintEntry {
            frequency_hz,
            mean_rms_v: mean_rms,
            mean_variance_v2: var_sum / n,
            std_rms_v: math::sqrt(spread),
        });
    }
    Ok(FullFingerprint {
        device_id: String::from(device_id),
        grid: *grid,
        entries,
        n_repeats,
        bootstrap_temperature_c: env.temperature_c,
    })
}

/// Derive the probe frequencies for `(timestamp, device_id)`.
///
/// Byte-exact rule: `digest = SHA-256(device_id bytes || 0x00 || timestamp
/// as 8-byte big-endian)`. The digest is read as consecutive 4-byte
/// big-endian words; when the words run out the stream continues with
/// `digest = SHA-256(digest)`. Each word maps to grid index `word mod N`;
/// indices are taken in stream order, skipping duplicates, until `P`
/// distinct indices are collected. Returns their frequencies in collection
/// order.
pub fn schedule_challenges(
    timestamp: u64,
    device_id: &str,
    p: usize,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    let n = grid.len();
    if p < 1 || p > n {
        return Err(Error::InvalidP { p, n });
    }
    let mut digest = {
        let mut hasher = Sha256::new();
        hasher.update(device_id.as_bytes());
        hasher.update([0u8]);
        hasher.update(timestamp.to_be_bytes());
        hasher.finalize()
    };
    let mut chosen = Vec::with_capacity(p);
    let mut taken = alloc::vec![false; n];
    let mut pos = 0usize;
    while chosen.len() < p {
        if pos + 4 > digest.len() {
            digest = Sha256::digest(digest);
            pos = 0;
        }
        let word = u32::from_be_bytes(digest[pos..pos + 4].try_into().expect("4 bytes"));
        pos += 4;
        let idx = (word as usize) % n;
        if !taken[idx] {
            taken[idx] = true;
            chosen.push(grid.frequency(idx));
        }
    }
    Ok(chosen)
}

/// Record a partial fingerprint: one single-shot measurement per frequency.
pub fn extract_partial<F>(
    device_id: &str,
    frequencies: &[f64],
    template: ChallengeTemplate,
    env: &Environment,
    timestamp: u64,
    mut measure: F,
) -> Result<PartialFingerprint>
where
    F: FnMut(&Challenge, &Environment) -> Result<Waveform>,
{
    if frequencies.is_empty() {
        return Err(Error::InvalidP { p: 0, n: 0 });
    }
    for (i, f) in frequencies.iter().enumerate() {
        if frequencies[..i].contains(f) {
            return Err(Error::InvalidArgument {
                reason: "probe frequencies must be pairwise distinct",
            });
        }
    }
    let mut points = Vec::with_capacity(frequencies.len());
    for &frequency_hz in frequencies {
        let challenge = template.at(frequency_hz);
        let waveform = measure(&challenge, env)?;
        let stats = ResponseStats::from_waveform(&waveform)?;
        points.push(ProbePoint {
            frequency_hz,
            rms_v: stats.rms_v,
        });
    }
    Ok(PartialFingerprint {
        device_id: String::from(device_id),
        points,
        timestamp,
    })
}

/// Match a partial fingerprint against a full one.
///
/// `epsilon = sqrt(mean((enrolled_mean_p - probe_p)^2))` over the probe
/// points; the attempt is accepted when `epsilon <= theta`. Device ids are
/// not compared: matching a foreign partial fingerprint is how impostors
/// are measured.
pub fn match_partial(
    full: &FullFingerprint,
    partial: &PartialFingerprint,
    theta: f64,
) -> Result<MatchResult> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::InvalidArgument {
            reason: "theta must be non-negative and finite",
        });
    }
    if partial.points.is_empty() {
        return Err(Error::InvalidP {
            p: 0,
            n: full.grid.len(),
        });
    }
    let mut residuals = Vec::with_capacity(partial.points.len());
    for point in &partial.points {
        let idx = full
            .grid
            .index_of(point.frequency_hz)
            .ok_or(Error::FrequencyNotInGrid {
                frequency_hz: point.frequency_hz,
            })?;
        residuals.push(full.entries[idx].mean_rms_v - point.rms_v);
    }
    let epsilon = math::sqrt(
        math::compensated_sum(residuals.iter().map(|r| r * r)) / residuals.len() as f64,
    );
    Ok(MatchResult {
        epsilon,
        theta,
        accepted: epsilon <= theta,
        per_point_residuals: residuals,
    })
}

/// Probability that `k` independent authentication attempts all fail, given
/// the single-attempt false-negative rate: `fn_rate^k`.
pub fn expected_fn_after_retries(fn_rate: f64, k: u32) -> Result<f64> {
    if !(fn_rate.is_finite() && (0.0..=1.0).contains(&fn_rate)) {
        return Err(Error::InvalidProbability { value: fn_rate });
    }
    if k < 1 {
        return Err(Error::InvalidRetryCount);
    }
    Ok(math::powi(fn_rate, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal;
    use alloc::vec;

    fn constant_waveform(level: f64) -> Waveform {
        Waveform::new(vec![level; 64], 64_000.0).unwrap()
    }

    fn template() -> ChallengeTemplate {
        ChallengeTemplate {
            amplitude_v: 0.3,
            offset_v: 2.7,
            n_periods: 16,
        }
    }

    fn small_grid() -> FrequencyGrid {
        FrequencyGrid::new(1_000.0, 16_000.0, 1_000.0).unwrap()
    }

    #[test]
    fn default_grid_has_1000_points() {
        let grid = FrequencyGrid::default();
        assert_eq!(grid.len(), 1000);
        assert_eq!(grid.frequency(0), 1_000.0);
        assert_eq!(grid.frequency(999), 1_000_000.0);
        assert_eq!(grid.index_of(473_000.0), Some(472));
        assert_eq!(grid.index_of(473_500.0), None);
        assert_eq!(grid.index_of(2_000_000.0), None);
    }

    #[test]
    fn misaligned_grid_rejected() {
        let err = FrequencyGrid::new(1_000.0, 10_500.0, 1_000.0).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid { .. }));
    }

    #[test]
    fn bootstrap_records_every_grid_point() {
        let grid = small_grid();
        let env = Environment::new(25.0, 0.0);
        let fp = bootstrap("dev", &grid, 3, template(), &env, |c, _, _| {
            Ok(constant_waveform(c.frequency_hz / 1e6))
        })
        .unwrap();
        fp.validate().unwrap();
        assert_eq!(fp.entries.len(), 16);
        assert_eq!(fp.n_repeats, 3);
        assert_eq!(fp.bootstrap_temperature_c, 25.0);
        // Deterministic repeats: zero spread everywhere.
        assert!(fp.entries.iter().all(|e| e.std_rms_v == 0.0));
        // Ascending frequencies.
        for (i, e) in fp.entries.iter().enumerate() {
            assert_eq!(e.frequency_hz, grid.frequency(i));
        }
    }

    #[test]
    fn bootstrap_single_repeat_has_zero_std() {
        let grid = small_grid();
        let env = Environment::new(25.0, 0.0);
        let mut call = 0u64;
        let fp = bootstrap("dev", &grid, 1, template(), &env, |_, _, _| {
            call += 1;
            Ok(constant_waveform(call as f64))
        })
        .unwrap();
        assert!(fp.entries.iter().all(|e| e.std_rms_v == 0.0));
    }

    #[test]
    fn bootstrap_propagates_measurement_errors() {
        let grid = small_grid();
        let env = Environment::new(25.0, 0.0);
        let err = bootstrap("dev", &grid, 1, template(), &env, |_, _, _| {
            Err(Error::OutOfOperatingRange {
                temperature_c: 200.0,
                min_c: -40.0,
                max_c: 125.0,
            })
        })
        .unwrap_err();
        assert!(matches!(err, Error::OutOfOperatingRange { .. }));
    }

    #[test]
    fn schedule_is_deterministic_and_distinct() {
        let grid = FrequencyGrid::default();
        let a = schedule_challenges(1_700_000_000, "sensor-A", 10, &grid).unwrap();
        let b = schedule_challenges(1_700_000_000, "sensor-A", 10, &grid).unwrap();
        assert_eq!(a, b);
        for (i, f) in a.iter().enumerate() {
            assert!(grid.contains(*f));
            assert!(!a[..i].contains(f));
        }
    }

    #[test]
    fn schedule_covers_grid_when_p_equals_n() {
        let grid = FrequencyGrid::new(1_000.0, 16_000.0, 1_000.0).unwrap();
        let mut all = schedule_challenges(42, "dev", 16, &grid).unwrap();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected: Vec<f64> = grid.frequencies().collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn schedule_rejects_bad_p() {
        let grid = small_grid();
        assert!(matches!(
            schedule_challenges(1, "dev", 0, &grid),
            Err(Error::InvalidP { p: 0, n: 16 })
        ));
        assert!(matches!(
            schedule_challenges(1, "dev", 17, &grid),
            Err(Error::InvalidP { p: 17, n: 16 })
        ));
    }

    #[test]
    fn extract_partial_rejects_empty_and_duplicates() {
        let env = Environment::new(25.0, 0.0);
        let err = extract_partial("dev", &[], template(), &env, 0, |_, _| {
            Ok(constant_waveform(1.0))
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidP { p: 0, .. }));

        let err = extract_partial("dev", &[1000.0, 1000.0], template(), &env, 0, |_, _| {
            Ok(constant_waveform(1.0))
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument { .. }));
    }

    #[test]
    fn match_identity_gives_zero_epsilon() {
        let grid = small_grid();
        let env = Environment::new(25.0, 0.0);
        let measure = |c: &Challenge, _: &Environment| Ok(constant_waveform(c.frequency_hz / 1e5));
        let full = bootstrap("dev", &grid, 3, template(), &env, |c, e, _| measure(c, e)).unwrap();
        let freqs: Vec<f64> = [2_000.0, 5_000.0, 11_000.0].to_vec();
        let partial = extract_partial("dev", &freqs, template(), &env, 7, measure).unwrap();
        let m = match_partial(&full, &partial, 0.01).unwrap();
        assert_eq!(m.epsilon, 0.0);
        assert!(m.accepted);
        assert_eq!(m.per_point_residuals, vec![0.0; 3]);
    }

    #[test]
    fn match_epsilon_hand_value() {
        let grid = FrequencyGrid::new(1_000.0, 2_000.0, 1_000.0).unwrap();
        let full = FullFingerprint {
            device_id: String::from("dev"),
            grid,
            entries: vec![
                FingerprintEntry {
                    frequency_hz: 1_000.0,
                    mean_rms_v: 1.0,
                    mean_variance_v2: 0.0,
                    std_rms_v: 0.0,
                },
                FingerprintEntry {
                    frequency_hz: 2_000.0,
                    mean_rms_v: 2.0,
                    mean_variance_v2: 0.0,
                    std_rms_v: 0.0,
                },
            ],
            n_repeats: 1,
            bootstrap_temperature_c: 25.0,
        };
        let partial = PartialFingerprint {
            device_id: String::from("dev"),
            points: vec![
                ProbePoint {
                    frequency_hz: 1_000.0,
                    rms_v: 2.0,
                },
                ProbePoint {
                    frequency_hz: 2_000.0,
                    rms_v: 3.0,
                },
            ],
            timestamp: 0,
        };
        let m = match_partial(&full, &partial, 0.01).unwrap();
        assert_eq!(m.epsilon, 1.0);
        assert!(!m.accepted);

        let m = match_partial(&full, &partial, 1.0).unwrap();
        assert!(m.accepted, "threshold comparison is inclusive");
    }

    #[test]
    fn match_rejects_off_grid_frequency() {
        let grid = small_grid();
        let env = Environment::new(25.0, 0.0);
        let full = bootstrap("dev", &grid, 1, template(), &env, |_, _, _| {
            Ok(constant_waveform(1.0))
        })
        .unwrap();
        let partial = PartialFingerprint {
            device_id: String::from("dev"),
            points: vec![ProbePoint {
                frequency_hz: 1_500.0,
                rms_v: 1.0,
            }],
            timestamp: 0,
        };
        let err = match_partial(&full, &partial, 0.01).unwrap_err();
        assert!(matches!(err, Error::FrequencyNotInGrid { .. }));
    }

    #[test]
    fn retry_arithmetic() {
        assert_eq!(expected_fn_after_retries(0.0, 3).unwrap(), 0.0);
        assert_eq!(expected_fn_after_retries(0.4, 1).unwrap(), 0.4);
        assert_eq!(
            expected_fn_after_retries(0.029, 2).unwrap(),
            0.029f64 * 0.029f64
        );
        assert!(matches!(
            expected_fn_after_retries(1.5, 2),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(matches!(
            expected_fn_after_retries(0.5, 0),
            Err(Error::InvalidRetryCount)
        ));
    }

    #[test]
    fn noiseless_self_match_is_exact() {
        // Simulator-backed self match: partial equals bootstrap means exactly.
        use crate::sensor::{instantiate, CaptureSpec, SensorModel};
        let mut model = SensorModel::preset("LM61").unwrap();
        model.noise_rms_v = 0.0;
        let instance = instantiate(&model, 9).unwrap();
        let env = Environment::new(25.0, 0.0);
        let capture = CaptureSpec::default();
        let grid = FrequencyGrid::new(10_000.0, 100_000.0, 10_000.0).unwrap();
        let template = model.default_challenge();
        let full = bootstrap("lm61-9", &grid, 3, template, &env, |c, e, _| {
            instance.respond(c, e, &capture, 0)
        })
        .unwrap();
        let freqs = schedule_challenges(1_700_000_000, "lm61-9", 4, &grid).unwrap();
        let partial = extract_partial("lm61-9", &freqs, template, &env, 1_700_000_000, |c, e| {
            instance.respond(c, e, &capture, 0)
        })
        .unwrap();
        let m = match_partial(&full, &partial, 0.01).unwrap();
        assert_eq!(m.epsilon, 0.0);
        // And the probe values equal the stored means bit-for-bit.
        for p in &partial.points {
            assert_eq!(full.mean_rms_at(p.frequency_hz), Some(p.rms_v));
        }
    }
}
