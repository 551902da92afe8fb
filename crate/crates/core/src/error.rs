use thiserror::Error;

/// Errors shared by the signal, sensor, and fingerprint layers.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// Requested tone is above the converter's Nyquist limit.
    #[error("frequency {frequency_hz} Hz exceeds the Nyquist limit {nyquist_hz} Hz")]
    NyquistViolation { frequency_hz: f64, nyquist_hz: f64 },

    /// Synthesized waveform would leave the converter's voltage range.
    #[error("waveform spans [{lo} V, {hi} V] outside converter range [{v_min} V, {v_max} V]")]
    RangeViolation {
        lo: f64,
        hi: f64,
        v_min: f64,
        v_max: f64,
    },

    /// Feature extraction on a waveform with no samples.
    #[error("empty waveform")]
    EmptyWaveform,

    /// A sample was NaN or infinite.
    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("invalid converter spec: {reason}")]
    InvalidConverter { reason: &'static str },

    #[error("invalid waveform: {reason}")]
    InvalidWaveform { reason: &'static str },

    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: &'static str },

    #[error("invalid challenge: {reason}")]
    InvalidChallenge { reason: &'static str },

    #[error("invalid sensor model: {reason}")]
    InvalidModel { reason: &'static str },

    /// Ambient temperature outside the sensor's rated range.
    #[error("temperature {temperature_c} \u{b0}C outside operating range [{min_c}, {max_c}] \u{b0}C")]
    OutOfOperatingRange {
        temperature_c: f64,
        min_c: f64,
        max_c: f64,
    },

    #[error("invalid frequency grid: {reason}")]
    InvalidGrid { reason: &'static str },

    /// Probe count outside `1..=N` for a grid of `N` frequencies.
    #[error("invalid probe count P={p} for a grid of {n} frequencies")]
    InvalidP { p: usize, n: usize },

    /// A probe frequency is not one of the grid frequencies.
    #[error("frequency {frequency_hz} Hz is not on the fingerprint grid")]
    FrequencyNotInGrid { frequency_hz: f64 },

    #[error("invalid fingerprint: {reason}")]
    InvalidFingerprint { reason: &'static str },

    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },

    #[error("retry count must be at least 1")]
    InvalidRetryCount,
}
