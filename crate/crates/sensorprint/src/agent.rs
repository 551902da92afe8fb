//! Device-side agent: measures the local sensor and talks to the verifier.

use std::net::{TcpStream, ToSocketAddrs};
use std::sync::Mutex;

use sensorprint_core::fingerprint::{
    bootstrap, extract_partial, schedule_challenges, FrequencyGrid, FullFingerprint,
};
use sensorprint_core::seed::derive_seed;
use sensorprint_core::sensor::{CaptureSpec, ChallengeTemplate, Environment, SensorInstance};

use crate::error::{Error, Result};
use crate::registry::{AuthAttempt, AuthOutcome};
use crate::wire::{self, EnrollRequest, EnrollResponse, Message};

/// Anything that can produce authentication attempts for a device.
pub trait DeviceAgent {
    fn device_id(&self) -> &str;

    /// Measure the sensor at the probe frequencies scheduled for
    /// `timestamp` and package the readings.
    fn create_attempt(&mut self, timestamp: u64, attempt_index: u32) -> Result<AuthAttempt>;
}

/// Agent over a simulated sensor instance.
pub struct SimulatedAgent {
    device_id: String,
    pub instance: SensorInstance,
    pub grid: FrequencyGrid,
    pub p: usize,
    pub env: Environment,
    pub capture: CaptureSpec,
    pub template: ChallengeTemplate,
    /// Base seed for per-attempt measurement randomness.
    pub measurement_seed: u64,
}

impl SimulatedAgent {
    pub fn new(
        device_id: impl Into<String>,
        instance: SensorInstance,
        grid: FrequencyGrid,
        p: usize,
        measurement_seed: u64,
    ) -> Self {
        let template = instance.model.default_challenge();
        Self {
            device_id: device_id.into(),
            instance,
            grid,
            p,
            env: Environment::room(),
            capture: CaptureSpec::default(),
            template,
            measurement_seed,
        }
    }

    /// Sweep the whole grid and record this device's full fingerprint.
    pub fn bootstrap_fingerprint(&self, n_repeats: u32) -> Result<FullFingerprint> {
        let fp = bootstrap(
            &self.device_id,
            &self.grid,
            n_repeats,
            self.template,
            &self.env,
            |challenge, env, repeat| {
                let seed = derive_seed(
                    self.measurement_seed,
                    "bootstrap",
                    &[challenge.frequency_hz.to_bits(), repeat as u64],
                );
                self.instance.respond(challenge, env, &self.capture, seed)
            },
        )?;
        Ok(fp)
    }
}

impl DeviceAgent for SimulatedAgent {
    fn device_id(&self) -> &str {
        &self.device_id
    }

    fn create_attempt(&mut self, timestamp: u64, attempt_index: u32) -> Result<AuthAttempt> {
        let frequencies = schedule_challenges(timestamp, &self.device_id, self.p, &self.grid)?;
        let partial = extract_partial(
            &self.device_id,
            &frequencies,
            self.template,
            &self.env,
            timestamp,
            |challenge, env| {
                let seed = derive_seed(
                    self.measurement_seed,
                    "attempt",
                    &[timestamp, challenge.frequency_hz.to_bits()],
                );
                self.instance.respond(challenge, env, &self.capture, seed)
            },
        )?;
        Ok(AuthAttempt {
            device_id: self.device_id.clone(),
            timestamp,
            points: partial.points,
            attempt_index,
        })
    }
}

/// Client side of the wire protocol, usable from multiple threads.
pub struct WireClient {
    stream: Mutex<TcpStream>,
}

impl WireClient {
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        Ok(Self {
            stream: Mutex::new(stream),
        })
    }

    fn round_trip(&self, msg: &Message) -> Result<Message> {
        let mut stream = self.stream.lock().unwrap();
        wire::write_message(&mut *stream, msg)?;
        match wire::read_message(&mut *stream)? {
            Some(reply) => Ok(reply),
            None => Err(Error::Frame {
                reason: "connection closed mid-exchange".into(),
            }),
        }
    }

    /// Submit one authentication attempt.
    pub fn authenticate(&self, attempt: &AuthAttempt) -> Result<AuthOutcome> {
        match self.round_trip(&Message::AuthReq(attempt.clone()))? {
            Message::AuthResp(outcome) => Ok(outcome),
            Message::Error(message) => Err(Error::Remote { message }),
            _ => Err(Error::UnexpectedMessage {
                expected: "AUTH_RESP",
            }),
        }
    }

    /// Enroll a fingerprint with the verifier.
    pub fn enroll(
        &self,
        fingerprint: &FullFingerprint,
        theta: f64,
        p: u32,
        max_retries: u32,
    ) -> Result<EnrollResponse> {
        let req = EnrollRequest {
            fingerprint: fingerprint.clone(),
            theta,
            p,
            max_retries,
        };
        match self.round_trip(&Message::EnrollReq(req))? {
            Message::EnrollResp(resp) => Ok(resp),
            Message::Error(message) => Err(Error::Remote { message }),
            _ => Err(Error::UnexpectedMessage {
                expected: "ENROLL_RESP",
            }),
        }
    }
}
