//! Verifier-side registry: enrollment records, fingerprint storage, replay
//! protection, and the verification decision.
//!
//! A registry is a directory:
//!
//! ```text
//! <dir>/devices.idx     index, `version=1` then
//!                       <device_id>,<file>,<theta>,<P>,<max_retries>,<enrolled_at>
//! <dir>/consumed.log    replay log, `version=1` then <device_id>,<timestamp>
//! <dir>/<device_id>.fp  one fingerprint file per device
//! ```
//!
//! Everything is plain text and survives restarts: re-opening the directory
//! reproduces the verifier state, including the consumed-timestamp set.
//!
//! Verification order for an attempt: unknown device, then freshness and
//! replay, then challenge-set consistency (the verifier recomputes the
//! expected probe frequencies from the timestamp; nothing about the
//! challenge is taken from the device), then the RMSE match. A timestamp is
//! consumed once an attempt for it reaches the matching stage, atomically
//! per device, so it can never produce two accepts.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use sensorprint_core::fingerprint::{
    match_partial, schedule_challenges, FullFingerprint, PartialFingerprint, ProbePoint,
};

use crate::error::{valid_device_id, Error, Result};
use crate::fpfile;

/// How far (seconds) an attempt timestamp may lie from the verifier clock.
pub const DEFAULT_FRESHNESS_WINDOW_S: u64 = 30;

/// Default acceptance threshold, volts.
pub const DEFAULT_THETA: f64 = 0.01;

/// Default partial-fingerprint size.
pub const DEFAULT_P: usize = 10;

/// Default total attempts per session (first try plus retries).
pub const DEFAULT_MAX_RETRIES: u32 = 2;

/// One enrolled device.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrollmentRecord {
    pub device_id: String,
    /// Fingerprint file, relative to the registry directory.
    pub fingerprint_file: String,
    pub theta: f64,
    pub p: usize,
    pub max_retries: u32,
    pub enrolled_at: u64,
}

/// One authentication attempt as submitted by a device.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthAttempt {
    pub device_id: String,
    pub timestamp: u64,
    pub points: Vec<ProbePoint>,
    /// 1-based index within the session.
    pub attempt_index: u32,
}

/// Verification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthStatus {
    Accepted,
    Rejected,
    Retry,
    ReplayRejected,
    UnknownDevice,
    MalformedChallengeSet,
}

impl AuthStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuthStatus::Accepted => "Accepted",
            AuthStatus::Rejected => "Rejected",
            AuthStatus::Retry => "Retry",
            AuthStatus::ReplayRejected => "ReplayRejected",
            AuthStatus::UnknownDevice => "UnknownDevice",
            AuthStatus::MalformedChallengeSet => "MalformedChallengeSet",
        }
    }
}

/// Outcome reported back to the device.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthOutcome {
    pub status: AuthStatus,
    /// RMSE of the match; absent when no match was computed.
    pub epsilon: Option<f64>,
    pub attempts_used: u32,
}

struct ConsumedState {
    seen: HashMap<String, HashSet<u64>>,
    log: fs::File,
}

/// Enrollment registry with persistent state.
pub struct Registry {
    dir: PathBuf,
    freshness_window_s: u64,
    records: RwLock<HashMap<String, EnrollmentRecord>>,
    fingerprints: RwLock<HashMap<String, FullFingerprint>>,
    consumed: Mutex<ConsumedState>,
}

impl Registry {
    /// Open (or initialize) a registry directory.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut records = HashMap::new();
        let mut fingerprints = HashMap::new();

        let index_path = dir.join("devices.idx");
        if index_path.exists() {
            let text = fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
            let mut lines = text.lines().enumerate();
            match lines.next() {
                Some((_, "version=1")) => {}
                _ => return Err(Error::parse(&index_path, 1, "expected 'version=1'")),
            }
            for (i, line) in lines {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 6 {
                    return Err(Error::parse(&index_path, i + 1, "expected 6 fields"));
                }
                let record = EnrollmentRecord {
                    device_id: fields[0].to_string(),
                    fingerprint_file: fields[1].to_string(),
                    theta: fields[2]
                        .parse()
                        .map_err(|_| Error::parse(&index_path, i + 1, "bad theta"))?,
                    p: fields[3]
                        .parse()
                        .map_err(|_| Error::parse(&index_path, i + 1, "bad P"))?,
                    max_retries: fields[4]
                        .parse()
                        .map_err(|_| Error::parse(&index_path, i + 1, "bad max_retries"))?,
                    enrolled_at: fields[5]
                        .parse()
                        .map_err(|_| Error::parse(&index_path, i + 1, "bad enrolled_at"))?,
                };
                let fp = fpfile::read_fingerprint(&dir.join(&record.fingerprint_file))?;
                fingerprints.insert(record.device_id.clone(), fp);
                records.insert(record.device_id.clone(), record);
            }
        }

        let consumed_path = dir.join("consumed.log");
        let mut seen: HashMap<String, HashSet<u64>> = HashMap::new();
        if consumed_path.exists() {
            let text =
                fs::read_to_string(&consumed_path).map_err(|e| Error::io(&consumed_path, e))?;
            let mut lines = text.lines().enumerate();
            match lines.next() {
                Some((_, "version=1")) => {}
                _ => return Err(Error::parse(&consumed_path, 1, "expected 'version=1'")),
            }
            for (i, line) in lines {
                if line.trim().is_empty() {
                    continue;
                }
                let (id, ts) = line
                    .split_once(',')
                    .ok_or_else(|| Error::parse(&consumed_path, i + 1, "expected id,timestamp"))?;
                let ts: u64 = ts
                    .parse()
                    .map_err(|_| Error::parse(&consumed_path, i + 1, "bad timestamp"))?;
                seen.entry(id.to_string()).or_default().insert(ts);
            }
        } else {
            fs::write(&consumed_path, "version=1\n").map_err(|e| Error::io(&consumed_path, e))?;
        }
        let log = fs::OpenOptions::new()
            .append(true)
            .open(&consumed_path)
            .map_err(|e| Error::io(&consumed_path, e))?;

        Ok(Self {
            dir: dir.to_path_buf(),
            freshness_window_s: DEFAULT_FRESHNESS_WINDOW_S,
            records: RwLock::new(records),
            fingerprints: RwLock::new(fingerprints),
            consumed: Mutex::new(ConsumedState { seen, log }),
        })
    }

    /// Override the freshness window (seconds).
    pub fn with_freshness_window(mut self, seconds: u64) -> Self {
        self.freshness_window_s = seconds;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record(&self, device_id: &str) -> Option<EnrollmentRecord> {
        self.records.read().unwrap().get(device_id).cloned()
    }

    pub fn device_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.records.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn fingerprint(&self, device_id: &str) -> Option<FullFingerprint> {
        self.fingerprints.read().unwrap().get(device_id).cloned()
    }

    /// Enroll a device from an in-memory fingerprint.
    pub fn enroll_fingerprint(
        &self,
        fingerprint: &FullFingerprint,
        theta: f64,
        p: usize,
        max_retries: u32,
        enrolled_at: u64,
    ) -> Result<EnrollmentRecord> {
        let device_id = fingerprint.device_id.clone();
        if !valid_device_id(&device_id) {
            return Err(Error::InvalidDeviceId { device_id });
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Invalid {
                reason: format!("theta must be positive, got {theta}"),
            });
        }
        if p < 1 || p > fingerprint.grid.len() {
            return Err(Error::Invalid {
                reason: format!("P={p} outside 1..={}", fingerprint.grid.len()),
            });
        }
        if max_retries < 1 {
            return Err(Error::Invalid {
                reason: "max_retries must be at least 1".into(),
            });
        }
        fingerprint.validate()?;

        let mut records = self.records.write().unwrap();
        if records.contains_key(&device_id) {
            return Err(Error::DuplicateDevice { device_id });
        }

        let file = format!("{device_id}.fp");
        fpfile::write_fingerprint(&self.dir.join(&file), fingerprint)?;
        let record = EnrollmentRecord {
            device_id: device_id.clone(),
            fingerprint_file: file,
            theta,
            p,
            max_retries,
            enrolled_at,
        };
        self.append_index_line(&record)?;
        self.fingerprints
            .write()
            .unwrap()
            .insert(device_id.clone(), fingerprint.clone());
        records.insert(device_id, record.clone());
        Ok(record)
    }

    /// Enroll a device from a fingerprint file.
    pub fn enroll_file(
        &self,
        device_id: &str,
        fingerprint_path: &Path,
        theta: f64,
        p: usize,
        max_retries: u32,
        enrolled_at: u64,
    ) -> Result<EnrollmentRecord> {
        let mut fingerprint = fpfile::read_fingerprint(fingerprint_path)?;
        if fingerprint.device_id != device_id {
            return Err(Error::CorruptFingerprint {
                path: fingerprint_path.to_path_buf(),
                reason: format!(
                    "fingerprint belongs to '{}', not '{device_id}'",
                    fingerprint.device_id
                ),
            });
        }
        fingerprint.device_id = device_id.to_string();
        self.enroll_fingerprint(&fingerprint, theta, p, max_retries, enrolled_at)
    }

    fn append_index_line(&self, record: &EnrollmentRecord) -> Result<()> {
        let index_path = self.dir.join("devices.idx");
        let fresh = !index_path.exists();
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&index_path)
            .map_err(|e| Error::io(&index_path, e))?;
        let mut line = String::new();
        if fresh {
            line.push_str("version=1\n");
        }
        line.push_str(&format!(
            "{},{},{},{},{},{}\n",
            record.device_id,
            record.fingerprint_file,
            record.theta,
            record.p,
            record.max_retries,
            record.enrolled_at
        ));
        file.write_all(line.as_bytes())
            .map_err(|e| Error::io(&index_path, e))
    }

    /// Verify one authentication attempt against the registry.
    ///
    /// `now` is the verifier's clock in epoch seconds. All protocol failures
    /// map to statuses; `Err` is reserved for storage faults.
    pub fn verify(&self, attempt: &AuthAttempt, now: u64) -> Result<AuthOutcome> {
        let outcome = |status, epsilon| AuthOutcome {
            status,
            epsilon,
            attempts_used: attempt.attempt_index,
        };

        let Some(record) = self.record(&attempt.device_id) else {
            return Ok(outcome(AuthStatus::UnknownDevice, None));
        };
        if now.abs_diff(attempt.timestamp) > self.freshness_window_s {
            return Ok(outcome(AuthStatus::ReplayRejected, None));
        }
        let fingerprint = self
            .fingerprint(&attempt.device_id)
            .expect("fingerprint exists for every record");

        let expected =
            schedule_challenges(attempt.timestamp, &attempt.device_id, record.p, &fingerprint.grid)?;
        let well_formed = attempt.points.len() == expected.len()
            && attempt
                .points
                .iter()
                .zip(&expected)
                .all(|(point, want)| point.frequency_hz == *want);

        {
            let mut consumed = self.consumed.lock().unwrap();
            if consumed
                .seen
                .get(&attempt.device_id)
                .is_some_and(|set| set.contains(&attempt.timestamp))
            {
                return Ok(outcome(AuthStatus::ReplayRejected, None));
            }
            if !well_formed {
                return Ok(outcome(AuthStatus::MalformedChallengeSet, None));
            }
            // Consume the timestamp for every attempt that reaches matching.
            consumed
                .seen
                .entry(attempt.device_id.clone())
                .or_default()
                .insert(attempt.timestamp);
            let line = format!("{},{}\n", attempt.device_id, attempt.timestamp);
            consumed
                .log
                .write_all(line.as_bytes())
                .map_err(|e| Error::io(self.dir.join("consumed.log"), e))?;
        }

        let partial = PartialFingerprint {
            device_id: attempt.device_id.clone(),
            points: attempt.points.clone(),
            timestamp: attempt.timestamp,
        };
        let result = match_partial(&fingerprint, &partial, record.theta)?;
        let status = if result.accepted {
            AuthStatus::Accepted
        } else if attempt.attempt_index < record.max_retries {
            AuthStatus::Retry
        } else {
            AuthStatus::Rejected
        };
        Ok(outcome(status, Some(result.epsilon)))
    }
}
