//! Binary wire protocol between device agents and the verifier.
//!
//! Frames ride on a reliable byte stream (TCP). Every frame is:
//!
//! ```text
//! offset  size  field
//! 0       4     length L, u32 big-endian: bytes after this field
//! 4       1     message type
//! 5       L-1   payload
//! ```
//!
//! Message types: `0x01` ENROLL_REQ, `0x02` ENROLL_RESP, `0x03` AUTH_REQ,
//! `0x04` AUTH_RESP, `0x7F` ERROR. Frames longer than 16 MiB are rejected.
//!
//! Payload fields are fixed-order, big-endian; reals are 8-byte IEEE-754
//! doubles (bit pattern, big-endian); strings are a u16 length followed by
//! UTF-8 bytes.
//!
//! ENROLL_REQ:
//! `device_id: str` `theta: f64` `p: u32` `max_retries: u32`
//! `grid_f_min: f64` `grid_f_max: f64` `grid_step: f64` `n_repeats: u32`
//! `bootstrap_temperature_c: f64` `n_entries: u32` then per grid frequency,
//! ascending: `mean_rms: f64` `mean_var: f64` `std_rms: f64`.
//!
//! ENROLL_RESP: `status: u8` (0 ok, 1 duplicate, 2 corrupt, 3 invalid)
//! `detail: str`.
//!
//! AUTH_REQ: `device_id: str` `timestamp: u64` `attempt_index: u32`
//! `n_points: u32` then per point: `frequency: f64` `rms: f64`.
//!
//! AUTH_RESP: `status: u8` (0 Accepted, 1 Rejected, 2 Retry,
//! 3 ReplayRejected, 4 UnknownDevice, 5 MalformedChallengeSet)
//! `has_epsilon: u8` `epsilon: f64` (present only when `has_epsilon` is 1)
//! `attempts_used: u32`.
//!
//! ERROR: `message: str`.

use std::io::{Read, Write};

use sensorprint_core::fingerprint::{
    FingerprintEntry, FrequencyGrid, FullFingerprint, ProbePoint,
};

use crate::error::{Error, Result};
use crate::registry::{AuthAttempt, AuthOutcome, AuthStatus};

pub const MAX_FRAME_LEN: u32 = 16 * 1024 * 1024;

pub const TYPE_ENROLL_REQ: u8 = 0x01;
pub const TYPE_ENROLL_RESP: u8 = 0x02;
pub const TYPE_AUTH_REQ: u8 = 0x03;
pub const TYPE_AUTH_RESP: u8 = 0x04;
pub const TYPE_ERROR: u8 = 0x7f;

/// Enrollment request: fingerprint plus verifier policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrollRequest {
    pub fingerprint: FullFingerprint,
    pub theta: f64,
    pub p: u32,
    pub max_retries: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnrollStatus {
    Ok,
    Duplicate,
    Corrupt,
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnrollResponse {
    pub status: EnrollStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    EnrollReq(EnrollRequest),
    EnrollResp(EnrollResponse),
    AuthReq(AuthAttempt),
    AuthResp(AuthOutcome),
    Error(String),
}

fn frame_err(reason: impl Into<String>) -> Error {
    Error::Frame {
        reason: reason.into(),
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(frame_err("truncated payload"));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn str(&mut self) -> Result<String> {
        let len = self.u16()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| frame_err("string is not UTF-8"))
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(frame_err("trailing bytes in payload"))
        }
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    let len: u16 = s
        .len()
        .try_into()
        .map_err(|_| frame_err("string longer than 65535 bytes"))?;
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_bits().to_be_bytes());
}

/// Serialize a message into a full frame (length prefix included).
pub fn encode_frame(msg: &Message) -> Result<Vec<u8>> {
    let mut body = Vec::new();
    match msg {
        Message::EnrollReq(req) => {
            body.push(TYPE_ENROLL_REQ);
            let fp = &req.fingerprint;
            put_str(&mut body, &fp.device_id)?;
            put_f64(&mut body, req.theta);
            body.extend_from_slice(&req.p.to_be_bytes());
            body.extend_from_slice(&req.max_retries.to_be_bytes());
            put_f64(&mut body, fp.grid.f_min_hz());
            put_f64(&mut body, fp.grid.f_max_hz());
            put_f64(&mut body, fp.grid.step_hz());
            body.extend_from_slice(&fp.n_repeats.to_be_bytes());
            put_f64(&mut body, fp.bootstrap_temperature_c);
            let n: u32 = fp
                .entries
                .len()
                .try_into()
                .map_err(|_| frame_err("too many entries"))?;
            body.extend_from_slice(&n.to_be_bytes());
            for e in &fp.entries {
                put_f64(&mut body, e.mean_rms_v);
                put_f64(&mut body, e.mean_variance_v2);
                put_f64(&mut body, e.std_rms_v);
            }
        }
        Message::EnrollResp(resp) => {
            body.push(TYPE_ENROLL_RESP);
            body.push(match resp.status {
                EnrollStatus::Ok => 0,
                EnrollStatus::Duplicate => 1,
                EnrollStatus::Corrupt => 2,
                EnrollStatus::Invalid => 3,
            });
            put_str(&mut body, &resp.detail)?;
        }
        Message::AuthReq(attempt) => {
            body.push(TYPE_AUTH_REQ);
            put_str(&mut body, &attempt.device_id)?;
            body.extend_from_slice(&attempt.timestamp.to_be_bytes());
            body.extend_from_slice(&attempt.attempt_index.to_be_bytes());
            let n: u32 = attempt
                .points
                .len()
                .try_into()
                .map_err(|_| frame_err("too many points"))?;
            body.extend_from_slice(&n.to_be_bytes());
            for p in &attempt.points {
                put_f64(&mut body, p.frequency_hz);
                put_f64(&mut body, p.rms_v);
            }
        }
        Message::AuthResp(outcome) => {
            body.push(TYPE_AUTH_RESP);
            body.push(match outcome.status {
                AuthStatus::Accepted => 0,
                AuthStatus::Rejected => 1,
                AuthStatus::Retry => 2,
                AuthStatus::ReplayRejected => 3,
                AuthStatus::UnknownDevice => 4,
                AuthStatus::MalformedChallengeSet => 5,
            });
            match outcome.epsilon {
                Some(e) => {
                    body.push(1);
                    put_f64(&mut body, e);
                }
                None => body.push(0),
            }
            body.extend_from_slice(&outcome.attempts_used.to_be_bytes());
        }
        Message::Error(message) => {
            body.push(TYPE_ERROR);
            put_str(&mut body, message)?;
        }
    }
    let len: u32 = body
        .len()
        .try_into()
        .map_err(|_| frame_err("frame too large"))?;
    if len > MAX_FRAME_LEN {
        return Err(frame_err("frame too large"));
    }
    let mut frame = Vec::with_capacity(4 + body.len());
    frame.extend_from_slice(&len.to_be_bytes());
    frame.extend_from_slice(&body);
    Ok(frame)
}

/// Parse one frame body (everything after the length prefix).
pub fn decode_body(body: &[u8]) -> Result<Message> {
    if body.is_empty() {
        return Err(frame_err("empty frame"));
    }
    let mut c = Cursor {
        buf: body,
        pos: 1,
    };
    let msg = match body[0] {
        TYPE_ENROLL_REQ => {
            let device_id = c.str()?;
            let theta = c.f64()?;
            let p = c.u32()?;
            let max_retries = c.u32()?;
            let f_min = c.f64()?;
            let f_max = c.f64()?;
            let step = c.f64()?;
            let n_repeats = c.u32()?;
            let bootstrap_temperature_c = c.f64()?;
            let n = c.u32()? as usize;
            let grid = FrequencyGrid::new(f_min, f_max, step)
                .map_err(|e| frame_err(format!("bad grid: {e}")))?;
            if n != grid.len() {
                return Err(frame_err("entry count does not match the grid"));
            }
            let mut entries = Vec::with_capacity(n);
            for i in 0..n {
                entries.push(FingerprintEntry {
                    frequency_hz: grid.frequency(i),
                    mean_rms_v: c.f64()?,
                    mean_variance_v2: c.f64()?,
                    std_rms_v: c.f64()?,
                });
            }
            Message::EnrollReq(EnrollRequest {
                fingerprint: FullFingerprint {
                    device_id,
                    grid,
                    entries,
                    n_repeats,
                    bootstrap_temperature_c,
                },
                theta,
                p,
                max_retries,
            })
        }
        TYPE_ENROLL_RESP => {
            let status = match c.u8()? {
                0 => EnrollStatus::Ok,
                1 => EnrollStatus::Duplicate,
                2 => EnrollStatus::Corrupt,
                3 => EnrollStatus::Invalid,
                s => return Err(frame_err(format!("unknown enroll status {s}"))),
            };
            let detail = c.str()?;
            Message::EnrollResp(EnrollResponse { status, detail })
        }
        TYPE_AUTH_REQ => {
            let device_id = c.str()?;
            let timestamp = c.u64()?;
            let attempt_index = c.u32()?;
            let n = c.u32()? as usize;
            if n > 1_000_000 {
                return Err(frame_err("unreasonable point count"));
            }
            let mut points = Vec::with_capacity(n);
            for _ in 0..n {
                points.push(ProbePoint {
                    frequency_hz: c.f64()?,
                    rms_v: c.f64()?,
                });
            }
            Message::AuthReq(AuthAttempt {
                device_id,
                timestamp,
                points,
                attempt_index,
            })
        }
        TYPE_AUTH_RESP => {
            let status = match c.u8()? {
                0 => AuthStatus::Accepted,
                1 => AuthStatus::Rejected,
                2 => AuthStatus::Retry,
                3 => AuthStatus::ReplayRejected,
                4 => AuthStatus::UnknownDevice,
                5 => AuthStatus::MalformedChallengeSet,
                s => return Err(frame_err(format!("unknown auth status {s}"))),
            };
            let epsilon = match c.u8()? {
                0 => None,
                1 => Some(c.f64()?),
                b => return Err(frame_err(format!("bad epsilon flag {b}"))),
            };
            let attempts_used = c.u32()?;
            Message::AuthResp(AuthOutcome {
                status,
                epsilon,
                attempts_used,
            })
        }
        TYPE_ERROR => Message::Error(c.str()?),
        t => return Err(frame_err(format!("unknown message type {t:#04x}"))),
    };
    c.finish()?;
    Ok(msg)
}

/// Write one message as a frame.
pub fn write_message<W: Write>(writer: &mut W, msg: &Message) -> Result<()> {
    let frame = encode_frame(msg)?;
    writer.write_all(&frame)?;
    writer.flush()?;
    Ok(())
}

/// Read one message. Returns `Ok(None)` on clean EOF before a frame starts.
pub fn read_message<R: Read>(reader: &mut R) -> Result<Option<Message>> {
    let mut len_buf = [0u8; 4];
    match reader.read_exact(&mut len_buf) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len_buf);
    if len == 0 {
        return Err(frame_err("zero-length frame"));
    }
    if len > MAX_FRAME_LEN {
        return Err(frame_err(format!("frame of {len} bytes exceeds the limit")));
    }
    let mut body = vec![0u8; len as usize];
    reader.read_exact(&mut body)?;
    decode_body(&body).map(Some)
}
