//! Authentication sessions: the retry loop between an agent and a verifier.

use std::sync::Arc;

use crate::agent::{DeviceAgent, WireClient};
use crate::error::Result;
use crate::registry::{AuthAttempt, AuthOutcome, AuthStatus, Registry};

/// Anything that can judge authentication attempts.
pub trait Verifier {
    fn verify_attempt(&self, attempt: &AuthAttempt, now: u64) -> Result<AuthOutcome>;
}

impl Verifier for Registry {
    fn verify_attempt(&self, attempt: &AuthAttempt, now: u64) -> Result<AuthOutcome> {
        self.verify(attempt, now)
    }
}

impl<V: Verifier + ?Sized> Verifier for Arc<V> {
    fn verify_attempt(&self, attempt: &AuthAttempt, now: u64) -> Result<AuthOutcome> {
        (**self).verify_attempt(attempt, now)
    }
}

impl<V: Verifier + ?Sized> Verifier for &V {
    fn verify_attempt(&self, attempt: &AuthAttempt, now: u64) -> Result<AuthOutcome> {
        (**self).verify_attempt(attempt, now)
    }
}

impl Verifier for WireClient {
    /// The remote verifier uses its own clock; `now` stays local.
    fn verify_attempt(&self, attempt: &AuthAttempt, _now: u64) -> Result<AuthOutcome> {
        self.authenticate(attempt)
    }
}

/// Run one authentication session: attempts at timestamps `now`, `now + 1`,
/// ... until the verifier stops answering `Retry`. Transport and measurement
/// errors surface as `Err` and consume no attempt.
pub fn run_auth_session<A, V>(agent: &mut A, verifier: &V, now: u64) -> Result<AuthOutcome>
where
    A: DeviceAgent + ?Sized,
    V: Verifier + ?Sized,
{
    let mut attempt_index = 1u32;
    loop {
        let timestamp = now + (attempt_index as u64 - 1);
        let attempt = agent.create_attempt(timestamp, attempt_index)?;
        let outcome = verifier.verify_attempt(&attempt, timestamp)?;
        if outcome.status != AuthStatus::Retry {
            return Ok(outcome);
        }
        attempt_index += 1;
    }
}
