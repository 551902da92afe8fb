//! Verifier TCP server.
//!
//! One thread per connection; a connection carries any number of frames.
//! Sessions for distinct devices proceed concurrently; the registry
//! serializes the per-device consume-and-match step internally.

use std::io::BufReader;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::wire::{self, EnrollResponse, EnrollStatus, Message};

/// Epoch seconds from the system clock.
pub fn system_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub struct VerifierServer {
    registry: Arc<Registry>,
    clock: Clock,
}

/// Handle to a running server; shutting down stops the accept loop.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.thread.is_some() {
            self.stop_and_join();
        }
    }
}

impl VerifierServer {
    pub fn new(registry: Arc<Registry>) -> Self {
        Self {
            registry,
            clock: Arc::new(system_now),
        }
    }

    /// Replace the clock (tests pin it to control freshness).
    pub fn with_clock(mut self, clock: impl Fn() -> u64 + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    /// Bind and serve in the calling thread, forever.
    pub fn serve(self, addr: impl ToSocketAddrs) -> Result<()> {
        let listener = TcpListener::bind(addr)?;
        self.accept_loop(listener, Arc::new(AtomicBool::new(false)));
        Ok(())
    }

    /// Bind and serve on a background thread; the handle stops it.
    pub fn spawn(self, addr: impl ToSocketAddrs) -> Result<ServerHandle> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = stop.clone();
        let thread = std::thread::spawn(move || {
            self.accept_loop(listener, stop_flag);
        });
        Ok(ServerHandle {
            addr,
            stop,
            thread: Some(thread),
        })
    }

    fn accept_loop(self, listener: TcpListener, stop: Arc<AtomicBool>) {
        let server = Arc::new(self);
        for stream in listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = stream else { continue };
            let server = server.clone();
            std::thread::spawn(move || {
                let _ = server.handle_connection(stream);
            });
        }
    }

    fn handle_connection(&self, stream: TcpStream) -> Result<()> {
        let mut writer = stream.try_clone()?;
        let mut reader = BufReader::new(stream);
        while let Some(msg) = wire::read_message(&mut reader)? {
            let reply = self.handle_message(msg);
            wire::write_message(&mut writer, &reply)?;
        }
        Ok(())
    }

    fn handle_message(&self, msg: Message) -> Message {
        match msg {
            Message::AuthReq(attempt) => {
                let now = (self.clock)();
                match self.registry.verify(&attempt, now) {
                    Ok(outcome) => Message::AuthResp(outcome),
                    Err(e) => Message::Error(format!("verifier storage fault: {e}")),
                }
            }
            Message::EnrollReq(req) => {
                let now = (self.clock)();
                let result = self.registry.enroll_fingerprint(
                    &req.fingerprint,
                    req.theta,
                    req.p as usize,
                    req.max_retries,
                    now,
                );
                let resp = match result {
                    Ok(_) => EnrollResponse {
                        status: EnrollStatus::Ok,
                        detail: String::new(),
                    },
                    Err(Error::DuplicateDevice { device_id }) => EnrollResponse {
                        status: EnrollStatus::Duplicate,
                        detail: device_id,
                    },
                    Err(Error::CorruptFingerprint { reason, .. }) => EnrollResponse {
                        status: EnrollStatus::Corrupt,
                        detail: reason,
                    },
                    Err(e) => EnrollResponse {
                        status: EnrollStatus::Invalid,
                        detail: e.to_string(),
                    },
                };
                Message::EnrollResp(resp)
            }
            Message::EnrollResp(_) | Message::AuthResp(_) => {
                Message::Error("unexpected response frame".into())
            }
            Message::Error(e) => Message::Error(format!("echo: {e}")),
        }
    }
}
