//! JSON-over-HTTP transport shared by the remote backends, plus the
//! per-bug request/reply transcript.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::FillError;

/// Bearer credential for remote endpoints.
pub const API_KEY_ENV: &str = "MASKFIX_API_KEY";

/// Sends one JSON request and returns the JSON reply.
pub trait Transport: Send + Sync {
    fn post(&self, body: &Value) -> Result<Value, FillError>;
}

impl<F> Transport for F
where
    F: Fn(&Value) -> Result<Value, FillError> + Send + Sync,
{
    fn post(&self, body: &Value) -> Result<Value, FillError> {
        self(body)
    }
}

/// Append-only JSON-lines log of backend traffic. Cloning shares the sink.
/// Sequence counter and writer.
type Sink = Arc<Mutex<(u64, BufWriter<File>)>>;

#[derive(Clone, Default)]
pub struct Transcript {
    sink: Option<Sink>,
}

impl Transcript {
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn create(path: &Path) -> std::io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = File::create(path)?;
        Ok(Transcript {
            sink: Some(Arc::new(Mutex::new((0, BufWriter::new(file))))),
        })
    }

    pub fn record(&self, kind: &str, body: &Value) {
        let Some(sink) = &self.sink else { return };
        let mut guard = sink.lock().unwrap_or_else(|e| e.into_inner());
        let (seq, writer) = &mut *guard;
        *seq += 1;
        let line = json!({ "seq": *seq, "kind": kind, "body": body });
        if writeln!(writer, "{line}").and_then(|_| writer.flush()).is_err() {
            tracing::warn!("failed to write transcript entry");
        }
    }
}

impl std::fmt::Debug for Transcript {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transcript").field("enabled", &self.sink.is_some()).finish()
    }
}

/// Counting gate bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn acquire(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpTransport {
    endpoint: String,
    agent: ureq::Agent,
    gate: Gate,
    credential: Option<String>,
    transcript: Transcript,
}

impl HttpTransport {
    pub fn new(endpoint: String, timeout: Duration, max_in_flight: usize, transcript: Transcript) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .new_agent();
        HttpTransport {
            endpoint,
            agent,
            gate: Gate {
                free: Mutex::new(max_in_flight.max(1)),
                cv: Condvar::new(),
            },
            credential: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            transcript,
        }
    }

    fn send(&self, body: &Value) -> Result<Value, FillError> {
        let _slot = self.gate.acquire();
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.credential {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(body).map_err(classify)?;
        response
            .body_mut()
            .read_json::<Value>()
            .map_err(|e| FillError::MalformedResponse(e.to_string()))
    }
}

fn classify(e: ureq::Error) -> FillError {
    match e {
        ureq::Error::Timeout(_) => FillError::Timeout,
        ureq::Error::StatusCode(code) => FillError::MalformedResponse(format!("HTTP status {code}")),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => FillError::Timeout,
        other => FillError::EndpointUnreachable(other.to_string()),
    }
}

impl Transport for HttpTransport {
    fn post(&self, body: &Value) -> Result<Value, FillError> {
        self.transcript.record("request", body);
        let result = self.send(body);
        match &result {
            Ok(reply) => self.transcript.record("reply", reply),
            Err(e) => self.transcript.record("error", &json!(e.to_string())),
        }
        result
    }
}
