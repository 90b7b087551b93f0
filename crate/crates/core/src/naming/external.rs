//! Subprocess naming provider speaking line-delimited JSON.
//!
//! Request: `{"v":1,"context":"...","original":"x","kind":"parameter","k":5}`
//! Response: `{"v":1,"candidates":[{"name":"val","score":0.93}, ...]}`

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{NameCandidate, NameProvider, NamingError, NamingRequest};
use crate::syntax::DeclarationKind;

pub const PROTOCOL_VERSION: u32 = 1;

pub const DEFAULT_PROVIDER_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Serialize)]
struct WireRequest<'a> {
    v: u32,
    context: &'a str,
    original: &'a str,
    kind: DeclarationKind,
    k: usize,
}

#[derive(Deserialize)]
struct WireResponse {
    v: u32,
    candidates: Vec<NameCandidate>,
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Process {
    fn spawn(command: &str) -> Result<Self, NamingError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Process { child, stdin, lines: rx })
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One provider process, one in-flight request at a time. The process is
/// restarted after a timeout or protocol error.
pub struct ExternalProvider {
    command: String,
    timeout: Duration,
    process: Mutex<Option<Process>>,
}

impl ExternalProvider {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalProvider {
            command: command.into(),
            timeout: DEFAULT_PROVIDER_TIMEOUT,
            process: Mutex::new(None),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn exchange(&self, process: &mut Process, line: &str) -> Result<Vec<NameCandidate>, NamingError> {
        process.stdin.write_all(line.as_bytes())?;
        process.stdin.write_all(b"\n")?;
        process.stdin.flush()?;
        let reply = match process.lines.recv_timeout(self.timeout) {
            Ok(r) => r?,
            Err(RecvTimeoutError::Timeout) => return Err(NamingError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(NamingError::Protocol("provider closed its output".into()))
            }
        };
        let response: WireResponse =
            serde_json::from_str(&reply).map_err(|e| NamingError::Protocol(format!("bad response record: {e}")))?;
        if response.v != PROTOCOL_VERSION {
            return Err(NamingError::Protocol(format!("unsupported protocol version {}", response.v)));
        }
        Ok(response.candidates)
    }
}

impl NameProvider for ExternalProvider {
    fn id(&self) -> &str {
        "external"
    }

    fn candidates(&self, request: &NamingRequest) -> Result<Vec<NameCandidate>, NamingError> {
        let line = serde_json::to_string(&WireRequest {
            v: PROTOCOL_VERSION,
            context: &request.masked_context,
            original: &request.original_name,
            kind: request.kind,
            k: request.k,
        })
        .map_err(|e| NamingError::Protocol(e.to_string()))?;
        let mut guard = self.process.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(Process::spawn(&self.command)?);
        }
        let result = self.exchange(guard.as_mut().expect("spawned"), &line);
        if result.is_err() {
            *guard = None;
        }
        result
    }
}
