//! External ranking models reached over a line-delimited JSON protocol.
//!
//! One request per call:
//! `{"query": "<surviving query tokens>", "docs": [{"id": "...", "text": "<surviving doc tokens>"}]}`
//! answered by `{"scores": [s_1, ..., s_n]}` — one line on stdout for
//! subprocess handles, a POST body for HTTP handles. Document and query
//! text is the whitespace-join of the tokens that survived masking.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::RankerError;
use crate::instance::MaskedInstance;
use crate::rankers::Ranker;

/// Default patience for one scoring round trip.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Serialize)]
struct RankRequest<'a> {
    query: String,
    docs: Vec<DocPayload<'a>>,
}

#[derive(Serialize)]
struct DocPayload<'a> {
    id: &'a str,
    text: String,
}

#[derive(Deserialize)]
struct RankResponse {
    scores: Vec<f64>,
}

/// The wire form of one masked instance.
pub fn request_json(masked: &MaskedInstance) -> String {
    let req = RankRequest {
        query: masked.query_tokens.join(" "),
        docs: masked
            .docs
            .iter()
            .map(|d| DocPayload {
                id: &d.id,
                text: d.tokens.join(" "),
            })
            .collect(),
    };
    serde_json::to_string(&req).expect("request serialization cannot fail")
}

fn parse_response(body: &str, expected: usize) -> Result<Vec<f64>, RankerError> {
    let resp: RankResponse = serde_json::from_str(body)
        .map_err(|e| RankerError::MalformedResponse(e.to_string()))?;
    if resp.scores.len() != expected {
        return Err(RankerError::LengthMismatch {
            expected,
            got: resp.scores.len(),
        });
    }
    if resp.scores.iter().any(|s| !s.is_finite()) {
        return Err(RankerError::MalformedResponse(
            "non-finite score in response".into(),
        ));
    }
    Ok(resp.scores)
}

struct ProcIo {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    /// Once a call times out or the transport fails, request/response
    /// framing is lost and the handle refuses further use.
    broken: bool,
}

/// A ranker living in a child process, spawned once and queried over
/// stdin/stdout. Calls are serialized; the child is killed on drop.
pub struct SubprocessRanker {
    io: Mutex<ProcIo>,
    timeout: Duration,
    command: String,
}

impl SubprocessRanker {
    /// Spawn `command` (split on whitespace into argv — no shell is
    /// involved). Fails if the process cannot start.
    pub fn spawn(command: &str) -> Result<Self, RankerError> {
        let argv: Vec<&str> = command.split_whitespace().collect();
        let Some((program, args)) = argv.split_first() else {
            return Err(RankerError::Spawn("empty command".into()));
        };
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| RankerError::Spawn(format!("{command}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(SubprocessRanker {
            io: Mutex::new(ProcIo {
                child,
                stdin,
                lines: rx,
                broken: false,
            }),
            timeout: DEFAULT_TIMEOUT,
            command: command.to_string(),
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

impl Ranker for SubprocessRanker {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError> {
        let mut io = self
            .io
            .lock()
            .map_err(|_| RankerError::Transport("ranker mutex poisoned".into()))?;
        if io.broken {
            return Err(RankerError::Transport(
                "ranker stream out of sync after an earlier failure".into(),
            ));
        }
        let req = request_json(masked);
        if let Err(e) = writeln!(io.stdin, "{req}").and_then(|_| io.stdin.flush()) {
            io.broken = true;
            return Err(RankerError::Transport(format!("write to ranker: {e}")));
        }
        match io.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => parse_response(line.trim(), masked.docs.len()),
            Ok(Err(e)) => {
                io.broken = true;
                Err(RankerError::Transport(format!("read from ranker: {e}")))
            }
            Err(RecvTimeoutError::Timeout) => {
                io.broken = true;
                Err(RankerError::Timeout(self.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                io.broken = true;
                Err(RankerError::Transport("ranker closed its stdout".into()))
            }
        }
    }

    fn name(&self) -> &str {
        &self.command
    }
}

impl Drop for SubprocessRanker {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}

/// A ranker behind an HTTP endpoint; the request above is POSTed as JSON.
pub struct HttpRanker {
    url: String,
    client: reqwest::blocking::Client,
    concurrency_safe: bool,
}

impl HttpRanker {
    pub fn new(url: impl Into<String>) -> Result<Self, RankerError> {
        Self::with_timeout(url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(url: impl Into<String>, timeout: Duration) -> Result<Self, RankerError> {
        // proxies are deliberately bypassed: endpoints are model sidecars
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .no_proxy()
            .build()
            .map_err(|e| RankerError::Spawn(e.to_string()))?;
        Ok(HttpRanker {
            url: url.into(),
            client,
            concurrency_safe: false,
        })
    }

    /// Declare that the endpoint tolerates concurrent requests.
    pub fn assume_concurrency_safe(mut self, yes: bool) -> Self {
        self.concurrency_safe = yes;
        self
    }
}

impl Ranker for HttpRanker {
    fn score(&self, masked: &MaskedInstance) -> Result<Vec<f64>, RankerError> {
        let resp = self
            .client
            .post(&self.url)
            .header("content-type", "application/json")
            .body(request_json(masked))
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    RankerError::Timeout(DEFAULT_TIMEOUT)
                } else {
                    RankerError::Transport(e.to_string())
                }
            })?;
        let status = resp.status();
        let body = resp
            .text()
            .map_err(|e| RankerError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(RankerError::Transport(format!(
                "{} from {}",
                status, self.url
            )));
        }
        parse_response(&body, masked.docs.len())
    }

    fn concurrency_safe(&self) -> bool {
        self.concurrency_safe
    }

    fn name(&self) -> &str {
        &self.url
    }
}
