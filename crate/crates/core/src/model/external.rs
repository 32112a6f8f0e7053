//! Line-delimited JSON protocol for models living in another process.
//!
//! The engine writes one request per line to the child's stdin and reads
//! one response per line from its stdout:
//!
//! ```text
//! -> {"op":"spec"}
//! <- {"features":["x1","x2"],"output_type":"numeric"}
//! -> {"id":1,"op":"predict","points":[[0.0,1.0],[1.0,1.0]]}
//! <- {"id":1,"outputs":[0.0,1.0]}
//! ```
//!
//! A failed request is answered with `{"id":<id>,"error":"..."}`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::OutputType;
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Handshake answer: declared feature order and output type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSpec {
    pub features: Vec<String>,
    pub output_type: OutputType,
}

#[derive(Debug)]
pub struct ExternalClient {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    timeout: Duration,
    broken: bool,
}

impl ExternalClient {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::InvalidModel("external model command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalClient {
            stdin: child.stdin.take(),
            child,
            lines: rx,
            next_id: 1,
            timeout,
            broken: false,
        })
    }

    fn round_trip(&mut self, request: &Value) -> Result<String> {
        if self.broken {
            return Err(Error::Protocol("endpoint is out of sync after an earlier failure".into()));
        }
        let stdin = self.stdin.as_mut().expect("stdin is open while the client lives");
        let sent = writeln!(stdin, "{request}").and_then(|_| stdin.flush());
        if let Err(e) = sent {
            self.broken = true;
            return Err(Error::Protocol(format!("cannot write to endpoint: {e}")));
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => {
                self.broken = true;
                Err(Error::Protocol(format!("cannot read from endpoint: {e}")))
            }
            Err(RecvTimeoutError::Timeout) => {
                self.broken = true;
                Err(Error::Timeout(self.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.broken = true;
                Err(Error::Protocol("endpoint closed its output".into()))
            }
        }
    }

    pub fn handshake(&mut self) -> Result<ExternalSpec> {
        let line = self.round_trip(&json!({"op": "spec"}))?;
        serde_json::from_str(&line).map_err(|e| Error::Protocol(format!("bad handshake `{line}`: {e}")))
    }

    pub fn predict(&mut self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        let id = self.next_id;
        self.next_id += 1;
        let line = self.round_trip(&json!({"id": id, "op": "predict", "points": points}))?;
        let outputs = parse_predict_response(&line, id)?;
        if outputs.len() != points.len() {
            return Err(Error::Protocol(format!(
                "{} outputs for {} points",
                outputs.len(),
                points.len()
            )));
        }
        Ok(outputs)
    }
}

impl Drop for ExternalClient {
    fn drop(&mut self) {
        // closing stdin lets a well-behaved endpoint exit on its own
        drop(self.stdin.take());
        for _ in 0..50 {
            if matches!(self.child.try_wait(), Ok(Some(_))) {
                return;
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn parse_predict_response(line: &str, id: u64) -> Result<Vec<f64>> {
    let value: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        // NaN / Infinity are not JSON, but are what many encoders emit
        Err(e) => match serde_json::from_str::<Value>(&non_finite_to_null(line)) {
            Ok(v) => v,
            Err(_) => return Err(Error::Protocol(format!("malformed response `{line}`: {e}"))),
        },
    };
    if value.get("id").and_then(Value::as_u64) != Some(id) {
        return Err(Error::Protocol(format!("response `{line}` does not carry id {id}")));
    }
    if let Some(err) = value.get("error") {
        return Err(Error::Protocol(format!("endpoint reported: {err}")));
    }
    let outputs = value
        .get("outputs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Protocol(format!("response `{line}` has no outputs")))?;
    outputs
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::Null => Err(Error::NonFiniteOutput(i)),
            Value::Number(n) => n.as_f64().filter(|x| x.is_finite()).ok_or(Error::NonFiniteOutput(i)),
            other => Err(Error::Protocol(format!("output {i} is not a number: {other}"))),
        })
        .collect()
}

fn non_finite_to_null(line: &str) -> String {
    line.replace("-Infinity", "null")
        .replace("Infinity", "null")
        .replace("NaN", "null")
}

/// A set of endpoint processes; callers take whichever is free and queue
/// on one otherwise.
#[derive(Debug)]
pub struct ExternalPool {
    clients: Vec<Mutex<ExternalClient>>,
    spec: ExternalSpec,
    next: AtomicUsize,
}

impl ExternalPool {
    pub fn spawn(command: &[String], size: usize, timeout: Duration) -> Result<Self> {
        let mut clients = Vec::with_capacity(size.max(1));
        let mut spec: Option<ExternalSpec> = None;
        for _ in 0..size.max(1) {
            let mut client = ExternalClient::spawn(command, timeout)?;
            let s = client.handshake()?;
            if spec.as_ref().is_some_and(|prev| *prev != s) {
                return Err(Error::Protocol("endpoints of one pool disagree on their spec".into()));
            }
            spec = Some(s);
            clients.push(Mutex::new(client));
        }
        Ok(ExternalPool {
            clients,
            spec: spec.expect("pool has at least one endpoint"),
            next: AtomicUsize::new(0),
        })
    }

    pub fn spec(&self) -> &ExternalSpec {
        &self.spec
    }

    pub fn size(&self) -> usize {
        self.clients.len()
    }

    pub fn predict(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        for slot in &self.clients {
            if let Ok(mut client) = slot.try_lock() {
                return client.predict(points);
            }
        }
        let i = self.next.fetch_add(1, Ordering::Relaxed) % self.clients.len();
        let mut client = self.clients[i]
            .lock()
            .map_err(|_| Error::Protocol("endpoint lock poisoned".into()))?;
        client.predict(points)
    }
}

/// Serve the protocol on `input`/`output` until end of input. Malformed
/// requests get an error response and the loop carries on.
pub fn serve<R, W, F>(input: R, mut output: W, spec: &ExternalSpec, mut predict: F) -> std::io::Result<()>
where
    R: BufRead,
    W: Write,
    F: FnMut(&[Vec<f64>]) -> std::result::Result<Vec<f64>, String>,
{
    #[derive(Deserialize)]
    struct Request {
        #[serde(default)]
        id: Option<Value>,
        op: String,
        #[serde(default)]
        points: Option<Vec<Vec<f64>>>,
    }

    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Err(e) => {
                let id = serde_json::from_str::<Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").cloned())
                    .unwrap_or(Value::Null);
                json!({"id": id, "error": format!("malformed request: {e}")})
            }
            Ok(req) => match req.op.as_str() {
                "spec" => serde_json::to_value(spec).expect("spec serializes"),
                "predict" => {
                    let id = req.id.unwrap_or(Value::Null);
                    match req.points {
                        None => json!({"id": id, "error": "predict needs `points`"}),
                        Some(points) => match points.iter().find(|p| p.len() != spec.features.len()) {
                            Some(p) => json!({"id": id, "error": format!(
                                "point has {} coordinates, expected {}", p.len(), spec.features.len()
                            )}),
                            None => match predict(&points) {
                                Ok(outputs) => json!({"id": id, "outputs": outputs}),
                                Err(e) => json!({"id": id, "error": e}),
                            },
                        },
                    }
                }
                other => json!({"id": req.id.unwrap_or(Value::Null), "error": format!("unknown op `{other}`")}),
            },
        };
        writeln!(output, "{response}")?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExternalSpec {
        ExternalSpec {
            features: vec!["a".into(), "b".into()],
            output_type: OutputType::Numeric,
        }
    }

    fn run(requests: &str) -> Vec<Value> {
        let mut out = Vec::new();
        serve(requests.as_bytes(), &mut out, &spec(), |pts| Ok(pts.iter().map(|p| p[0]).collect())).unwrap();
        String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn serve_answers_spec_and_predict() {
        let out = run("{\"op\":\"spec\"}\n{\"id\":3,\"op\":\"predict\",\"points\":[[2,9],[5,1]]}\n");
        assert_eq!(out[0], json!({"features": ["a", "b"], "output_type": "numeric"}));
        assert_eq!(out[1], json!({"id": 3, "outputs": [2.0, 5.0]}));
    }

    #[test]
    fn serve_survives_bad_requests() {
        let out = run("not json\n{\"id\":4,\"op\":\"predict\",\"points\":[[1]]}\n{\"id\":5,\"op\":\"predict\",\"points\":[[1,1]]}\n");
        assert!(out[0].get("error").is_some());
        assert_eq!(out[1]["id"], json!(4));
        assert!(out[1].get("error").is_some());
        assert_eq!(out[2], json!({"id": 5, "outputs": [1.0]}));
    }

    #[test]
    fn response_parsing() {
        assert_eq!(parse_predict_response(r#"{"id":2,"outputs":[1,0.5]}"#, 2).unwrap(), vec![1.0, 0.5]);
        assert!(matches!(parse_predict_response(r#"{"id":1,"outputs":[1]}"#, 2), Err(Error::Protocol(_))));
        assert!(matches!(
            parse_predict_response(r#"{"id":2,"outputs":[1, NaN]}"#, 2),
            Err(Error::NonFiniteOutput(1))
        ));
        assert!(matches!(
            parse_predict_response(r#"{"id":2,"outputs":[null]}"#, 2),
            Err(Error::NonFiniteOutput(0))
        ));
        assert!(matches!(parse_predict_response(r#"{"id":2,"error":"boom"}"#, 2), Err(Error::Protocol(_))));
        assert!(matches!(parse_predict_response("{", 2), Err(Error::Protocol(_))));
    }

    #[test]
    fn output_type_wire_format() {
        let d: OutputType = serde_json::from_str(r#"{"discrete":[0,1]}"#).unwrap();
        assert_eq!(d, OutputType::Discrete(vec![0.0, 1.0]));
        assert_eq!(serde_json::to_string(&OutputType::Numeric).unwrap(), "\"numeric\"");
    }
}
