//! Newline-delimited JSON over TCP exposing assessment and recommendation.
//!
//! Each request is one JSON object on one line; each gets exactly one
//! response line, in order. Examples:
//!
//! ```text
//! {"op":"assess","sa":-3,"lcd":-3,"scl":1,"sts":1,"requestId":"r1"}
//! {"requestId":"r1","status":"ok","result":{"slp":0.1267...,"label":"FallBehind","clamped":false}}
//! {"op":"recommend","sa":-1.43,"slp":0.111,"grade":4}
//! {"op":"reload","path":"learned.fml","target":"part1"}
//! ```

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::thread;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::inference::{CrispInput, Engine};
use crate::io::read_fml_file;
use crate::model::{validate, FuzzySystem};
use crate::recommend::{rank_to_level, recommend_contents_with, ContentGraph};

pub const DEFAULT_BIND: &str = "127.0.0.1:7855";
pub const DEFAULT_GRADE: i32 = 4;
/// Longest accepted request line; longer lines get an error and the
/// connection is closed.
pub const MAX_LINE_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid {stage} system: {message}")]
    InvalidSystem { stage: &'static str, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A system with its compiled engine; swapped as a unit on reload.
struct Loaded {
    system: FuzzySystem,
    engine: Engine,
}

impl Loaded {
    fn new(system: FuzzySystem, stage: &'static str) -> Result<Self, ServiceError> {
        let violations = validate(&system);
        if !violations.is_empty() {
            let message = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
            return Err(ServiceError::InvalidSystem { stage, message });
        }
        let engine = Engine::new(&system).map_err(|e| ServiceError::InvalidSystem {
            stage,
            message: e.to_string(),
        })?;
        Ok(Self { system, engine })
    }
}

struct State {
    part1: RwLock<Arc<Loaded>>,
    part2: RwLock<Arc<Loaded>>,
    graph: ContentGraph,
}

/// Request processing without a socket; cheap to clone and share.
#[derive(Clone)]
pub struct Service(Arc<State>);

impl Service {
    /// Both systems must validate cleanly.
    pub fn new(part1: FuzzySystem, part2: FuzzySystem, graph: ContentGraph) -> Result<Self, ServiceError> {
        Ok(Self(Arc::new(State {
            part1: RwLock::new(Arc::new(Loaded::new(part1, "part1")?)),
            part2: RwLock::new(Arc::new(Loaded::new(part2, "part2")?)),
            graph,
        })))
    }

    /// One request line (without the newline) to its response object.
    pub fn handle(&self, line: &[u8]) -> Value {
        handle_line(line, &self.0)
    }
}

impl State {
    fn current(slot: &RwLock<Arc<Loaded>>) -> Arc<Loaded> {
        Arc::clone(&slot.read().unwrap_or_else(|e| e.into_inner()))
    }
}

pub struct Server {
    listener: TcpListener,
    service: Service,
    stop: Arc<AtomicBool>,
}

/// Stops a running [`Server`]; cloneable and usable from a signal handler.
#[derive(Clone)]
pub struct ShutdownHandle {
    stop: Arc<AtomicBool>,
    addr: SocketAddr,
}

impl ShutdownHandle {
    pub fn shutdown(&self) {
        if !self.stop.swap(true, Ordering::SeqCst) {
            // Wake the blocking accept.
            let _ = TcpStream::connect(self.addr);
        }
    }
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, service: Service) -> Result<Self, ServiceError> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            service,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn shutdown_handle(&self) -> std::io::Result<ShutdownHandle> {
        Ok(ShutdownHandle {
            stop: Arc::clone(&self.stop),
            addr: self.local_addr()?,
        })
    }

    /// Accepts connections until shut down, one thread per connection.
    pub fn run(self) -> Result<(), ServiceError> {
        for stream in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let service = self.service.clone();
            thread::spawn(move || {
                let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
                if let Err(e) = handle_connection(stream, &service.0) {
                    log::debug!("connection {peer} ended: {e}");
                }
            });
        }
        log::info!("service stopped");
        Ok(())
    }

    /// Runs on a background thread; returns the bound address and a handle.
    pub fn spawn(self) -> std::io::Result<(SocketAddr, ShutdownHandle, thread::JoinHandle<Result<(), ServiceError>>)> {
        let addr = self.local_addr()?;
        let handle = self.shutdown_handle()?;
        Ok((addr, handle, thread::spawn(move || self.run())))
    }
}

fn handle_connection(stream: TcpStream, state: &State) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut line = Vec::new();
    loop {
        line.clear();
        let n = (&mut reader).take(MAX_LINE_BYTES as u64 + 1).read_until(b'\n', &mut line)?;
        if n == 0 {
            return Ok(());
        }
        let too_long = line.len() > MAX_LINE_BYTES && line.last() != Some(&b'\n');
        let response = if too_long {
            error_response(Value::Null, format!("request line exceeds {MAX_LINE_BYTES} bytes"))
        } else {
            while matches!(line.last(), Some(b'\n' | b'\r')) {
                line.pop();
            }
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            handle_line(&line, state)
        };
        serde_json::to_writer(&mut writer, &response)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        if too_long {
            return Ok(());
        }
    }
}

fn error_response(id: Value, message: impl Into<String>) -> Value {
    let mut m = message.into();
    if m.is_empty() {
        m = "error".into();
    }
    json!({"requestId": id, "status": "error", "message": m})
}

fn handle_line(line: &[u8], state: &State) -> Value {
    let text = match std::str::from_utf8(line) {
        Ok(t) => t,
        Err(_) => return error_response(Value::Null, "request is not valid UTF-8"),
    };
    let request: Map<String, Value> = match serde_json::from_str(text) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return error_response(Value::Null, "request must be a JSON object"),
        Err(e) => return error_response(Value::Null, format!("malformed JSON: {e}")),
    };
    let id = request.get("requestId").cloned().unwrap_or(Value::Null);
    let op = request.get("op").and_then(Value::as_str).unwrap_or("");
    let result = match op {
        "assess" => assess(&request, state),
        "recommend" => recommend(&request, state),
        "reload" => reload(&request, state),
        "" => Err("missing op".to_string()),
        other => Err(format!("unknown op {other:?}")),
    };
    match result {
        Ok(result) => json!({"requestId": id, "status": "ok", "result": result}),
        Err(message) => error_response(id, message),
    }
}

/// Looks up each engine input in the request, ignoring key case.
fn crisp_input(request: &Map<String, Value>, engine: &Engine) -> Result<CrispInput, String> {
    let mut input = CrispInput::new();
    for name in engine.input_names() {
        let value = request
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v)
            .ok_or_else(|| format!("missing field {:?}", name.to_ascii_lowercase()))?;
        let x = value
            .as_f64()
            .ok_or_else(|| format!("field {:?} must be a number", name.to_ascii_lowercase()))?;
        input = input.with(name, x);
    }
    Ok(input)
}

fn assess(request: &Map<String, Value>, state: &State) -> Result<Value, String> {
    let loaded = State::current(&state.part1);
    let input = crisp_input(request, &loaded.engine)?;
    let r = loaded.engine.infer(&input).map_err(|e| e.to_string())?;
    if r.clamped {
        log::warn!("assess input clamped into the variable domains");
    }
    Ok(json!({"slp": r.crisp_value, "label": r.winning_term, "clamped": r.clamped}))
}

fn recommend(request: &Map<String, Value>, state: &State) -> Result<Value, String> {
    let loaded = State::current(&state.part2);
    let input = crisp_input(request, &loaded.engine)?;
    let grade = match request.get("grade") {
        None | Some(Value::Null) => DEFAULT_GRADE,
        Some(v) => v
            .as_i64()
            .and_then(|g| i32::try_from(g).ok())
            .ok_or("field \"grade\" must be an integer")?,
    };
    let mastered: BTreeSet<String> = match request.get("mastered") {
        None | Some(Value::Null) => BTreeSet::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or("field \"mastered\" must be a list of content ids")?,
        Some(_) => return Err("field \"mastered\" must be a list of content ids".into()),
    };
    let r = loaded.engine.infer(&input).map_err(|e| e.to_string())?;
    let level = rank_to_level(r.crisp_value);
    let contents = recommend_contents_with(&state.graph, level, grade, &mastered).map_err(|e| e.to_string())?;
    let contents: Vec<Value> = contents
        .iter()
        .map(|n| json!({"id": n.id, "title": n.title, "grade": n.grade, "level": n.level}))
        .collect();
    Ok(json!({
        "rlcr": r.crisp_value,
        "label": r.winning_term,
        "level": level,
        "grade": grade,
        "contents": contents,
        "clamped": r.clamped,
    }))
}

fn reload(request: &Map<String, Value>, state: &State) -> Result<Value, String> {
    let path = request
        .get("path")
        .and_then(Value::as_str)
        .ok_or("missing field \"path\"")?;
    let target = request.get("target").and_then(Value::as_str).unwrap_or("part1");
    let (slot, stage) = match target {
        "part1" => (&state.part1, "part1"),
        "part2" => (&state.part2, "part2"),
        other => return Err(format!("unknown target {other:?} (expected part1 or part2)")),
    };
    let system = read_fml_file(path).map_err(|e| format!("{path}: {e}"))?;
    let fresh = Loaded::new(system, stage).map_err(|e| e.to_string())?;
    let current = State::current(slot);
    let same_inputs = fresh.engine.input_names().eq(current.engine.input_names())
        && fresh.engine.output_name() == current.engine.output_name();
    if !same_inputs {
        return Err(format!("{path}: variables do not match the running {stage} system"));
    }
    let result = json!({
        "target": stage,
        "name": fresh.system.name,
        "rules": fresh.system.rules.len(),
    });
    *slot.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(fresh);
    log::info!("reloaded {stage} system from {path}");
    Ok(result)
}
