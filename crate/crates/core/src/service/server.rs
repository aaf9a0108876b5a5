//! Session drivers and the TCP / WebSocket front ends.
//!
//! Every session runs on its own thread. Connection threads parse inbound
//! envelopes and forward them to the driver, which applies them only at step
//! boundaries and sends acknowledgements, prompts and updates back through
//! the connection's outbound queue, so a client sees them in causal order.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::log::{EventLog, LogEvent};
use super::protocol::{Ack, Control, ControlMode, Envelope, ErrorMessage, OpenRequest, Submission};
use super::session::{Resolution, Session, SessionError};
use crate::harness::Config;

/// Settings shared by all connections.
pub struct ServerSettings {
    /// Configuration for sessions that do not send their own.
    pub base: Config,
    /// Where per-session event logs go; no logs when absent.
    pub log_dir: Option<PathBuf>,
}

struct Shared {
    settings: ServerSettings,
    next_session: AtomicU64,
}

/// Outbound half of a connection.
#[derive(Clone)]
struct Outbox {
    tx: Sender<Envelope>,
    seq: Arc<AtomicU64>,
}

impl Outbox {
    fn send<T: Serialize>(&self, kind: &str, session: Option<&str>, payload: &T) {
        let seq = self.seq.fetch_add(1, Ordering::Relaxed);
        // A closed connection just drops the message.
        let _ = self.tx.send(Envelope::new(kind, session, seq, payload));
    }

    fn ack(&self, session: Option<&str>, seq: u64) {
        self.send("ack", session, &Ack { seq });
    }

    fn error(&self, session: Option<&str>, code: &str, message: impl Into<String>) {
        self.send(
            "error",
            session,
            &ErrorMessage {
                code: code.to_string(),
                message: message.into(),
            },
        );
    }
}

enum Command {
    Control { seq: u64, control: Control },
    Submit { seq: u64, submission: Submission },
    Snapshot { seq: u64 },
    Close { seq: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Paused,
    Stepping { left: u64 },
    Running { interval: Option<Duration> },
}

struct Driver {
    session: Session,
    out: Outbox,
    log: Option<EventLog>,
    mode: Mode,
    prompt_sent: bool,
    commands: Receiver<Command>,
}

/// Why the driver stopped waiting for a reply.
enum Wait {
    Resolved,
    Interrupted,
    Closed,
}

impl Driver {
    fn id(&self) -> String {
        self.session.id().to_string()
    }

    fn record(&mut self, event: LogEvent) {
        if let Some(log) = &mut self.log {
            if let Err(e) = log.append(&event) {
                let id = self.id();
                self.out.error(Some(&id), "log_error", e.to_string());
                self.log = None;
            }
        }
    }

    fn fail(&mut self, error: &SessionError) {
        let id = self.id();
        self.out.error(Some(&id), error.code(), error.to_string());
        self.record(LogEvent::Rejected {
            step: self.session.step_index(),
            code: error.code().to_string(),
            message: error.to_string(),
        });
    }

    fn apply_control(&mut self, seq: u64, control: Control) {
        let id = self.id();
        self.mode = match control.mode {
            ControlMode::Pause => Mode::Paused,
            ControlMode::Step => {
                let extra = control.steps.unwrap_or(1);
                match self.mode {
                    Mode::Stepping { left } => Mode::Stepping { left: left + extra },
                    _ if extra == 0 => Mode::Paused,
                    _ => Mode::Stepping { left: extra },
                }
            }
            ControlMode::Run => {
                let interval = match control.rate {
                    Some(r) if !(r.is_finite() && r > 0.0) => {
                        self.out.error(Some(&id), "bad_control", format!("rate {r} must be positive"));
                        return;
                    }
                    Some(r) => Some(Duration::from_secs_f64(1.0 / r)),
                    None => None,
                };
                Mode::Running { interval }
            }
        };
        self.out.ack(Some(&id), seq);
    }

    /// Resolves the current step and reports it. Errors leave the prompt
    /// pending.
    fn resolve(&mut self, resolution: Resolution, seq: Option<u64>) -> bool {
        let step = self.session.step_index();
        match self.session.resolve(&resolution) {
            Ok(update) => {
                let id = self.id();
                if let Some(seq) = seq {
                    self.out.ack(Some(&id), seq);
                }
                self.prompt_sent = false;
                self.record(LogEvent::Resolve { step, resolution });
                self.out.send("state_update", Some(&id), &update);
                self.record(LogEvent::Update { update });
                if let Mode::Stepping { left } = self.mode {
                    self.mode = if left <= 1 { Mode::Paused } else { Mode::Stepping { left: left - 1 } };
                }
                true
            }
            Err(e) => {
                self.fail(&e);
                false
            }
        }
    }

    fn snapshot(&self, seq: u64) {
        let id = self.id();
        self.out.send("snapshot", Some(&id), &self.session.snapshot());
        self.out.ack(Some(&id), seq);
    }

    /// Handles a command that arrives outside a prompt wait. Returns false
    /// when the session should end.
    fn handle_idle(&mut self, command: Command) -> bool {
        match command {
            Command::Snapshot { seq } => self.snapshot(seq),
            Command::Control { seq, control } => self.apply_control(seq, control),
            Command::Submit { seq, submission } => {
                if self.prompt_sent {
                    self.resolve(Resolution::Submit { submission }, Some(seq));
                } else {
                    let expected = self.session.pending_prompt().filter(|_| self.prompt_sent).map(|p| p.step);
                    self.fail(&SessionError::StalePrompt {
                        got: submission.step,
                        expected,
                    });
                }
            }
            Command::Close { seq } => {
                let id = self.id();
                self.out.ack(Some(&id), seq);
                return false;
            }
        }
        true
    }

    fn wait_for_reply(&mut self) -> Wait {
        let deadline = match self.mode {
            Mode::Running { .. } => Some(Instant::now() + Duration::from_millis(self.session.options().timeout_ms)),
            _ => None,
        };
        loop {
            let command = match deadline {
                Some(d) => match self.commands.recv_timeout(d.saturating_duration_since(Instant::now())) {
                    Ok(c) => c,
                    Err(RecvTimeoutError::Timeout) => {
                        self.resolve(Resolution::Ignore, None);
                        return Wait::Resolved;
                    }
                    Err(RecvTimeoutError::Disconnected) => return Wait::Closed,
                },
                None => match self.commands.recv() {
                    Ok(c) => c,
                    Err(_) => return Wait::Closed,
                },
            };
            match command {
                Command::Snapshot { seq } => self.snapshot(seq),
                Command::Submit { seq, submission } => {
                    if self.resolve(Resolution::Submit { submission }, Some(seq)) {
                        return Wait::Resolved;
                    }
                }
                Command::Control { seq, control } => {
                    self.apply_control(seq, control);
                    if self.mode == Mode::Paused {
                        return Wait::Interrupted;
                    }
                }
                Command::Close { seq } => {
                    let id = self.id();
                    self.out.ack(Some(&id), seq);
                    return Wait::Closed;
                }
            }
        }
    }

    fn take_step(&mut self) -> bool {
        let prompt = match self.session.prepare() {
            Ok(p) => p,
            Err(e) => {
                self.fail(&e);
                self.mode = Mode::Paused;
                return true;
            }
        };
        match prompt {
            Some(prompt) => {
                if !self.prompt_sent {
                    let id = self.id();
                    self.out.send("prompt", Some(&id), &prompt);
                    self.record(LogEvent::Prompt { prompt });
                    self.prompt_sent = true;
                }
                !matches!(self.wait_for_reply(), Wait::Closed)
            }
            None => {
                if !self.resolve(Resolution::Ignore, None) {
                    self.mode = Mode::Paused;
                }
                true
            }
        }
    }

    fn run(mut self) {
        loop {
            match self.mode {
                Mode::Paused => match self.commands.recv() {
                    Ok(c) => {
                        if !self.handle_idle(c) {
                            return;
                        }
                    }
                    Err(_) => return,
                },
                Mode::Stepping { .. } | Mode::Running { .. } => {
                    loop {
                        match self.commands.try_recv() {
                            Ok(c) => {
                                if !self.handle_idle(c) {
                                    return;
                                }
                            }
                            Err(TryRecvError::Empty) => break,
                            Err(TryRecvError::Disconnected) => return,
                        }
                    }
                    if self.mode == Mode::Paused {
                        continue;
                    }
                    let started = Instant::now();
                    if !self.take_step() {
                        return;
                    }
                    if let Mode::Running { interval: Some(interval) } = self.mode {
                        let wait = interval.saturating_sub(started.elapsed());
                        match self.commands.recv_timeout(wait) {
                            Ok(c) => {
                                if !self.handle_idle(c) {
                                    return;
                                }
                            }
                            Err(RecvTimeoutError::Timeout) => {}
                            Err(RecvTimeoutError::Disconnected) => return,
                        }
                    }
                }
            }
        }
    }
}

/// Routes one client's envelopes to its sessions.
struct Connection {
    shared: Arc<Shared>,
    out: Outbox,
    sessions: HashMap<String, (Sender<Command>, JoinHandle<()>)>,
}

impl Connection {
    fn new(shared: Arc<Shared>, tx: Sender<Envelope>) -> Self {
        Connection {
            shared,
            out: Outbox {
                tx,
                seq: Arc::new(AtomicU64::new(0)),
            },
            sessions: HashMap::new(),
        }
    }

    fn open(&mut self, env: &Envelope) -> Result<(), (String, String)> {
        let request: OpenRequest = env
            .payload_as()
            .map_err(|e| ("invalid_message".to_string(), e.to_string()))?;
        let config = request.config.unwrap_or_else(|| self.shared.settings.base.clone());
        let n = self.shared.next_session.fetch_add(1, Ordering::Relaxed) + 1;
        let id = format!("s{n}");
        let session = Session::new(&id, config, request.options)
            .map_err(|e| (e.code().to_string(), e.to_string()))?;
        let log = match &self.shared.settings.log_dir {
            Some(dir) => {
                let mut log = EventLog::create(&dir.join(format!("{id}.jsonl")))
                    .map_err(|e| ("log_error".to_string(), e.to_string()))?;
                let event = LogEvent::Open {
                    session: id.clone(),
                    config: session.config().clone(),
                    options: session.options().clone(),
                };
                log.append(&event).map_err(|e| ("log_error".to_string(), e.to_string()))?;
                Some(log)
            }
            None => None,
        };
        self.out.send("opened", Some(&id), &session.opened());
        self.out.ack(Some(&id), env.seq);
        let (tx, rx) = mpsc::channel();
        let driver = Driver {
            session,
            out: self.out.clone(),
            log,
            mode: Mode::Paused,
            prompt_sent: false,
            commands: rx,
        };
        let handle = thread::spawn(move || driver.run());
        self.sessions.insert(id, (tx, handle));
        Ok(())
    }

    fn forward(&mut self, env: &Envelope) -> Result<(), (String, String)> {
        let id = env
            .session
            .clone()
            .ok_or_else(|| ("unknown_session".to_string(), "message names no session".to_string()))?;
        let invalid = |e: serde_json::Error| ("invalid_message".to_string(), e.to_string());
        let command = match env.kind.as_str() {
            "control" => Command::Control {
                seq: env.seq,
                control: env.payload_as().map_err(invalid)?,
            },
            "submit" => Command::Submit {
                seq: env.seq,
                submission: env.payload_as().map_err(invalid)?,
            },
            "snapshot" => Command::Snapshot { seq: env.seq },
            _ => Command::Close { seq: env.seq },
        };
        let closing = matches!(command, Command::Close { .. });
        let (tx, _) = self
            .sessions
            .get(&id)
            .ok_or_else(|| ("unknown_session".to_string(), format!("no session `{id}`")))?;
        if tx.send(command).is_err() {
            self.sessions.remove(&id);
            return Err(("unknown_session".to_string(), format!("session `{id}` has ended")));
        }
        if closing {
            if let Some((tx, handle)) = self.sessions.remove(&id) {
                drop(tx);
                let _ = handle.join();
            }
        }
        Ok(())
    }

    fn handle_line(&mut self, line: &str) {
        if line.trim().is_empty() {
            return;
        }
        let env = match Envelope::parse(line) {
            Ok(env) => env,
            Err(e) => return self.out.error(None, "invalid_message", e.to_string()),
        };
        let result = match env.kind.as_str() {
            "open" => self.open(&env),
            "control" | "submit" | "snapshot" | "close" => self.forward(&env),
            other => Err(("unknown_type".to_string(), format!("unknown message type `{other}`"))),
        };
        if let Err((code, message)) = result {
            self.out.error(env.session.as_deref(), &code, message);
        }
    }

    fn shutdown(self) {
        for (_, (tx, handle)) in self.sessions {
            drop(tx);
            let _ = handle.join();
        }
    }
}

fn serve_tcp_client(stream: TcpStream, shared: Arc<Shared>) {
    let (tx, rx) = mpsc::channel::<Envelope>();
    let Ok(mut writer) = stream.try_clone() else {
        return;
    };
    let writer_thread = thread::spawn(move || {
        for env in rx {
            let line = env.to_line() + "\n";
            if writer.write_all(line.as_bytes()).is_err() {
                break;
            }
        }
    });
    let mut connection = Connection::new(shared, tx);
    for line in BufReader::new(stream).lines() {
        match line {
            Ok(line) => connection.handle_line(&line),
            Err(_) => break,
        }
    }
    connection.shutdown();
    let _ = writer_thread.join();
}

fn serve_ws_client(stream: TcpStream, shared: Arc<Shared>) {
    use tungstenite::Message;

    let Ok(mut socket) = tungstenite::accept(stream) else {
        return;
    };
    if socket
        .get_ref()
        .set_read_timeout(Some(Duration::from_millis(10)))
        .is_err()
    {
        return;
    }
    let (tx, rx) = mpsc::channel::<Envelope>();
    let mut connection = Connection::new(shared, tx);
    'outer: loop {
        match socket.read() {
            Ok(Message::Text(text)) => {
                for line in text.as_str().lines() {
                    connection.handle_line(line);
                }
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
        while let Ok(env) = rx.try_recv() {
            if socket.send(Message::text(env.to_line())).is_err() {
                break 'outer;
            }
        }
    }
    connection.shutdown();
}

/// A listening server; dropping it does not stop the accept threads.
pub struct Server {
    shared: Arc<Shared>,
}

impl Server {
    pub fn new(settings: ServerSettings) -> Self {
        Server {
            shared: Arc::new(Shared {
                settings,
                next_session: AtomicU64::new(0),
            }),
        }
    }

    fn listen(
        &self,
        addr: impl ToSocketAddrs,
        client: fn(TcpStream, Arc<Shared>),
    ) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
        let listener = TcpListener::bind(addr)?;
        let local = listener.local_addr()?;
        let shared = self.shared.clone();
        let handle = thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                // Small request/reply messages; don't wait to coalesce them.
                let _ = stream.set_nodelay(true);
                let shared = shared.clone();
                thread::spawn(move || client(stream, shared));
            }
        });
        Ok((local, handle))
    }

    /// Newline-delimited JSON over plain TCP.
    pub fn listen_tcp(&self, addr: impl ToSocketAddrs) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
        self.listen(addr, serve_tcp_client)
    }

    /// The same envelopes as WebSocket text frames.
    pub fn listen_ws(&self, addr: impl ToSocketAddrs) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
        self.listen(addr, serve_ws_client)
    }
}
