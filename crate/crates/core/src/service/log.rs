//! Append-only JSON-lines session logs and headless replay.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::protocol::{Prompt, SessionOptions, StateUpdate};
use super::session::{Resolution, Session, SessionError};
use crate::harness::Config;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    Open {
        session: String,
        config: Config,
        options: SessionOptions,
    },
    Prompt {
        prompt: Prompt,
    },
    Resolve {
        step: u64,
        resolution: Resolution,
    },
    Update {
        update: StateUpdate,
    },
    Rejected {
        step: u64,
        code: String,
        message: String,
    },
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("replay diverged at step {step}: {source}")]
    Diverged { step: u64, source: SessionError },
}

pub struct EventLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl EventLog {
    pub fn create(path: &Path) -> Result<Self, LogError> {
        let io = |source| LogError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(EventLog {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &LogEvent) -> Result<(), LogError> {
        let line = serde_json::to_string(event).expect("log events serialize");
        writeln!(self.out, "{line}")
            .and_then(|_| self.out.flush())
            .map_err(|source| LogError::Io {
                path: self.path.clone(),
                source,
            })
    }
}

pub fn read_log(path: &Path) -> Result<Vec<LogEvent>, LogError> {
    let file = File::open(path).map_err(|source| LogError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| LogError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| LogError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        events.push(event);
    }
    Ok(events)
}

/// Rebuilds a session from its log by re-applying every resolution.
pub fn replay(events: &[LogEvent]) -> Result<Session, LogError> {
    let mut session = None;
    for event in events {
        match event {
            LogEvent::Open {
                session: id,
                config,
                options,
            } => {
                let s = Session::new(id, config.clone(), options.clone())
                    .map_err(|source| LogError::Diverged { step: 0, source })?;
                session = Some(s);
            }
            LogEvent::Resolve { step, resolution } => {
                let s = session.as_mut().ok_or_else(|| LogError::Malformed {
                    path: PathBuf::new(),
                    line: 0,
                    message: "resolution before open".into(),
                })?;
                if s.step_index() != *step {
                    return Err(LogError::Diverged {
                        step: *step,
                        source: SessionError::StalePrompt {
                            got: *step,
                            expected: Some(s.step_index()),
                        },
                    });
                }
                let diverged = |source| LogError::Diverged { step: *step, source };
                s.prepare().map_err(diverged)?;
                s.resolve(resolution).map_err(diverged)?;
            }
            _ => {}
        }
    }
    session.ok_or_else(|| LogError::Malformed {
        path: PathBuf::new(),
        line: 0,
        message: "log has no open event".into(),
    })
}

pub fn replay_file(path: &Path) -> Result<Session, LogError> {
    replay(&read_log(path)?)
}
