use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::session::{ApplyOutcome, Hint, Mode, Session, SessionOp, SessionState, Transcript, WhatIf};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Rational;

pub const DEFAULT_IDLE_TTL: Duration = Duration::from_secs(24 * 60 * 60);

#[derive(Debug, Clone)]
pub struct RegistryConfig {
    pub idle_ttl: Duration,
    /// Append-only JSON lines: one per created session and one per accepted op.
    pub log_path: Option<PathBuf>,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        RegistryConfig { idle_ttl: DEFAULT_IDLE_TTL, log_path: None }
    }
}

struct Slot {
    session: Session,
    last_used: Instant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum LogLine {
    Create { session: String, mode: Mode, initial: Matrix<Rational> },
    Op { session: String, op: SessionOp, hash: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Applied {
    #[serde(flatten)]
    pub outcome: ApplyOutcome,
    pub state: SessionState,
}

/// In-memory sessions. The map lock is held only to look a session up;
/// each session has its own lock, so applies to one session are serialized
/// while distinct sessions proceed independently.
pub struct SessionRegistry {
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    idle_ttl: Duration,
    log: Option<Mutex<File>>,
}

fn new_id() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

impl SessionRegistry {
    pub fn new(config: RegistryConfig) -> Result<Self> {
        let log = match &config.log_path {
            Some(path) => Some(Mutex::new(open_log(path)?)),
            None => None,
        };
        Ok(SessionRegistry { sessions: RwLock::new(HashMap::new()), idle_ttl: config.idle_ttl, log })
    }

    /// Rebuilds sessions from an existing log, then keeps appending to it.
    pub fn recover(config: RegistryConfig) -> Result<Self> {
        let path = config.log_path.clone().ok_or_else(|| Error::InvalidArgument("recovery needs a log path".into()))?;
        let mut restored: HashMap<String, Session> = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LogLine = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), n + 1)))?;
                match entry {
                    LogLine::Create { session, mode, initial } => {
                        restored.insert(session.clone(), Session::new(session, initial, mode)?);
                    }
                    LogLine::Op { session, op, hash } => {
                        let s = restored.get_mut(&session).ok_or_else(|| Error::UnknownSession(session.clone()))?;
                        s.apply(op);
                        if s.hash() != hash {
                            return Err(Error::ReplayMismatch {
                                step: s.history().len(),
                                reason: format!("log line {} does not reproduce session {session}", n + 1),
                            });
                        }
                    }
                }
            }
        }
        let registry = SessionRegistry::new(config)?;
        {
            let mut map = registry.sessions.write().expect("registry lock");
            for (id, session) in restored {
                map.insert(id, Arc::new(Mutex::new(Slot { session, last_used: Instant::now() })));
            }
        }
        Ok(registry)
    }

    fn write_log(&self, line: &LogLine) {
        if let Some(log) = &self.log {
            let mut f = log.lock().expect("log lock");
            let text = serde_json::to_string(line).expect("log lines serialize");
            // The log is an audit aid; a full disk must not take sessions down.
            let _ = writeln!(f, "{text}").and_then(|_| f.flush());
        }
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, initial: Matrix<Rational>, mode: Mode) -> Result<SessionState> {
        let id = new_id();
        let session = Session::new(id.clone(), initial.clone(), mode.clone())?;
        let state = session.state();
        self.sessions
            .write()
            .expect("registry lock")
            .insert(id.clone(), Arc::new(Mutex::new(Slot { session, last_used: Instant::now() })));
        self.write_log(&LogLine::Create { session: id, mode, initial });
        Ok(state)
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>> {
        let slot = self.sessions.read().expect("registry lock").get(id).cloned();
        let slot = slot.ok_or_else(|| Error::UnknownSession(id.to_string()))?;
        let expired = slot.lock().expect("session lock").last_used.elapsed() > self.idle_ttl;
        if expired {
            self.sessions.write().expect("registry lock").remove(id);
            return Err(Error::UnknownSession(id.to_string()));
        }
        Ok(slot)
    }

    fn with_session<R>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<R>) -> Result<R> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().expect("session lock");
        guard.last_used = Instant::now();
        f(&mut guard.session)
    }

    pub fn state(&self, id: &str) -> Result<SessionState> {
        self.with_session(id, |s| Ok(s.state()))
    }

    pub fn apply(&self, id: &str, op: SessionOp) -> Result<Applied> {
        self.with_session(id, |s| {
            let outcome = s.apply(op.clone());
            let state = s.state();
            if outcome.accepted {
                self.write_log(&LogLine::Op { session: id.to_string(), op, hash: state.hash.clone() });
            }
            Ok(Applied { outcome, state })
        })
    }

    pub fn hint(&self, id: &str) -> Result<Hint> {
        self.with_session(id, |s| s.hint())
    }

    pub fn whatif(&self, id: &str, op: &SessionOp) -> Result<WhatIf> {
        self.with_session(id, |s| s.whatif(op))
    }

    pub fn export(&self, id: &str) -> Result<Transcript> {
        self.with_session(id, |s| Ok(s.export()))
    }

    /// Drops sessions idle for longer than the TTL; returns how many.
    pub fn purge_expired(&self) -> usize {
        let mut map = self.sessions.write().expect("registry lock");
        let before = map.len();
        map.retain(|_, slot| slot.lock().expect("session lock").last_used.elapsed() <= self.idle_ttl);
        before - map.len()
    }
}

fn open_log(path: &Path) -> Result<File> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot open log {}: {e}", path.display())))
}
