//! The lesson bench: step-by-step sessions with validation, hints, previews
//! and replayable transcripts, plus their HTTP API.

pub mod http;
mod registry;
mod session;

pub use registry::{Applied, RegistryConfig, SessionRegistry, DEFAULT_IDLE_TTL};
pub use session::{
    transcript_hash, verify_transcript, ApplyOutcome, DetBookkeeping, Hint, Mode, Session, SessionOp,
    SessionState, SessionStep, Status, Transcript, WhatIf, TRANSCRIPT_FORMAT, TRANSCRIPT_VERSION,
};
