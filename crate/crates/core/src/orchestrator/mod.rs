//! End-to-end geo-encryption sessions.
//!
//! A session provisions obfuscated memory slots, splits the decoding
//! instructions across reference stations, and releases the message only
//! after the time-lock has expired, the ping-pong channel shows no tampering,
//! and every location token both answers correctly and passes verification.

mod instructions;
mod memory;
mod session;

use thiserror::Error;

use crate::localization::LocalizationError;
use crate::qdc::QdcError;
use crate::quantum::QuantumError;

pub use instructions::{
    reconstruct, split_instructions, xor_all, BasisInstruction, InstructionEntry, InstructionRecord, InstructionShare,
};
pub use memory::{
    assemble, provision, DecryptorView, LedgerEntry, MemorySlot, ProvisionCounts, ServerLedger, SlotRole,
    DECRYPTOR_QUBIT,
};
pub use session::{
    embed_bases, extract_bases, relocation_attack, run_session, DeviceModel, QlvChallenge, Refusal, RelocationPlan,
    SessionConfig, SessionEvent, SessionResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("invalid session configuration: {0}")]
    Config(String),
    #[error("malformed instruction record: {0}")]
    MalformedRecord(&'static str),
    #[error("instruction shares are incomplete")]
    IncompleteShares,
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    Qdc(#[from] QdcError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}
