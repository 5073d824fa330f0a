//! Decoding instructions and their n-of-n XOR sharing across reference
//! stations.
//!
//! Record layout (all integers little-endian):
//!
//! ```text
//! record  := body_len:u32  body  sha256(body):[u8; 32]  padding
//! body    := message_bits:u32  intertwine_k:u32  count:u32  entry*count
//! entry   := slot_id:u32  role:u8  unitary:[f64; 8]  basis:u8
//! ```
//!
//! The unitary is stored row-major as `(re, im)` pairs. Basis codes are
//! 0 = none, 1 = Z, 2 = X, 3 = delivered inside the QDC plaintext stream.
//! Padding is random and brings the record to a multiple of the block size.

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::quantum::{Basis, Unitary2};

use super::{SessionError, SlotRole};

const DIGEST_LEN: usize = 32;
const ENTRY_LEN: usize = 4 + 1 + 64 + 1;

/// Measurement basis instruction for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisInstruction {
    None,
    Measure(Basis),
    /// The basis arrives inside the decrypted QDC stream.
    InStream,
}

impl BasisInstruction {
    fn code(self) -> u8 {
        match self {
            BasisInstruction::None => 0,
            BasisInstruction::Measure(Basis::Z) => 1,
            BasisInstruction::Measure(Basis::X) => 2,
            BasisInstruction::InStream => 3,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => BasisInstruction::None,
            1 => BasisInstruction::Measure(Basis::Z),
            2 => BasisInstruction::Measure(Basis::X),
            3 => BasisInstruction::InStream,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstructionEntry {
    pub slot_id: u32,
    pub role: SlotRole,
    pub unitary: Unitary2,
    pub basis: BasisInstruction,
}

/// Everything the decryptor needs to use its memory. Entries of each role
/// appear in the order they are consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct InstructionRecord {
    pub message_bits: u32,
    pub intertwine_k: u32,
    pub entries: Vec<InstructionEntry>,
}

impl InstructionRecord {
    pub fn slots_with(&self, role: SlotRole) -> impl Iterator<Item = &InstructionEntry> {
        self.entries.iter().filter(move |e| e.role == role)
    }

    fn body(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(12 + ENTRY_LEN * self.entries.len());
        body.extend_from_slice(&self.message_bits.to_le_bytes());
        body.extend_from_slice(&self.intertwine_k.to_le_bytes());
        body.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            body.extend_from_slice(&e.slot_id.to_le_bytes());
            body.push(e.role.code());
            for v in e.unitary.to_f64s() {
                body.extend_from_slice(&v.to_le_bytes());
            }
            body.push(e.basis.code());
        }
        body
    }

    /// Serialises and pads to a multiple of `block_size` (at least 1).
    pub fn encode<R: Rng + ?Sized>(&self, block_size: usize, rng: &mut R) -> Vec<u8> {
        let body = self.body();
        let mut out = Vec::with_capacity(4 + body.len() + DIGEST_LEN + block_size);
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&Sha256::digest(&body));
        let block = block_size.max(1);
        while out.len() % block != 0 {
            out.push(rng.random());
        }
        out
    }

    /// Parses a record, rejecting anything whose digest does not match.
    pub fn decode(bytes: &[u8]) -> Result<Self, SessionError> {
        let bad = |m: &'static str| SessionError::MalformedRecord(m);
        let body_len = read_u32(bytes, 0).ok_or(bad("truncated length"))? as usize;
        let body = bytes.get(4..4 + body_len).ok_or(bad("truncated body"))?;
        let digest = bytes.get(4 + body_len..4 + body_len + DIGEST_LEN).ok_or(bad("truncated digest"))?;
        if Sha256::digest(body).as_slice() != digest {
            return Err(bad("digest mismatch"));
        }
        let message_bits = read_u32(body, 0).ok_or(bad("truncated header"))?;
        let intertwine_k = read_u32(body, 4).ok_or(bad("truncated header"))?;
        let count = read_u32(body, 8).ok_or(bad("truncated header"))? as usize;
        if body.len() != 12 + count * ENTRY_LEN {
            return Err(bad("entry count does not match body length"));
        }
        let entries = body[12..]
            .chunks_exact(ENTRY_LEN)
            .map(|e| {
                let slot_id = read_u32(e, 0).expect("fixed size");
                let role = SlotRole::from_code(e[4]).ok_or(bad("unknown role"))?;
                let mut vals = [0.0; 8];
                for (k, v) in vals.iter_mut().enumerate() {
                    let raw: [u8; 8] = e[5 + 8 * k..13 + 8 * k].try_into().expect("fixed size");
                    *v = f64::from_le_bytes(raw);
                }
                let unitary = Unitary2::from_f64s(vals).map_err(|_| bad("non-unitary entry"))?;
                let basis = BasisInstruction::from_code(e[69]).ok_or(bad("unknown basis"))?;
                Ok(InstructionEntry { slot_id, role, unitary, basis })
            })
            .collect::<Result<Vec<_>, SessionError>>()?;
        Ok(Self { message_bits, intertwine_k, entries })
    }
}

fn read_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_le_bytes(b.try_into().expect("four bytes")))
}

/// One station's share of the encoded record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionShare {
    pub rs_id: usize,
    pub payload: Vec<u8>,
    pub block_size: usize,
}

/// Splits `record` into `n_rs` shares: `n_rs − 1` uniformly random pads and
/// one closing share, so that the XOR of all shares is the record.
pub fn split_instructions<R: Rng + ?Sized>(
    record: &[u8],
    n_rs: usize,
    block_size: usize,
    rng: &mut R,
) -> Result<Vec<InstructionShare>, SessionError> {
    if n_rs < 2 {
        return Err(SessionError::Config(format!("instruction sharing needs at least two stations, got {n_rs}")));
    }
    let mut closing = record.to_vec();
    let mut shares = Vec::with_capacity(n_rs);
    for rs_id in 0..n_rs - 1 {
        let pad: Vec<u8> = (0..record.len()).map(|_| rng.random()).collect();
        for (c, p) in closing.iter_mut().zip(&pad) {
            *c ^= p;
        }
        shares.push(InstructionShare { rs_id, payload: pad, block_size });
    }
    shares.push(InstructionShare { rs_id: n_rs - 1, payload: closing, block_size });
    Ok(shares)
}

/// XORs the shares back together; all `expected` stations must be present.
pub fn reconstruct(shares: &[InstructionShare], expected: usize) -> Result<Vec<u8>, SessionError> {
    let mut seen = vec![false; expected];
    for s in shares {
        match seen.get_mut(s.rs_id) {
            Some(slot) if !*slot => *slot = true,
            _ => return Err(SessionError::IncompleteShares),
        }
    }
    if shares.len() != expected || shares.is_empty() {
        return Err(SessionError::IncompleteShares);
    }
    let len = shares[0].payload.len();
    if shares.iter().any(|s| s.payload.len() != len) {
        return Err(SessionError::IncompleteShares);
    }
    Ok(xor_all(shares))
}

/// XOR of whatever shares are at hand, with no completeness check.
pub fn xor_all(shares: &[InstructionShare]) -> Vec<u8> {
    let len = shares.iter().map(|s| s.payload.len()).max().unwrap_or(0);
    let mut out = vec![0u8; len];
    for s in shares {
        for (o, p) in out.iter_mut().zip(&s.payload) {
            *o ^= p;
        }
    }
    out
}
