//! Obfuscated quantum-memory provisioning.
//!
//! Every slot holds one half of a `|ψ⁺⟩` pair whose partner stays with the
//! legitimate system, and the stored half is rotated by a fresh Haar-random
//! unitary. Slots are shuffled before ids are assigned, so neither the order
//! nor the content of the decryptor's memory reveals which slots serve the
//! ping-pong channel and which serve location verification.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::quantum::{apply_gate, make_bell_pair, sample_haar_unitary, BellOutcome, PureState, Unitary2};

/// Qubit of each slot pair held by the decryptor; qubit 0 is the partner.
pub const DECRYPTOR_QUBIT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotRole {
    QdcMessageHalf,
    QdcTeleportHalf,
    QlvToken,
    Decoy,
}

impl SlotRole {
    pub const ALL: [SlotRole; 4] =
        [SlotRole::QdcMessageHalf, SlotRole::QdcTeleportHalf, SlotRole::QlvToken, SlotRole::Decoy];

    pub(crate) fn code(self) -> u8 {
        match self {
            SlotRole::QdcMessageHalf => 0,
            SlotRole::QdcTeleportHalf => 1,
            SlotRole::QlvToken => 2,
            SlotRole::Decoy => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        SlotRole::ALL.get(code as usize).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProvisionCounts {
    pub n_message: usize,
    pub n_teleport: usize,
    pub n_qlv: usize,
    pub n_decoy: usize,
}

impl ProvisionCounts {
    pub fn total(&self) -> usize {
        self.n_message + self.n_teleport + self.n_qlv + self.n_decoy
    }

    fn roles(&self) -> Vec<SlotRole> {
        let mut roles = Vec::with_capacity(self.total());
        for (role, n) in SlotRole::ALL.iter().zip([self.n_message, self.n_teleport, self.n_qlv, self.n_decoy]) {
            roles.extend(std::iter::repeat(*role).take(n));
        }
        roles
    }
}

/// What the decryptor holds: an id and a quantum state per slot, nothing
/// else.
///
/// The state is the joint two-qubit state of the pair, because the stored
/// qubit is entangled with its partner; qubit [`DECRYPTOR_QUBIT`] is the one
/// physically in the device.
#[derive(Debug, Clone, PartialEq)]
pub struct MemorySlot {
    pub slot_id: u32,
    pub state: PureState,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecryptorView {
    pub slots: Vec<MemorySlot>,
}

impl DecryptorView {
    pub fn slot(&self, slot_id: u32) -> Option<&MemorySlot> {
        self.slots.iter().find(|s| s.slot_id == slot_id)
    }

    /// Little-endian serialisation: per slot, the id then every amplitude as
    /// `(re, im)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for slot in &self.slots {
            out.extend_from_slice(&slot.slot_id.to_le_bytes());
            for a in slot.state.amplitudes() {
                out.extend_from_slice(&a.re.to_le_bytes());
                out.extend_from_slice(&a.im.to_le_bytes());
            }
        }
        out
    }
}

/// Server-side knowledge of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub slot_id: u32,
    pub role: SlotRole,
    pub obfuscation: Unitary2,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ServerLedger {
    pub entries: Vec<LedgerEntry>,
}

impl ServerLedger {
    pub fn entry(&self, slot_id: u32) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.slot_id == slot_id)
    }

    /// Slot ids holding `role`, in id order.
    pub fn slots_with(&self, role: SlotRole) -> Vec<u32> {
        self.entries.iter().filter(|e| e.role == role).map(|e| e.slot_id).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Creates and obfuscates every slot, then shuffles role assignment.
pub fn provision<R: Rng + ?Sized>(counts: ProvisionCounts, rng: &mut R) -> (DecryptorView, ServerLedger) {
    let mut roles = counts.roles();
    roles.shuffle(rng);
    let unitaries: Vec<Unitary2> = (0..roles.len()).map(|_| sample_haar_unitary(rng)).collect();
    assemble(&roles, &unitaries)
}

/// Builds the view and ledger from per-slot roles and unitaries. The view
/// depends on the unitaries only.
pub fn assemble(roles: &[SlotRole], unitaries: &[Unitary2]) -> (DecryptorView, ServerLedger) {
    assert_eq!(roles.len(), unitaries.len());
    let pair = make_bell_pair(BellOutcome::PsiPlus);
    let mut view = DecryptorView::default();
    let mut ledger = ServerLedger::default();
    for (i, (role, u)) in roles.iter().zip(unitaries).enumerate() {
        let slot_id = i as u32;
        let state = apply_gate(&pair, u, DECRYPTOR_QUBIT).expect("pair has two qubits");
        view.slots.push(MemorySlot { slot_id, state });
        ledger.entries.push(LedgerEntry { slot_id, role: *role, obfuscation: *u });
    }
    (view, ledger)
}
