use rand::Rng;

use super::bell::bell_components;
use super::{apply_gate, bell_measure, fidelity, make_bell_pair, BellOutcome, PureState, QuantumError, Unitary2};

/// Pauli correction `Z^z X^x` (up to phase) announced to the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Correction {
    pub x: bool,
    pub z: bool,
}

impl Correction {
    /// The two classical bits, packed as `2·x + z`.
    pub fn bits(self) -> u8 {
        (self.x as u8) << 1 | self.z as u8
    }
}

/// Result of a teleportation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Teleported {
    /// Sender's Bell-measurement outcome.
    pub outcome: BellOutcome,
    /// Correction the receiver applied.
    pub correction: Correction,
    /// Post-correction state.
    pub received: PureState,
}

/// Applies a Pauli correction to `target`.
pub fn apply_correction(state: &PureState, correction: Correction, target: usize) -> Result<PureState, QuantumError> {
    let mut out = state.clone();
    if correction.x {
        out = apply_gate(&out, &Unitary2::pauli_x(), target)?;
    }
    if correction.z {
        out = apply_gate(&out, &Unitary2::pauli_z(), target)?;
    }
    Ok(out)
}

/// Teleports qubit `payload` of a register onto `receiver`.
///
/// `sender` and `receiver` must share the Bell state `resource`. The sender
/// Bell-measures `(payload, sender)`; the receiver applies the Pauli frame of
/// the outcome composed with that of the resource. Afterwards `receiver`
/// carries whatever `payload` carried, including its entanglement with the
/// rest of the register.
pub fn teleport_qubit<R: Rng + ?Sized>(
    state: &PureState,
    payload: usize,
    sender: usize,
    receiver: usize,
    resource: BellOutcome,
    rng: &mut R,
) -> Result<Teleported, QuantumError> {
    state.check_qubit(receiver)?;
    if receiver == payload || receiver == sender {
        return Err(QuantumError::SameQubit);
    }
    let (outcome, collapsed) = bell_measure(state, payload, sender, rng)?;
    let (ox, oz) = outcome.pauli_bits();
    let (rx, rz) = resource.pauli_bits();
    let correction = Correction { x: ox ^ rx, z: oz ^ rz };
    let received = apply_correction(&collapsed, correction, receiver)?;
    Ok(Teleported { outcome, correction, received })
}

/// Teleports a single-qubit `payload` through the two-qubit `resource`.
///
/// The returned state is the receiver's qubit after correction.
pub fn teleport<R: Rng + ?Sized>(
    payload: &PureState,
    resource: &PureState,
    rng: &mut R,
) -> Result<Teleported, QuantumError> {
    if payload.n_qubits() != 1 {
        return Err(QuantumError::Dimension(payload.n_qubits(), 1));
    }
    if resource.n_qubits() != 2 {
        return Err(QuantumError::Dimension(resource.n_qubits(), 2));
    }
    let kind = identify_bell(resource)?;
    // qubit 0: payload, 1: sender half, 2: receiver half
    let joint = payload.tensor(resource)?;
    let t = teleport_qubit(&joint, 0, 1, 2, kind, rng)?;
    let comps = bell_components(&t.received, 0, 1)?;
    let (_, rest) = comps
        .into_iter()
        .zip(BellOutcome::ALL)
        .find(|(_, b)| *b == t.outcome)
        .map(|(c, _)| c)
        .expect("outcome is one of the four Bell states");
    let received = PureState::normalized(rest)?;
    Ok(Teleported { received, ..t })
}

/// Which Bell state `pair` is, requiring fidelity 1 within 1e-9.
pub(crate) fn identify_bell(pair: &PureState) -> Result<BellOutcome, QuantumError> {
    let mut best = (0.0, BellOutcome::PhiPlus);
    for kind in BellOutcome::ALL {
        let f = fidelity(pair, &make_bell_pair(kind))?;
        if f > best.0 {
            best = (f, kind);
        }
    }
    if 1.0 - best.0 > 1e-9 {
        return Err(QuantumError::NotMaximallyEntangled(best.0));
    }
    Ok(best.1)
}
