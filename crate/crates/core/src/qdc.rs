//! Ping-pong quantum direct communication over teleported travel qubits.
//!
//! Each message bit uses one `|ψ⁺⟩` pair whose travel half sits with the
//! sender and whose home half sits with the receiver. The sender encodes the
//! bit with `I` or `σ_z` on the travel qubit, teleports it through a second
//! `|ψ⁺⟩` pair, and the receiver Bell-measures travel and home qubits:
//! `|ψ⁺⟩` decodes to 0 and `|ψ⁻⟩` to 1.
//!
//! Control rounds, interleaved at random, send the travel qubit unencoded and
//! compare computational-basis outcomes of the travel and home qubits, which
//! must be anticorrelated for an untouched `|ψ⁺⟩`.

use rand::Rng;
use thiserror::Error;

use crate::quantum::{
    apply_gate, bell_measure, fidelity, make_bell_pair, measure_qubit, teleport_qubit, Basis, BellOutcome, Correction,
    PureState, QuantumError, Unitary2,
};

// Register layout for one round.
const TRAVEL: usize = 0;
const HOME: usize = 1;
const TELEPORT_SENDER: usize = 2;
const TELEPORT_RECEIVER: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QdcError {
    #[error("pair is not |ψ⁺⟩ (fidelity {0})")]
    NotPsiPlus(f64),
    #[error("expected a two-qubit state, got {0} qubits")]
    NotAPair(usize),
    #[error("Bell outcome {0:?} is outside span{{|ψ⁺⟩, |ψ⁻⟩}}: tampering detected")]
    TamperDetected(BellOutcome),
    #[error("resources exhausted: {needed} rounds need pairs but only {available} are provisioned")]
    ResourceExhausted { needed: usize, available: usize },
    #[error("fewer teleport pairs ({teleport}) than message pairs ({message})")]
    TooFewTeleportPairs { message: usize, teleport: usize },
    #[error("control fraction {0} outside [0, 1)")]
    ControlFraction(f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// What an eavesdropper does to travel qubits in transit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttackModel {
    #[default]
    None,
    /// Capture the travel qubit, measure it in the basis, and forward a
    /// freshly prepared, uniformly random eigenstate of the same basis.
    InterceptResend(Basis),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundKind {
    Message,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlResult {
    Pass,
    Fail,
}

/// Shared entanglement provisioned for a ping-pong session.
#[derive(Debug, Clone)]
pub struct QdcResources {
    message_pairs: Vec<PureState>,
    teleport_pairs: Vec<PureState>,
    control_fraction: f64,
}

impl QdcResources {
    /// Checks every pair is `|ψ⁺⟩` and that teleport pairs cover the
    /// message pairs.
    pub fn new(
        message_pairs: Vec<PureState>,
        teleport_pairs: Vec<PureState>,
        control_fraction: f64,
    ) -> Result<Self, QdcError> {
        if !(0.0..1.0).contains(&control_fraction) {
            return Err(QdcError::ControlFraction(control_fraction));
        }
        if teleport_pairs.len() < message_pairs.len() {
            return Err(QdcError::TooFewTeleportPairs { message: message_pairs.len(), teleport: teleport_pairs.len() });
        }
        for pair in message_pairs.iter().chain(&teleport_pairs) {
            check_psi_plus(pair)?;
        }
        Ok(Self { message_pairs, teleport_pairs, control_fraction })
    }

    /// Freshly prepared pairs.
    pub fn fresh(n_message: usize, n_teleport: usize, control_fraction: f64) -> Result<Self, QdcError> {
        let psi = make_bell_pair(BellOutcome::PsiPlus);
        Self::new(vec![psi.clone(); n_message], vec![psi; n_teleport], control_fraction)
    }

    pub fn control_fraction(&self) -> f64 {
        self.control_fraction
    }

    /// Number of rounds (message or control) the resources can carry.
    pub fn capacity(&self) -> usize {
        self.message_pairs.len().min(self.teleport_pairs.len())
    }
}

/// Record of one ping-pong run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QdcTranscript {
    pub sent_bits: Vec<bool>,
    pub decoded_bits: Vec<bool>,
    /// Teleport corrections, one per round, in round order.
    pub teleport_corrections: Vec<Correction>,
    pub control_results: Vec<ControlResult>,
    /// Message-bit indices whose Bell outcome fell outside the `ψ±` span;
    /// the corresponding decoded bit is meaningless.
    pub tampered_bits: Vec<usize>,
    pub rounds: Vec<RoundKind>,
}

impl QdcTranscript {
    pub fn control_failures(&self) -> usize {
        self.control_results.iter().filter(|r| **r == ControlResult::Fail).count()
    }

    /// True when neither a control round nor a decoding step flagged an
    /// eavesdropper.
    pub fn is_clean(&self) -> bool {
        self.control_failures() == 0 && self.tampered_bits.is_empty()
    }
}

fn check_psi_plus(pair: &PureState) -> Result<(), QdcError> {
    if pair.n_qubits() != 2 {
        return Err(QdcError::NotAPair(pair.n_qubits()));
    }
    let f = fidelity(pair, &make_bell_pair(BellOutcome::PsiPlus))?;
    if 1.0 - f > 1e-9 {
        return Err(QdcError::NotPsiPlus(f));
    }
    Ok(())
}

/// Encodes `bit` on the travel qubit (qubit 0) of a `|ψ⁺⟩` pair.
pub fn encode_bit(bit: bool, pair: &PureState) -> Result<PureState, QdcError> {
    check_psi_plus(pair)?;
    Ok(encode_unchecked(bit, pair)?)
}

fn encode_unchecked(bit: bool, pair: &PureState) -> Result<PureState, QuantumError> {
    let op = if bit { Unitary2::pauli_z() } else { Unitary2::identity() };
    apply_gate(pair, &op, TRAVEL)
}

/// Bell-measures a two-qubit state: `|ψ⁺⟩ → 0`, `|ψ⁻⟩ → 1`.
pub fn decode_bit<R: Rng + ?Sized>(joint: &PureState, rng: &mut R) -> Result<bool, QdcError> {
    if joint.n_qubits() != 2 {
        return Err(QdcError::NotAPair(joint.n_qubits()));
    }
    let (outcome, _) = bell_measure(joint, 0, 1, rng)?;
    outcome_to_bit(outcome)
}

fn outcome_to_bit(outcome: BellOutcome) -> Result<bool, QdcError> {
    match outcome {
        BellOutcome::PsiPlus => Ok(false),
        BellOutcome::PsiMinus => Ok(true),
        other => Err(QdcError::TamperDetected(other)),
    }
}

/// Interleaves control rounds among `n_bits` message rounds; each round is a
/// control round with probability `control_fraction`.
pub fn draw_schedule<R: Rng + ?Sized>(n_bits: usize, control_fraction: f64, rng: &mut R) -> Vec<RoundKind> {
    let mut schedule = Vec::with_capacity(n_bits);
    let mut remaining = n_bits;
    while remaining > 0 {
        if control_fraction > 0.0 && rng.random_bool(control_fraction) {
            schedule.push(RoundKind::Control);
        } else {
            schedule.push(RoundKind::Message);
            remaining -= 1;
        }
    }
    schedule
}

/// Sends `message` with a randomly drawn control schedule.
pub fn pingpong_send<R: Rng + ?Sized>(
    message: &[bool],
    resources: &QdcResources,
    attack: AttackModel,
    rng: &mut R,
) -> Result<QdcTranscript, QdcError> {
    let schedule = draw_schedule(message.len(), resources.control_fraction, rng);
    pingpong_scheduled(message, &schedule, resources, attack, rng)
}

/// Sends `message` following a fixed round schedule.
///
/// The schedule must contain exactly `message.len()` message rounds.
pub fn pingpong_scheduled<R: Rng + ?Sized>(
    message: &[bool],
    schedule: &[RoundKind],
    resources: &QdcResources,
    attack: AttackModel,
    rng: &mut R,
) -> Result<QdcTranscript, QdcError> {
    assert_eq!(
        schedule.iter().filter(|k| **k == RoundKind::Message).count(),
        message.len(),
        "schedule does not match message length"
    );
    if schedule.len() > resources.capacity() {
        return Err(QdcError::ResourceExhausted { needed: schedule.len(), available: resources.capacity() });
    }
    let mut transcript = QdcTranscript {
        sent_bits: message.to_vec(),
        rounds: schedule.to_vec(),
        ..Default::default()
    };
    let mut bits = message.iter().copied();
    for (round, kind) in schedule.iter().enumerate() {
        let pair = &resources.message_pairs[round];
        let carrier = &resources.teleport_pairs[round];
        match kind {
            RoundKind::Message => {
                let bit = bits.next().expect("schedule checked against message length");
                let encoded = encode_unchecked(bit, pair)?;
                let (correction, state) = transmit(&encoded, carrier, attack, rng)?;
                transcript.teleport_corrections.push(correction);
                let (outcome, _) = bell_measure(&state, TELEPORT_RECEIVER, HOME, rng)?;
                match outcome_to_bit(outcome) {
                    Ok(b) => transcript.decoded_bits.push(b),
                    Err(_) => {
                        transcript.tampered_bits.push(transcript.decoded_bits.len());
                        transcript.decoded_bits.push(false);
                    }
                }
            }
            RoundKind::Control => {
                let (correction, state) = transmit(pair, carrier, attack, rng)?;
                transcript.teleport_corrections.push(correction);
                let (travel, state) = measure_qubit(&state, TELEPORT_RECEIVER, Basis::Z, rng)?;
                let (home, _) = measure_qubit(&state, HOME, Basis::Z, rng)?;
                transcript.control_results.push(if travel != home { ControlResult::Pass } else { ControlResult::Fail });
            }
        }
    }
    Ok(transcript)
}

/// Moves the travel qubit through the attacker (if any) and the teleport
/// pair. Returns the correction and the four-qubit register with the travel
/// qubit now on `TELEPORT_RECEIVER`.
fn transmit<R: Rng + ?Sized>(
    pair: &PureState,
    carrier: &PureState,
    attack: AttackModel,
    rng: &mut R,
) -> Result<(Correction, PureState), QuantumError> {
    let mut register = pair.tensor(carrier)?;
    if let AttackModel::InterceptResend(basis) = attack {
        let (_, collapsed) = measure_qubit(&register, TRAVEL, basis, rng)?;
        register = collapsed;
        if rng.random_bool(0.5) {
            let flip = match basis {
                Basis::Z => Unitary2::pauli_x(),
                Basis::X => Unitary2::pauli_z(),
            };
            register = apply_gate(&register, &flip, TRAVEL)?;
        }
    }
    let t = teleport_qubit(&register, TRAVEL, TELEPORT_SENDER, TELEPORT_RECEIVER, BellOutcome::PsiPlus, rng)?;
    Ok((t.correction, t.received))
}
