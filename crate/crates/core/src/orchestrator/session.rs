use rand::seq::index;
use rand::Rng;

use crate::localization::{sample_tdoa, Scenario};
use crate::qdc::{draw_schedule, pingpong_scheduled, AttackModel, QdcResources, QdcTranscript};
use crate::qlv::{verify_with, Verdict, VerifyMethod};
use crate::quantum::{apply_gate, measure_qubit, Basis, PureState};
use crate::Point;

use super::instructions::{reconstruct, split_instructions, BasisInstruction, InstructionEntry, InstructionRecord};
use super::memory::{provision, ProvisionCounts, SlotRole, DECRYPTOR_QUBIT};
use super::SessionError;

const SERVER_QUBIT: usize = 0;

/// Session parameters beyond the localisation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub scenario: Scenario,
    /// Location tokens challenged per session.
    pub n_qlv: usize,
    pub n_decoy: usize,
    /// Probability that a ping-pong round is a control round.
    pub control_fraction: f64,
    /// One token basis is carried in the message stream per this many
    /// message bits.
    pub intertwine_k: usize,
    /// Instruction records are padded to a multiple of this many bytes.
    pub block_size: usize,
    /// Number of stations holding an instruction share.
    pub n_rs_shares: usize,
    pub method: VerifyMethod,
}

impl SessionConfig {
    /// Four tokens, four decoys, a quarter of control rounds, `k = 16`,
    /// 64-byte blocks and one share per station.
    pub fn new(scenario: Scenario) -> Self {
        let n_rs_shares = scenario.n_stations().max(2);
        Self {
            scenario,
            n_qlv: 4,
            n_decoy: 4,
            control_fraction: 0.25,
            intertwine_k: 16,
            block_size: 64,
            n_rs_shares,
            method: VerifyMethod::Region,
        }
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        self.scenario.validate_for_verification()?;
        let bad = |m: &str| Err(SessionError::Config(m.to_string()));
        if self.n_qlv == 0 {
            return bad("at least one location token is required");
        }
        if !(0.0..1.0).contains(&self.control_fraction) {
            return bad("control fraction must lie in [0, 1)");
        }
        if self.intertwine_k == 0 {
            return bad("intertwining period must be positive");
        }
        if self.block_size == 0 {
            return bad("block size must be positive");
        }
        if self.n_rs_shares < 2 {
            return bad("instructions must be shared across at least two stations");
        }
        if !(self.scenario.p_c > 0.0 && self.scenario.p_c < 1.0) {
            return bad("P_c must lie in (0, 1)");
        }
        Ok(())
    }

    /// Per-token coverage `P_c^(1/n_qlv)`, so that an honest device passes
    /// every token with probability `P_c`.
    pub fn token_p_c(&self) -> f64 {
        self.scenario.p_c.powf(1.0 / self.n_qlv as f64)
    }
}

/// Which memory slots an adversary carries away from the claimed position.
#[derive(Debug, Clone, PartialEq)]
pub enum RelocationPlan {
    None,
    All,
    /// This many slots chosen uniformly at random, as a role-blind adversary
    /// must.
    RandomCount(usize),
    /// Every slot with one of these roles. Only an adversary who knows the
    /// hidden roles could do this.
    Roles(Vec<SlotRole>),
}

/// Behaviour of the decryptor device and its surroundings.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceModel {
    Honest,
    /// The whole device moved after provisioning but still claims `ζ₀`.
    Relocated { displacement: Point },
    /// Travel qubits are intercepted and resent in the given basis.
    Intercepted(Basis),
    /// The device answers token challenges with guesses.
    ForgedTokens,
    /// Station `rs_id` never delivers its share.
    MissingShare(usize),
    PartialRelocation { plan: RelocationPlan, displacement: Point },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refusal {
    QlvFailed,
    TimeLocked,
    TamperDetected,
    InstructionIncomplete,
}

impl Refusal {
    pub fn as_str(self) -> &'static str {
        match self {
            Refusal::QlvFailed => "qlv_failed",
            Refusal::TimeLocked => "time_locked",
            Refusal::TamperDetected => "tamper_detected",
            Refusal::InstructionIncomplete => "instruction_incomplete",
        }
    }
}

/// One token challenge: the device's answer, the server's check and the
/// timing verification.
#[derive(Debug, Clone, PartialEq)]
pub struct QlvChallenge {
    pub slot_id: u32,
    pub basis: Basis,
    /// The basis arrived through the message stream.
    pub embedded: bool,
    pub relocated: bool,
    pub device_outcome: bool,
    pub server_outcome: bool,
    pub matched: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionEvent {
    TimeLockChecked { clock_s: f64, t_d: f64, open: bool },
    ShareReleased { rs_id: usize, bytes: usize },
    ShareWithheld { rs_id: usize },
    InstructionsReconstructed { entries: usize },
    SlotsRelocated { slot_ids: Vec<u32> },
    QdcFinished { rounds: usize, control_failures: usize, tampered_bits: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    /// Worst token verdict; absent when the session stopped before the
    /// challenges.
    pub qlv_verdict: Option<Verdict>,
    pub decrypted: Option<Vec<bool>>,
    pub refusal: Option<Refusal>,
    pub transcript: Option<QdcTranscript>,
    pub challenges: Vec<QlvChallenge>,
    pub events: Vec<SessionEvent>,
    pub clock: f64,
}

impl SessionResult {
    fn refused(refusal: Refusal, events: Vec<SessionEvent>, clock: f64) -> Self {
        Self {
            qlv_verdict: None,
            decrypted: None,
            refusal: Some(refusal),
            transcript: None,
            challenges: Vec::new(),
            events,
            clock,
        }
    }

    pub fn accepted(&self) -> bool {
        self.decrypted.is_some()
    }

    pub fn shares_released(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, SessionEvent::ShareReleased { .. })).count()
    }
}

/// Inserts one basis bit (`Z → 0`, `X → 1`) after each of the first
/// `bases.len()` blocks of `k` message bits.
pub fn embed_bases(message: &[bool], bases: &[Basis], k: usize) -> Vec<bool> {
    assert!(k > 0 && bases.len() <= message.len() / k, "not enough message blocks for the bases");
    let mut stream = Vec::with_capacity(message.len() + bases.len());
    for (block, chunk) in message.chunks(k).enumerate() {
        stream.extend_from_slice(chunk);
        if let Some(b) = bases.get(block) {
            stream.push(*b == Basis::X);
        }
    }
    stream
}

/// Inverse of [`embed_bases`].
pub fn extract_bases(stream: &[bool], n_bases: usize, k: usize) -> (Vec<bool>, Vec<Basis>) {
    let mut message = Vec::with_capacity(stream.len().saturating_sub(n_bases));
    let mut bases = Vec::with_capacity(n_bases);
    let mut rest = stream;
    while bases.len() < n_bases && rest.len() > k {
        message.extend_from_slice(&rest[..k]);
        bases.push(if rest[k] { Basis::X } else { Basis::Z });
        rest = &rest[k + 1..];
    }
    message.extend_from_slice(rest);
    (message, bases)
}

/// Runs one session at wall-clock time `clock` (seconds).
///
/// Configuration problems are errors; every protocol-level rejection is a
/// [`Refusal`] in the result.
pub fn run_session<R: Rng + ?Sized>(
    config: &SessionConfig,
    message: &[bool],
    device: &DeviceModel,
    clock: f64,
    rng: &mut R,
) -> Result<SessionResult, SessionError> {
    config.validate()?;
    if let DeviceModel::MissingShare(rs) = device {
        if *rs >= config.n_rs_shares {
            return Err(SessionError::Config(format!("station {rs} holds no share")));
        }
    }
    let scenario = &config.scenario;
    let k = config.intertwine_k;

    // Server side: plan the stream, provision memory, write the instructions.
    let token_bases: Vec<Basis> =
        (0..config.n_qlv).map(|_| if rng.random_bool(0.5) { Basis::X } else { Basis::Z }).collect();
    let n_embedded = config.n_qlv.min(message.len() / k);
    let stream = embed_bases(message, &token_bases[..n_embedded], k);
    let schedule = draw_schedule(stream.len(), config.control_fraction, rng);
    let rounds = schedule.len();
    let counts = ProvisionCounts { n_message: rounds, n_teleport: rounds, n_qlv: config.n_qlv, n_decoy: config.n_decoy };
    let (view, ledger) = provision(counts, rng);

    let mut entries = Vec::with_capacity(counts.total());
    for role in SlotRole::ALL {
        for (i, slot_id) in ledger.slots_with(role).into_iter().enumerate() {
            let basis = match role {
                SlotRole::QlvToken if i < n_embedded => BasisInstruction::InStream,
                SlotRole::QlvToken => BasisInstruction::Measure(token_bases[i]),
                _ => BasisInstruction::None,
            };
            let unitary = ledger.entry(slot_id).expect("listed by the ledger").obfuscation;
            entries.push(InstructionEntry { slot_id, role, unitary, basis });
        }
    }
    let record = InstructionRecord { message_bits: message.len() as u32, intertwine_k: k as u32, entries };
    let encoded = record.encode(config.block_size, rng);
    let shares = split_instructions(&encoded, config.n_rs_shares, config.block_size, rng)?;

    // Time-lock: nothing leaves the stations before t_d.
    let open = clock >= scenario.t_d;
    let mut events = vec![SessionEvent::TimeLockChecked { clock_s: clock, t_d: scenario.t_d, open }];
    if !open {
        return Ok(SessionResult::refused(Refusal::TimeLocked, events, clock));
    }

    let mut received = Vec::with_capacity(shares.len());
    for share in shares {
        if *device == DeviceModel::MissingShare(share.rs_id) {
            events.push(SessionEvent::ShareWithheld { rs_id: share.rs_id });
        } else {
            events.push(SessionEvent::ShareReleased { rs_id: share.rs_id, bytes: share.payload.len() });
            received.push(share);
        }
    }
    let bytes = match reconstruct(&received, config.n_rs_shares) {
        Ok(b) => b,
        Err(SessionError::IncompleteShares) => {
            return Ok(SessionResult::refused(Refusal::InstructionIncomplete, events, clock))
        }
        Err(e) => return Err(e),
    };
    let instructions = InstructionRecord::decode(&bytes)?;
    events.push(SessionEvent::InstructionsReconstructed { entries: instructions.entries.len() });

    // Device side.
    let (moved, displacement) = relocated_slots(device, &instructions.entries, rng)?;
    if !moved.is_empty() {
        events.push(SessionEvent::SlotsRelocated { slot_ids: moved.clone() });
    }
    let restore = |e: &InstructionEntry| -> Result<PureState, SessionError> {
        let slot = view.slot(e.slot_id).ok_or(SessionError::MalformedRecord("unknown slot id"))?;
        Ok(apply_gate(&slot.state, &e.unitary.adjoint(), DECRYPTOR_QUBIT)?)
    };
    let message_pairs = instructions.slots_with(SlotRole::QdcMessageHalf).map(restore).collect::<Result<_, _>>()?;
    let teleport_pairs = instructions.slots_with(SlotRole::QdcTeleportHalf).map(restore).collect::<Result<_, _>>()?;
    let attack = match device {
        DeviceModel::Intercepted(b) => AttackModel::InterceptResend(*b),
        _ => AttackModel::None,
    };
    let resources = QdcResources::new(message_pairs, teleport_pairs, config.control_fraction)?;
    let transcript = pingpong_scheduled(&stream, &schedule, &resources, attack, rng)?;
    events.push(SessionEvent::QdcFinished {
        rounds,
        control_failures: transcript.control_failures(),
        tampered_bits: transcript.tampered_bits.len(),
    });
    let (plaintext, streamed_bases) = extract_bases(&transcript.decoded_bits, n_embedded, k);

    let token_p_c = config.token_p_c();
    let mut challenges = Vec::with_capacity(config.n_qlv);
    for (i, entry) in instructions.slots_with(SlotRole::QlvToken).enumerate() {
        let (device_basis, embedded) = match entry.basis {
            BasisInstruction::Measure(b) => (b, false),
            BasisInstruction::InStream => (streamed_bases[i], true),
            BasisInstruction::None => return Err(SessionError::MalformedRecord("token without a basis")),
        };
        let state = restore(entry)?;
        let (device_outcome, state) = if *device == DeviceModel::ForgedTokens {
            (rng.random_bool(0.5), state)
        } else {
            measure_qubit(&state, DECRYPTOR_QUBIT, device_basis, rng)?
        };
        let basis = token_bases[i];
        let (server_outcome, _) = measure_qubit(&state, SERVER_QUBIT, basis, rng)?;
        // |ψ⁺⟩ is anticorrelated in Z and correlated in X.
        let matched = match basis {
            Basis::Z => device_outcome != server_outcome,
            Basis::X => device_outcome == server_outcome,
        };
        let relocated = moved.contains(&entry.slot_id);
        let position = if relocated { scenario.claim + displacement } else { scenario.claim };
        let obs = sample_tdoa(&position, scenario, rng)?;
        let verdict = verify_with(&obs, scenario, config.method, token_p_c);
        challenges.push(QlvChallenge {
            slot_id: entry.slot_id,
            basis,
            embedded,
            relocated,
            device_outcome,
            server_outcome,
            matched,
            verdict,
        });
    }

    let qlv_verdict = worst_verdict(&challenges);
    let refusal = if !transcript.is_clean() {
        Some(Refusal::TamperDetected)
    } else if !challenges.iter().all(|c| c.verdict.accepted) {
        Some(Refusal::QlvFailed)
    } else if !challenges.iter().all(|c| c.matched) {
        Some(Refusal::TamperDetected)
    } else {
        None
    };
    Ok(SessionResult {
        qlv_verdict,
        decrypted: refusal.is_none().then_some(plaintext),
        refusal,
        transcript: Some(transcript),
        challenges,
        events,
        clock,
    })
}

/// A session in which the slots picked by `plan` sit `displacement` away from
/// the claim.
pub fn relocation_attack<R: Rng + ?Sized>(
    config: &SessionConfig,
    message: &[bool],
    plan: RelocationPlan,
    displacement: Point,
    clock: f64,
    rng: &mut R,
) -> Result<SessionResult, SessionError> {
    run_session(config, message, &DeviceModel::PartialRelocation { plan, displacement }, clock, rng)
}

fn relocated_slots<R: Rng + ?Sized>(
    device: &DeviceModel,
    entries: &[InstructionEntry],
    rng: &mut R,
) -> Result<(Vec<u32>, Point), SessionError> {
    let all = || entries.iter().map(|e| e.slot_id).collect::<Vec<_>>();
    let (mut moved, displacement) = match device {
        DeviceModel::Relocated { displacement } => (all(), *displacement),
        DeviceModel::PartialRelocation { plan, displacement } => {
            let moved = match plan {
                RelocationPlan::None => Vec::new(),
                RelocationPlan::All => all(),
                RelocationPlan::RandomCount(n) => {
                    if *n > entries.len() {
                        return Err(SessionError::Config(format!(
                            "cannot move {n} of {} slots",
                            entries.len()
                        )));
                    }
                    // Slot ids are 0..len, so sampling indices samples ids.
                    index::sample(rng, entries.len(), *n).into_iter().map(|i| i as u32).collect()
                }
                RelocationPlan::Roles(roles) => {
                    entries.iter().filter(|e| roles.contains(&e.role)).map(|e| e.slot_id).collect()
                }
            };
            (moved, *displacement)
        }
        _ => (Vec::new(), Point::zeros()),
    };
    if !moved.is_empty() && !(displacement.x.is_finite() && displacement.y.is_finite()) {
        return Err(SessionError::Config("displacement must be finite".into()));
    }
    moved.sort_unstable();
    Ok((moved, displacement))
}

/// First rejected verdict, or the accepted one with the largest statistic.
fn worst_verdict(challenges: &[QlvChallenge]) -> Option<Verdict> {
    challenges.iter().find(|c| !c.verdict.accepted).or_else(|| {
        challenges.iter().max_by(|a, b| a.verdict.mahalanobis.total_cmp(&b.verdict.mahalanobis))
    })
    .map(|c| c.verdict)
}
