use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{apply_gate, PureState, QuantumError, Unitary2};

/// The four Bell states, also used as Bell-measurement outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] =
        [BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus];

    /// Amplitudes over the local index `k = b_first + 2·b_second`.
    pub(crate) fn amplitudes(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellOutcome::PhiPlus => [h, z, z, h],
            BellOutcome::PhiMinus => [h, z, z, -h],
            BellOutcome::PsiPlus => [z, h, h, z],
            BellOutcome::PsiMinus => [z, h, -h, z],
        }
    }

    /// Pauli frame `(x, z)` relating this state to `|Φ⁺⟩` up to phase.
    pub(crate) fn pauli_bits(self) -> (bool, bool) {
        match self {
            BellOutcome::PhiPlus => (false, false),
            BellOutcome::PhiMinus => (false, true),
            BellOutcome::PsiPlus => (true, false),
            BellOutcome::PsiMinus => (true, true),
        }
    }
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Computational basis `{|0⟩, |1⟩}`.
    Z,
    /// Hadamard basis `{|+⟩, |−⟩}`.
    X,
}

/// Two-qubit Bell state; qubit 0 is the first ket.
pub fn make_bell_pair(kind: BellOutcome) -> PureState {
    PureState::from_raw(2, kind.amplitudes().to_vec())
}

/// Projects the pair `(first, second)` onto each Bell state.
///
/// Returns, per outcome, its Born probability and the unnormalised
/// amplitudes of the remaining qubits (in their original relative order).
pub(crate) fn bell_components(
    state: &PureState,
    first: usize,
    second: usize,
) -> Result<[(f64, Vec<Complex64>); 4], QuantumError> {
    state.check_qubit(first)?;
    state.check_qubit(second)?;
    if first == second {
        return Err(QuantumError::SameQubit);
    }
    let n = state.n_qubits();
    let rest_qubits: Vec<usize> = (0..n).filter(|&q| q != first && q != second).collect();
    let rest_dim = 1usize << rest_qubits.len();
    let amps = state.amplitudes();
    let full_index = |rest: usize, k: usize| {
        let mut idx = ((k & 1) << first) | (((k >> 1) & 1) << second);
        for (bit, &q) in rest_qubits.iter().enumerate() {
            idx |= ((rest >> bit) & 1) << q;
        }
        idx
    };
    Ok(BellOutcome::ALL.map(|b| {
        let bell = b.amplitudes();
        let comp: Vec<Complex64> = (0..rest_dim)
            .map(|rest| (0..4).map(|k| bell[k].conj() * amps[full_index(rest, k)]).sum())
            .collect();
        let p = comp.iter().map(|c| c.norm_sqr()).sum();
        (p, comp)
    }))
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        if u < p {
            return i;
        }
        u -= p;
    }
    last
}

/// Bell measurement on qubits `(first, second)`.
///
/// The outcome is drawn with Born probabilities and the returned state is the
/// renormalised post-measurement state, with the pair left in the observed
/// Bell state.
pub fn bell_measure<R: Rng + ?Sized>(
    state: &PureState,
    first: usize,
    second: usize,
    rng: &mut R,
) -> Result<(BellOutcome, PureState), QuantumError> {
    let comps = bell_components(state, first, second)?;
    let probs: Vec<f64> = comps.iter().map(|(p, _)| *p).collect();
    let pick = sample_index(&probs, rng);
    let outcome = BellOutcome::ALL[pick];
    let (p, rest) = &comps[pick];
    let scale = 1.0 / p.sqrt();
    let bell = outcome.amplitudes();
    let n = state.n_qubits();
    let rest_qubits: Vec<usize> = (0..n).filter(|&q| q != first && q != second).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (r, c) in rest.iter().enumerate() {
        let mut base = 0usize;
        for (bit, &q) in rest_qubits.iter().enumerate() {
            base |= ((r >> bit) & 1) << q;
        }
        for (k, b) in bell.iter().enumerate() {
            let idx = base | ((k & 1) << first) | (((k >> 1) & 1) << second);
            out[idx] = b * c * scale;
        }
    }
    Ok((outcome, PureState::from_raw(n, out)))
}

/// Projective measurement of qubit `target` in `basis`.
///
/// Returns `false` for `|0⟩`/`|+⟩` and `true` for `|1⟩`/`|−⟩`, along with the
/// collapsed state.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &PureState,
    target: usize,
    basis: Basis,
    rng: &mut R,
) -> Result<(bool, PureState), QuantumError> {
    state.check_qubit(target)?;
    let rotated = match basis {
        Basis::Z => state.clone(),
        Basis::X => apply_gate(state, &Unitary2::hadamard(), target)?,
    };
    let mask = 1usize << target;
    let p1: f64 = rotated
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let outcome = sample_index(&[1.0 - p1, p1], rng) == 1;
    let amps: Vec<Complex64> = rotated
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if ((i & mask) != 0) == outcome { *a } else { Complex64::new(0.0, 0.0) })
        .collect();
    let collapsed = PureState::normalized(amps)?;
    let collapsed = match basis {
        Basis::Z => collapsed,
        Basis::X => apply_gate(&collapsed, &Unitary2::hadamard(), target)?,
    };
    Ok((outcome, collapsed))
}
