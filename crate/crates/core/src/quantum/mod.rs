//! Exact statevector simulation of few-qubit systems and Gaussian-state
//! covariance utilities.
//!
//! Qubit ordering is little-endian: qubit 0 is the least significant bit of
//! the amplitude index, so the ket `|ab⟩` written as a binary string has `a`
//! on qubit 1 and `b` on qubit 0. Global phase is unobservable and states are
//! compared through [`fidelity`].

mod bell;
mod gates;
mod gaussian;
mod state;
mod teleport;

pub use bell::{bell_measure, make_bell_pair, measure_qubit, BellOutcome, Basis};
pub use gates::{apply_gate, sample_haar_unitary, Unitary2};
pub use gaussian::{coherent_state_moments, symplectic_spectrum_pt, tmsv_covariance, GaussianState};
pub use state::{fidelity, PureState, MAX_QUBITS};
pub use teleport::{apply_correction, teleport, teleport_qubit, Correction, Teleported};

use thiserror::Error;

/// Tolerance on the squared norm of a state vector.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("amplitude vector length {0} is not a power of two")]
    Length(usize),
    #[error("state is not normalised: squared norm {0}")]
    NotNormalised(f64),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("qubit indices must be distinct")]
    SameQubit,
    #[error("dimension mismatch: {0} vs {1} qubits")]
    Dimension(usize, usize),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("resource is not a maximally entangled pair (best fidelity {0})")]
    NotMaximallyEntangled(f64),
    #[error("basis index {0} out of range")]
    BasisIndex(usize),
    #[error("malformed covariance matrix: {0}")]
    MalformedCovariance(&'static str),
}
