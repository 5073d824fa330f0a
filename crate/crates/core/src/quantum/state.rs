use num_complex::Complex64;

use super::{QuantumError, NORM_TOLERANCE};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 8;

/// A normalised pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Computational basis state `|index⟩` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QuantumError> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QuantumError::BasisIndex(index));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// `|0…0⟩`.
    pub fn zeros(n_qubits: usize) -> Result<Self, QuantumError> {
        Self::basis(n_qubits, 0)
    }

    /// Single qubit `a|0⟩ + b|1⟩`.
    pub fn qubit(a: Complex64, b: Complex64) -> Result<Self, QuantumError> {
        Self::from_amplitudes(vec![a, b])
    }

    /// Wraps an amplitude vector, which must already be normalised.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QuantumError::NotNormalised(norm));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Normalises `amplitudes` before wrapping them.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let norm = norm_sqr(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QuantumError::NotNormalised(norm));
        }
        let scale = 1.0 / norm.sqrt();
        for a in &mut amplitudes {
            *a *= scale;
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64, QuantumError> {
        if self.n_qubits != other.n_qubits {
            return Err(QuantumError::Dimension(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other`, with `self` on the low qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, QuantumError> {
        let n = self.n_qubits + other.n_qubits;
        check_qubits(n)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for b in &other.amplitudes {
            for a in &self.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState { n_qubits: n, amplitudes })
    }

    pub(crate) fn check_qubit(&self, index: usize) -> Result<(), QuantumError> {
        if index >= self.n_qubits {
            return Err(QuantumError::QubitIndex { index, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    /// Builds a state from raw amplitudes produced by a norm-preserving
    /// internal operation.
    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self { n_qubits, amplitudes }
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64, QuantumError> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

fn check_qubits(n: usize) -> Result<(), QuantumError> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QuantumError::QubitCount(n));
    }
    Ok(())
}

fn qubits_for_len(len: usize) -> Result<usize, QuantumError> {
    if len < 2 || !len.is_power_of_two() {
        return Err(QuantumError::Length(len));
    }
    let n = len.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::basis(1, 0).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let plus = PureState::qubit(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let a = PureState::zeros(1).unwrap();
        let b = PureState::zeros(2).unwrap();
        assert_eq!(fidelity(&a, &b), Err(QuantumError::Dimension(1, 2)));
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(PureState::from_amplitudes(vec![c(1.0); 3]), Err(QuantumError::Length(3))));
        assert!(matches!(PureState::from_amplitudes(vec![c(1.0), c(1.0)]), Err(QuantumError::NotNormalised(_))));
        assert!(matches!(PureState::zeros(9), Err(QuantumError::QubitCount(9))));
        assert!(PureState::normalized(vec![c(0.0), c(0.0)]).is_err());
    }

    #[test]
    fn tensor_places_left_factor_on_low_qubits() {
        let one = PureState::basis(1, 1).unwrap();
        let zero = PureState::basis(1, 0).unwrap();
        let joint = one.tensor(&zero).unwrap();
        assert_eq!(joint.amplitudes()[1], c(1.0));
    }
}
