use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{PureState, QuantumError};

/// Elementwise tolerance on `U†U = I`.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// A single-qubit unitary, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Unitary2 {
    /// Checks unitarity before accepting `m`.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self, QuantumError> {
        let u = Self { m };
        let dev = u.unitarity_defect();
        if dev > UNITARY_TOLERANCE || !dev.is_finite() {
            return Err(QuantumError::NotUnitary(dev));
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        Self { m: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub fn pauli_x() -> Self {
        Self { m: [[ZERO, ONE], [ONE, ZERO]] }
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self { m: [[ZERO, -i], [i, ZERO]] }
    }

    pub fn pauli_z() -> Self {
        Self { m: [[ONE, ZERO], [ZERO, -ONE]] }
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { m: [[h, h], [h, -h]] }
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self { m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]] }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Unitary2) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self { m }
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().compose(self);
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((p.m[r][c] - target).norm());
            }
        }
        worst
    }

    /// Row-major `(re, im)` pairs, the layout used in instruction records.
    pub fn to_f64s(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (k, z) in self.m.iter().flatten().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
        out
    }

    pub fn from_f64s(v: [f64; 8]) -> Result<Self, QuantumError> {
        let z = |k: usize| Complex64::new(v[2 * k], v[2 * k + 1]);
        Self::new([[z(0), z(1)], [z(2), z(3)]])
    }
}

/// Applies `gate` to qubit `target`, i.e. `I ⊗ … ⊗ U ⊗ … ⊗ I`.
pub fn apply_gate(state: &PureState, gate: &Unitary2, target: usize) -> Result<PureState, QuantumError> {
    state.check_qubit(target)?;
    let mut amps = state.amplitudes().to_vec();
    let stride = 1usize << target;
    let m = gate.matrix();
    for base in 0..amps.len() {
        if base & stride != 0 {
            continue;
        }
        let (a0, a1) = (amps[base], amps[base | stride]);
        amps[base] = m[0][0] * a0 + m[0][1] * a1;
        amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
    }
    Ok(PureState::from_raw(state.n_qubits(), amps))
}

/// Draws a Haar-distributed element of U(2).
///
/// Gram-Schmidt on the columns of a complex Ginibre matrix yields the QR
/// factor with a positive real diagonal in `R`, which is the phase-fixed
/// construction.
pub fn sample_haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Unitary2 {
    loop {
        let mut gauss = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let z1 = [gauss(), gauss()];
        let z2 = [gauss(), gauss()];
        let Some(q1) = unit(z1) else { continue };
        let mut v = z2;
        // Two passes keep the columns orthogonal to rounding even when the
        // draws are nearly parallel.
        for _ in 0..2 {
            let proj = q1[0].conj() * v[0] + q1[1].conj() * v[1];
            v = [v[0] - proj * q1[0], v[1] - proj * q1[1]];
        }
        let Some(q2) = unit(v) else { continue };
        let u = Unitary2 { m: [[q1[0], q2[0]], [q1[1], q2[1]]] };
        if u.unitarity_defect() <= UNITARY_TOLERANCE {
            return u;
        }
    }
}

fn unit(v: [Complex64; 2]) -> Option<[Complex64; 2]> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    (n > 1e-8).then(|| [v[0] / n, v[1] / n])
}
