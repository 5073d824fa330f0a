//! Gaussian states in the `ħ = 2` quadrature convention, where the vacuum
//! covariance is the identity and `[q̂, p̂] = 2i`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use super::QuantumError;

/// Tolerance for covariance symmetry.
const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest eigenvalue allowed for `cov + iΩ`.
const PHYSICALITY_TOLERANCE: f64 = -1e-9;

/// How a state was constructed, kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianKind {
    General,
    Coherent { alpha: Complex64 },
    /// Two-mode squeezed vacuum with squeezing `r` and `lambda = tanh r`.
    Tmsv { r: f64, lambda: f64 },
}

/// First moments and covariance of a one- or two-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    first_moments: DVector<f64>,
    cov: DMatrix<f64>,
    kind: GaussianKind,
}

impl GaussianState {
    /// Validates shape, symmetry and the uncertainty principle.
    pub fn new(first_moments: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, QuantumError> {
        Self::with_kind(first_moments, cov, GaussianKind::General)
    }

    fn with_kind(first_moments: DVector<f64>, cov: DMatrix<f64>, kind: GaussianKind) -> Result<Self, QuantumError> {
        let dim = first_moments.len();
        if dim != 2 && dim != 4 {
            return Err(QuantumError::MalformedCovariance("only one or two modes are supported"));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(QuantumError::MalformedCovariance("covariance shape does not match the moments"));
        }
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOLERANCE {
            return Err(QuantumError::MalformedCovariance("covariance is not symmetric"));
        }
        let state = Self { first_moments, cov, kind };
        if state.min_physical_eigenvalue() < PHYSICALITY_TOLERANCE {
            return Err(QuantumError::MalformedCovariance("covariance violates the uncertainty principle"));
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.first_moments.len() / 2
    }

    pub fn first_moments(&self) -> &DVector<f64> {
        &self.first_moments
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn kind(&self) -> GaussianKind {
        self.kind
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + iΩ`, computed via
    /// its real embedding `[[cov, −Ω], [Ω, cov]]`.
    pub fn min_physical_eigenvalue(&self) -> f64 {
        let dim = self.cov.nrows();
        let mut omega = DMatrix::zeros(dim, dim);
        for m in 0..dim / 2 {
            omega[(2 * m, 2 * m + 1)] = 1.0;
            omega[(2 * m + 1, 2 * m)] = -1.0;
        }
        let mut big = DMatrix::zeros(2 * dim, 2 * dim);
        big.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        big.view_mut((dim, dim), (dim, dim)).copy_from(&self.cov);
        big.view_mut((0, dim), (dim, dim)).copy_from(&(-&omega));
        big.view_mut((dim, 0), (dim, dim)).copy_from(&omega);
        SymmetricEigen::new(big).eigenvalues.min()
    }
}

/// Two-mode squeezed vacuum with squeezing parameter `r ≥ 0`.
///
/// `cov = [[v I, √(v²−1) Z], [√(v²−1) Z, v I]]` with `v = cosh 2r` and
/// `Z = diag(1, −1)`.
pub fn tmsv_covariance(r: f64) -> Result<GaussianState, QuantumError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(QuantumError::MalformedCovariance("squeezing must be finite and non-negative"));
    }
    let v = (2.0 * r).cosh();
    let s = (v * v - 1.0).sqrt();
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        v,   0.0, s,   0.0,
        0.0, v,   0.0, -s,
        s,   0.0, v,   0.0,
        0.0, -s,  0.0, v,
    ]);
    GaussianState::with_kind(DVector::zeros(4), cov, GaussianKind::Tmsv { r, lambda: r.tanh() })
}

/// Coherent state `|α⟩`: moments `(2 Re α, 2 Im α)` and vacuum covariance.
pub fn coherent_state_moments(alpha: Complex64) -> GaussianState {
    GaussianState {
        first_moments: DVector::from_vec(vec![2.0 * alpha.re, 2.0 * alpha.im]),
        cov: DMatrix::identity(2, 2),
        kind: GaussianKind::Coherent { alpha },
    }
}

/// Symplectic spectrum `(ν₊, ν₋)` of the partially transposed covariance of
/// a two-mode state in standard form `A = ãI`, `B = b̃I`, `C` diagonal.
///
/// `ν±² = (Δ ± √(Δ² − 4 det M)) / 2` with `Δ = det A + det B − 2 det C`.
pub fn symplectic_spectrum_pt(state: &GaussianState) -> Result<(f64, f64), QuantumError> {
    if state.n_modes() != 2 {
        return Err(QuantumError::MalformedCovariance("partial transpose needs two modes"));
    }
    let m = state.cov();
    let block = |r: usize, c: usize| Matrix2::new(m[(r, c)], m[(r, c + 1)], m[(r + 1, c)], m[(r + 1, c + 1)]);
    let (a, b, c) = (block(0, 0), block(2, 2), block(0, 2));
    let scale = m.amax().max(1.0);
    let tol = 1e-12 * scale;
    let scalar = |x: &Matrix2<f64>| x[(0, 1)].abs() <= tol && x[(1, 0)].abs() <= tol && (x[(0, 0)] - x[(1, 1)]).abs() <= tol;
    if !scalar(&a) || !scalar(&b) || c[(0, 1)].abs() > tol || c[(1, 0)].abs() > tol {
        return Err(QuantumError::MalformedCovariance("covariance is not in standard block form"));
    }
    let delta = a.determinant() + b.determinant() - 2.0 * c.determinant();
    let det = m.determinant();
    let disc = delta * delta - 4.0 * det;
    if disc < -1e-12 * delta * delta {
        return Err(QuantumError::MalformedCovariance("negative discriminant"));
    }
    let plus_sq = (delta + disc.max(0.0).sqrt()) / 2.0;
    // ν₊²ν₋² = det M; the product form avoids cancellation in ν₋.
    let minus_sq = det / plus_sq;
    if !(plus_sq > 0.0) || !(minus_sq > 0.0) {
        return Err(QuantumError::MalformedCovariance("non-positive symplectic eigenvalue"));
    }
    Ok((plus_sq.sqrt(), minus_sq.sqrt()))
}
