use nalgebra::Matrix2;
use std::f64::consts::PI;

use crate::Point;

use super::{LocalizationError, Scenario, MAX_CONDITION, MIN_SEPARATION_M};

/// Distances and bearings from a point to every station.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub d: Vec<f64>,
    /// Full-quadrant bearings: `cos θ_n = (x_n − x)/d_n`, `sin θ_n = (y_n − y)/d_n`.
    pub theta: Vec<f64>,
}

pub fn geometry(point: &Point, scenario: &Scenario) -> Result<Geometry, LocalizationError> {
    let mut d = Vec::with_capacity(scenario.n_stations());
    let mut theta = Vec::with_capacity(scenario.n_stations());
    for (i, rs) in scenario.rs_positions.iter().enumerate() {
        let delta = rs - point;
        let dist = delta.norm();
        if dist < MIN_SEPARATION_M {
            return Err(LocalizationError::Coincident(i));
        }
        d.push(dist);
        theta.push(delta.y.atan2(delta.x));
    }
    Ok(Geometry { d, theta })
}

/// TDoA Fisher information about the position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix {
    pub j: Matrix2<f64>,
    /// Rank below two (condition number at least [`MAX_CONDITION`]).
    pub singular: bool,
}

impl FisherMatrix {
    pub fn from_matrix(j: Matrix2<f64>) -> Self {
        let (lo, hi) = sym_eigenvalues(&j);
        let singular = !(hi > 0.0) || lo <= hi / MAX_CONDITION;
        Self { j, singular }
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        sym_eigenvalues(&self.j)
    }
}

/// Eigenvalues `(smaller, larger)` of a symmetric 2×2 matrix.
pub(crate) fn sym_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let r = half_diff.hypot(m[(0, 1)]);
    (mean - r, mean + r)
}

/// Fisher matrix at `point`; singular geometries are flagged, not rejected.
pub fn fisher_matrix(point: &Point, scenario: &Scenario) -> Result<FisherMatrix, LocalizationError> {
    let g = geometry(point, scenario)?;
    let (c1, s1) = (g.theta[0].cos(), g.theta[0].sin());
    let (mut j11, mut j22, mut j12) = (0.0, 0.0, 0.0);
    for &theta in &g.theta[1..] {
        let dc = theta.cos() - c1;
        let ds = theta.sin() - s1;
        j11 += dc * dc;
        j22 += ds * ds;
        j12 += ds * dc;
    }
    let k = 1.0 / scenario.tdoa_variance();
    Ok(FisherMatrix::from_matrix(Matrix2::new(k * j11, k * j12, k * j12, k * j22)))
}

/// Position covariance `V = J⁻¹` summarised as standard deviations and the
/// correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionCovariance {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_xy: f64,
    pub rho: f64,
}

impl PositionCovariance {
    /// From a symmetric positive-definite matrix.
    pub fn from_matrix(v: &Matrix2<f64>) -> Result<Self, LocalizationError> {
        let (lo, _) = sym_eigenvalues(v);
        if !(lo > 0.0) || !v.iter().all(|x| x.is_finite()) {
            return Err(LocalizationError::NotPositiveDefinite);
        }
        let sigma_x = v[(0, 0)].sqrt();
        let sigma_y = v[(1, 1)].sqrt();
        let sigma_xy = v[(0, 1)];
        Ok(Self { sigma_x, sigma_y, sigma_xy, rho: sigma_xy / (sigma_x * sigma_y) })
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.sigma_x * self.sigma_x, self.sigma_xy, self.sigma_xy, self.sigma_y * self.sigma_y)
    }

    /// `V⁻¹`, which is the Fisher matrix it came from.
    pub fn inverse(&self) -> Matrix2<f64> {
        inverse2(&self.matrix()).expect("positive definite")
    }

    /// `√(σ_x² + σ_y²)`.
    pub fn drms(&self) -> f64 {
        (self.sigma_x * self.sigma_x + self.sigma_y * self.sigma_y).sqrt()
    }

    /// `√(δᵀ V⁻¹ δ)`.
    pub fn mahalanobis(&self, delta: &Point) -> f64 {
        (delta.transpose() * self.inverse() * delta)[(0, 0)].max(0.0).sqrt()
    }
}

pub(crate) fn inverse2(m: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// `V_pos = J⁻¹`; singular `J` is a degenerate-geometry error.
pub fn position_covariance(fisher: &FisherMatrix) -> Result<PositionCovariance, LocalizationError> {
    if fisher.singular {
        return Err(LocalizationError::DegenerateGeometry);
    }
    let v = inverse2(&fisher.j).ok_or(LocalizationError::DegenerateGeometry)?;
    let v = Matrix2::new(v[(0, 0)], v[(0, 1)], v[(0, 1)], v[(1, 1)]);
    PositionCovariance::from_matrix(&v)
}

/// Bivariate normal density of the estimate `est` around `claim`.
pub fn position_pdf(est: &Point, claim: &Point, cov: &PositionCovariance) -> Result<f64, LocalizationError> {
    let rho = cov.rho;
    if !(rho.abs() < 1.0) {
        return Err(LocalizationError::Correlation(rho.abs()));
    }
    let (sx, sy) = (cov.sigma_x, cov.sigma_y);
    let dx = est.x - claim.x;
    let dy = est.y - claim.y;
    let one_minus = 1.0 - rho * rho;
    let quad = dx * dx / (sx * sx) + dy * dy / (sy * sy) - 2.0 * rho * dx * dy / (sx * sy);
    Ok((-quad / (2.0 * one_minus)).exp() / (2.0 * PI * one_minus.sqrt() * sx * sy))
}
