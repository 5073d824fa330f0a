use std::f64::consts::PI;

use crate::Point;

use super::fisher::sym_eigenvalues;
use super::{LocalizationError, PositionCovariance};

/// Axes of a scaled confidence ellipse around `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEllipse {
    pub center: Point,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis, in `[0, π)`.
    pub orientation_rad: f64,
}

impl ErrorEllipse {
    /// Whether `p` lies inside or on the boundary.
    pub fn contains(&self, p: &Point) -> bool {
        let d = p - self.center;
        let (s, c) = self.orientation_rad.sin_cos();
        let u = c * d.x + s * d.y;
        let v = -s * d.x + c * d.y;
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2) <= 1.0
    }
}

/// Probability mass of a bivariate normal inside its `scale`-σ ellipse,
/// `1 − exp(−scale²/2)`.
pub fn coverage_probability(scale: f64) -> f64 {
    -(-scale * scale / 2.0).exp_m1()
}

/// Ellipse with semi-axes `scale·√λ` along the eigenvectors of the
/// covariance.
pub fn error_ellipse(cov: &PositionCovariance, center: Point, scale: f64) -> Result<ErrorEllipse, LocalizationError> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(LocalizationError::InvalidScenario(format!("ellipse scale must be positive, got {scale}")));
    }
    let v = cov.matrix();
    let (lo, hi) = sym_eigenvalues(&v);
    if !(lo > 0.0) {
        return Err(LocalizationError::NotPositiveDefinite);
    }
    let mut orientation = 0.5 * (2.0 * v[(0, 1)]).atan2(v[(0, 0)] - v[(1, 1)]);
    if orientation < 0.0 {
        orientation += PI;
    }
    if orientation >= PI {
        orientation -= PI;
    }
    Ok(ErrorEllipse { center, semi_major: scale * hi.sqrt(), semi_minor: scale * lo.sqrt(), orientation_rad: orientation })
}
