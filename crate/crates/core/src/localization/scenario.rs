use crate::{Point, SPEED_OF_LIGHT};

use super::{LocalizationError, MIN_SEPARATION_M};

/// Reference stations, the decryptor's claimed position, and timing noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Station positions; the first is the TDoA reference.
    pub rs_positions: Vec<Point>,
    /// Claimed decryptor position `ζ₀`.
    pub claim: Point,
    /// Per-station timing standard deviation, seconds.
    pub sigma_t: f64,
    /// Required probability that an honest decryptor is accepted.
    pub p_c: f64,
    /// Earliest decryption epoch, seconds.
    pub t_d: f64,
    pub seed: u64,
    /// Constant processing delay at the decryptor, seconds. It is common to
    /// every station and cancels in the time differences.
    pub processing_delay_s: f64,
    /// Multiplicative inflation of `sigma_t` standing in for multipath; 1
    /// means a clean line-of-sight bound.
    pub sigma_inflation: f64,
}

impl Scenario {
    /// Scenario with `P_c = 0.99`, `t_d = 0`, no delay and no inflation.
    pub fn new(rs_positions: Vec<Point>, claim: Point, sigma_t: f64) -> Result<Self, LocalizationError> {
        let s = Self {
            rs_positions,
            claim,
            sigma_t,
            p_c: 0.99,
            t_d: 0.0,
            seed: 0,
            processing_delay_s: 0.0,
            sigma_inflation: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Four stations at `(±L, ±L)` around a claim at the origin, station 1 at
    /// `(+L, +L)`, with timing noise given as `c·σ_t` in metres.
    pub fn centered_square(half_side_m: f64, c_sigma_t_m: f64) -> Result<Self, LocalizationError> {
        let l = half_side_m;
        Self::new(
            vec![Point::new(l, l), Point::new(-l, l), Point::new(-l, -l), Point::new(l, -l)],
            Point::zeros(),
            c_sigma_t_m / SPEED_OF_LIGHT,
        )
    }

    pub fn validate(&self) -> Result<(), LocalizationError> {
        let bad = |m: &str| Err(LocalizationError::InvalidScenario(m.to_string()));
        if self.rs_positions.len() < 2 {
            return bad("at least two reference stations are required");
        }
        if self.rs_positions.iter().chain([&self.claim]).any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return bad("positions must be finite");
        }
        if !(self.sigma_t > 0.0) || !self.sigma_t.is_finite() {
            return bad("sigma_t must be positive");
        }
        if !(self.p_c > 0.0 && self.p_c < 1.0) {
            return bad("p_c must lie in (0, 1)");
        }
        if !self.t_d.is_finite() {
            return bad("t_d must be finite");
        }
        if !(self.processing_delay_s >= 0.0) || !self.processing_delay_s.is_finite() {
            return bad("processing delay must be non-negative");
        }
        if !(self.sigma_inflation >= 1.0) || !self.sigma_inflation.is_finite() {
            return bad("sigma inflation must be at least 1");
        }
        if let Some(i) = self.rs_positions.iter().position(|rs| (rs - self.claim).norm() < MIN_SEPARATION_M) {
            return Err(LocalizationError::Coincident(i));
        }
        Ok(())
    }

    /// Verification runs need at least four stations.
    pub fn validate_for_verification(&self) -> Result<(), LocalizationError> {
        self.validate()?;
        if self.rs_positions.len() < 4 {
            return Err(LocalizationError::InvalidScenario(
                "verification requires at least four reference stations".to_string(),
            ));
        }
        Ok(())
    }

    pub fn n_stations(&self) -> usize {
        self.rs_positions.len()
    }

    /// Timing noise after multipath inflation, seconds.
    pub fn effective_sigma_t(&self) -> f64 {
        self.sigma_t * self.sigma_inflation
    }

    /// Variance of each range difference, `2c²σ_t²`, in m².
    pub fn tdoa_variance(&self) -> f64 {
        let range_sigma = SPEED_OF_LIGHT * self.effective_sigma_t();
        2.0 * range_sigma * range_sigma
    }

    /// The same scenario with every station and the claim moved by `offset`.
    pub fn translated(&self, offset: Point) -> Self {
        Self {
            rs_positions: self.rs_positions.iter().map(|p| p + offset).collect(),
            claim: self.claim + offset,
            ..self.clone()
        }
    }

    /// The same scenario rotated by `angle` radians about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let rot = nalgebra::Rotation2::new(angle);
        Self {
            rs_positions: self.rs_positions.iter().map(|p| rot * p).collect(),
            claim: rot * self.claim,
            ..self.clone()
        }
    }
}
