use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::Point;

use super::fisher::inverse2;
use super::{geometry, LocalizationError, Scenario};

/// Gauss-Newton stops once a step is shorter than this, metres.
pub const STEP_TOLERANCE_M: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100;
/// Consecutive growing steps that count as divergence.
const DIVERGENCE_RUN: usize = 10;
const MAX_HALVINGS: usize = 40;

/// Range differences `φ_n` relative to station 1, metres; entry `k` belongs
/// to station `k + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TdoaObservation {
    pub phi: Vec<f64>,
}

impl TdoaObservation {
    /// Noise-free observation of an emitter at `pos`.
    pub fn exact(pos: &Point, scenario: &Scenario) -> Result<Self, LocalizationError> {
        let g = geometry(pos, scenario)?;
        Ok(Self { phi: g.d[1..].iter().map(|d| d - g.d[0]).collect() })
    }
}

/// Draws `φ_n = d_n − d_1 + ε_n` with `ε_n ~ N(0, 2c²σ_t²)`.
pub fn sample_tdoa<R: Rng + ?Sized>(
    true_pos: &Point,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<TdoaObservation, LocalizationError> {
    let mut obs = TdoaObservation::exact(true_pos, scenario)?;
    let sd = scenario.tdoa_variance().sqrt();
    for phi in &mut obs.phi {
        let e: f64 = rng.sample(StandardNormal);
        *phi += sd * e;
    }
    Ok(obs)
}

fn check_len(obs: &TdoaObservation, scenario: &Scenario) -> Result<(), LocalizationError> {
    let expected = scenario.n_stations() - 1;
    if obs.phi.len() != expected {
        return Err(LocalizationError::ObservationLength { got: obs.phi.len(), expected });
    }
    Ok(())
}

/// `Σ (φ_n − (d_n − d_1))² / (4c²σ_t²)` at `candidate`, constants dropped.
pub fn neg_log_likelihood(obs: &TdoaObservation, candidate: &Point, scenario: &Scenario) -> Result<f64, LocalizationError> {
    check_len(obs, scenario)?;
    let g = geometry(candidate, scenario)?;
    let ss: f64 = obs.phi.iter().zip(&g.d[1..]).map(|(phi, dn)| (phi - (dn - g.d[0])).powi(2)).sum();
    Ok(ss / (2.0 * scenario.tdoa_variance()))
}

/// Maximum-likelihood position by damped Gauss-Newton started at `init`.
///
/// Steps are halved while they increase the likelihood cost. Iteration stops
/// when a step is shorter than [`STEP_TOLERANCE_M`] or after
/// [`MAX_ITERATIONS`]; ten consecutive growing steps are reported as
/// divergence.
pub fn ml_estimate(obs: &TdoaObservation, scenario: &Scenario, init: &Point) -> Result<Point, LocalizationError> {
    check_len(obs, scenario)?;
    let cost = |p: &Point| neg_log_likelihood(obs, p, scenario);
    let mut p = *init;
    let mut current = cost(&p).map_err(|_| LocalizationError::EstimationFailed("start coincides with a station"))?;
    let mut last_step = f64::INFINITY;
    let mut growing = 0;
    for _ in 0..MAX_ITERATIONS {
        let mut step = gauss_newton_step(obs, scenario, &p)?;
        let mut halvings = 0;
        let next = loop {
            let candidate = p + step;
            match cost(&candidate) {
                Ok(c) if c <= current => break Some((candidate, c)),
                _ if halvings < MAX_HALVINGS => {
                    step /= 2.0;
                    halvings += 1;
                }
                _ => break None,
            }
        };
        let Some((candidate, c)) = next else {
            // No descent direction left: p is a stationary point.
            return Ok(p);
        };
        let norm = step.norm();
        p = candidate;
        current = c;
        if norm < STEP_TOLERANCE_M {
            return Ok(p);
        }
        growing = if norm > last_step { growing + 1 } else { 0 };
        if growing >= DIVERGENCE_RUN {
            return Err(LocalizationError::EstimationFailed("step norm grew for ten iterations"));
        }
        last_step = norm;
    }
    Ok(p)
}

fn gauss_newton_step(obs: &TdoaObservation, scenario: &Scenario, p: &Point) -> Result<Vector2<f64>, LocalizationError> {
    let g = geometry(p, scenario).map_err(|_| LocalizationError::EstimationFailed("iterate hit a station"))?;
    let unit = |n: usize| (p - scenario.rs_positions[n]) / g.d[n];
    let u1 = unit(0);
    let mut normal = Matrix2::zeros();
    let mut rhs = Vector2::zeros();
    for (k, phi) in obs.phi.iter().enumerate() {
        let n = k + 1;
        let h = unit(n) - u1;
        let r = phi - (g.d[n] - g.d[0]);
        normal += h * h.transpose();
        rhs += h * r;
    }
    let inv = inverse2(&normal).ok_or(LocalizationError::EstimationFailed("singular normal equations"))?;
    Ok(inv * rhs)
}
