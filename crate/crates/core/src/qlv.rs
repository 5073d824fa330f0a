//! Location verification from TDoA observations, and Monte-Carlo spoofing
//! sweeps.
//!
//! The default rule is region membership: the maximum-likelihood estimate
//! must fall inside the ellipse `(ζ_e − ζ₀)ᵀ V⁻¹ (ζ_e − ζ₀) ≤ −2 ln(1 − P_c)`,
//! where `V = J⁻¹` is evaluated at the claim. Under the Gaussian-linearised
//! estimator the squared Mahalanobis distance is χ² with two degrees of
//! freedom, so an honest decryptor is accepted with probability `P_c`.
//!
//! The alternative residual rule tests `2·NLL` at the claim against the χ²
//! quantile with `N − 1` degrees of freedom, working in timing space instead
//! of position space.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::f64::consts::PI;
use thiserror::Error;

use crate::localization::{
    fisher_matrix, ml_estimate, neg_log_likelihood, position_covariance, sample_tdoa, LocalizationError, Scenario,
    TdoaObservation,
};
use crate::{rng, Point};

/// Spoof sweeps need at least this many trials per offset.
pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlvError {
    #[error(transparent)]
    Scenario(#[from] LocalizationError),
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(usize),
    #[error("displacement direction must be a finite non-zero vector")]
    Direction,
    #[error("offsets must be finite and non-negative")]
    Offsets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VerifyMethod {
    /// Mahalanobis distance of the ML estimate against the χ²₂ quantile.
    #[default]
    Region,
    /// `2·NLL` at the claim against the χ²_{N−1} quantile.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The Fisher matrix at the claim is singular.
    DegenerateGeometry,
    /// The position estimator did not converge.
    EstimationFailed,
    /// Observation length or geometry was invalid.
    InvalidObservation,
}

/// Outcome of one verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub accepted: bool,
    /// Test statistic: the Mahalanobis distance for [`VerifyMethod::Region`],
    /// `√(2·NLL)` for [`VerifyMethod::Residual`]. Infinite when rejected
    /// without a statistic.
    pub mahalanobis: f64,
    pub threshold: f64,
    pub estimate: Option<Point>,
    pub method: VerifyMethod,
    pub reason: Option<RejectReason>,
}

impl Verdict {
    fn decide(statistic: f64, threshold: f64, estimate: Option<Point>, method: VerifyMethod) -> Self {
        Self { accepted: statistic <= threshold, mahalanobis: statistic, threshold, estimate, method, reason: None }
    }

    fn reject(reason: RejectReason, threshold: f64, method: VerifyMethod) -> Self {
        Self { accepted: false, mahalanobis: f64::INFINITY, threshold, estimate: None, method, reason: Some(reason) }
    }
}

/// `√(−2 ln(1 − P_c))`, the radius of the `P_c` region in Mahalanobis units.
pub fn region_threshold(p_c: f64) -> f64 {
    (-2.0 * (-p_c).ln_1p()).sqrt()
}

/// `√(χ²_{dof}⁻¹(P_c))`.
pub fn residual_threshold(p_c: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).expect("dof is positive").inverse_cdf(p_c).sqrt()
}

/// Verifies `obs` against the scenario's claim with the default rule and
/// the scenario's `P_c`.
pub fn verify(obs: &TdoaObservation, scenario: &Scenario) -> Verdict {
    verify_with(obs, scenario, VerifyMethod::Region, scenario.p_c)
}

/// Verification with an explicit rule and coverage probability.
pub fn verify_with(obs: &TdoaObservation, scenario: &Scenario, method: VerifyMethod, p_c: f64) -> Verdict {
    let claim = scenario.claim;
    match method {
        VerifyMethod::Region => {
            let threshold = region_threshold(p_c);
            let cov = match fisher_matrix(&claim, scenario).and_then(|f| position_covariance(&f)) {
                Ok(c) => c,
                Err(_) => return Verdict::reject(RejectReason::DegenerateGeometry, threshold, method),
            };
            match ml_estimate(obs, scenario, &claim) {
                Ok(est) => Verdict::decide(cov.mahalanobis(&(est - claim)), threshold, Some(est), method),
                Err(LocalizationError::ObservationLength { .. }) => {
                    Verdict::reject(RejectReason::InvalidObservation, threshold, method)
                }
                Err(_) => Verdict::reject(RejectReason::EstimationFailed, threshold, method),
            }
        }
        VerifyMethod::Residual => {
            let dof = scenario.n_stations().saturating_sub(1).max(1);
            let threshold = residual_threshold(p_c, dof);
            match neg_log_likelihood(obs, &claim, scenario) {
                Ok(nll) => Verdict::decide((2.0 * nll).sqrt(), threshold, None, method),
                Err(_) => Verdict::reject(RejectReason::InvalidObservation, threshold, method),
            }
        }
    }
}

/// Direction along which the emitter is displaced from the claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepDirection {
    /// A fixed direction (normalised internally).
    Fixed(Point),
    /// Trial `i` uses compass direction `(i mod 8)·45°`.
    Compass,
}

impl SweepDirection {
    fn unit_for_trial(&self, trial: usize) -> Point {
        match self {
            SweepDirection::Fixed(d) => d.normalize(),
            SweepDirection::Compass => {
                let angle = (trial % 8) as f64 * PI / 4.0;
                Point::new(angle.cos(), angle.sin())
            }
        }
    }
}

/// Pass rate of a displaced emitter claiming `ζ₀`, per offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SpoofCurve {
    pub offsets: Vec<f64>,
    pub pass_rate: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

/// Places the true emitter at `ζ₀ + d·direction` for every offset `d` and
/// counts accepted verifications over `trials` noisy observations.
///
/// Trial `t` draws its noise from substream `t` of `seed` at every offset, so
/// curves use common random numbers across offsets and do not depend on
/// thread scheduling.
pub fn spoof_sweep(
    scenario: &Scenario,
    offsets: &[f64],
    direction: SweepDirection,
    trials: usize,
    seed: u64,
    method: VerifyMethod,
) -> Result<SpoofCurve, QlvError> {
    scenario.validate_for_verification()?;
    if trials < MIN_TRIALS {
        return Err(QlvError::TooFewTrials(trials));
    }
    if let SweepDirection::Fixed(d) = direction {
        if !(d.norm() > 0.0) || !d.norm().is_finite() {
            return Err(QlvError::Direction);
        }
    }
    if offsets.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(QlvError::Offsets);
    }
    let pass_rate = offsets
        .iter()
        .map(|&d| {
            let passed = (0..trials)
                .into_par_iter()
                .filter(|&t| {
                    let mut r = rng::substream(seed, "qlv.spoof_sweep", t as u64);
                    let emitter = scenario.claim + direction.unit_for_trial(t) * d;
                    match sample_tdoa(&emitter, scenario, &mut r) {
                        Ok(obs) => verify_with(&obs, scenario, method, scenario.p_c).accepted,
                        Err(_) => false,
                    }
                })
                .count();
            passed as f64 / trials as f64
        })
        .collect();
    Ok(SpoofCurve { offsets: offsets.to_vec(), pass_rate, trials, seed })
}
