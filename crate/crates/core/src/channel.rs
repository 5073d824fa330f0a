//! Rician channel sampling and the time-of-arrival Cramér-Rao bound.
//!
//! The channel vector is diagnostic: localization consumes a timing standard
//! deviation directly, and [`toa_crb_seconds`] is the principled way to
//! derive one from effective bandwidth and SNR.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use thiserror::Error;

/// K-factors at or above this are treated as pure line-of-sight.
pub const PURE_LOS_K: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{name} must be strictly positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Rician K-factor must be finite and non-negative, got {0}")]
    KFactor(f64),
    #[error("spectrum needs at least three samples, got {0}")]
    TooFewSamples(usize),
    #[error("spectrum samples must be finite and non-negative")]
    NegativeSample,
    #[error("spectrum has zero total energy")]
    ZeroEnergy,
}

/// Linear-array Rician channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    pub k_factor: f64,
    pub n_antennas: usize,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
    /// Angle between the array axis and the direction to the receiver.
    pub angle_rad: f64,
}

impl RicianParams {
    pub fn new(k_factor: f64, n_antennas: usize, spacing_wavelengths: f64, angle_rad: f64) -> Result<Self, ChannelError> {
        if !(k_factor >= 0.0) || !k_factor.is_finite() {
            return Err(ChannelError::KFactor(k_factor));
        }
        if n_antennas == 0 {
            return Err(ChannelError::NonPositive { name: "n_antennas", value: 0.0 });
        }
        if !(spacing_wavelengths > 0.0) || !spacing_wavelengths.is_finite() {
            return Err(ChannelError::NonPositive { name: "spacing_wavelengths", value: spacing_wavelengths });
        }
        Ok(Self { k_factor, n_antennas, spacing_wavelengths, angle_rad })
    }
}

/// Pulse timing model: effective bandwidth and SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToaModel {
    pub beta_hz: f64,
    pub snr: f64,
    /// Two-sided noise spectral density `N₀/2`; informational only.
    pub noise_density: f64,
}

impl ToaModel {
    pub fn new(beta_hz: f64, snr: f64, noise_density: f64) -> Result<Self, ChannelError> {
        for (name, value) in [("beta_hz", beta_hz), ("snr", snr), ("noise_density", noise_density)] {
            positive(name, value)?;
        }
        Ok(Self { beta_hz, snr, noise_density })
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::NonPositive { name, value })
    }
}

/// Line-of-sight component: element `m` is `exp(j 2π m δ cos θ)`.
pub fn los_steering_vector(p: &RicianParams) -> Vec<Complex64> {
    let phase_step = 2.0 * PI * p.spacing_wavelengths * p.angle_rad.cos();
    (0..p.n_antennas).map(|m| Complex64::from_polar(1.0, phase_step * m as f64)).collect()
}

/// One channel realisation `√(K/(1+K)) h⁰ + √(1/(1+K)) h^r` with
/// `h^r ~ CN(0, I)`.
pub fn sample_rician<R: Rng + ?Sized>(p: &RicianParams, rng: &mut R) -> Vec<Complex64> {
    let los = los_steering_vector(p);
    if p.k_factor >= PURE_LOS_K {
        return los;
    }
    let k = p.k_factor;
    let w_los = (k / (1.0 + k)).sqrt();
    let w_scatter = (1.0 / (1.0 + k)).sqrt();
    los.into_iter()
        .map(|h0| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let scatter = Complex64::new(re, im) * FRAC_1_SQRT_2;
            h0 * w_los + scatter * w_scatter
        })
        .collect()
}

/// `(2√2 π β √SNR)⁻¹`, seconds.
pub fn toa_crb_seconds(m: &ToaModel) -> Result<f64, ChannelError> {
    positive("beta_hz", m.beta_hz)?;
    positive("snr", m.snr)?;
    Ok(1.0 / (2.0 * 2f64.sqrt() * PI * m.beta_hz * m.snr.sqrt()))
}

/// Effective bandwidth `β = √(∫f²|S|² df / ∫|S|² df)` of a power spectrum
/// sampled on the uniform grid `start_hz + k·step_hz`, by the trapezoidal
/// rule.
pub fn effective_bandwidth(start_hz: f64, step_hz: f64, power: &[f64]) -> Result<f64, ChannelError> {
    if power.len() < 3 {
        return Err(ChannelError::TooFewSamples(power.len()));
    }
    positive("step_hz", step_hz)?;
    if power.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(ChannelError::NegativeSample);
    }
    let last = power.len() - 1;
    let (mut m0, mut m2) = (0.0, 0.0);
    for (k, &p) in power.iter().enumerate() {
        let w = if k == 0 || k == last { 0.5 } else { 1.0 };
        let f = start_hz + k as f64 * step_hz;
        m0 += w * p;
        m2 += w * f * f * p;
    }
    if m0 <= 0.0 {
        return Err(ChannelError::ZeroEnergy);
    }
    Ok((m2 / m0).sqrt())
}
