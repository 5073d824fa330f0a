//! Desk-scale simulator for quantum geo-encryption.
//!
//! A message is carried by ping-pong quantum direct communication over
//! teleported travel qubits, the decryptor's quantum memory is obfuscated
//! with Haar-random unitaries, and decryption is released only when a
//! TDoA-based location verification accepts the decryptor's claimed position
//! after the time-lock has expired.
//!
//! Module map:
//!
//! - [`quantum`]: statevector simulation of few-qubit systems and Gaussian
//!   covariance utilities.
//! - [`qdc`]: the ping-pong protocol with control rounds and an
//!   intercept-resend attacker.
//! - [`channel`]: Rician channel sampling and the time-of-arrival bound.
//! - [`localization`]: TDoA geometry, Fisher information, error ellipses and
//!   maximum-likelihood position estimation.
//! - [`qlv`]: the location verification rule and spoofing sweeps.
//! - [`orchestrator`]: end-to-end sessions, memory provisioning and
//!   instruction sharing across reference stations.
//!
//! Every stochastic routine takes its random number generator explicitly; see
//! [`rng`] for the seeded substreams used to keep results reproducible and
//! independent of thread scheduling.

pub mod bits;
pub mod channel;
pub mod localization;
pub mod orchestrator;
pub mod qdc;
pub mod qlv;
pub mod quantum;
pub mod rng;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the plane, metres.
pub type Point = nalgebra::Vector2<f64>;

// The guide's code listings are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/quantum.md")]
    mod quantum {}
    #[doc = include_str!("../../../book/src/pingpong.md")]
    mod pingpong {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/localization.md")]
    mod localization {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/sessions.md")]
    mod sessions {}
}
