//! Outage analysis of the two-phase cooperative protocol for unicast and
//! multicast in large Rayleigh-fading networks.
//!
//! Rates are in bits per channel use (`log2`); exponents, relative entropies
//! and log-probabilities are in nats (`ln`).

pub mod analytics;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod exponent;
pub mod montecarlo;
pub mod numerics;
pub mod protocol;
pub mod simcore;

pub use error::{Error, Result};
