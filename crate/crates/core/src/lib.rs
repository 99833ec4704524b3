//! Zero-error attacks on Coherent One-Way QKD.
//!
//! [`state`] does the USD algebra, [`detection`] the expected click rates,
//! and [`mix`] combines the USD attacks into one that reproduces the honest
//! statistics. [`bounds`] holds the beam-splitting and three-state reference
//! rates. [`montecarlo`] simulates the pulses; [`scan`] drives the `cowqkd`
//! binary.

pub mod bounds;
pub mod detection;
pub mod entropy;
mod error;
pub mod mix;
pub mod montecarlo;
pub mod optimize;
pub mod params;
pub mod scan;
pub mod state;

pub use error::{Error, Result};
pub use params::{ForwardingModel, ProtocolParams};
