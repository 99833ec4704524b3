//! Physical and protocol constants shared by every module.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of one COW link.
///
/// The decoy fraction is stored split into full decoys `|αα⟩` (`f1`) and
/// empty decoys `|00⟩` (`f0`). The standard protocol has `f0 = 0`; the
/// empty-decoy variant is selected simply by giving `f0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Mean photon number of a non-empty pulse.
    pub mu: f64,
    /// Probability of an empty decoy window.
    pub f0: f64,
    /// Probability of a full decoy window.
    pub f1: f64,
    /// Fraction of Bob's light sent to the data line.
    pub tb: f64,
    /// Detector efficiency, identical for the three detectors.
    pub eta: f64,
    /// Fibre attenuation in dB/km.
    pub att_db_per_km: f64,
    pub length_km: f64,
}

impl Default for ProtocolParams {
    /// η = 0.1, 0.25 dB/km, f = 0.1, t_B = 0.99, μ = 0.1, at zero length.
    fn default() -> Self {
        ProtocolParams {
            mu: 0.1,
            f0: 0.0,
            f1: 0.1,
            tb: 0.99,
            eta: 0.1,
            att_db_per_km: 0.25,
            length_km: 0.0,
        }
    }
}

impl ProtocolParams {
    /// Standard protocol (no empty decoys) with the given link.
    pub fn new(mu: f64, f: f64, tb: f64, eta: f64, att_db_per_km: f64, length_km: f64) -> Self {
        ProtocolParams { mu, f0: 0.0, f1: f, tb, eta, att_db_per_km, length_km }
    }

    /// Total decoy fraction `f = f0 + f1`.
    pub fn f(&self) -> f64 {
        self.f0 + self.f1
    }

    pub fn has_empty_decoys(&self) -> bool {
        self.f0 > 0.0
    }

    /// Channel transmission `t = 10^(-α ℓ / 10)`.
    pub fn transmission(&self) -> f64 {
        10f64.powf(-self.att_db_per_km * self.length_km / 10.0)
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_length_km(mut self, length_km: f64) -> Self {
        self.length_km = length_km;
        self
    }

    /// Standard-protocol decoy fraction (sets `f0 = 0`).
    pub fn with_f(mut self, f: f64) -> Self {
        self.f0 = 0.0;
        self.f1 = f;
        self
    }

    pub fn with_decoys(mut self, f0: f64, f1: f64) -> Self {
        self.f0 = f0;
        self.f1 = f1;
        self
    }

    /// Sets the fibre length that yields transmission `t` at the current
    /// attenuation.
    pub fn with_transmission(mut self, t: f64) -> Self {
        assert!(t > 0.0 && t <= 1.0, "transmission must lie in (0, 1]");
        assert!(self.att_db_per_km > 0.0, "attenuation must be positive to set t");
        self.length_km = -10.0 * t.log10() / self.att_db_per_km;
        self
    }

    /// Checks every range invariant. `mu = 0` is allowed here because the
    /// optimisers take the parameters "minus μ".
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.to_string()));
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return bad("mu must be finite and non-negative");
        }
        if !(self.f0 >= 0.0 && self.f1 >= 0.0 && self.f() <= 1.0) {
            return bad("decoy fractions must satisfy f0, f1 >= 0 and f0 + f1 <= 1");
        }
        if !(self.tb > 0.0 && self.tb <= 1.0) {
            return bad("tB must lie in (0, 1]");
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta must lie in (0, 1]");
        }
        if !(self.att_db_per_km.is_finite() && self.att_db_per_km >= 0.0) {
            return bad("attenuation must be finite and non-negative");
        }
        if !(self.length_km.is_finite() && self.length_km >= 0.0) {
            return bad("length must be finite and non-negative");
        }
        Ok(())
    }
}

/// What Eve sends to Bob after a conclusive USD result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardingModel {
    /// One photon: `Π(p) = p`.
    SinglePhoton,
    /// A bright pulse that fires every detector it reaches: `Π(p) = 1`.
    BrightPulse,
}

impl ForwardingModel {
    /// Detection probability `Π(p)` of the forwarded state for a single-photon
    /// detection probability `p`.
    pub fn pi(self, p: f64) -> f64 {
        match self {
            ForwardingModel::SinglePhoton => p,
            ForwardingModel::BrightPulse => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transmission_from_length() {
        let p = ProtocolParams::default().with_length_km(80.0);
        assert!((p.transmission() - 0.01).abs() < 1e-15);
        let q = p.with_transmission(1e-3);
        assert!((q.length_km - 120.0).abs() < 1e-9);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        assert!(ProtocolParams::default().validate().is_ok());
        assert!(ProtocolParams::default().with_decoys(0.6, 0.6).validate().is_err());
        let mut p = ProtocolParams::default();
        p.tb = 0.0;
        assert!(p.validate().is_err());
        p = ProtocolParams::default();
        p.eta = 1.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn forwarding_pi() {
        assert_eq!(ForwardingModel::SinglePhoton.pi(0.3), 0.3);
        assert_eq!(ForwardingModel::BrightPulse.pi(0.3), 1.0);
    }
}
