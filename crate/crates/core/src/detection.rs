//! Expected detection rates at Bob's detectors.
//!
//! Every rate is a probability per two-slot window: one bit, decoy or empty
//! decoy. `D_B` is the data-line detector, `D_M1`/`D_M2` the two outputs of
//! the monitoring interferometer. Monitor rates are split by the time slot of
//! the click: "even" slots close a window and interfere its two pulses,
//! "odd" slots open a window and interfere pulses across the bit separation.
//!
//! Detector efficiency is applied after Eve's channel and never credited to
//! her. There are no dark counts and no dead time.

use serde::{Deserialize, Serialize};

use crate::state::{usd_conclusive_closed_form, UsdKind};
use crate::{ForwardingModel, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionRates {
    pub d_b_bit: f64,
    pub d_b_decoy: f64,
    pub d_m1_even: f64,
    pub d_m2_even: f64,
    pub d_m1_odd: f64,
    pub d_m2_odd: f64,
}

impl DetectionRates {
    pub const NAMES: [&'static str; 6] = ["d_b_bit", "d_b_decoy", "d_m1_even", "d_m2_even", "d_m1_odd", "d_m2_odd"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.d_b_bit, self.d_b_decoy, self.d_m1_even, self.d_m2_even, self.d_m1_odd, self.d_m2_odd]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        DetectionRates {
            d_b_bit: a[0],
            d_b_decoy: a[1],
            d_m1_even: a[2],
            d_m2_even: a[3],
            d_m1_odd: a[4],
            d_m2_odd: a[5],
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * k))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.to_array(), other.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }

    /// Total data-line rate `D_B = D_B,bit + D_B,decoy`.
    pub fn d_b(&self) -> f64 {
        self.d_b_bit + self.d_b_decoy
    }
}

/// Window-label probabilities that shape the honest rates: bits, full
/// decoys, and the probability that a given edge slot of a window is full.
struct Priors {
    bits: f64,
    full_decoys: f64,
    edge_full: f64,
}

impl Priors {
    fn of(p: &ProtocolParams) -> Self {
        let bits = 1.0 - p.f();
        // The closing slot of a window is full for bit 1 and full decoys, the
        // opening slot for bit 0 and full decoys; both have probability
        // (1-f)/2 + f1.
        Priors { bits, full_decoys: p.f1, edge_full: 0.5 * bits + p.f1 }
    }
}

fn honest_from_clicks(p: &ProtocolParams, data_click: f64, rand: f64, int: f64) -> DetectionRates {
    let pr = Priors::of(p);
    let across_one = 2.0 * pr.edge_full * (1.0 - pr.edge_full);
    let across_both = pr.edge_full * pr.edge_full;
    DetectionRates {
        d_b_bit: pr.bits * data_click,
        d_b_decoy: 2.0 * pr.full_decoys * data_click,
        d_m1_even: pr.bits * rand + pr.full_decoys * int,
        d_m2_even: pr.bits * rand,
        d_m1_odd: across_one * rand + across_both * int,
        d_m2_odd: across_one * rand,
    }
}

/// Honest rates through a channel of transmission `t` (exact exponentials).
pub fn honest_rates_at(p: &ProtocolParams, t: f64) -> DetectionRates {
    let x = p.mu * t * p.eta;
    let click = |intensity: f64| -(-intensity).exp_m1();
    honest_from_clicks(p, click(x * p.tb), click(x * (1.0 - p.tb) / 4.0), click(x * (1.0 - p.tb)))
}

/// Honest rates at the link's own transmission.
pub fn honest_rates(p: &ProtocolParams) -> DetectionRates {
    honest_rates_at(p, p.transmission())
}

/// Honest rates to first order in `μη`, the model in which the attack mix is
/// solved.
pub fn honest_rates_linear(p: &ProtocolParams, t: f64) -> DetectionRates {
    let x = p.mu * t * p.eta;
    honest_from_clicks(p, x * p.tb, x * (1.0 - p.tb) / 4.0, x * (1.0 - p.tb))
}

/// The three USD attacks on the running protocol. Whether the empty-decoy
/// discrimination problem applies is read from the parameters (`f0 > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Usd3,
    Usd4a,
    Usd4b,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [AttackKind::Usd3, AttackKind::Usd4a, AttackKind::Usd4b];

    /// The discrimination problem Eve solves under these parameters.
    pub fn usd_kind(self, p: &ProtocolParams) -> UsdKind {
        match (self, p.has_empty_decoys()) {
            (AttackKind::Usd3, false) => UsdKind::Usd3,
            (AttackKind::Usd4a, false) => UsdKind::Usd4a,
            (AttackKind::Usd4b, false) => UsdKind::Usd4b,
            (AttackKind::Usd3, true) => UsdKind::Usd3Ed,
            (AttackKind::Usd4a | AttackKind::Usd4b, true) => UsdKind::Usd4Ed,
        }
    }

    /// Attacked slots per two-slot window (3 or 4 pulses per attempt).
    pub fn window_fraction(self) -> f64 {
        match self {
            AttackKind::Usd3 => 2.0 / 3.0,
            AttackKind::Usd4a | AttackKind::Usd4b => 0.5,
        }
    }

    /// Alice's probability of emitting the target sequence.
    pub fn target_prior(self, p: &ProtocolParams) -> f64 {
        let bit = 0.5 * (1.0 - p.f());
        // A neighbouring window contributes an empty edge slot when it is the
        // right bit value or an empty decoy.
        let empty_edge = bit + p.f0;
        match self {
            AttackKind::Usd3 => bit * empty_edge,
            AttackKind::Usd4a => bit * bit,
            AttackKind::Usd4b => p.f1 * empty_edge * empty_edge,
        }
    }
}

/// Probability per attack attempt that Alice sent the target and Eve's USD
/// was conclusive.
pub fn conclusive_prob_weighted(kind: AttackKind, p: &ProtocolParams) -> f64 {
    kind.target_prior(p) * usd_conclusive_closed_form(kind.usd_kind(p), p.mu).conclusive_prob
}

/// Detection rates Bob sees when Eve runs `kind` on every attempt and
/// forwards according to `fw` at full transmission.
pub fn attack_rates(kind: AttackKind, p: &ProtocolParams, fw: ForwardingModel) -> DetectionRates {
    let pc = conclusive_prob_weighted(kind, p) * kind.window_fraction();
    let data = fw.pi(p.tb * p.eta);
    let random = fw.pi((1.0 - p.tb) * p.eta / 4.0);
    let constructive = fw.pi((1.0 - p.tb) * p.eta / 2.0);
    match kind {
        AttackKind::Usd3 => DetectionRates {
            d_b_bit: pc * data,
            d_b_decoy: 0.0,
            d_m1_even: pc * random,
            d_m2_even: pc * random,
            d_m1_odd: pc * random,
            d_m2_odd: pc * random,
        },
        AttackKind::Usd4a => DetectionRates {
            d_b_bit: pc * data,
            d_b_decoy: 0.0,
            d_m1_even: pc * random,
            d_m2_even: pc * random,
            d_m1_odd: pc * constructive,
            d_m2_odd: 0.0,
        },
        AttackKind::Usd4b => DetectionRates {
            d_b_bit: 0.0,
            d_b_decoy: pc * data,
            d_m1_even: pc * constructive,
            d_m2_even: 0.0,
            d_m1_odd: pc * random,
            d_m2_odd: pc * random,
        },
    }
}
