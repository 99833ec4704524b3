//! Reference bounds: the beam-splitting attack on COW, and the three-state
//! protocol (single photons, weak coherent pulses, zero-error PNS).

use serde::{Deserialize, Serialize};

use crate::entropy::{binary_entropy, shannon_entropy};
use crate::optimize::{bisect_root, golden_section_max, maximize_log_bracketed, MU_REL_TOL, WIDE_MU_BRACKET};
use crate::{Error, ProtocolParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsAttackResult {
    /// `⟨0α′|α′0⟩ = e^{−μ(1−t)}` for the pulses Eve keeps.
    pub overlap: f64,
    pub i_usd: f64,
    pub i_me: f64,
    pub chi_holevo: f64,
    /// Devetak-Winter rate, bits per window.
    pub rate: f64,
}

/// Eve keeps the fraction `1 − t` of every pulse.
pub fn bs_attack(p: &ProtocolParams) -> BsAttackResult {
    let t = p.transmission();
    let ov = (-p.mu * (1.0 - t)).exp();
    let i_me = 1.0 - binary_entropy(0.5 - 0.5 * (1.0 - ov * ov).max(0.0).sqrt());
    let chi = binary_entropy(0.5 * (1.0 - ov));
    let detected = (1.0 - p.f()) * -(-p.mu * t * p.tb * p.eta).exp_m1();
    BsAttackResult { overlap: ov, i_usd: 1.0 - ov, i_me, chi_holevo: chi, rate: detected * (1.0 - chi) }
}

/// `g(x) = x [1 − h((1 − e^{−x})/2)]`.
pub fn bs_g(x: f64) -> f64 {
    x * (1.0 - binary_entropy(-0.5 * (-x).exp_m1()))
}

/// Maximiser ξ of `g` and the value `g(ξ)`, computed numerically.
pub fn bs_xi() -> (f64, f64) {
    golden_section_max(bs_g, 0.01, 5.0, 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsOptimum {
    pub xi: f64,
    pub g_xi: f64,
    pub mu_opt: f64,
    /// `g(ξ) t/(1−t) · t_B η (1−f)`, the small-`μtη` optimum.
    pub rate: f64,
}

pub fn bs_optimal_mu(p: &ProtocolParams) -> Result<BsOptimum> {
    p.validate()?;
    let t = p.transmission();
    if !(t < 1.0) {
        return Err(Error::InvalidInput("the beam-splitting optimum needs t < 1".into()));
    }
    let (xi, g_xi) = bs_xi();
    Ok(BsOptimum {
        xi,
        g_xi,
        mu_opt: xi / (1.0 - t),
        rate: g_xi * t / (1.0 - t) * p.tb * p.eta * (1.0 - p.f()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl BellDiagonalWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
    }

    /// Whether the weights are compatible with the observed `(Q, V)`.
    pub fn satisfies_constraints(&self, q: f64, v: f64, tol: f64) -> bool {
        let [l1, l2, l3, l4] = self.as_array();
        let within = |lo: f64, x: f64, hi: f64| lo - tol <= x && x <= hi + tol;
        let (s1, s2, s3, s4) = (l1.sqrt(), l2.sqrt(), l3.sqrt(), l4.sqrt());
        (l1 + l2 + l3 + l4 - 1.0).abs() < tol
            && self.as_array().iter().all(|&l| within(0.0, l, 1.0))
            && (l3 + l4 - q).abs() < tol
            && within((s1 - s3).powi(2), 0.5 * (1.0 + v), (s1 + s3).powi(2))
            && within((s2 - s4).powi(2), 0.5 * (1.0 - v), (s2 + s4).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeStateBound {
    /// `1 − H(λ)`; may be negative.
    pub r: f64,
    pub r_clamped: f64,
    pub weights: BellDiagonalWeights,
}

/// Single-photon lower bound `r(Q, V) = 1 − H(λ1, …, λ4)`.
pub fn three_state_single_photon(q: f64, v: f64) -> Result<ThreeStateBound> {
    if !(0.0..=0.5).contains(&q) || !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!("need Q in [0, 1/2] and V in [0, 1], got Q = {q}, V = {v}")));
    }
    let root = ((1.0 - v * v) * q * (1.0 - q)).max(0.0).sqrt();
    let plus = 0.5 * (1.0 + v) - q * v - root;
    let minus = 0.5 * (1.0 - v) + q * v + root;
    // Rounding can leave -1e-17 where the exact value is zero.
    let weights = BellDiagonalWeights {
        lambda1: ((1.0 - q) * plus).max(0.0),
        lambda2: ((1.0 - q) * minus).max(0.0),
        lambda3: (q * minus).max(0.0),
        lambda4: (q * plus).max(0.0),
    };
    let r = 1.0 - shannon_entropy(&weights.as_array());
    Ok(ThreeStateBound { r, r_clamped: r.max(0.0), weights })
}

/// `r(0, V) = 1 − h((1 − V)/2)`.
pub fn three_state_zero_qber(v: f64) -> f64 {
    1.0 - binary_entropy(0.5 * (1.0 - v))
}

/// `r(Q, 1) = 1 − 2h(Q)`.
pub fn three_state_perfect_visibility(q: f64) -> f64 {
    1.0 - 2.0 * binary_entropy(q)
}

/// Largest QBER at which the single-photon bound stays positive for the
/// given visibility, if any.
pub fn three_state_qber_threshold(v: f64) -> Option<f64> {
    let r = |q: f64| three_state_single_photon(q, v).map(|b| b.r).unwrap_or(f64::NAN);
    bisect_root(r, 0.0, 0.5, 1e-14)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WcpBound {
    /// Fraction of tagged (multi-photon) detections.
    pub delta: f64,
    pub q1: f64,
    pub v1: f64,
    /// `(1 − Δ) S(Q1, V1) − h(Q)` per detected bit; may be negative.
    pub r_per_bit: f64,
    /// `max(0, r_per_bit)` times Bob's bit detection rate.
    pub rate: f64,
}

/// GLLP bound for weak coherent pulses, with `S(Q, V) = r(Q, V) + h(Q)` the
/// privacy-amplification term of the single-photon bound.
pub fn three_state_wcp(p: &ProtocolParams, q: f64, v: f64) -> Result<WcpBound> {
    p.validate()?;
    let t = p.transmission();
    let multi = -(-p.mu).exp_m1() - p.mu * (-p.mu).exp();
    let delta = multi / -(-p.mu * t * p.eta).exp_m1();
    if !(delta < 1.0) {
        return Err(Error::VacuousBound(format!("tagged fraction Δ = {delta} ≥ 1")));
    }
    let q1 = q / (1.0 - delta);
    let v1 = (v - delta) / (1.0 - delta);
    if v1 < 0.0 {
        return Err(Error::VacuousBound(format!("V1 = {v1} < 0")));
    }
    if q1 > 0.5 {
        return Err(Error::VacuousBound(format!("Q1 = {q1} > 1/2")));
    }
    let s = three_state_single_photon(q1, v1.min(1.0))?.r + binary_entropy(q1);
    let r_per_bit = (1.0 - delta) * s - binary_entropy(q);
    let detected = (1.0 - p.f()) * -(-p.mu * t * p.tb * p.eta).exp_m1();
    Ok(WcpBound { delta, q1, v1, r_per_bit, rate: r_per_bit.max(0.0) * detected })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateOptimum {
    pub mu_opt: f64,
    pub rate: f64,
    pub at_bracket_edge: bool,
}

/// GLLP rate maximised over μ; vacuous points count as zero.
pub fn three_state_wcp_optimal(p: &ProtocolParams, q: f64, v: f64) -> Result<RateOptimum> {
    p.validate()?;
    three_state_single_photon(q, v)?;
    let best = maximize_log_bracketed(
        |mu| three_state_wcp(&p.with_mu(mu), q, v).map(|b| b.rate).unwrap_or(0.0),
        WIDE_MU_BRACKET.0,
        WIDE_MU_BRACKET.1,
        MU_REL_TOL,
    )?;
    Ok(RateOptimum { mu_opt: best.x, rate: best.value, at_bracket_edge: best.at_edge })
}

/// Zero-error PNS attack on the three-state protocol:
/// `R = (1 − μ/(2t)) μ t t_B η (1 − f)`, maximal at `μ = t`.
pub fn three_state_pns_rate(p: &ProtocolParams) -> f64 {
    let t = p.transmission();
    ((1.0 - p.mu / (2.0 * t)) * p.mu * t * p.tb * p.eta * (1.0 - p.f())).max(0.0)
}

pub fn three_state_pns_zero_error(p: &ProtocolParams) -> RateOptimum {
    let t = p.transmission();
    RateOptimum { mu_opt: t, rate: three_state_pns_rate(&p.with_mu(t)), at_bracket_edge: false }
}
