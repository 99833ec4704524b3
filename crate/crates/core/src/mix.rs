//! The attack mixture that reproduces all six detection rates, and the key
//! rates it leaves to Alice and Bob.
//!
//! Eve runs USD3, USD4a and USD4b with probabilities `q1, q2, q3` and
//! forwards Alice's pulses over a lossless line with probability `q0`. In the
//! single-photon, linearised regime the four conditions have the closed-form
//! solution
//!
//! ```text
//! q0 = (μtF − 1)/(μF − 1),   q_j = μ(t − q0) F_j,   F = F1 + F2 + F3
//! ```
//!
//! with `F_j` built from the conclusive probabilities of the three attacks.
//! The same formulas cover the empty-decoy protocol once the conclusive
//! probabilities and the window priors are those of the enlarged alphabet.

use serde::{Deserialize, Serialize};

use crate::detection::{attack_rates, conclusive_prob_weighted, honest_rates, honest_rates_at, honest_rates_linear, AttackKind};
use crate::optimize::{bisect_root_log, golden_section_max, maximize_log_bracketed, MU_BRACKET, MU_REL_TOL, WIDE_MU_BRACKET};
use crate::{Error, ForwardingModel, ProtocolParams, Result};

/// Largest `μη` for which the linearised mix is reported as rate-preserving.
pub const LINEAR_REGIME_MAX_MU_ETA: f64 = 0.1;

/// Tolerance used to decide whether a hand-built mix is a probability vector.
const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackMix {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    /// Fraction of attempts on which Eve simply blocks everything. Non-zero
    /// only when the unconstrained solution would need `q0 < 0`.
    pub blocking_fraction: f64,
    /// All weights lie in [0, 1] and sum (with blocking) to one.
    pub feasible: bool,
    /// `μη` is small enough for the linearised solution to hold.
    pub linear_regime: bool,
}

impl AttackMix {
    pub fn new(q0: f64, q1: f64, q2: f64, q3: f64, blocking_fraction: f64, linear_regime: bool) -> Self {
        let w = [q0, q1, q2, q3, blocking_fraction];
        let in_range = w.iter().all(|&q| (-PROB_TOL..=1.0 + PROB_TOL).contains(&q));
        let total: f64 = w.iter().sum();
        AttackMix {
            q0,
            q1,
            q2,
            q3,
            blocking_fraction,
            feasible: in_range && (total - 1.0).abs() < 1e-9,
            linear_regime,
        }
    }

    pub fn weights(&self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixCoefficients {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    /// `F = F1 + F2 + F3`.
    pub f: f64,
    /// `9 + 4f − f²` for the standard protocol; the small-μ constant of
    /// `F ≈ 4𝓕/μ⁴` with empty decoys.
    pub cal_f: f64,
}

/// Largest standard decoy fraction for which `F1 ≥ 0`: `√5 − 2`.
pub fn max_decoy_fraction() -> f64 {
    5f64.sqrt() - 2.0
}

/// Largest full-decoy fraction the empty-decoy attack tolerates:
/// `min(1/4, −2 + f0 + √(5 − 4 f0))`.
pub fn max_full_decoy_fraction(f0: f64) -> f64 {
    0.25f64.min(-2.0 + f0 + (5.0 - 4.0 * f0).sqrt())
}

/// `F` for the standard protocol written directly in μ and f.
pub fn sum_f_closed_form(f: f64, mu: f64) -> f64 {
    let x = -(-mu).exp_m1();
    (32.0 - (9.0 + 4.0 * f - f * f) * x) / ((1.0 - f).powi(2) * x.powi(3))
}

fn small_mu_constant(p: &ProtocolParams) -> f64 {
    if p.has_empty_decoys() {
        let (f0, f1) = (p.f0, p.f1);
        (1.0 + f1 - f0).powi(2) / (1.0 - f1 - f0).powi(2) + 4.0 / (1.0 - f1 + f0).powi(2)
    } else {
        let f = p.f();
        9.0 + 4.0 * f - f * f
    }
}

/// The coefficients `F_j` at the parameters' μ. Fails when `F1 < 0`, i.e.
/// when the decoy fraction is too large for this attack.
pub fn mix_coefficients(p: &ProtocolParams) -> Result<MixCoefficients> {
    let (f0, f1) = (p.f0, p.f1);
    let numerator1 = 1.0 - 4.0 * f1 - (f1 - f0).powi(2);
    // f1 = √5 − 2 is feasible; rounding must not push it over.
    if numerator1 < -1e-12 {
        return Err(Error::Infeasible(format!(
            "decoy fractions f0 = {f0}, f1 = {f1} leave F1 < 0; the detection rates cannot be reproduced"
        )));
    }
    if !(p.mu > 0.0) {
        return Err(Error::InvalidInput("mu must be positive".into()));
    }
    let p1 = conclusive_prob_weighted(AttackKind::Usd3, p);
    let p2 = conclusive_prob_weighted(AttackKind::Usd4a, p);
    let p3 = conclusive_prob_weighted(AttackKind::Usd4b, p);
    let c1 = 3.0 * numerator1.max(0.0) / (4.0 * p1);
    let c2 = (1.0 - f0 + f1).powi(2) / p2;
    // Without full decoys the decoy condition is void and Eve's best choice
    // is q3 = 0.
    let c3 = if f1 > 0.0 { 4.0 * f1 / p3 } else { 0.0 };
    Ok(MixCoefficients { f1: c1, f2: c2, f3: c3, f: c1 + c2 + c3, cal_f: small_mu_constant(p) })
}

fn solve(p: &ProtocolParams) -> Result<(AttackMix, MixCoefficients)> {
    p.validate()?;
    let c = mix_coefficients(p)?;
    let t = p.transmission();
    let mu_f = p.mu * c.f;
    if mu_f <= 1.0 {
        return Err(Error::Infeasible(format!("μF = {mu_f} ≤ 1: q0 is not a probability")));
    }
    let linear_regime = p.mu * p.eta < LINEAR_REGIME_MAX_MU_ETA;
    let mix = if mu_f * t >= 1.0 {
        let q0 = (mu_f * t - 1.0) / (mu_f - 1.0);
        // μ(t − q0), rearranged so it does not cancel when q0 ≈ t.
        let k = p.mu * (1.0 - t) / (mu_f - 1.0);
        AttackMix::new(q0, k * c.f1, k * c.f2, k * c.f3, 0.0, linear_regime)
    } else {
        // Eve attacks every attempt and still forwards too much: the
        // remainder is blocked.
        let k = p.mu * t;
        AttackMix::new(0.0, k * c.f1, k * c.f2, k * c.f3, 1.0 - mu_f * t, linear_regime)
    };
    Ok((mix, c))
}

/// Analytic mix for the standard protocol (`f0 = 0`).
pub fn solve_mix(p: &ProtocolParams) -> Result<(AttackMix, MixCoefficients)> {
    if p.has_empty_decoys() {
        return Err(Error::InvalidInput("empty decoys present; use solve_mix_empty_decoy".into()));
    }
    if p.f() > max_decoy_fraction() {
        return Err(Error::Infeasible(format!("f = {} exceeds √5 − 2 ≈ 0.236", p.f())));
    }
    solve(p)
}

/// Analytic mix for the protocol with empty decoys.
pub fn solve_mix_empty_decoy(p: &ProtocolParams) -> Result<(AttackMix, MixCoefficients)> {
    if !(p.f() < 1.0) {
        return Err(Error::InvalidInput("f0 + f1 must be below 1".into()));
    }
    if p.f1 > max_full_decoy_fraction(p.f0) {
        return Err(Error::Infeasible(format!(
            "f1 = {} exceeds min(1/4, −2 + f0 + √(5 − 4f0)) = {}",
            p.f1,
            max_full_decoy_fraction(p.f0)
        )));
    }
    solve(p)
}

/// Dispatches on the presence of empty decoys.
pub fn solve_any(p: &ProtocolParams) -> Result<(AttackMix, MixCoefficients)> {
    if p.has_empty_decoys() {
        solve_mix_empty_decoy(p)
    } else {
        solve_mix(p)
    }
}

/// `q0 D^{t=1} + Σ q_j D^{(j)} − D^t` for the six linearised rates with
/// single-photon forwarding. Blocked attempts contribute nothing.
pub fn verify_mix_residuals(mix: &AttackMix, p: &ProtocolParams) -> [f64; 6] {
    let t = p.transmission();
    let mut model = honest_rates_linear(p, 1.0).scaled(mix.q0);
    for (kind, q) in AttackKind::ALL.iter().zip([mix.q1, mix.q2, mix.q3]) {
        model = model.add(&attack_rates(*kind, p, ForwardingModel::SinglePhoton).scaled(q));
    }
    let target = honest_rates_linear(p, t).to_array();
    let m = model.to_array();
    std::array::from_fn(|i| m[i] - target[i])
}

/// Exact (non-linearised) rates Bob sees under the mix.
pub fn mix_rates(mix: &AttackMix, p: &ProtocolParams, fw: ForwardingModel) -> crate::detection::DetectionRates {
    let mut model = honest_rates_at(p, 1.0).scaled(mix.q0);
    for (kind, q) in AttackKind::ALL.iter().zip([mix.q1, mix.q2, mix.q3]) {
        model = model.add(&attack_rates(*kind, p, fw).scaled(q));
    }
    model
}

/// Upper bound on the one-way key rate under the mix: only bits that were
/// never attacked are secret, `R = q0 D_B,bit^{t=1} = q0 μ t_B η (1 − f)`.
pub fn key_rate(p: &ProtocolParams, mix: &AttackMix) -> f64 {
    (mix.q0 * p.mu * p.tb * p.eta * (1.0 - p.f())).max(0.0)
}

/// Eve's share of the detected key bits, `I(A:E) = 1 − q0 / t`.
pub fn eve_information(p: &ProtocolParams, mix: &AttackMix) -> f64 {
    (1.0 - mix.q0 / p.transmission()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    pub mu_opt: f64,
    /// Bits per two-slot window.
    pub r_opt: f64,
    /// Smallest μ above `mu_opt` at which the rate vanishes, if inside the
    /// bracket.
    pub mu_max: Option<f64>,
    /// Eve's information fraction on the detected key bits at `mu_opt`.
    pub i_ae: f64,
    /// The maximiser is pinned to the μ bracket (no interior optimum).
    pub at_bracket_edge: bool,
    /// `mu_opt · η` is inside the linearised regime.
    pub linear_regime: bool,
}

/// Maximises the mix key rate over μ ∈ [1e-4, 3] (golden section in log μ)
/// and locates μ_max from `q0(μ) = 0`. Handles both protocol variants.
pub fn optimize_mu(p: &ProtocolParams) -> Result<KeyRateResult> {
    p.validate()?;
    // Surface infeasible decoy fractions before optimising.
    solve_any(&p.with_mu(0.1))?;
    let rate = |mu: f64| match solve_any(&p.with_mu(mu)) {
        Ok((mix, _)) => key_rate(&p.with_mu(mu), &mix),
        Err(_) => 0.0,
    };
    let best = maximize_log_bracketed(rate, MU_BRACKET.0, MU_BRACKET.1, MU_REL_TOL)?;
    let at_opt = p.with_mu(best.x);
    let (mix, _) = solve_any(&at_opt)?;
    let t = p.transmission();
    let excess = |mu: f64| match mix_coefficients(&p.with_mu(mu)) {
        Ok(c) => mu * t * c.f - 1.0,
        Err(_) => -1.0,
    };
    let mu_max = bisect_root_log(excess, best.x, MU_BRACKET.1, 1e-12);
    Ok(KeyRateResult {
        mu_opt: best.x,
        r_opt: best.value,
        mu_max,
        i_ae: eve_information(&at_opt, &mix),
        at_bracket_edge: best.at_edge,
        linear_regime: best.x * p.eta < LINEAR_REGIME_MAX_MU_ETA,
    })
}

/// Small-μ estimates of `(μ_opt, R(μ_opt), μ_max)` for the mix attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub mu_opt: f64,
    pub r_opt: f64,
    pub mu_max: f64,
}

/// Standard protocol: `μ_opt ≈ 4√6/(3(1−f)) √t`, `R ≈ (8√6/9) t_B η t^{3/2}`,
/// `μ_max ≈ √3 μ_opt`. Empty decoys: `μ_opt ≈ (𝓕t)^{1/3}`,
/// `R ≈ (3/4) 𝓕^{1/3} t_B η (1−f) t^{4/3}`, `μ_max = 4^{1/3} μ_opt`.
pub fn asymptotics(p: &ProtocolParams) -> Asymptotics {
    let t = p.transmission();
    let f = p.f();
    if p.has_empty_decoys() {
        let cf = small_mu_constant(p).cbrt();
        let mu_opt = cf * t.cbrt();
        Asymptotics {
            mu_opt,
            r_opt: 0.75 * cf * p.tb * p.eta * (1.0 - f) * t.powf(4.0 / 3.0),
            mu_max: 4f64.cbrt() * mu_opt,
        }
    } else {
        let s6 = 6f64.sqrt();
        let mu_opt = 4.0 * s6 / (3.0 * (1.0 - f)) * t.sqrt();
        Asymptotics { mu_opt, r_opt: 8.0 * s6 / 9.0 * p.tb * p.eta * t.powf(1.5), mu_max: 3f64.sqrt() * mu_opt }
    }
}

/// Minimum of `μF(μ)` over μ ∈ (0, 5] for the standard protocol at decoy
/// fraction `f`; returns `(μ, μF)`.
pub fn mu_f_minimum(f: f64) -> (f64, f64) {
    let (mu, neg) = golden_section_max(|mu| -mu * sum_f_closed_form(f, mu), 0.05, 5.0, 1e-10);
    (mu, -neg)
}

/// Attacks that only have to match the average data-line rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoorStatsKind {
    Usd3Only,
    Usd4aOnly,
}

impl PoorStatsKind {
    pub fn attack(self) -> AttackKind {
        match self {
            PoorStatsKind::Usd3Only => AttackKind::Usd3,
            PoorStatsKind::Usd4aOnly => AttackKind::Usd4a,
        }
    }
}

/// Fraction of attempts Eve attacks so that `D_B` matches:
/// `q1 = (D_B^{t=1} − D_B^t)/(D_B^{t=1} − D_B^{(k)})`. Values above one mean
/// the attack loses too much light even when run everywhere.
pub fn poor_stats_q1(kind: PoorStatsKind, p: &ProtocolParams, fw: ForwardingModel) -> f64 {
    let lossless = honest_rates_at(p, 1.0).d_b();
    let expected = honest_rates(p).d_b();
    let attacked = attack_rates(kind.attack(), p, fw).d_b();
    (lossless - expected) / (lossless - attacked)
}

/// Key rate `(1 − q1) D_B,bit^{t=1}` left by a poor-statistics attack.
pub fn poor_stats_rate(kind: PoorStatsKind, p: &ProtocolParams, fw: ForwardingModel) -> f64 {
    let q1 = poor_stats_q1(kind, p, fw);
    if !(0.0..=1.0).contains(&q1) {
        return 0.0;
    }
    (1.0 - q1) * honest_rates_at(p, 1.0).d_b_bit
}

/// Small-μ constant `C` with `μ_max = Ct`, `μ_opt = Ct/2` and
/// `R(μ_opt) = (1−f)/4 · t_B η · C t²`.
pub fn poor_stats_constant(kind: PoorStatsKind, p: &ProtocolParams, fw: ForwardingModel) -> f64 {
    let k = match kind {
        PoorStatsKind::Usd3Only => 6.0,
        PoorStatsKind::Usd4aOnly => 8.0,
    };
    let f = p.f();
    k * (1.0 + f) * p.tb * p.eta / ((1.0 - f).powi(2) * fw.pi(p.tb * p.eta))
}

pub fn poor_stats_attack(kind: PoorStatsKind, p: &ProtocolParams, fw: ForwardingModel) -> Result<KeyRateResult> {
    p.validate()?;
    let rate = |mu: f64| poor_stats_rate(kind, &p.with_mu(mu), fw);
    let best = maximize_log_bracketed(rate, WIDE_MU_BRACKET.0, WIDE_MU_BRACKET.1, MU_REL_TOL)?;
    let at_opt = p.with_mu(best.x);
    let q1 = poor_stats_q1(kind, &at_opt, fw).clamp(0.0, 1.0);
    let attacked = q1 * attack_rates(kind.attack(), &at_opt, fw).d_b_bit;
    let total = attacked + (1.0 - q1) * honest_rates_at(&at_opt, 1.0).d_b_bit;
    let i_ae = if total > 0.0 { attacked / total } else { 0.0 };
    // q1 reaches one where the attacked rate drops to the expected rate.
    let gap = |mu: f64| {
        let q = p.with_mu(mu);
        honest_rates(&q).d_b() - attack_rates(kind.attack(), &q, fw).d_b()
    };
    let mu_max = bisect_root_log(gap, best.x, MU_BRACKET.1, 1e-12);
    Ok(KeyRateResult {
        mu_opt: best.x,
        r_opt: best.value,
        mu_max,
        i_ae,
        at_bracket_edge: best.at_edge,
        linear_regime: best.x * p.eta < LINEAR_REGIME_MAX_MU_ETA,
    })
}
