use approx::assert_relative_eq;
use proptest::prelude::*;

use cowqkd::detection::{attack_rates, conclusive_prob_weighted, honest_rates, honest_rates_linear, AttackKind};
use cowqkd::{ForwardingModel, ProtocolParams};

/// Honest rates from the slot picture: enumerate (previous, current, next)
/// windows, send each slot's amplitude through Bob's beam splitter and the
/// delay-line interferometer, and add up click probabilities.
fn slot_oracle(p: &ProtocolParams) -> [f64; 6] {
    let a = (p.mu * p.transmission() * p.eta).sqrt();
    // (probability, slots, is_bit, is_full_decoy)
    let labels = [
        (0.5 * (1.0 - p.f()), [a, 0.0], true, false),
        (0.5 * (1.0 - p.f()), [0.0, a], true, false),
        (p.f1, [a, a], false, true),
        (p.f0, [0.0, 0.0], false, false),
    ];
    let click = |i: f64| -(-i).exp_m1();
    let data = |x: f64| click(p.tb * x * x);
    // Monitor: amplitude √((1−tB)/2)·√½ from each of two consecutive slots.
    let m1 = |x: f64, y: f64| click((1.0 - p.tb) / 4.0 * (x + y).powi(2));
    let m2 = |x: f64, y: f64| click((1.0 - p.tb) / 4.0 * (x - y).powi(2));
    let mut r = [0.0; 6];
    for (pp, prev, _, _) in labels {
        for (pc, cur, bit, decoy) in labels {
            let w = pp * pc;
            let d = data(cur[0]) + data(cur[1]);
            if bit {
                r[0] += w * d;
            }
            if decoy {
                r[1] += w * d;
            }
            r[2] += w * m1(cur[0], cur[1]);
            r[3] += w * m2(cur[0], cur[1]);
            r[4] += w * m1(prev[1], cur[0]);
            r[5] += w * m2(prev[1], cur[0]);
        }
    }
    r
}

#[test]
fn reference_point_matches_slot_picture() {
    let p = ProtocolParams { tb: 0.9, ..ProtocolParams::default() }.with_transmission(0.1).with_mu(0.5);
    let got = honest_rates(&p).to_array();
    for (g, o) in got.iter().zip(slot_oracle(&p)) {
        assert_relative_eq!(*g, o, max_relative = 1e-12);
    }
}

#[test]
fn usd3_pok3() {
    let p = ProtocolParams::default().with_mu(0.5);
    let want = (0.45f64).powi(2) * (1.0 - (-0.5f64).exp()).powi(2);
    assert_relative_eq!(conclusive_prob_weighted(AttackKind::Usd3, &p), want, max_relative = 1e-14);
}

#[test]
fn usd3_with_empty_decoys() {
    let p = ProtocolParams::default().with_decoys(0.05, 0.05).with_mu(0.5);
    let want = 0.45 * (0.45 + 0.05) * (1.0 - (-0.5f64).exp()).powi(3);
    assert_relative_eq!(conclusive_prob_weighted(AttackKind::Usd3, &p), want, max_relative = 1e-14);
}

#[test]
fn usd4a_never_clicks_m2_on_odd_slots() {
    for fw in [ForwardingModel::SinglePhoton, ForwardingModel::BrightPulse] {
        let r = attack_rates(AttackKind::Usd4a, &ProtocolParams::default().with_mu(0.8), fw);
        assert_eq!(r.d_m2_odd, 0.0);
        assert_eq!(r.d_b_decoy, 0.0);
    }
}

#[test]
fn usd4b_reference_vector() {
    let p = ProtocolParams { tb: 0.9, ..ProtocolParams::default() }.with_mu(1.0);
    let x = 1.0 - (-1.0f64).exp();
    // f1 · (empty edge)² · p_c · (attempts per window)
    let pc = 0.1 * 0.45f64.powi(2) * x.powi(3) / (2.0 - x) * 0.5;
    let r = attack_rates(AttackKind::Usd4b, &p, ForwardingModel::SinglePhoton);
    let want = [0.0, pc * 0.9 * 0.1, pc * 0.05 * 0.1, 0.0, pc * 0.025 * 0.1, pc * 0.025 * 0.1];
    for (g, w) in r.to_array().iter().zip(want) {
        assert_relative_eq!(*g, w, max_relative = 1e-12);
    }
}

proptest! {
    #[test]
    fn honest_rates_match_slot_picture(
        mu in 0.01f64..3.0, f1 in 0.0f64..0.2, f0 in 0.0f64..0.2,
        tb in 0.5f64..1.0, eta in 0.01f64..1.0, km in 0.0f64..200.0,
    ) {
        let p = ProtocolParams { mu, f0, f1, tb, eta, length_km: km, ..ProtocolParams::default() };
        for (g, o) in honest_rates(&p).to_array().iter().zip(slot_oracle(&p)) {
            prop_assert!((g - o).abs() <= 1e-12 * o.abs().max(1e-300));
        }
    }

    #[test]
    fn linear_rates_agree_when_mu_t_eta_small(mu in 0.01f64..1.0, km in 20.0f64..200.0) {
        let p = ProtocolParams::default().with_mu(mu).with_length_km(km);
        let x = mu * p.transmission() * p.eta;
        for (e, l) in honest_rates(&p).to_array().iter().zip(honest_rates_linear(&p, p.transmission()).to_array()) {
            prop_assert!(*e <= l);
            prop_assert!((l - e) <= x * l);
        }
    }
}
