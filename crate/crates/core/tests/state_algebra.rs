use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

use cowqkd::state::{
    build_state_set, gram_matrix, usd_conclusive_closed_form, usd_conclusive_oracle, Pulse, PulseSequence, StateSet,
    UsdKind,
};

/// Emittable trains written out by hand: `len` slots, complete windows
/// starting at the listed slots.
fn emittable(len: usize, windows: &[usize], empty_decoys: bool) -> Vec<Vec<bool>> {
    (0..1u32 << len)
        .map(|c| (0..len).map(|i| c >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|s| windows.iter().all(|&w| empty_decoys || s[w] || s[w + 1]))
        .collect()
}

fn layout(kind: UsdKind) -> (Vec<bool>, usize, Vec<usize>) {
    match kind {
        UsdKind::Usd3 | UsdKind::Usd3Ed => (vec![false, true, false], 3, vec![0]),
        UsdKind::Usd4a | UsdKind::Usd4Ed => (vec![false, true, true, false], 4, vec![0, 2]),
        UsdKind::Usd4b => (vec![false, true, true, false], 4, vec![1]),
    }
}

/// `1/(G⁻¹)_tt` as a ratio of determinants, with the overlaps from `e^{-μ d/2}`.
fn determinant_oracle(kind: UsdKind, mu: f64) -> (f64, usize) {
    let (target, len, windows) = layout(kind);
    let mut members = vec![target.clone()];
    members.extend(emittable(len, &windows, kind.empty_decoys()).into_iter().filter(|s| *s != target));
    let n = members.len();
    let g = DMatrix::from_fn(n, n, |i, j| {
        let d = members[i].iter().zip(&members[j]).filter(|(a, b)| a != b).count();
        (-0.5 * mu * d as f64).exp()
    });
    let minor = g.clone().remove_row(0).remove_column(0);
    (g.determinant() / minor.determinant(), n - 1)
}

#[test]
fn alternatives_counts() {
    let counts: Vec<usize> = UsdKind::ALL.iter().map(|&k| build_state_set(k).alternatives().len()).collect();
    assert_eq!(counts, vec![5, 8, 11, 7, 15]);
    for kind in UsdKind::ALL {
        assert_eq!(determinant_oracle(kind, 1.0).1, build_state_set(kind).alternatives().len());
    }
}

#[test]
fn closed_form_matches_determinant_ratio() {
    for kind in UsdKind::ALL {
        for mu in [0.25, 0.5, 1.0, 2.0] {
            let (det, _) = determinant_oracle(kind, mu);
            let closed = usd_conclusive_closed_form(kind, mu).conclusive_prob;
            assert_relative_eq!(closed, det, max_relative = 1e-8);
        }
    }
}

#[test]
fn empty_decoy_three_pulse_at_unit_mu() {
    let p = usd_conclusive_oracle(&build_state_set(UsdKind::Usd3Ed), 1.0).unwrap().conclusive_prob;
    assert!((p - (1.0 - (-1.0f64).exp()).powi(3)).abs() < 1e-12);
    assert!((p - 0.252580).abs() < 1e-6);
}

#[test]
fn usd4b_goes_as_half_mu_cubed() {
    for mu in [1e-3, 1e-4] {
        let p = usd_conclusive_closed_form(UsdKind::Usd4b, mu).conclusive_prob;
        assert_relative_eq!(p, 0.5 * mu * mu * mu, max_relative = 3.0 * mu);
    }
}

#[test]
fn gram_of_usd3_at_unit_mu() {
    let g = gram_matrix(&build_state_set(UsdKind::Usd3), 1.0).unwrap();
    assert_eq!(g.shape(), (6, 6));
    assert_eq!(g, g.transpose());
    assert!(g.symmetric_eigen().eigenvalues.min() > -1e-12);
}

#[test]
fn adding_empty_decoy_alternative_lowers_usd3() {
    let base = build_state_set(UsdKind::Usd3);
    let extra = PulseSequence::new(vec![Pulse::Empty; 3], base.target().boundary_offset()).unwrap();
    let bigger = base.with_alternative(extra).unwrap();
    // An empty first window may be followed by either pulse.
    let last = PulseSequence::new(vec![Pulse::Empty, Pulse::Empty, Pulse::Full], base.target().boundary_offset());
    let all = bigger.with_alternative(last.unwrap()).unwrap();
    for mu in [0.3, 1.0, 2.5] {
        let p = |s: &StateSet| usd_conclusive_oracle(s, mu).unwrap().conclusive_prob;
        assert!(p(&bigger) < p(&base));
        assert!(p(&all) <= p(&bigger));
        assert_relative_eq!(p(&all), usd_conclusive_closed_form(UsdKind::Usd3Ed, mu).conclusive_prob, max_relative = 1e-10);
    }
}

fn any_kind() -> impl Strategy<Value = UsdKind> {
    prop::sample::select(UsdKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn oracle_equals_closed_form(kind in any_kind(), mu in 0.05f64..3.0) {
        let oracle = usd_conclusive_oracle(&build_state_set(kind), mu).unwrap().conclusive_prob;
        let closed = usd_conclusive_closed_form(kind, mu).conclusive_prob;
        prop_assert!((oracle - closed).abs() < 1e-10, "{kind:?} mu={mu}: {oracle} vs {closed}");
    }

    #[test]
    fn gram_is_psd_with_unit_diagonal(kind in any_kind(), mu in 0.01f64..4.0) {
        let g = gram_matrix(&build_state_set(kind), mu).unwrap();
        prop_assert!((0..g.nrows()).all(|i| g[(i, i)] == 1.0));
        prop_assert!(g.symmetric_eigen().eigenvalues.min() >= -1e-12);
    }

    #[test]
    fn conclusive_prob_grows_with_mu(kind in any_kind(), a in 0.01f64..3.0, b in 0.01f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let p = |mu| usd_conclusive_closed_form(kind, mu).conclusive_prob;
        prop_assert!(p(lo) <= p(hi));
        prop_assert!((0.0..=1.0).contains(&p(hi)));
    }

    #[test]
    fn enlarging_the_set_never_helps(kind in any_kind(), mu in 0.1f64..2.5, drop in 0usize..5) {
        let full = build_state_set(kind);
        let mut alts = full.alternatives().to_vec();
        alts.remove(drop % alts.len());
        let fewer = StateSet::new(full.target().clone(), alts).unwrap();
        let p_full = usd_conclusive_oracle(&full, mu).unwrap().conclusive_prob;
        let p_fewer = usd_conclusive_oracle(&fewer, mu).unwrap().conclusive_prob;
        prop_assert!(p_full <= p_fewer + 1e-12);
    }
}
