//! One-dimensional maximisation and root bracketing.
//!
//! All key-rate optimisations go through [`maximize_log_bracketed`]: a coarse
//! logarithmic grid picks the best sub-bracket, then golden-section search
//! refines it. Long-distance key rates are zero over most of the bracket, and
//! golden section alone would miss the narrow window where they are not.

use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Default μ bracket and relative tolerance of the key-rate optimisers.
pub const MU_BRACKET: (f64, f64) = (1e-4, 3.0);
pub const MU_REL_TOL: f64 = 1e-6;
/// Bracket for rates whose optimum scales like `t` rather than `√t`; at long
/// distance those optima fall far below 1e-4.
pub const WIDE_MU_BRACKET: (f64, f64) = (1e-10, 3.0);
const GRID_POINTS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    /// The maximiser sits on (or within tolerance of) a bracket end.
    pub at_edge: bool,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximises `f(x)` over `x ∈ [lo, hi]` (both positive) searching in `ln x`,
/// with relative tolerance `rel_tol` on the maximiser.
pub fn maximize_log_bracketed<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<Maximum> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::OptimizationFailure(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..GRID_POINTS)
        .map(|i| {
            let u = ln_lo + step * i as f64;
            (u, f(u.exp()))
        })
        .collect();
    if grid.iter().any(|(_, v)| v.is_nan()) {
        return Err(Error::OptimizationFailure("objective returned NaN".into()));
    }
    let best = grid
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &(_, v))| if v > grid[acc].1 { i } else { acc });
    let a = grid[best.saturating_sub(1)].0;
    let b = grid[(best + 1).min(GRID_POINTS - 1)].0;
    // A relative tolerance in x is an absolute tolerance in ln x.
    let (u, value) = golden_section_max(|u| f(u.exp()), a, b, rel_tol);
    let (x, value) = if value >= grid[best].1 { (u.exp(), value) } else { (grid[best].0.exp(), grid[best].1) };
    let at_edge = (x.ln() - ln_lo) < 2.0 * rel_tol || (ln_hi - x.ln()) < 2.0 * rel_tol;
    Ok(Maximum { x, value, at_edge })
}

/// Bisection for a sign change of `f` on `[a, b]`, to absolute tolerance
/// `tol` in x. Returns `None` when `f(a)` and `f(b)` have the same sign.
pub fn bisect_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < tol {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Root of `f` in `ln x` between `lo` and `hi` with relative tolerance
/// `rel_tol`.
pub fn bisect_root_log<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Option<f64> {
    bisect_root(|u| f(u.exp()), lo.ln(), hi.ln(), rel_tol).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 4.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v.abs() < 1e-18);
    }

    #[test]
    fn log_bracketed_handles_narrow_support() {
        // Non-zero only on [1e-3, 2e-3]: plain golden section on [1e-4, 3] would
        // miss it.
        let f = |x: f64| if (1e-3..2e-3).contains(&x) { (x - 1e-3) * (2e-3 - x) } else { 0.0 };
        let m = maximize_log_bracketed(f, 1e-4, 3.0, 1e-9).unwrap();
        assert!((m.x - 1.5e-3).abs() / 1.5e-3 < 1e-4, "{m:?}");
        assert!(!m.at_edge);
    }

    #[test]
    fn log_bracketed_flags_edge() {
        let m = maximize_log_bracketed(|x| x, 1e-4, 3.0, 1e-6).unwrap();
        assert!(m.at_edge);
        assert!((m.x - 3.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_bracket_is_an_error() {
        assert!(maximize_log_bracketed(|x| x, 3.0, 1.0, 1e-6).is_err());
        assert!(maximize_log_bracketed(|x| x, 0.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn bisection() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect_root(|x| x * x + 1.0, 0.0, 2.0, 1e-9).is_none());
        let r = bisect_root_log(|x| x - 0.01, 1e-4, 3.0, 1e-12).unwrap();
        assert!((r - 0.01).abs() < 1e-12);
    }
}
