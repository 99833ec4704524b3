//! Bob's passive optics: an asymmetric coupler, then a one-slot-delay
//! interferometer on the monitoring line.
//!
//! Light in slot `s` reaches the monitor outputs in slot `s` (short arm) and
//! `s + 1` (long arm). The output in slot `s` therefore carries
//! `(c_s ± c_{s−1})/2` times the monitoring-line amplitude, `+` at M1 and `−`
//! at M2. Nothing below inserts the 1/4 or 1/2 of the rate formulas; they
//! follow from these transfer coefficients.

use rand::Rng;

pub const DATA: u8 = 1;
pub const M1: u8 = 2;
pub const M2: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobOptics {
    pub tb: f64,
    pub eta: f64,
}

/// One detector firing in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub slot: usize,
    pub detector: u8,
    pub prob: f64,
}

impl BobOptics {
    /// Mean photon numbers reaching `[data, M1, M2]` in a slot whose own
    /// amplitude is `cur` and whose predecessor's is `prev`.
    pub fn intensities(&self, prev: f64, cur: f64) -> [f64; 3] {
        let mon = 1.0 - self.tb;
        [self.tb * cur * cur, mon * (cur + prev).powi(2) / 4.0, mon * (cur - prev).powi(2) / 4.0]
    }

    /// Independent click probabilities `1 − e^{−η n}` of the three detectors.
    pub fn coherent_click_probs(&self, prev: f64, cur: f64) -> [f64; 3] {
        self.intensities(prev, cur).map(|n| -(-self.eta * n).exp_m1())
    }

    /// Samples coherent-light clicks for `slots`, OR-ing detector flags into
    /// `clicks`. Amplitudes before slot 0 are taken as vacuum.
    pub fn detect_coherent<R: Rng + ?Sized>(
        &self,
        amps: &[f64],
        slots: std::ops::Range<usize>,
        clicks: &mut [u8],
        rng: &mut R,
    ) {
        for s in slots {
            let cur = amps[s];
            let prev = if s > 0 { amps[s - 1] } else { 0.0 };
            if cur == 0.0 && prev == 0.0 {
                continue;
            }
            let probs = self.coherent_click_probs(prev, cur);
            for (flag, p) in [DATA, M1, M2].into_iter().zip(probs) {
                if p > 0.0 && rng.random::<f64>() < p {
                    clicks[s] |= flag;
                }
            }
        }
    }

    /// Every way a single photon in mode `coeffs` (starting at slot `start`,
    /// unit norm) can be registered, with probabilities including η.
    pub fn photon_outcomes(&self, start: usize, coeffs: &[f64]) -> Vec<Outcome> {
        let c = |s: usize| if s >= start && s < start + coeffs.len() { coeffs[s - start] } else { 0.0 };
        let mut out = Vec::with_capacity(3 * coeffs.len() + 2);
        for i in 0..coeffs.len() {
            out.push(Outcome { slot: start + i, detector: DATA, prob: self.eta * self.tb * coeffs[i] * coeffs[i] });
        }
        for s in start..=start + coeffs.len() {
            let prev = if s > 0 { c(s - 1) } else { 0.0 };
            let [_, m1, m2] = self.intensities(prev, c(s));
            out.push(Outcome { slot: s, detector: M1, prob: self.eta * m1 });
            out.push(Outcome { slot: s, detector: M2, prob: self.eta * m2 });
        }
        out
    }

    /// Samples at most one click for a forwarded single photon. Clicks that
    /// would land past the end of `clicks` are discarded.
    pub fn detect_photon<R: Rng + ?Sized>(&self, start: usize, coeffs: &[f64], clicks: &mut [u8], rng: &mut R) {
        let mut u: f64 = rng.random();
        for o in self.photon_outcomes(start, coeffs) {
            if u < o.prob {
                if o.slot < clicks.len() {
                    clicks[o.slot] |= o.detector;
                }
                return;
            }
            u -= o.prob;
        }
    }
}
