//! Click tallies and the statistics derived from them.

use serde::{Deserialize, Serialize};

use crate::detection::DetectionRates;
use crate::state::Pulse;

use super::optics::{DATA, M1, M2};
use super::train::WindowLabel;

/// Raw counts over the windows that enter the statistics. Merging is plain
/// addition, so shard order cannot change a result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub windows: u64,
    pub b_bit: u64,
    pub b_decoy: u64,
    pub b_empty_decoy: u64,
    pub m1_even: u64,
    pub m2_even: u64,
    pub m1_odd: u64,
    pub m2_odd: u64,
    pub decoy_m1: u64,
    pub decoy_m2: u64,
    pub v10_m1: u64,
    pub v10_m2: u64,
    pub bit_errors: u64,
    pub detected_decoys: u64,
    pub flanked_decoys: u64,
    pub eve_known_bits: u64,
    pub blocks: BlockCounts,
}

/// How many blocks ran each channel behaviour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCounts {
    pub pass_through: u64,
    pub beam_split: u64,
    pub usd3: u64,
    pub usd4a: u64,
    pub usd4b: u64,
    pub blocked: u64,
}

impl BlockCounts {
    pub fn total(&self) -> u64 {
        self.pass_through + self.beam_split + self.usd3 + self.usd4a + self.usd4b + self.blocked
    }

    fn merge(&mut self, o: &BlockCounts) {
        self.pass_through += o.pass_through;
        self.beam_split += o.beam_split;
        self.usd3 += o.usd3;
        self.usd4a += o.usd4a;
        self.usd4b += o.usd4b;
        self.blocked += o.blocked;
    }
}

impl Counts {
    pub fn merge(&mut self, o: &Counts) {
        self.windows += o.windows;
        self.b_bit += o.b_bit;
        self.b_decoy += o.b_decoy;
        self.b_empty_decoy += o.b_empty_decoy;
        self.m1_even += o.m1_even;
        self.m2_even += o.m2_even;
        self.m1_odd += o.m1_odd;
        self.m2_odd += o.m2_odd;
        self.decoy_m1 += o.decoy_m1;
        self.decoy_m2 += o.decoy_m2;
        self.v10_m1 += o.v10_m1;
        self.v10_m2 += o.v10_m2;
        self.bit_errors += o.bit_errors;
        self.detected_decoys += o.detected_decoys;
        self.flanked_decoys += o.flanked_decoys;
        self.eve_known_bits += o.eve_known_bits;
        self.blocks.merge(&o.blocks);
    }

    /// Tallies window `w` of a block. Needs both neighbours, so `w` must not
    /// be the first or last window.
    pub fn tally_window(&mut self, labels: &[WindowLabel], clicks: &[u8], eve_knows: bool, w: usize) {
        let (open, close) = (clicks[2 * w], clicks[2 * w + 1]);
        let label = labels[w];
        let data = u64::from(open & DATA != 0) + u64::from(close & DATA != 0);
        self.windows += 1;
        self.m1_odd += u64::from(open & M1 != 0);
        self.m2_odd += u64::from(open & M2 != 0);
        self.m1_even += u64::from(close & M1 != 0);
        self.m2_even += u64::from(close & M2 != 0);
        match label {
            WindowLabel::Bit0 | WindowLabel::Bit1 => {
                self.b_bit += data;
                let empty_slot = if label == WindowLabel::Bit0 { close } else { open };
                self.bit_errors += u64::from(empty_slot & DATA != 0);
                if eve_knows {
                    self.eve_known_bits += data;
                }
                if labels[w - 1] == WindowLabel::Bit1 && label == WindowLabel::Bit0 {
                    self.v10_m1 += u64::from(open & M1 != 0);
                    self.v10_m2 += u64::from(open & M2 != 0);
                }
            }
            WindowLabel::Decoy => {
                self.b_decoy += data;
                self.decoy_m1 += u64::from(close & M1 != 0);
                self.decoy_m2 += u64::from(close & M2 != 0);
                if data > 0 {
                    self.detected_decoys += 1;
                    if labels[w - 1].slots()[1] == Pulse::Empty && labels[w + 1].slots()[0] == Pulse::Empty {
                        self.flanked_decoys += 1;
                    }
                }
            }
            WindowLabel::EmptyDecoy => self.b_empty_decoy += data,
        }
    }
}

/// A per-window rate estimated from counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub count: u64,
}

impl Estimate {
    /// `count` events in `windows` windows with `slots` independent trials per
    /// window (binomial standard error).
    pub fn rate(count: u64, windows: u64, slots: u64) -> Self {
        if windows == 0 {
            return Estimate { value: 0.0, stderr: 0.0, count };
        }
        let trials = (windows * slots) as f64;
        let p = count as f64 / trials;
        Estimate { value: count as f64 / windows as f64, stderr: slots as f64 * (p * (1.0 - p) / trials).max(0.0).sqrt(), count }
    }
}

/// A conditional fraction, absent when nothing was conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub value: f64,
    pub stderr: f64,
    pub hits: u64,
    pub count: u64,
}

impl Fraction {
    pub fn new(hits: u64, count: u64) -> Option<Self> {
        if count == 0 {
            return None;
        }
        let p = hits as f64 / count as f64;
        Some(Fraction { value: p, stderr: (p * (1.0 - p) / count as f64).sqrt(), hits, count })
    }
}

/// Interference contrast `(M1 − M2)/(M1 + M2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visibility {
    pub value: f64,
    pub stderr: f64,
    pub m1: u64,
    pub m2: u64,
}

impl Visibility {
    pub fn new(m1: u64, m2: u64) -> Option<Self> {
        let f = Fraction::new(m1, m1 + m2)?;
        Some(Visibility { value: 2.0 * f.value - 1.0, stderr: 2.0 * f.stderr, m1, m2 })
    }
}

/// Trials per window behind each of the six rates, in [`DetectionRates::NAMES`]
/// order: decoy windows have two full slots on the data line.
pub const SLOTS_PER_WINDOW: [u64; 6] = [1, 2, 1, 1, 1, 1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub seed: u64,
    pub windows: u64,
    pub counted_windows: u64,
    pub block_len: usize,
    pub d_b_bit: Estimate,
    pub d_b_decoy: Estimate,
    pub d_m1_even: Estimate,
    pub d_m2_even: Estimate,
    pub d_m1_odd: Estimate,
    pub d_m2_odd: Estimate,
    pub d_b_empty_decoy: Estimate,
    pub visibility_decoy: Option<Visibility>,
    pub visibility_10: Option<Visibility>,
    pub qber: Option<Fraction>,
    /// Detected decoys whose neighbours put empty slots right before and
    /// right after them.
    pub decoy_neighbor_bias: Option<Fraction>,
    /// Detected bits that Eve knows.
    pub eve_known_bits: Option<Fraction>,
    pub blocks: BlockCounts,
}

impl SimStats {
    pub fn from_counts(c: &Counts, seed: u64, windows: u64, block_len: usize) -> Self {
        let n = c.windows;
        let [k_bit, k_decoy, ..] = SLOTS_PER_WINDOW;
        SimStats {
            seed,
            windows,
            counted_windows: n,
            block_len,
            d_b_bit: Estimate::rate(c.b_bit, n, k_bit),
            d_b_decoy: Estimate::rate(c.b_decoy, n, k_decoy),
            d_m1_even: Estimate::rate(c.m1_even, n, 1),
            d_m2_even: Estimate::rate(c.m2_even, n, 1),
            d_m1_odd: Estimate::rate(c.m1_odd, n, 1),
            d_m2_odd: Estimate::rate(c.m2_odd, n, 1),
            d_b_empty_decoy: Estimate::rate(c.b_empty_decoy, n, 2),
            visibility_decoy: Visibility::new(c.decoy_m1, c.decoy_m2),
            visibility_10: Visibility::new(c.v10_m1, c.v10_m2),
            qber: Fraction::new(c.bit_errors, c.b_bit),
            decoy_neighbor_bias: Fraction::new(c.flanked_decoys, c.detected_decoys),
            eve_known_bits: Fraction::new(c.eve_known_bits, c.b_bit),
            blocks: c.blocks,
        }
    }

    pub fn rates(&self) -> [Estimate; 6] {
        [self.d_b_bit, self.d_b_decoy, self.d_m1_even, self.d_m2_even, self.d_m1_odd, self.d_m2_odd]
    }

    pub fn rate_values(&self) -> DetectionRates {
        DetectionRates::from_array(self.rates().map(|e| e.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_when_nothing_to_condition_on() {
        assert!(Visibility::new(0, 0).is_none());
        assert!(Fraction::new(0, 0).is_none());
        assert_eq!(Visibility::new(5, 0).unwrap().value, 1.0);
    }

    #[test]
    fn rate_stderr_matches_binomial() {
        let e = Estimate::rate(100, 10_000, 1);
        assert_eq!(e.value, 0.01);
        assert!((e.stderr - (0.01f64 * 0.99 / 1e4).sqrt()).abs() < 1e-15);
        let e = Estimate::rate(100, 10_000, 2);
        assert_eq!(e.value, 0.01);
        assert!((e.stderr - 2.0 * (0.005f64 * 0.995 / 2e4).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tally_sorts_clicks_by_window_type() {
        use WindowLabel::*;
        let labels = [Bit0, Bit1, Decoy, Bit1, Bit0, Bit0];
        let mut clicks = vec![0u8; 12];
        clicks[3] = DATA | M1; // bit 1, full slot: correct bit, even M1
        clicks[4] = DATA; // decoy opening slot
        clicks[5] = M1; // decoy interference
        clicks[8] = DATA | M2; // bit 0 right after bit 1: V10 position
        clicks[11] = DATA; // bit 0, empty slot: an error, but not tallied
        let mut c = Counts::default();
        for w in 1..5 {
            c.tally_window(&labels, &clicks, w == 4, w);
        }
        assert_eq!(c.windows, 4);
        assert_eq!((c.b_bit, c.b_decoy, c.bit_errors), (2, 1, 0));
        assert_eq!((c.decoy_m1, c.decoy_m2, c.m1_even), (1, 0, 2));
        assert_eq!((c.v10_m1, c.v10_m2, c.m2_odd), (0, 1, 1));
        assert_eq!(c.eve_known_bits, 1);
        // The decoy is preceded by bit 1, which ends full: not flanked.
        assert_eq!((c.detected_decoys, c.flanked_decoys), (1, 0));
    }
}
