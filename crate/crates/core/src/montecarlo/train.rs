//! Alice's random pulse train.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::state::{Pulse, PulseSequence};
use crate::ProtocolParams;

/// Content of one two-slot window, in time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowLabel {
    /// Full then empty.
    Bit0,
    /// Empty then full.
    Bit1,
    Decoy,
    EmptyDecoy,
}

impl WindowLabel {
    pub fn slots(self) -> [Pulse; 2] {
        match self {
            WindowLabel::Bit0 => [Pulse::Full, Pulse::Empty],
            WindowLabel::Bit1 => [Pulse::Empty, Pulse::Full],
            WindowLabel::Decoy => [Pulse::Full, Pulse::Full],
            WindowLabel::EmptyDecoy => [Pulse::Empty, Pulse::Empty],
        }
    }

    pub fn is_bit(self) -> bool {
        matches!(self, WindowLabel::Bit0 | WindowLabel::Bit1)
    }

    /// Draws one label with probabilities `((1−f)/2, (1−f)/2, f1, f0)`.
    pub fn sample<R: Rng + ?Sized>(p: &ProtocolParams, rng: &mut R) -> Self {
        let u: f64 = rng.random();
        let bit = 0.5 * (1.0 - p.f());
        if u < bit {
            WindowLabel::Bit0
        } else if u < 2.0 * bit {
            WindowLabel::Bit1
        } else if u < 2.0 * bit + p.f1 {
            WindowLabel::Decoy
        } else {
            WindowLabel::EmptyDecoy
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Train {
    pub labels: Vec<WindowLabel>,
    /// Slot-by-slot symbols; window boundaries fall before even slots.
    pub pulses: PulseSequence,
}

impl Train {
    /// Amplitude of every slot for mean photon number `mu` (all full pulses
    /// share one phase).
    pub fn amplitudes(&self, mu: f64) -> Vec<f64> {
        let a = mu.sqrt();
        self.pulses.symbols().iter().map(|s| if *s == Pulse::Full { a } else { 0.0 }).collect()
    }
}

/// Panics when `windows` is zero.
pub fn generate_train<R: Rng + ?Sized>(p: &ProtocolParams, windows: usize, rng: &mut R) -> Train {
    assert!(windows > 0, "a train needs at least one window");
    let labels: Vec<WindowLabel> = (0..windows).map(|_| WindowLabel::sample(p, rng)).collect();
    let symbols = labels.iter().flat_map(|l| l.slots()).collect();
    let pulses = PulseSequence::new(symbols, 0).expect("non-empty train");
    Train { labels, pulses }
}
