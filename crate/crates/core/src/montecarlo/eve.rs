//! What happens on the channel during one block of windows.

use rand::Rng;

use crate::detection::AttackKind;
use crate::state::{usd_conclusive_closed_form, Pulse};
use crate::{ForwardingModel, ProtocolParams};

use super::optics::BobOptics;
use super::stats::Counts;
use super::train::Train;

/// Photons in a bright forwarded pulse; large enough that every detector the
/// mode reaches fires.
pub const BRIGHT_PHOTONS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockPlan {
    /// Alice's pulses reach Bob with transmission `tau`.
    PassThrough { tau: f64 },
    /// The channel loss, with Eve holding the lost light.
    BeamSplit,
    Usd(AttackKind),
    /// Nothing reaches Bob.
    Blocked,
}

/// Attempt tiling inside a block: first slot and length.
fn tiling(kind: AttackKind) -> (usize, usize) {
    match kind {
        AttackKind::Usd3 => (0, 3),
        AttackKind::Usd4a => (0, 4),
        AttackKind::Usd4b => (1, 4),
    }
}

/// Target slot pattern of every attack (`0α0` or `0αα0`) and the mode of the
/// photon Eve then forwards, relative to the attempt's first slot.
fn target_and_mode(kind: AttackKind) -> (&'static [Pulse], usize, &'static [f64]) {
    use Pulse::{Empty as E, Full as F};
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        AttackKind::Usd3 => (&[E, F, E], 1, &[1.0]),
        AttackKind::Usd4a | AttackKind::Usd4b => (&[E, F, F, E], 1, &[H, H]),
    }
}

/// Runs one block and adds its statistics (first and last window excluded)
/// to `counts`.
pub fn run_block<R: Rng + ?Sized>(
    plan: BlockPlan,
    p: &ProtocolParams,
    fw: ForwardingModel,
    train: &Train,
    rng: &mut R,
    counts: &mut Counts,
) {
    let windows = train.labels.len();
    let slots = 2 * windows;
    let optics = BobOptics { tb: p.tb, eta: p.eta };
    let mut clicks = vec![0u8; slots];
    let mut eve_knows = vec![false; windows];
    let counted = 2.min(slots)..slots.saturating_sub(2);
    let t = p.transmission();

    use BlockPlan::{BeamSplit, Blocked, PassThrough, Usd};
    match plan {
        PassThrough { tau } => {
            counts.blocks.pass_through += 1;
            optics.detect_coherent(&train.amplitudes(p.mu * tau), counted.clone(), &mut clicks, rng);
        }
        BeamSplit => {
            counts.blocks.beam_split += 1;
            optics.detect_coherent(&train.amplitudes(p.mu * t), counted.clone(), &mut clicks, rng);
        }
        Blocked => counts.blocks.blocked += 1,
        Usd(kind) => {
            match kind {
                AttackKind::Usd3 => counts.blocks.usd3 += 1,
                AttackKind::Usd4a => counts.blocks.usd4a += 1,
                AttackKind::Usd4b => counts.blocks.usd4b += 1,
            }
            let pc = usd_conclusive_closed_form(kind.usd_kind(p), p.mu).conclusive_prob;
            let (first, len) = tiling(kind);
            let (target, offset, mode) = target_and_mode(kind);
            let symbols = train.pulses.symbols();
            let mut bright = vec![0.0; if fw == ForwardingModel::BrightPulse { slots } else { 0 }];
            let mut start = first;
            while start + len <= slots {
                if &symbols[start..start + len] == target && rng.random::<f64>() < pc {
                    let at = start + offset;
                    for s in at..at + mode.len() {
                        eve_knows[s / 2] = true;
                    }
                    match fw {
                        ForwardingModel::SinglePhoton => optics.detect_photon(at, mode, &mut clicks, rng),
                        ForwardingModel::BrightPulse => {
                            for (i, c) in mode.iter().enumerate() {
                                bright[at + i] = BRIGHT_PHOTONS.sqrt() * c;
                            }
                        }
                    }
                }
                start += len;
            }
            if fw == ForwardingModel::BrightPulse {
                optics.detect_coherent(&bright, counted.clone(), &mut clicks, rng);
            }
        }
    }

    let eve_tap = -(-p.mu * (1.0 - t)).exp_m1();
    for w in 1..windows.saturating_sub(1) {
        let before = counts.b_bit;
        counts.tally_window(&train.labels, &clicks, eve_knows[w], w);
        // Under beam splitting Eve learns a detected bit when her share of
        // the pulse held at least one photon.
        if plan == BeamSplit && train.labels[w].is_bit() {
            for _ in before..counts.b_bit {
                if rng.random::<f64>() < eve_tap {
                    counts.eve_known_bits += 1;
                }
            }
        }
    }
}
