//! Overlap algebra of multi-pulse product coherent states and optimal
//! two-outcome unambiguous state discrimination.
//!
//! A train of pulses `|0⟩` / `|α⟩` is a product of single-mode coherent
//! states, so two trains overlap as `χ^d` with `χ = ⟨0|α⟩ = e^{-μ/2}` and `d`
//! the number of slots where they differ. Nothing else about the states is
//! needed: every USD quantity follows from the Gram matrix.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest Gram eigenvalue accepted by [`usd_conclusive_oracle`].
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pulse {
    Empty,
    Full,
}

/// A finite train of pulses together with the position of the bit
/// separations.
///
/// Slot `i` opens a two-slot window iff `(i + boundary_offset)` is even, so
/// offset 0 reads `x y : z …` and offset 1 reads `x : y z …`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PulseSequence {
    symbols: Vec<Pulse>,
    boundary_offset: u8,
}

impl PulseSequence {
    pub fn new(symbols: Vec<Pulse>, boundary_offset: u8) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidInput("pulse sequence must not be empty".into()));
        }
        if boundary_offset > 1 {
            return Err(Error::InvalidInput("boundary offset must be 0 or 1".into()));
        }
        Ok(PulseSequence { symbols, boundary_offset })
    }

    /// Parses the ket notation `0α:α0` (also accepts `a` for `α`; spaces are
    /// ignored). A colon marks a bit separation and fixes the offset; without
    /// one the offset is 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut symbols = Vec::new();
        let mut first_colon = None;
        for ch in s.chars() {
            match ch {
                '0' => symbols.push(Pulse::Empty),
                'a' | 'α' | 'A' => symbols.push(Pulse::Full),
                ':' => {
                    if first_colon.is_none() {
                        first_colon = Some(symbols.len());
                    }
                }
                c if c.is_whitespace() => {}
                c => return Err(Error::InvalidInput(format!("unexpected character {c:?} in pulse sequence"))),
            }
        }
        // A separation before slot k means slot k opens a window.
        let offset = first_colon.map_or(0, |k| (k % 2) as u8);
        PulseSequence::new(symbols, offset)
    }

    pub fn symbols(&self) -> &[Pulse] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn boundary_offset(&self) -> u8 {
        self.boundary_offset
    }

    /// Whether slot `i` is the first slot of a window.
    pub fn opens_window(&self, i: usize) -> bool {
        (i + self.boundary_offset as usize) % 2 == 0
    }

    /// Number of slots in which the two sequences differ.
    pub fn hamming_distance(&self, other: &PulseSequence) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(self.symbols.iter().zip(&other.symbols).filter(|(a, b)| a != b).count())
    }

    /// Every sequence of the given length and alignment that Alice can emit:
    /// each complete window must be a bit, a full decoy, or (when allowed) an
    /// empty decoy; partial windows at either end are unconstrained.
    pub fn all_emittable(len: usize, boundary_offset: u8, empty_decoys: bool) -> Vec<PulseSequence> {
        let mut out = Vec::new();
        for code in 0..(1u32 << len) {
            // Most significant bit is slot 0 so the output is in lexicographic
            // order with 0 < α.
            let symbols: Vec<Pulse> = (0..len)
                .map(|i| if code >> (len - 1 - i) & 1 == 1 { Pulse::Full } else { Pulse::Empty })
                .collect();
            let seq = PulseSequence { symbols, boundary_offset };
            let ok = (0..len.saturating_sub(1))
                .filter(|&i| seq.opens_window(i))
                .all(|i| empty_decoys || seq.symbols[i] == Pulse::Full || seq.symbols[i + 1] == Pulse::Full);
            if ok {
                out.push(seq);
            }
        }
        out
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, p) in self.symbols.iter().enumerate() {
            if i > 0 && self.opens_window(i) {
                write!(f, ":")?;
            }
            write!(f, "{}", if *p == Pulse::Full { "α" } else { "0" })?;
        }
        write!(f, "⟩")
    }
}

/// Per-slot overlap `χ^d` between two pulse trains at mean photon number `mu`.
pub fn overlap(a: &PulseSequence, b: &PulseSequence, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidInput("mu must be positive".into()));
    }
    let d = a.hamming_distance(b)?;
    Ok((-0.5 * mu * d as f64).exp())
}

/// A target state and the alternatives it must be told apart from.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    target: PulseSequence,
    alternatives: Vec<PulseSequence>,
}

impl StateSet {
    pub fn new(target: PulseSequence, alternatives: Vec<PulseSequence>) -> Result<Self> {
        for alt in &alternatives {
            if alt.len() != target.len() {
                return Err(Error::LengthMismatch(target.len(), alt.len()));
            }
            if alt.boundary_offset != target.boundary_offset {
                return Err(Error::InvalidInput("all members must share the same bit separation".into()));
            }
            if alt.symbols == target.symbols {
                return Err(Error::InvalidInput(format!("target {target} is listed among the alternatives")));
            }
        }
        for (i, a) in alternatives.iter().enumerate() {
            if alternatives[..i].iter().any(|b| b.symbols == a.symbols) {
                return Err(Error::InvalidInput(format!("duplicate alternative {a}")));
            }
        }
        Ok(StateSet { target, alternatives })
    }

    /// The target against every other sequence Alice can emit with the same
    /// length and alignment.
    pub fn against_emittable(target: PulseSequence, empty_decoys: bool) -> Result<Self> {
        let alternatives = PulseSequence::all_emittable(target.len(), target.boundary_offset, empty_decoys)
            .into_iter()
            .filter(|s| s.symbols != target.symbols)
            .collect();
        StateSet::new(target, alternatives)
    }

    pub fn target(&self) -> &PulseSequence {
        &self.target
    }

    pub fn alternatives(&self) -> &[PulseSequence] {
        &self.alternatives
    }

    /// Target first, then the alternatives in order.
    pub fn members(&self) -> impl Iterator<Item = &PulseSequence> {
        std::iter::once(&self.target).chain(self.alternatives.iter())
    }

    pub fn len(&self) -> usize {
        1 + self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Returns a copy with one more alternative.
    pub fn with_alternative(&self, extra: PulseSequence) -> Result<Self> {
        let mut alternatives = self.alternatives.clone();
        alternatives.push(extra);
        StateSet::new(self.target.clone(), alternatives)
    }
}

/// Gram matrix of the set, target at index 0.
pub fn gram_matrix(set: &StateSet, mu: f64) -> Result<DMatrix<f64>> {
    let members: Vec<&PulseSequence> = set.members().collect();
    let n = members.len();
    let mut g = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = overlap(members[i], members[j], mu)?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsdMethod {
    ClosedForm,
    GramOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsdResult {
    pub conclusive_prob: f64,
    pub method: UsdMethod,
}

/// Conclusive probability `1 / (G⁻¹)_tt` of the optimal two-outcome USD of
/// the target, with the default eigenvalue floor.
pub fn usd_conclusive_oracle(set: &StateSet, mu: f64) -> Result<UsdResult> {
    usd_conclusive_oracle_with_floor(set, mu, DEFAULT_EIGEN_FLOOR)
}

pub fn usd_conclusive_oracle_with_floor(set: &StateSet, mu: f64, eigen_floor: f64) -> Result<UsdResult> {
    let g = gram_matrix(set, mu)?;
    let min_eigenvalue = g.clone().symmetric_eigen().eigenvalues.min();
    if min_eigenvalue < eigen_floor {
        return Err(Error::LinearDependence { min_eigenvalue, floor: eigen_floor });
    }
    let chol = g.cholesky().ok_or(Error::LinearDependence { min_eigenvalue, floor: eigen_floor })?;
    let n = set.len();
    let mut e0 = nalgebra::DVector::zeros(n);
    e0[0] = 1.0;
    let col = chol.solve(&e0);
    let p = (1.0 / col[0]).clamp(0.0, 1.0);
    Ok(UsdResult { conclusive_prob: p, method: UsdMethod::GramOracle })
}

/// The USD attacks and their empty-decoy counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsdKind {
    /// `|0α0⟩` on three pulses.
    Usd3,
    /// `|0α:α0⟩`: coherence across a bit separation.
    Usd4a,
    /// `|0:αα:0⟩`: a full decoy between two empty pulses.
    Usd4b,
    /// `|0α0⟩` when empty decoys may be sent.
    Usd3Ed,
    /// `|0αα0⟩` when empty decoys may be sent (either alignment).
    Usd4Ed,
}

impl UsdKind {
    pub const ALL: [UsdKind; 5] = [UsdKind::Usd3, UsdKind::Usd4a, UsdKind::Usd4b, UsdKind::Usd3Ed, UsdKind::Usd4Ed];

    pub fn empty_decoys(self) -> bool {
        matches!(self, UsdKind::Usd3Ed | UsdKind::Usd4Ed)
    }

    /// Target sequence with its natural bit alignment.
    pub fn target(self) -> PulseSequence {
        let s = match self {
            UsdKind::Usd3 | UsdKind::Usd3Ed => "0α:0",
            UsdKind::Usd4a | UsdKind::Usd4Ed => "0α:α0",
            UsdKind::Usd4b => "0:αα:0",
        };
        PulseSequence::parse(s).expect("static sequence")
    }
}

/// Closed-form conclusive probability, with `x = 1 - χ² = 1 - e^{-μ}`:
/// `x²` (USD3, USD4a), `x³/(1+χ²)` (USD4b), `x³` and `x⁴` with empty decoys.
pub fn usd_conclusive_closed_form(kind: UsdKind, mu: f64) -> UsdResult {
    let x = -(-mu).exp_m1();
    let p = match kind {
        UsdKind::Usd3 | UsdKind::Usd4a => x * x,
        UsdKind::Usd4b => x * x * x / (2.0 - x),
        UsdKind::Usd3Ed => x * x * x,
        UsdKind::Usd4Ed => x * x * x * x,
    };
    UsdResult { conclusive_prob: p, method: UsdMethod::ClosedForm }
}

/// The discrimination problem behind each attack, in its natural alignment.
pub fn build_state_set(kind: UsdKind) -> StateSet {
    StateSet::against_emittable(kind.target(), kind.empty_decoys()).expect("emittable sets are well formed")
}

/// Same as [`build_state_set`] with an explicit bit-separation offset. For the
/// four-pulse standard attacks the offset selects between USD4a (0) and
/// USD4b (1), so only the three-pulse kinds and `Usd4Ed` accept both.
pub fn build_state_set_with_offset(kind: UsdKind, boundary_offset: u8) -> Result<StateSet> {
    let natural = kind.target();
    match kind {
        UsdKind::Usd4a | UsdKind::Usd4b if boundary_offset != natural.boundary_offset => {
            Err(Error::InvalidInput(format!("{kind:?} has a fixed bit alignment")))
        }
        _ => {
            let target = PulseSequence::new(natural.symbols, boundary_offset)?;
            StateSet::against_emittable(target, kind.empty_decoys())
        }
    }
}
