//! Pulse-by-pulse simulation of the protocol.
//!
//! The train is cut into blocks of `block_len` windows. Each block runs one
//! channel behaviour (honest loss, beam splitting, one USD attack, or
//! blocking), as Eve would if she may not switch strategy too often. The first
//! and last window of every block are left out of the statistics, so light
//! interfering across a switch never enters them.
//!
//! Blocks are grouped into fixed shards of [`BLOCKS_PER_SHARD`]. Shard `k`
//! draws from a ChaCha8 stream seeded by `(seed, k)`, so a seed fixes the
//! result independently of how many threads run the shards.

mod eve;
mod optics;
mod stats;
mod train;

pub use eve::{run_block, BlockPlan, BRIGHT_PHOTONS};
pub use optics::{BobOptics, Outcome, DATA, M1, M2};
pub use stats::{BlockCounts, Counts, Estimate, Fraction, SimStats, Visibility, SLOTS_PER_WINDOW};
pub use train::{generate_train, Train, WindowLabel};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{attack_rates, honest_rates, honest_rates_at, AttackKind, DetectionRates};
use crate::mix::{poor_stats_q1, AttackMix, PoorStatsKind};
use crate::{Error, ForwardingModel, ProtocolParams, Result};

pub const DEFAULT_BLOCK_LEN: usize = 1000;
pub const BLOCKS_PER_SHARD: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Honest,
    Bs,
    Usd3,
    Usd4a,
    Usd4b,
    Mix(AttackMix),
    Usd3Only,
    Usd4aOnly,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::Bs => "bs",
            Strategy::Usd3 => "usd3",
            Strategy::Usd4a => "usd4a",
            Strategy::Usd4b => "usd4b",
            Strategy::Mix(_) => "mix",
            Strategy::Usd3Only => "usd3_only",
            Strategy::Usd4aOnly => "usd4a_only",
        }
    }

    fn poor_stats(&self) -> Option<PoorStatsKind> {
        match self {
            Strategy::Usd3Only => Some(PoorStatsKind::Usd3Only),
            Strategy::Usd4aOnly => Some(PoorStatsKind::Usd4aOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ProtocolParams,
    pub strategy: Strategy,
    pub fw: ForwardingModel,
    pub windows: u64,
    pub seed: u64,
    pub block_len: usize,
}

impl SimConfig {
    pub fn new(params: ProtocolParams, strategy: Strategy, windows: u64, seed: u64) -> Self {
        SimConfig { params, strategy, fw: ForwardingModel::SinglePhoton, windows, seed, block_len: DEFAULT_BLOCK_LEN }
    }

    pub fn with_forwarding(mut self, fw: ForwardingModel) -> Self {
        self.fw = fw;
        self
    }

    pub fn with_block_len(mut self, block_len: usize) -> Self {
        self.block_len = block_len;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.windows == 0 {
            return Err(Error::InvalidInput("at least one window is required".into()));
        }
        if self.block_len < 3 {
            return Err(Error::InvalidInput("blocks need at least three windows".into()));
        }
        if let Strategy::Mix(m) = self.strategy {
            if !m.feasible {
                return Err(Error::Infeasible(format!("attack mix {m:?} is not a probability vector")));
            }
        }
        if let Some(kind) = self.strategy.poor_stats() {
            let q1 = poor_stats_q1(kind, &self.params, self.fw);
            if !(0.0..=1.0).contains(&q1) {
                return Err(Error::Infeasible(format!("{} needs q1 = {q1}", self.strategy.name())));
            }
        }
        Ok(())
    }
}

/// Weights over block plans for the configured strategy.
fn plan_weights(cfg: &SimConfig) -> Vec<(f64, BlockPlan)> {
    let lossless = BlockPlan::PassThrough { tau: 1.0 };
    match cfg.strategy {
        Strategy::Honest => vec![(1.0, BlockPlan::PassThrough { tau: cfg.params.transmission() })],
        Strategy::Bs => vec![(1.0, BlockPlan::BeamSplit)],
        Strategy::Usd3 => vec![(1.0, BlockPlan::Usd(AttackKind::Usd3))],
        Strategy::Usd4a => vec![(1.0, BlockPlan::Usd(AttackKind::Usd4a))],
        Strategy::Usd4b => vec![(1.0, BlockPlan::Usd(AttackKind::Usd4b))],
        Strategy::Mix(m) => vec![
            (m.q0, lossless),
            (m.q1, BlockPlan::Usd(AttackKind::Usd3)),
            (m.q2, BlockPlan::Usd(AttackKind::Usd4a)),
            (m.q3, BlockPlan::Usd(AttackKind::Usd4b)),
            (m.blocking_fraction, BlockPlan::Blocked),
        ],
        Strategy::Usd3Only | Strategy::Usd4aOnly => {
            let kind = cfg.strategy.poor_stats().expect("poor-statistics strategy");
            let q1 = poor_stats_q1(kind, &cfg.params, cfg.fw);
            vec![(1.0 - q1, lossless), (q1, BlockPlan::Usd(kind.attack()))]
        }
    }
}

fn pick_plan<R: Rng + ?Sized>(weights: &[(f64, BlockPlan)], rng: &mut R) -> BlockPlan {
    if weights.len() == 1 {
        return weights[0].1;
    }
    let mut u: f64 = rng.random();
    for (w, plan) in weights {
        if u < *w {
            return *plan;
        }
        u -= w;
    }
    weights.iter().rev().find(|(w, _)| *w > 0.0).map(|(_, p)| *p).unwrap_or(weights[0].1)
}

fn run_shard(cfg: &SimConfig, weights: &[(f64, BlockPlan)], shard: u64, blocks: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(shard);
    let mut counts = Counts::default();
    let first = shard * BLOCKS_PER_SHARD;
    for b in first..(first + BLOCKS_PER_SHARD).min(blocks) {
        let start = b * cfg.block_len as u64;
        let len = (cfg.windows - start).min(cfg.block_len as u64) as usize;
        let plan = pick_plan(weights, &mut rng);
        let train = generate_train(&cfg.params, len, &mut rng);
        run_block(plan, &cfg.params, cfg.fw, &train, &mut rng, &mut counts);
    }
    counts
}

/// Runs the simulation. Deterministic in `cfg`.
pub fn simulate(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let weights = plan_weights(cfg);
    let blocks = cfg.windows.div_ceil(cfg.block_len as u64);
    let shards = blocks.div_ceil(BLOCKS_PER_SHARD);
    let per_shard: Vec<Counts> = (0..shards).into_par_iter().map(|k| run_shard(cfg, &weights, k, blocks)).collect();
    let mut total = Counts::default();
    for c in &per_shard {
        total.merge(c);
    }
    Ok(SimStats::from_counts(&total, cfg.seed, cfg.windows, cfg.block_len))
}

/// The analytic rates the simulation should reproduce. For the mix this is
/// the honest expectation, which the mix is built to imitate.
pub fn expected_rates(cfg: &SimConfig) -> DetectionRates {
    let p = &cfg.params;
    match cfg.strategy {
        Strategy::Honest | Strategy::Bs | Strategy::Mix(_) => honest_rates(p),
        Strategy::Usd3 => attack_rates(AttackKind::Usd3, p, cfg.fw),
        Strategy::Usd4a => attack_rates(AttackKind::Usd4a, p, cfg.fw),
        Strategy::Usd4b => attack_rates(AttackKind::Usd4b, p, cfg.fw),
        Strategy::Usd3Only | Strategy::Usd4aOnly => {
            let kind = cfg.strategy.poor_stats().expect("poor-statistics strategy");
            let q1 = poor_stats_q1(kind, p, cfg.fw);
            honest_rates_at(p, 1.0).scaled(1.0 - q1).add(&attack_rates(kind.attack(), p, cfg.fw).scaled(q1))
        }
    }
}

fn plan_rates(plan: BlockPlan, cfg: &SimConfig) -> [f64; 6] {
    let p = &cfg.params;
    match plan {
        BlockPlan::PassThrough { tau } => honest_rates_at(p, tau).to_array(),
        BlockPlan::BeamSplit => honest_rates(p).to_array(),
        BlockPlan::Usd(kind) => attack_rates(kind, p, cfg.fw).to_array(),
        BlockPlan::Blocked => [0.0; 6],
    }
}

/// Spread of each per-window rate across blocks caused by drawing one plan per
/// block. Zero for single-plan strategies.
pub fn plan_rate_variance(cfg: &SimConfig) -> [f64; 6] {
    let weights = plan_weights(cfg);
    let mut m1 = [0.0; 6];
    let mut m2 = [0.0; 6];
    for (w, plan) in &weights {
        for (i, r) in plan_rates(*plan, cfg).iter().enumerate() {
            m1[i] += w * r;
            m2[i] += w * r * r;
        }
    }
    std::array::from_fn(|i| (m2[i] - m1[i] * m1[i]).max(0.0))
}

/// Decoy-neighbour fraction an honest channel produces: the slot before a
/// decoy and the slot after it are both empty.
pub fn honest_neighbor_bias(p: &ProtocolParams) -> f64 {
    (0.5 * (1.0 - p.f()) + p.f0).powi(2)
}

/// One line of an empirical-versus-analytic comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub name: String,
    pub value: f64,
    pub analytic: f64,
    /// Standard deviation of the estimate if the analytic value were true.
    pub sigma: f64,
    pub z: f64,
}

/// z-scores of the six rates. σ is the binomial spread of the analytic
/// expectation plus `block_var` (see [`plan_rate_variance`]) over the number
/// of blocks.
pub fn compare_rates(stats: &SimStats, expected: &DetectionRates, block_var: &[f64; 6]) -> Vec<RateComparison> {
    let n = stats.counted_windows as f64;
    let blocks = stats.blocks.total().max(1) as f64;
    stats
        .rates()
        .iter()
        .zip(expected.to_array())
        .zip(DetectionRates::NAMES.iter().zip(SLOTS_PER_WINDOW).zip(block_var))
        .map(|((e, analytic), ((name, k), bv))| {
            let sigma = (analytic * (1.0 - analytic / k as f64) / n + bv / blocks).max(0.0).sqrt();
            let diff = e.value - analytic;
            let z = if sigma > 0.0 {
                diff / sigma
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            };
            RateComparison { name: name.to_string(), value: e.value, analytic, sigma, z }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pick_plan_follows_weights() {
        let w = [(0.0, BlockPlan::Blocked), (1.0, BlockPlan::BeamSplit)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..100).all(|_| pick_plan(&w, &mut rng) == BlockPlan::BeamSplit));
    }

    #[test]
    fn rejects_bad_configs() {
        let p = ProtocolParams::default().with_length_km(50.0);
        assert!(simulate(&SimConfig::new(p, Strategy::Honest, 0, 1)).is_err());
        assert!(simulate(&SimConfig::new(p, Strategy::Honest, 10, 1).with_block_len(2)).is_err());
        let bad = AttackMix::new(0.9, 0.9, 0.0, 0.0, 0.0, true);
        assert!(matches!(simulate(&SimConfig::new(p, Strategy::Mix(bad), 10, 1)), Err(Error::Infeasible(_))));
    }

    #[test]
    fn short_and_ragged_runs() {
        let p = ProtocolParams::default().with_length_km(10.0).with_mu(0.5);
        let s = simulate(&SimConfig::new(p, Strategy::Honest, 2, 1)).unwrap();
        assert_eq!(s.counted_windows, 0);
        let s = simulate(&SimConfig::new(p, Strategy::Honest, 2503, 1)).unwrap();
        // Two full blocks of 998 counted windows and one of 501.
        assert_eq!(s.counted_windows, 2 * 998 + 501);
    }
}
