// Pulse-level simulation: an honest channel and a USD attack, each compared
// with the analytic rates.

use cowqkd::montecarlo::{compare_rates, expected_rates, plan_rate_variance, simulate, SimConfig, Strategy};
use cowqkd::ProtocolParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = ProtocolParams::default().with_transmission(0.1).with_mu(0.5);
    for strategy in [Strategy::Honest, Strategy::Usd4a] {
        let cfg = SimConfig::new(p, strategy, 200_000, 7);
        let stats = simulate(&cfg)?;
        println!("{}: {} windows counted", strategy.name(), stats.counted_windows);
        for c in compare_rates(&stats, &expected_rates(&cfg), &plan_rate_variance(&cfg)) {
            println!("  {:>10} {:10.3e} vs {:10.3e}  z = {:+.2}", c.name, c.value, c.analytic, c.z);
        }
        println!("  qber {:?}", stats.qber.map(|q| q.value));
        println!("  decoy neighbours empty: {:?}", stats.decoy_neighbor_bias.map(|b| b.value));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
