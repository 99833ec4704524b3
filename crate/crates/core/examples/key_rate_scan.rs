// Key-rate curves against distance, and where the attack mix overtakes the
// beam-splitting attack.

use cowqkd::scan::{find_crossover_km, run_scan, Curve, CurveOptions, ScanSpec, ScanVariable};
use cowqkd::ProtocolParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = ProtocolParams::default();
    let opts = CurveOptions::default();
    let spec = ScanSpec {
        variable: ScanVariable::LengthKm,
        start: 0.0,
        stop: 250.0,
        steps: 26,
        fixed: p,
        curves: vec![Curve::Mix, Curve::MixEd, Curve::Bs, Curve::Usd3Only],
        options: opts,
    };
    let table = run_scan(&spec)?;
    for row in table.rows.iter().step_by(5) {
        let rates: Vec<String> = row.points.iter().map(|c| format!("{:10.3e}", c.rate)).collect();
        println!("{:6.1} km  {}", row.x, rates.join(" "));
    }
    for (a, b) in [(Curve::Mix, Curve::Bs), (Curve::MixEd, Curve::Bs), (Curve::Usd3Only, Curve::Bs)] {
        let grid = table.crossover(a, b);
        let refined = find_crossover_km(a, b, &p, &opts, 10.0, 250.0);
        println!("{} below {} from {:?} km (grid {:?})", a.id(), b.id(), refined, grid);
    }
    let csv = table.to_csv();
    println!("csv: {} lines, header {}", csv.lines().count(), csv.lines().nth(1).unwrap_or(""));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
