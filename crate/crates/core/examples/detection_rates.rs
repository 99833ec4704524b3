// Honest detection rates next to what each USD attack leaves at Bob.

use cowqkd::detection::{attack_rates, honest_rates, honest_rates_linear, AttackKind, DetectionRates};
use cowqkd::{ForwardingModel, ProtocolParams};

fn row(name: &str, r: &DetectionRates) {
    let cells: Vec<String> = r.to_array().iter().map(|v| format!("{v:10.3e}")).collect();
    println!("{name:>16} {}", cells.join(" "));
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = ProtocolParams::default().with_length_km(50.0).with_mu(0.5);
    p.validate()?;
    println!("t = {:.4e}", p.transmission());
    println!("{:>16} {}", "", DetectionRates::NAMES.map(|n| format!("{n:>10}")).join(" "));
    row("honest", &honest_rates(&p));
    row("honest (linear)", &honest_rates_linear(&p, p.transmission()));
    for kind in AttackKind::ALL {
        row(&format!("{kind:?}"), &attack_rates(kind, &p, ForwardingModel::SinglePhoton));
        row(&format!("{kind:?} bright"), &attack_rates(kind, &p, ForwardingModel::BrightPulse));
    }
    // USD3 and USD4a never light a decoy; USD4b never gives a bit.
    let u3 = attack_rates(AttackKind::Usd3, &p, ForwardingModel::SinglePhoton);
    let u4b = attack_rates(AttackKind::Usd4b, &p, ForwardingModel::SinglePhoton);
    assert_eq!(u3.d_b_decoy, 0.0);
    assert_eq!(u4b.d_b_bit, 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
