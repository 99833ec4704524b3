// Conclusive probabilities of Eve's USD measurements: the closed forms next
// to a direct Gram-matrix inversion over every emittable sequence.

use cowqkd::state::{build_state_set, usd_conclusive_closed_form, usd_conclusive_oracle, UsdKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8} {:>8} {:>14} {:>14} {:>10}", "kind", "mu", "closed form", "gram", "|diff|");
    for kind in UsdKind::ALL {
        let set = build_state_set(kind);
        for mu in [0.1, 0.5, 2.0] {
            let closed = usd_conclusive_closed_form(kind, mu).conclusive_prob;
            let gram = usd_conclusive_oracle(&set, mu)?.conclusive_prob;
            println!("{:>8} {mu:>8} {closed:>14.10} {gram:>14.10} {:>10.1e}", format!("{kind:?}"), (closed - gram).abs());
            if (closed - gram).abs() > 1e-10 {
                return Err(format!("{kind:?} at mu = {mu}: closed form and oracle disagree").into());
            }
        }
        println!("  {} alternatives to {:?}", set.alternatives().len(), set.target().symbols());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
