// The zero-error attack mix at 150 km: weights, how well it reproduces the
// honest rates, and the key rate left for Alice and Bob.

use cowqkd::mix::{asymptotics, key_rate, optimize_mu, solve_mix, solve_mix_empty_decoy, verify_mix_residuals};
use cowqkd::ProtocolParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let base = ProtocolParams::default().with_length_km(150.0);
    let best = optimize_mu(&base)?;
    println!("mu_opt = {:.4}  R = {:.3e}  mu_max = {:?}", best.mu_opt, best.r_opt, best.mu_max);
    let a = asymptotics(&base);
    println!("small-t asymptotes: mu_opt = {:.4}  R = {:.3e}", a.mu_opt, a.r_opt);

    let p = base.with_mu(best.mu_opt);
    let (mix, coeffs) = solve_mix(&p)?;
    println!("F1 = {:.2} F2 = {:.2} F3 = {:.2}", coeffs.f1, coeffs.f2, coeffs.f3);
    println!("q = {:?}  blocking = {:.3e}", mix.weights(), mix.blocking_fraction);
    let worst = verify_mix_residuals(&mix, &p).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    println!("largest residual against the linearised honest rates: {worst:.1e}");
    println!("key rate at mu_opt: {:.3e}", key_rate(&p, &mix));

    let ed = base.with_decoys(0.05, 0.05);
    let (mix_ed, _) = solve_mix_empty_decoy(&ed.with_mu(0.1))?;
    println!("with empty decoys, q = {:?}", mix_ed.weights());
    println!("empty-decoy optimum: {:?}", optimize_mu(&ed)?);

    // Past √5 − 2 there is no mix at all.
    assert!(solve_mix(&base.with_f(0.3)).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
