// Beam-splitting attack: Eve keeps the lost light and measures it later.

use cowqkd::bounds::{bs_attack, bs_g, bs_optimal_mu, bs_xi};
use cowqkd::ProtocolParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (xi, g) = bs_xi();
    println!("xi = {xi:.4}  g(xi) = {g:.4}  (g(1) = {:.4})", bs_g(1.0));
    for km in [25.0, 50.0, 100.0, 200.0] {
        let p = ProtocolParams::default().with_length_km(km);
        let opt = bs_optimal_mu(&p)?;
        let at = bs_attack(&p.with_mu(opt.mu_opt));
        println!(
            "{km:5} km  mu_opt = {:.4}  R = {:.3e}  chi = {:.4}  I_usd = {:.4}  I_me = {:.4}",
            opt.mu_opt, opt.rate, at.chi_holevo, at.i_usd, at.i_me
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
