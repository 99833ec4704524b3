// Bounds for the three-state protocol: single photons, weak coherent pulses
// with tagging, and the zero-error PNS attack.

use cowqkd::bounds::{
    three_state_pns_zero_error, three_state_qber_threshold, three_state_single_photon, three_state_wcp_optimal,
};
use cowqkd::ProtocolParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("QBER threshold at V = 1: {:?}", three_state_qber_threshold(1.0));
    println!("QBER threshold at V = 0.95: {:?}", three_state_qber_threshold(0.95));
    for (q, v) in [(0.0, 1.0), (0.03, 0.98), (0.08, 1.0)] {
        let b = three_state_single_photon(q, v)?;
        println!("Q = {q} V = {v}: r = {:.4}  weights {:?}", b.r, b.weights.as_array());
    }
    for km in [10.0, 50.0, 100.0] {
        let p = ProtocolParams::default().with_length_km(km);
        let pns = three_state_pns_zero_error(&p);
        match three_state_wcp_optimal(&p, 0.01, 0.99) {
            Ok(w) => println!("{km:5} km  GLLP R = {:.3e} at mu {:.2e}   PNS R = {:.3e}", w.rate, w.mu_opt, pns.rate),
            Err(e) => println!("{km:5} km  GLLP: {e}   PNS R = {:.3e}", pns.rate),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
