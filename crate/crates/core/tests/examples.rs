macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $name() {
            $name::run_example().expect("example should run");
        }
    };
}

example!(usd_oracle, "usd_oracle.rs");
example!(detection_rates, "detection_rates.rs");
example!(attack_mix, "attack_mix.rs");
example!(key_rate_scan, "key_rate_scan.rs");
example!(beam_splitting, "beam_splitting.rs");
example!(three_state, "three_state.rs");
example!(monte_carlo, "monte_carlo.rs");
