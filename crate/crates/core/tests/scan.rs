use cowqkd::scan::{
    find_crossover_km, fixed_mu_point, optimal_point, parse_config, parse_curves, run_point, run_scan, Curve,
    CurveOptions, ScanSpec, ScanVariable,
};
use cowqkd::ProtocolParams;

fn h(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn distance_scan(curves: Vec<Curve>, steps: usize) -> ScanSpec {
    ScanSpec {
        variable: ScanVariable::LengthKm,
        start: 0.0,
        stop: 250.0,
        steps,
        fixed: ProtocolParams::default(),
        curves,
        options: CurveOptions::default(),
    }
}

#[test]
fn crossovers() {
    let p = ProtocolParams::default();
    let o = CurveOptions::default();
    let mix = find_crossover_km(Curve::Mix, Curve::Bs, &p, &o, 10.0, 250.0).unwrap();
    let ed = find_crossover_km(Curve::MixEd, Curve::Bs, &p, &o, 10.0, 250.0).unwrap();
    let usd3 = find_crossover_km(Curve::Usd3Only, Curve::Bs, &p, &o, 10.0, 250.0).unwrap();
    assert!((mix - 100.0).abs() <= 10.0, "{mix}");
    assert!((ed - 120.0).abs() <= 10.0, "{ed}");
    assert!((usd3 - 50.0).abs() <= 10.0, "{usd3}");
    let table = run_scan(&distance_scan(vec![Curve::Mix, Curve::MixEd, Curve::Bs, Curve::Usd3Only], 251)).unwrap();
    assert!((table.crossover(Curve::Mix, Curve::Bs).unwrap() - mix).abs() < 0.5);
    assert!((table.crossover(Curve::MixEd, Curve::Bs).unwrap() - ed).abs() < 0.5);
}

#[test]
fn csv_and_json_shapes() {
    let table = run_scan(&distance_scan(vec![Curve::Mix, Curve::Bs], 11)).unwrap();
    let csv = table.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# {"));
    assert!(serde_json::from_str::<serde_json::Value>(&lines[0][2..]).is_ok());
    assert_eq!(lines[1], table.header().join(","));
    assert_eq!(lines.len(), 2 + 11);
    assert!(lines[2..].iter().all(|l| l.split(',').count() == table.header().len()));
    let json = table.to_json();
    assert_eq!(json["rows"].as_array().unwrap().len(), 11);
    // BS is undefined without loss, so the first row has no envelope from it.
    assert_eq!(json["rows"][0]["points"][1]["feasible"], false);
}

#[test]
fn mu_scan_reports_the_scanned_mu() {
    let spec = ScanSpec {
        variable: ScanVariable::Mu,
        start: 0.01,
        stop: 0.2,
        steps: 5,
        fixed: ProtocolParams::default().with_length_km(120.0),
        curves: vec![Curve::Mix],
        options: CurveOptions::default(),
    };
    let t = run_scan(&spec).unwrap();
    for row in &t.rows {
        assert_eq!(row.points[0].mu_opt, Some(row.x));
        let best = optimal_point(Curve::Mix, &spec.fixed, &spec.options);
        assert!(row.points[0].rate <= best.rate * (1.0 + 1e-9));
    }
}

#[test]
fn point_records() {
    let o = CurveOptions::default();
    let bs = run_point(Curve::Bs, &ProtocolParams::default().with_transmission(0.5), &o).unwrap();
    assert!((bs["result"]["xi"].as_f64().unwrap() - 0.4583).abs() < 5e-4);
    assert!((bs["result"]["g_xi"].as_f64().unwrap() - 0.1428).abs() < 5e-4);
    assert!(bs["result"]["mu_opt"].as_f64().is_some());

    let mix = run_point(Curve::Mix, &ProtocolParams::default().with_f(0.3), &o).unwrap();
    assert_eq!(mix["result"]["feasible"], false);
    assert!(mix["result"]["reason"].as_str().unwrap().contains("0.236"));

    let three = CurveOptions { qber: 0.05, visibility: 1.0, ..o };
    let sp = run_point(Curve::ThreeStateSp, &ProtocolParams::default(), &three).unwrap();
    assert!((sp["result"]["r"].as_f64().unwrap() - (1.0 - 2.0 * h(0.05))).abs() < 1e-12);
}

#[test]
fn fixed_mu_never_beats_the_optimum() {
    let o = CurveOptions::default();
    for curve in [Curve::Mix, Curve::MixEd, Curve::Bs, Curve::Usd3Only, Curve::Pns3State] {
        for mu in [0.01, 0.1, 0.5] {
            let p = ProtocolParams::default().with_length_km(100.0).with_mu(mu);
            let (fixed, best) = (fixed_mu_point(curve, &p, &o), optimal_point(curve, &p, &o));
            assert!(fixed.rate <= best.rate * (1.0 + 1e-6), "{curve:?} at {mu}");
        }
    }
}

#[test]
fn parsing() {
    assert_eq!(parse_curves("mix, bs").unwrap(), vec![Curve::Mix, Curve::Bs]);
    assert!(parse_curves("MIX,NOPE").is_err());
    assert!("length_km".parse::<ScanVariable>().is_ok());
    let c = parse_config("# comment\nmu = 0.2\n\nlength_km=50\n").unwrap();
    assert_eq!(c.get("mu").map(String::as_str), Some("0.2"));
    assert_eq!(c.get("length_km").map(String::as_str), Some("50"));
    assert!(parse_config("no equals sign").is_err());
}

#[test]
fn bad_scans_are_rejected() {
    let mut spec = distance_scan(vec![Curve::Mix], 0);
    assert!(run_scan(&spec).is_err());
    spec.steps = 5;
    spec.stop = -1.0;
    assert!(run_scan(&spec).is_err());
}
