//! Command-line front end. Everything it prints comes from `cowqkd::scan`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cowqkd::detection::{attack_rates, honest_rates, AttackKind, DetectionRates};
use cowqkd::mix::solve_any;
use cowqkd::montecarlo::{SimConfig, Strategy, DEFAULT_BLOCK_LEN};
use cowqkd::scan::{parse_config, parse_curves, run_mc, run_point, run_scan, Curve, CurveOptions, ScanSpec};
use cowqkd::state::{build_state_set, usd_conclusive_closed_form, usd_conclusive_oracle, UsdKind};
use cowqkd::{Error, ForwardingModel, ProtocolParams, Result};

#[derive(Parser)]
#[command(name = "cowqkd", version, about = "Zero-error attack analysis of the COW QKD protocol")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Decoy fraction of the standard protocol.
    #[arg(long, global = true, allow_hyphen_values = true)]
    f: Option<f64>,
    /// Empty-decoy fraction.
    #[arg(long, global = true, allow_hyphen_values = true)]
    f0: Option<f64>,
    /// Full-decoy fraction.
    #[arg(long, global = true, allow_hyphen_values = true)]
    f1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    tb: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// Fibre attenuation, dB/km.
    #[arg(long, global = true, allow_hyphen_values = true)]
    att: Option<f64>,
    #[arg(long = "length-km", global = true, allow_hyphen_values = true)]
    length_km: Option<f64>,
    #[arg(long, global = true, value_enum)]
    forwarding: Option<Forwarding>,
    /// Comma-separated curve ids (MIX, MIX_ED, BS, USD3_ONLY, USD4A_ONLY,
    /// PNS_3STATE, THREE_STATE_SP).
    #[arg(long, global = true)]
    curves: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    windows: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key = value file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Honest and per-attack detection rates.
    Rates,
    /// USD conclusive probabilities, closed form against Gram inversion.
    Usd,
    /// Attack mix, key rate and its μ optimum.
    Mix,
    /// Scan the optimised curves over distance, μ or f.
    Scan {
        #[arg(long, default_value = "length_km")]
        variable: String,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 250.0)]
        stop: f64,
        #[arg(long, default_value_t = 251)]
        steps: usize,
    },
    /// Beam-splitting attack.
    Bs,
    /// Three-state protocol bounds.
    ThreeState {
        #[arg(long)]
        qber: Option<f64>,
        #[arg(long)]
        visibility: Option<f64>,
    },
    /// Monte Carlo run compared with the analytic rates.
    Mc {
        #[arg(long, value_enum, default_value_t = McStrategy::Honest)]
        strategy: McStrategy,
        #[arg(long = "block-len")]
        block_len: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Forwarding {
    Photon,
    Bright,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum McStrategy {
    Honest,
    Bs,
    Usd3,
    Usd4a,
    Usd4b,
    Mix,
    #[value(name = "usd3_only")]
    Usd3Only,
    #[value(name = "usd4a_only")]
    Usd4aOnly,
}

/// Flags over config file over defaults.
struct Settings {
    params: ProtocolParams,
    fw: ForwardingModel,
    seed: u64,
    windows: u64,
    format: Format,
    curves: Option<String>,
    file: BTreeMap<String, String>,
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidInput(format!("config key {key}: cannot parse '{v}'")))
}

impl Settings {
    fn resolve(c: &Common) -> Result<Self> {
        let file = match &c.config {
            Some(path) => parse_config(
                &std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?,
            )?,
            None => BTreeMap::new(),
        };
        let pick = |flag: Option<f64>, key: &str| -> Result<Option<f64>> {
            match (flag, file.get(key)) {
                (Some(v), _) => Ok(Some(v)),
                (None, Some(v)) => number(key, v).map(Some),
                (None, None) => Ok(None),
            }
        };
        let mut p = ProtocolParams::default();
        if let Some(v) = pick(c.mu, "mu")? {
            p.mu = v;
        }
        if let Some(v) = pick(c.f, "f")? {
            p = p.with_f(v);
        }
        if let Some(v) = pick(c.f0, "f0")? {
            p.f0 = v;
        }
        if let Some(v) = pick(c.f1, "f1")? {
            p.f1 = v;
        }
        if let Some(v) = pick(c.tb, "tb")? {
            p.tb = v;
        }
        if let Some(v) = pick(c.eta, "eta")? {
            p.eta = v;
        }
        if let Some(v) = pick(c.att, "att")? {
            p.att_db_per_km = v;
        }
        if let Some(v) = pick(c.length_km, "length_km")? {
            p.length_km = v;
        }
        p.validate()?;
        let fw = match (c.forwarding, file.get("forwarding").map(String::as_str)) {
            (Some(Forwarding::Bright), _) | (None, Some("bright")) => ForwardingModel::BrightPulse,
            (Some(Forwarding::Photon), _) | (None, Some("photon")) | (None, None) => ForwardingModel::SinglePhoton,
            (None, Some(other)) => return Err(Error::InvalidInput(format!("unknown forwarding '{other}'"))),
        };
        let seed = match (c.seed, file.get("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => number("seed", v)?,
            (None, None) => 1,
        };
        let windows = match (c.windows, file.get("windows")) {
            (Some(w), _) => w,
            (None, Some(v)) => number("windows", v)?,
            (None, None) => 1_000_000,
        };
        let format = match (c.format, file.get("format").map(String::as_str)) {
            (Some(f), _) => f,
            (None, Some("csv")) => Format::Csv,
            (None, Some("json")) => Format::Json,
            (None, Some(other)) => return Err(Error::InvalidInput(format!("unknown format '{other}'"))),
            (None, None) => Format::Json,
        };
        let curves = c.curves.clone().or_else(|| file.get("curves").cloned());
        Ok(Settings { params: p, fw, seed, windows, format, curves, file })
    }

    fn file_f64(&self, key: &str) -> Result<Option<f64>> {
        self.file.get(key).map(|v| number(key, v)).transpose()
    }
}

fn rates_csv(rows: &[(&str, DetectionRates)]) -> String {
    let mut out = format!("source,{}\n", DetectionRates::NAMES.join(","));
    for (name, r) in rows {
        let cells: Vec<String> = r.to_array().iter().map(|v| format!("{v:.11e}")).collect();
        out.push_str(&format!("{name},{}\n", cells.join(",")));
    }
    out
}

fn run(cli: Cli) -> Result<String> {
    let s = Settings::resolve(&cli.common)?;
    let p = s.params;
    let mut opts = CurveOptions { fw: s.fw, ..CurveOptions::default() };
    let json_out = |v: serde_json::Value| serde_json::to_string_pretty(&v).expect("json") + "\n";
    let out = match cli.command {
        Command::Rates => {
            let mut rows = vec![("honest", honest_rates(&p))];
            let names = ["usd3", "usd4a", "usd4b"];
            for (kind, name) in AttackKind::ALL.iter().zip(names) {
                rows.push((name, attack_rates(*kind, &p, s.fw)));
            }
            match s.format {
                Format::Csv => rates_csv(&rows),
                Format::Json => json_out(json!({
                    "params": p, "t": p.transmission(), "forwarding": s.fw,
                    "rates": rows.iter().map(|(n, r)| (n.to_string(), *r)).collect::<BTreeMap<_, _>>(),
                })),
            }
        }
        Command::Usd => {
            if !(p.mu > 0.0) {
                return Err(Error::InvalidInput("mu must be positive".into()));
            }
            let mut rows = Vec::new();
            for kind in UsdKind::ALL {
                let closed = usd_conclusive_closed_form(kind, p.mu).conclusive_prob;
                let oracle = usd_conclusive_oracle(&build_state_set(kind), p.mu).map(|r| r.conclusive_prob);
                rows.push((kind, closed, oracle));
            }
            match s.format {
                Format::Csv => {
                    let mut out = String::from("kind,closed_form,gram_oracle\n");
                    for (k, c, o) in rows {
                        let o = o.map(|v| format!("{v:.11e}")).unwrap_or_default();
                        out.push_str(&format!("{k:?},{c:.11e},{o}\n"));
                    }
                    out
                }
                Format::Json => json_out(json!({
                    "mu": p.mu,
                    "kinds": rows.iter().map(|(k, c, o)| json!({
                        "kind": k, "closed_form": c, "gram_oracle": o.as_ref().ok(),
                        "oracle_error": o.as_ref().err().map(|e| e.to_string()),
                    })).collect::<Vec<_>>(),
                })),
            }
        }
        Command::Mix => {
            let curve = if p.has_empty_decoys() { Curve::MixEd } else { Curve::Mix };
            let v = run_point(curve, &p, &opts)?;
            if v["result"]["feasible"] == json!(false) {
                return Err(Error::Infeasible(v["result"]["reason"].as_str().unwrap_or("infeasible").to_string()));
            }
            json_out(v)
        }
        Command::Scan { variable, start, stop, steps } => {
            let curves = parse_curves(s.curves.as_deref().unwrap_or("MIX,BS"))?;
            let spec = ScanSpec { variable: variable.parse()?, start, stop, steps, fixed: p, curves, options: opts };
            let table = run_scan(&spec)?;
            match s.format {
                Format::Csv => table.to_csv(),
                Format::Json => json_out(table.to_json()),
            }
        }
        Command::Bs => json_out(run_point(Curve::Bs, &p, &opts)?),
        Command::ThreeState { qber, visibility } => {
            opts.qber = qber.or(s.file_f64("qber")?).unwrap_or(0.0);
            opts.visibility = visibility.or(s.file_f64("visibility")?).unwrap_or(1.0);
            let sp = run_point(Curve::ThreeStateSp, &p, &opts)?;
            let pns = run_point(Curve::Pns3State, &p, &opts)?;
            json_out(json!({ "single_photon": sp, "pns_zero_error": pns }))
        }
        Command::Mc { strategy, block_len } => {
            let strategy = match strategy {
                McStrategy::Honest => Strategy::Honest,
                McStrategy::Bs => Strategy::Bs,
                McStrategy::Usd3 => Strategy::Usd3,
                McStrategy::Usd4a => Strategy::Usd4a,
                McStrategy::Usd4b => Strategy::Usd4b,
                McStrategy::Mix => Strategy::Mix(solve_any(&p)?.0),
                McStrategy::Usd3Only => Strategy::Usd3Only,
                McStrategy::Usd4aOnly => Strategy::Usd4aOnly,
            };
            let block_len = match (block_len, s.file.get("block_len")) {
                (Some(b), _) => b,
                (None, Some(v)) => number("block_len", v)?,
                (None, None) => DEFAULT_BLOCK_LEN,
            };
            let cfg = SimConfig::new(p, strategy, s.windows, s.seed).with_forwarding(s.fw).with_block_len(block_len);
            let report = run_mc(&cfg)?;
            match s.format {
                Format::Csv => report.comparison_csv(),
                Format::Json => report.to_json_string() + "\n",
            }
        }
    };
    if let Some(path) = &cli.common.out {
        std::fs::write(path, &out).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        Ok(String::new())
    } else {
        Ok(out)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cowqkd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
