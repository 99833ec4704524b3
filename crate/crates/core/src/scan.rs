//! Parameter scans, single-point queries and Monte Carlo reports: the layer
//! the command-line tool prints.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    bs_attack, bs_optimal_mu, three_state_pns_rate, three_state_pns_zero_error, three_state_single_photon,
    three_state_wcp, three_state_wcp_optimal,
};
use crate::mix::{
    key_rate, optimize_mu, poor_stats_attack, poor_stats_rate, solve_any, KeyRateResult, PoorStatsKind,
};
use crate::montecarlo::{compare_rates, expected_rates, honest_neighbor_bias, plan_rate_variance, simulate, RateComparison, SimConfig, SimStats};
use crate::optimize::bisect_root;
use crate::{Error, ForwardingModel, ProtocolParams, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Curve {
    #[serde(rename = "MIX")]
    Mix,
    #[serde(rename = "MIX_ED")]
    MixEd,
    #[serde(rename = "BS")]
    Bs,
    #[serde(rename = "USD3_ONLY")]
    Usd3Only,
    #[serde(rename = "USD4A_ONLY")]
    Usd4aOnly,
    #[serde(rename = "PNS_3STATE")]
    Pns3State,
    #[serde(rename = "THREE_STATE_SP")]
    ThreeStateSp,
}

impl Curve {
    pub const ALL: [Curve; 7] =
        [Curve::Mix, Curve::MixEd, Curve::Bs, Curve::Usd3Only, Curve::Usd4aOnly, Curve::Pns3State, Curve::ThreeStateSp];

    pub fn id(self) -> &'static str {
        match self {
            Curve::Mix => "MIX",
            Curve::MixEd => "MIX_ED",
            Curve::Bs => "BS",
            Curve::Usd3Only => "USD3_ONLY",
            Curve::Usd4aOnly => "USD4A_ONLY",
            Curve::Pns3State => "PNS_3STATE",
            Curve::ThreeStateSp => "THREE_STATE_SP",
        }
    }

    /// Curves that bound the COW key rate from above (attacks on COW), as
    /// opposed to the three-state reference rates.
    pub fn is_cow_attack(self) -> bool {
        !matches!(self, Curve::Pns3State | Curve::ThreeStateSp)
    }
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Curve::ALL
            .into_iter()
            .find(|c| c.id() == norm)
            .ok_or_else(|| Error::InvalidInput(format!("unknown curve '{s}'")))
    }
}

pub fn parse_curves(list: &str) -> Result<Vec<Curve>> {
    let curves: Vec<Curve> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if curves.is_empty() {
        return Err(Error::InvalidInput("no curves selected".into()));
    }
    Ok(curves)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanVariable {
    #[serde(rename = "length_km")]
    LengthKm,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "f")]
    F,
}

impl ScanVariable {
    pub fn id(self) -> &'static str {
        match self {
            ScanVariable::LengthKm => "length_km",
            ScanVariable::Mu => "mu",
            ScanVariable::F => "f",
        }
    }
}

impl FromStr for ScanVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "length_km" | "length" | "l" => Ok(ScanVariable::LengthKm),
            "mu" => Ok(ScanVariable::Mu),
            "f" => Ok(ScanVariable::F),
            _ => Err(Error::InvalidInput(format!("unknown scan variable '{s}'"))),
        }
    }
}

/// Extra inputs some curves need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub fw: ForwardingModel,
    /// Error rates assumed for the three-state GLLP curve.
    pub qber: f64,
    pub visibility: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { fw: ForwardingModel::SinglePhoton, qber: 0.0, visibility: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub variable: ScanVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub fixed: ProtocolParams,
    pub curves: Vec<Curve>,
    pub options: CurveOptions,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        self.fixed.validate()?;
        if self.steps < 2 {
            return Err(Error::InvalidInput("a scan needs at least two steps".into()));
        }
        if !(self.start < self.stop) {
            return Err(Error::InvalidInput("scan start must be below stop".into()));
        }
        if self.curves.is_empty() {
            return Err(Error::InvalidInput("no curves selected".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.stop } else { self.start + h * i as f64 }).collect()
    }

    fn params_at(&self, x: f64) -> ProtocolParams {
        match self.variable {
            ScanVariable::LengthKm => self.fixed.with_length_km(x),
            ScanVariable::Mu => self.fixed.with_mu(x),
            ScanVariable::F => {
                if self.fixed.has_empty_decoys() {
                    let share = self.fixed.f0 / self.fixed.f();
                    self.fixed.with_decoys(share * x, (1.0 - share) * x)
                } else {
                    self.fixed.with_f(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mu_opt: Option<f64>,
    pub rate: f64,
    pub mu_max: Option<f64>,
    pub feasible: bool,
}

impl CurvePoint {
    fn infeasible() -> Self {
        CurvePoint { mu_opt: None, rate: 0.0, mu_max: None, feasible: false }
    }

    fn from_key_rate(r: KeyRateResult) -> Self {
        CurvePoint { mu_opt: Some(r.mu_opt), rate: r.r_opt, mu_max: r.mu_max, feasible: true }
    }
}

/// Parameters for the standard protocol with the same total decoy fraction.
fn standard(p: &ProtocolParams) -> ProtocolParams {
    p.with_f(p.f())
}

/// Parameters for the empty-decoy protocol: the given split, or half and
/// half when none was given.
fn with_empty_decoys(p: &ProtocolParams) -> ProtocolParams {
    if p.has_empty_decoys() {
        *p
    } else {
        p.with_decoys(p.f() / 2.0, p.f() / 2.0)
    }
}

/// Rate of a curve with μ optimised.
pub fn optimal_point(curve: Curve, p: &ProtocolParams, opts: &CurveOptions) -> CurvePoint {
    let r = match curve {
        Curve::Mix => optimize_mu(&standard(p)).map(CurvePoint::from_key_rate),
        Curve::MixEd => optimize_mu(&with_empty_decoys(p)).map(CurvePoint::from_key_rate),
        Curve::Bs => bs_optimal_mu(p)
            .map(|b| CurvePoint { mu_opt: Some(b.mu_opt), rate: b.rate, mu_max: None, feasible: true }),
        Curve::Usd3Only => poor_stats_attack(PoorStatsKind::Usd3Only, p, opts.fw).map(CurvePoint::from_key_rate),
        Curve::Usd4aOnly => poor_stats_attack(PoorStatsKind::Usd4aOnly, p, opts.fw).map(CurvePoint::from_key_rate),
        Curve::Pns3State => {
            let r = three_state_pns_zero_error(p);
            let t = p.transmission();
            Ok(CurvePoint { mu_opt: Some(r.mu_opt), rate: r.rate, mu_max: Some(2.0 * t), feasible: true })
        }
        Curve::ThreeStateSp => three_state_wcp_optimal(p, opts.qber, opts.visibility)
            .map(|r| CurvePoint { mu_opt: Some(r.mu_opt), rate: r.rate, mu_max: None, feasible: true }),
    };
    r.unwrap_or_else(|_| CurvePoint::infeasible())
}

/// Rate of a curve at the parameters' own μ.
pub fn fixed_mu_point(curve: Curve, p: &ProtocolParams, opts: &CurveOptions) -> CurvePoint {
    let rate = match curve {
        Curve::Mix => solve_any(&standard(p)).map(|(m, _)| key_rate(&standard(p), &m)),
        Curve::MixEd => solve_any(&with_empty_decoys(p)).map(|(m, _)| key_rate(&with_empty_decoys(p), &m)),
        Curve::Bs => Ok(bs_attack(p).rate),
        Curve::Usd3Only => Ok(poor_stats_rate(PoorStatsKind::Usd3Only, p, opts.fw)),
        Curve::Usd4aOnly => Ok(poor_stats_rate(PoorStatsKind::Usd4aOnly, p, opts.fw)),
        Curve::Pns3State => Ok(three_state_pns_rate(p)),
        Curve::ThreeStateSp => three_state_wcp(p, opts.qber, opts.visibility).map(|b| b.rate),
    };
    match rate {
        Ok(rate) => {
            let best = optimal_point(curve, p, opts);
            CurvePoint { mu_opt: Some(p.mu), rate, mu_max: best.mu_max, feasible: true }
        }
        Err(_) => CurvePoint::infeasible(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x: f64,
    pub t: f64,
    pub points: Vec<CurvePoint>,
    /// Smallest feasible rate among the COW attack curves, if any.
    pub min_envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub spec: ScanSpec,
    pub rows: Vec<ScanRow>,
}

pub fn run_scan(spec: &ScanSpec) -> Result<ScanTable> {
    spec.validate()?;
    let rows = spec
        .grid()
        .into_par_iter()
        .map(|x| {
            let p = spec.params_at(x);
            let points: Vec<CurvePoint> = spec
                .curves
                .iter()
                .map(|&c| match spec.variable {
                    ScanVariable::Mu => fixed_mu_point(c, &p, &spec.options),
                    _ => optimal_point(c, &p, &spec.options),
                })
                .collect();
            let min_envelope = spec
                .curves
                .iter()
                .zip(&points)
                .filter(|(c, pt)| c.is_cow_attack() && pt.feasible)
                .map(|(_, pt)| pt.rate)
                .reduce(f64::min);
            ScanRow { x, t: p.transmission(), points, min_envelope }
        })
        .collect();
    Ok(ScanTable { spec: spec.clone(), rows })
}

fn provenance(params: &ProtocolParams, extra: Value) -> Value {
    json!({ "tool": "cowqkd", "version": VERSION, "params": params, "extra": extra })
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl ScanTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.spec.variable.id().to_string(), "t".to_string()];
        for c in &self.spec.curves {
            for col in ["mu_opt", "rate", "mu_max", "feasible"] {
                h.push(format!("{}_{col}", c.id()));
            }
        }
        h.push("min_envelope".into());
        h
    }

    /// CSV with a `#` provenance block, numbers to 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let prov = provenance(&self.spec.fixed, json!({ "scan": &self.spec }));
        let _ = writeln!(out, "# {prov}");
        let _ = writeln!(out, "{}", self.header().join(","));
        for row in &self.rows {
            let mut cells = vec![num(row.x), num(row.t)];
            for pt in &row.points {
                cells.extend([opt_num(pt.mu_opt), num(pt.rate), opt_num(pt.mu_max), pt.feasible.to_string()]);
            }
            cells.push(opt_num(row.min_envelope));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({ "provenance": provenance(&self.spec.fixed, Value::Null), "spec": &self.spec, "rows": &self.rows })
    }

    fn column(&self, curve: Curve) -> Option<usize> {
        self.spec.curves.iter().position(|&c| c == curve)
    }

    /// First grid interval where `a` overtakes `b` (rate of `a` drops below
    /// that of `b`), located by linear interpolation of `ln R_a − ln R_b`.
    pub fn crossover(&self, a: Curve, b: Curve) -> Option<f64> {
        let (ia, ib) = (self.column(a)?, self.column(b)?);
        let diff = |row: &ScanRow| {
            let (pa, pb) = (row.points[ia], row.points[ib]);
            (pa.feasible && pb.feasible && pa.rate > 0.0 && pb.rate > 0.0).then(|| pa.rate.ln() - pb.rate.ln())
        };
        self.rows.windows(2).find_map(|w| {
            let (d0, d1) = (diff(&w[0])?, diff(&w[1])?);
            (d0 > 0.0 && d1 <= 0.0).then(|| w[0].x + (w[1].x - w[0].x) * d0 / (d0 - d1))
        })
    }
}

/// Distance at which curve `a`'s optimised rate drops below curve `b`'s,
/// refined by bisection inside `[lo_km, hi_km]`.
pub fn find_crossover_km(
    a: Curve,
    b: Curve,
    p: &ProtocolParams,
    opts: &CurveOptions,
    lo_km: f64,
    hi_km: f64,
) -> Option<f64> {
    let gap = |l: f64| {
        let q = p.with_length_km(l);
        let (ra, rb) = (optimal_point(a, &q, opts), optimal_point(b, &q, opts));
        if ra.feasible && rb.feasible && ra.rate > 0.0 && rb.rate > 0.0 {
            ra.rate.ln() - rb.rate.ln()
        } else {
            f64::NAN
        }
    };
    bisect_root(gap, lo_km, hi_km, 1e-6)
}

/// A single evaluation of one curve, with everything the modules report.
pub fn run_point(curve: Curve, p: &ProtocolParams, opts: &CurveOptions) -> Result<Value> {
    p.validate()?;
    let prov = provenance(p, json!({ "options": opts }));
    let t = p.transmission();
    let body = match curve {
        Curve::Mix | Curve::MixEd => {
            let q = if curve == Curve::Mix { standard(p) } else { with_empty_decoys(p) };
            match solve_any(&q) {
                Ok((mix, coeffs)) => json!({
                    "feasible": true,
                    "mix": mix,
                    "coefficients": coeffs,
                    "key_rate": key_rate(&q, &mix),
                    "optimum": optimize_mu(&q).ok(),
                    "asymptotics": crate::mix::asymptotics(&q),
                    "blocking_note": "when q0 would be negative Eve attacks every attempt and blocks the remainder",
                }),
                Err(Error::Infeasible(reason)) => json!({ "feasible": false, "reason": reason }),
                Err(e) => return Err(e),
            }
        }
        Curve::Bs => {
            let at_mu = bs_attack(p);
            let best = bs_optimal_mu(p)?;
            json!({ "feasible": true, "at_mu": at_mu, "xi": best.xi, "g_xi": best.g_xi,
                    "mu_opt": best.mu_opt, "rate": best.rate })
        }
        Curve::Usd3Only | Curve::Usd4aOnly => {
            let kind = if curve == Curve::Usd3Only { PoorStatsKind::Usd3Only } else { PoorStatsKind::Usd4aOnly };
            let r = poor_stats_attack(kind, p, opts.fw)?;
            json!({ "feasible": true, "optimum": r,
                    "constant_c": crate::mix::poor_stats_constant(kind, p, opts.fw),
                    "q1_at_mu": crate::mix::poor_stats_q1(kind, p, opts.fw) })
        }
        Curve::Pns3State => {
            let r = three_state_pns_zero_error(p);
            json!({ "feasible": true, "mu_opt": r.mu_opt, "rate": r.rate, "rate_at_mu": three_state_pns_rate(p), "mu_max": 2.0 * t })
        }
        Curve::ThreeStateSp => {
            let sp = three_state_single_photon(opts.qber, opts.visibility)?;
            json!({ "feasible": true, "qber": opts.qber, "visibility": opts.visibility,
                    "r": sp.r, "r_clamped": sp.r_clamped, "weights": sp.weights,
                    "wcp_at_mu": three_state_wcp(p, opts.qber, opts.visibility).ok(),
                    "wcp_optimum": three_state_wcp_optimal(p, opts.qber, opts.visibility).ok() })
        }
    };
    Ok(json!({ "provenance": prov, "curve": curve.id(), "t": t, "result": body }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub provenance: Value,
    pub config: SimConfig,
    pub stats: SimStats,
    pub comparison: Vec<RateComparison>,
    pub honest_neighbor_bias: f64,
    /// `(bias − honest)/stderr` of the measured decoy-neighbour fraction,
    /// with the honest binomial error.
    pub neighbor_bias_z: Option<f64>,
}

pub fn run_mc(cfg: &SimConfig) -> Result<McReport> {
    let stats = simulate(cfg)?;
    let comparison = compare_rates(&stats, &expected_rates(cfg), &plan_rate_variance(cfg));
    let honest = honest_neighbor_bias(&cfg.params);
    let neighbor_bias_z = stats
        .decoy_neighbor_bias
        .map(|b| (b.value - honest) / (honest * (1.0 - honest) / b.count as f64).sqrt());
    Ok(McReport {
        provenance: provenance(&cfg.params, json!({ "seed": cfg.seed, "windows": cfg.windows })),
        config: *cfg,
        stats,
        comparison,
        honest_neighbor_bias: honest,
        neighbor_bias_z,
    })
}

impl McReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn comparison_csv(&self) -> String {
        let mut out = format!("# {}\nrate,value,analytic,sigma,z\n", self.provenance);
        for c in &self.comparison {
            let _ = writeln!(out, "{},{},{},{},{}", c.name, num(c.value), num(c.analytic), num(c.sigma), num(c.z));
        }
        out
    }
}

/// `key = value` lines; `#` starts a comment. Keys are lower-cased with `-`
/// read as `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_ascii_lowercase().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_names_round_trip() {
        for c in Curve::ALL {
            assert_eq!(c.id().parse::<Curve>().unwrap(), c);
            assert_eq!(serde_json::to_value(c).unwrap(), json!(c.id()));
        }
        assert_eq!("usd4a-only".parse::<Curve>().unwrap(), Curve::Usd4aOnly);
        assert!("nope".parse::<Curve>().is_err());
        assert_eq!(parse_curves("MIX, BS").unwrap(), vec![Curve::Mix, Curve::Bs]);
    }

    #[test]
    fn spec_validation() {
        let mut spec = ScanSpec {
            variable: ScanVariable::LengthKm,
            start: 0.0,
            stop: 10.0,
            steps: 1,
            fixed: ProtocolParams::default(),
            curves: vec![Curve::Mix],
            options: CurveOptions::default(),
        };
        assert!(run_scan(&spec).is_err());
        spec.steps = 3;
        spec.stop = -1.0;
        assert!(run_scan(&spec).is_err());
        spec.stop = 10.0;
        assert_eq!(spec.grid(), vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn config_file_parsing() {
        let cfg = parse_config("# defaults\nmu = 0.2\nlength-km=80 # trailing\n\nETA = 0.1\n").unwrap();
        assert_eq!(cfg["mu"], "0.2");
        assert_eq!(cfg["length_km"], "80");
        assert_eq!(cfg["eta"], "0.1");
        assert!(parse_config("mu 0.2").is_err());
    }

    #[test]
    fn point_records() {
        let p = ProtocolParams::default().with_f(0.3).with_length_km(100.0);
        let v = run_point(Curve::Mix, &p, &CurveOptions::default()).unwrap();
        assert_eq!(v["result"]["feasible"], json!(false));
        let opts = CurveOptions { qber: 0.05, ..CurveOptions::default() };
        let v = run_point(Curve::ThreeStateSp, &ProtocolParams::default(), &opts).unwrap();
        let r = v["result"]["r"].as_f64().unwrap();
        assert!((r - (1.0 - 2.0 * crate::entropy::binary_entropy(0.05))).abs() < 1e-12);
    }
}
