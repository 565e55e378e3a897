//! Flat `key = value` scenario configuration.
//!
//! Values are layered: scenario preset, then the config file, then `--set`
//! overrides. Every key has a default, so the resolved map lists every
//! parameter a run used.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::bang_bang::BathSpec;
use crate::dicke::EnsembleSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    Fig1,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Sweep,
    OracleCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Fig1,
        Scenario::Fig2a,
        Scenario::Fig2b,
        Scenario::Fig2c,
        Scenario::Fig3a,
        Scenario::Fig3b,
        Scenario::Sweep,
        Scenario::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2a => "fig2a",
            Scenario::Fig2b => "fig2b",
            Scenario::Fig2c => "fig2c",
            Scenario::Fig3a => "fig3a",
            Scenario::Fig3b => "fig3b",
            Scenario::Sweep => "sweep",
            Scenario::OracleCheck => "oracle-check",
        }
    }

    /// Keys whose defaults differ from the common ones.
    fn preset(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Scenario::Fig1 => &[("gt_max", "auto"), ("step", "auto")],
            Scenario::Fig2a | Scenario::Fig2b | Scenario::Sweep => &[],
            Scenario::Fig2c => &[("n_th", "100")],
            Scenario::Fig3a => &[
                ("eta", "4e-4"),
                ("pulses", "500"),
                ("n_th", "10"),
                ("lambda", "4"),
                ("Q", "1000"),
                ("N", "10"),
                ("step", "0.1"),
            ],
            Scenario::Fig3b => &[
                ("eta", "4e-4"),
                ("pulses", "500"),
                ("n_th", "10"),
                ("lambda", "4"),
                ("Q", "1000"),
                ("N", "10"),
            ],
            Scenario::OracleCheck => &[("N", "2"), ("omega_a", "50"), ("Q", "25")],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config {
                line: 0,
                key: "scenario".into(),
                reason: format!(
                    "unknown scenario `{s}`; expected one of {}",
                    Scenario::ALL.map(|s| s.name()).join(", ")
                ),
            })
    }
}

/// Common defaults. The spin bath cutoff is in units of `g`.
const DEFAULTS: &[(&str, &str)] = &[
    ("N", "10"),
    ("g", "1"),
    ("omega_a", "1000"),
    ("Q", "1000"),
    ("n_th", "0"),
    ("pulses", "0"),
    ("eta", "0"),
    ("omega_c", "1"),
    ("lambda", "4"),
    ("gt_max", "300"),
    ("step", "0.5"),
    ("backend", "auto"),
    ("m_values", "0,1,-1,2,-2,3,-3"),
    ("q_values", "5,10,1000"),
    ("n_th_values", "100,50,0"),
    ("pulses_values", "0,100,200,300,400,500,600,700,800"),
    ("q_min", "10"),
    ("q_max", "1e6"),
    ("q_points", "21"),
    ("sweep_param", "Q"),
    ("sweep_min", "10"),
    ("sweep_max", "1e5"),
    ("sweep_points", "9"),
    ("sweep_scale", "log"),
    ("times", "5,10,20"),
    ("oracle_configs", "25:0,inf:0,25:1"),
    ("seed", "0"),
];

fn known(key: &str) -> bool {
    key == "scenario" || DEFAULTS.iter().any(|(k, _)| *k == key)
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Default,
    /// 1-based line in the config file
    File(usize),
    /// 1-based position among `--set` overrides
    Override(usize),
}

impl Origin {
    fn line(self) -> usize {
        match self {
            Origin::File(l) => l,
            _ => 0,
        }
    }
}

fn config_error(origin: Origin, key: &str, reason: impl Into<String>) -> Error {
    let mut reason = reason.into();
    if let Origin::Override(i) = origin {
        reason = format!("{reason} (in --set #{i})");
    }
    Error::Config {
        line: origin.line(),
        key: key.to_string(),
        reason,
    }
}

/// Parsed but untyped `key = value` entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    /// Parses a document: one `key = value` per line, `#` starts a comment.
    pub fn parse(source: &str) -> Result<Self> {
        let mut out = Self::default();
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let Some((key, value)) = text.split_once('=') else {
                return Err(Error::Config {
                    line,
                    key: text.to_string(),
                    reason: "expected `key = value`".into(),
                });
            };
            out.insert(key.trim(), value.trim(), Origin::File(line), true)?;
        }
        Ok(out)
    }

    /// Applies `key=value` overrides on top of the current entries.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, sets: &[S]) -> Result<()> {
        for (i, item) in sets.iter().enumerate() {
            let origin = Origin::Override(i + 1);
            let item = item.as_ref();
            let Some((key, value)) = item.split_once('=') else {
                return Err(config_error(origin, item, "expected `key=value`"));
            };
            self.insert(key.trim(), value.trim(), origin, false)?;
        }
        Ok(())
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin, unique: bool) -> Result<()> {
        if !known(key) {
            return Err(config_error(origin, key, "unknown key"));
        }
        if value.is_empty() {
            return Err(config_error(origin, key, "missing value"));
        }
        if unique {
            if let Some((_, Origin::File(first))) = self.entries.get(key) {
                return Err(config_error(
                    origin,
                    key,
                    format!("duplicate key, first set on line {first}"),
                ));
            }
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    /// Bang-Bang when pulses or a spin bath are configured, otherwise the
    /// exact dissipative phase.
    Auto,
    Analytic,
    Numeric,
    BangBang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    Q,
    NTh,
    OmegaA,
    Pulses,
    Eta,
    Lambda,
    OmegaC,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::N => "N",
            SweepParam::Q => "Q",
            SweepParam::NTh => "n_th",
            SweepParam::OmegaA => "omega_a",
            SweepParam::Pulses => "pulses",
            SweepParam::Eta => "eta",
            SweepParam::Lambda => "lambda",
            SweepParam::OmegaC => "omega_c",
        }
    }

    /// Integer-valued axes are rounded to the nearest integer.
    pub fn is_integer(self) -> bool {
        matches!(self, SweepParam::N | SweepParam::Pulses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepAxis {
    /// Grid values, deduplicated after integer rounding.
    pub fn values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.points)
            .map(|k| {
                let f = if self.points == 1 {
                    0.0
                } else {
                    k as f64 / (self.points - 1) as f64
                };
                let v = if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                };
                if self.param.is_integer() {
                    v.round()
                } else {
                    v
                }
            })
            .collect();
        out.dedup();
        out
    }
}

/// Fully validated scenario configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub spec: EnsembleSpec,
    pub pulses: u32,
    pub bath: BathSpec,
    pub gt_max: f64,
    pub step: f64,
    pub backend: BackendChoice,
    pub m_values: Vec<i64>,
    pub q_values: Vec<f64>,
    pub n_th_values: Vec<f64>,
    pub pulses_values: Vec<u32>,
    pub q_min: f64,
    pub q_max: f64,
    pub q_points: usize,
    pub sweep: SweepAxis,
    pub times: Vec<f64>,
    /// `(Q, n_th)` pairs
    pub oracle_configs: Vec<(f64, f64)>,
    /// Reserved; every computation is deterministic.
    pub seed: u64,
    /// Effective value of every key, for the output metadata.
    resolved: BTreeMap<String, String>,
}

struct Resolver {
    values: BTreeMap<&'static str, (String, Origin)>,
}

impl Resolver {
    fn new(scenario: Scenario, raw: &RawConfig) -> Self {
        let mut values: BTreeMap<&'static str, (String, Origin)> = DEFAULTS
            .iter()
            .map(|(k, v)| (*k, (v.to_string(), Origin::Default)))
            .collect();
        for (k, v) in scenario.preset() {
            values.insert(k, (v.to_string(), Origin::Default));
        }
        for (k, _) in DEFAULTS {
            if let Some((v, o)) = raw.entries.get(*k) {
                values.insert(k, (v.clone(), *o));
            }
        }
        Self { values }
    }

    fn text(&self, key: &'static str) -> (&str, Origin) {
        let (v, o) = &self.values[key];
        (v.as_str(), *o)
    }

    fn parse<T: FromStr>(&self, key: &'static str, what: &str) -> Result<T> {
        let (v, o) = self.text(key);
        v.parse()
            .map_err(|_| config_error(o, key, format!("expected {what}, got `{v}`")))
    }

    fn real(&self, key: &'static str) -> Result<f64> {
        let v: f64 = self.parse(key, "a number")?;
        if v.is_nan() {
            let (_, o) = self.text(key);
            return Err(config_error(o, key, "NaN is not allowed"));
        }
        Ok(v)
    }

    fn positive(&self, key: &'static str) -> Result<f64> {
        let v = self.real(key)?;
        if !(v > 0.0 && v.is_finite()) {
            let (_, o) = self.text(key);
            return Err(config_error(o, key, format!("must be positive and finite, got {v}")));
        }
        Ok(v)
    }

    fn list<T: FromStr>(&self, key: &'static str, what: &str) -> Result<Vec<T>> {
        let (v, o) = self.text(key);
        let items: Vec<T> = v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| config_error(o, key, format!("expected a list of {what}, got `{v}`")))
            })
            .collect::<Result<_>>()?;
        if items.is_empty() {
            return Err(config_error(o, key, "list is empty"));
        }
        Ok(items)
    }

    /// Re-labels library validation errors with the offending key's origin.
    fn check<T>(&self, key: &'static str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => {
                let (_, o) = self.text(key);
                config_error(o, key, reason)
            }
            other => other,
        })
    }
}

fn spec_key(name: &str) -> &'static str {
    match name {
        "N" => "N",
        "g" => "g",
        "omega_a" => "omega_a",
        "Q" => "Q",
        "n_th" => "n_th",
        "eta" => "eta",
        "omega_c" => "omega_c",
        _ => "lambda",
    }
}

impl ScenarioConfig {
    /// Builds a config for `scenario` from a parsed document; a `scenario`
    /// key in the document must agree.
    pub fn resolve(scenario: Scenario, raw: &RawConfig) -> Result<Self> {
        if let Some((v, o)) = raw.entries.get("scenario") {
            let named: Scenario = v.parse().map_err(|_| config_error(*o, "scenario", format!("unknown scenario `{v}`")))?;
            if named != scenario {
                return Err(config_error(
                    *o,
                    "scenario",
                    format!("config names `{named}` but `{scenario}` was requested"),
                ));
            }
        }
        let r = Resolver::new(scenario, raw);

        let n: usize = r.parse("N", "a positive integer")?;
        let g = r.real("g")?;
        let omega_a = r.real("omega_a")?;
        let q = r.real("Q")?;
        let n_th = r.real("n_th")?;
        let spec = EnsembleSpec::with_coupling(n, g, omega_a, q, n_th).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let key = spec_key(name);
                let (_, o) = r.text(key);
                config_error(o, key, reason)
            }
            other => other,
        })?;

        let pulses: u32 = r.parse("pulses", "a non-negative integer")?;
        let eta = r.real("eta")?;
        let omega_c = r.real("omega_c")?;
        let lambda = r.real("lambda")?;
        let bath = BathSpec::new(eta, omega_c, lambda).map_err(|e| match e {
            Error::InvalidParameter { name, reason } => {
                let key = spec_key(name);
                let (_, o) = r.text(key);
                config_error(o, key, reason)
            }
            other => other,
        })?;

        let gt_max = match r.text("gt_max").0 {
            "auto" => 2.0 * PI * g / omega_a,
            _ => r.positive("gt_max")?,
        };
        let step = match r.text("step").0 {
            "auto" => gt_max / 200.0,
            _ => r.positive("step")?,
        };
        if step > gt_max {
            let (_, o) = r.text("step");
            return Err(config_error(o, "step", format!("exceeds gt_max = {gt_max}")));
        }

        let backend = match r.text("backend") {
            ("auto", _) => BackendChoice::Auto,
            ("analytic", _) => BackendChoice::Analytic,
            ("numeric", _) => BackendChoice::Numeric,
            ("bang-bang", _) => BackendChoice::BangBang,
            (v, o) => {
                return Err(config_error(
                    o,
                    "backend",
                    format!("expected auto, analytic, numeric or bang-bang, got `{v}`"),
                ))
            }
        };

        let m_values: Vec<i64> = r.list("m_values", "integers")?;
        let out_of_range = m_values.iter().find(|m| m.unsigned_abs() as usize > n);
        if let (Scenario::Fig1, Some(bad)) = (scenario, out_of_range) {
            let (_, o) = r.text("m_values");
            return Err(config_error(o, "m_values", format!("|m| = {} exceeds N = {n}", bad.abs())));
        }
        let q_values: Vec<f64> = r.list("q_values", "numbers")?;
        for &qv in &q_values {
            r.check("q_values", spec.with_q(qv).map(|_| ()))?;
        }
        let n_th_values: Vec<f64> = r.list("n_th_values", "numbers")?;
        for &v in &n_th_values {
            r.check("n_th_values", spec.with_n_th(v).map(|_| ()))?;
        }
        let pulses_values: Vec<u32> = r.list("pulses_values", "non-negative integers")?;

        let q_min = r.positive("q_min")?;
        let q_max = r.positive("q_max")?;
        let q_points: usize = r.parse("q_points", "a positive integer")?;
        if q_min > q_max || q_points == 0 {
            let (_, o) = r.text("q_points");
            return Err(config_error(o, "q_points", "need q_min <= q_max and at least one point"));
        }

        let (v, o) = r.text("sweep_param");
        let param = match v {
            "N" => SweepParam::N,
            "Q" => SweepParam::Q,
            "n_th" => SweepParam::NTh,
            "omega_a" => SweepParam::OmegaA,
            "pulses" => SweepParam::Pulses,
            "eta" => SweepParam::Eta,
            "lambda" => SweepParam::Lambda,
            "omega_c" => SweepParam::OmegaC,
            _ => {
                return Err(config_error(
                    o,
                    "sweep_param",
                    format!("cannot sweep `{v}`; use N, Q, n_th, omega_a, pulses, eta, lambda or omega_c"),
                ))
            }
        };
        let sweep_min = r.real("sweep_min")?;
        let sweep_max = r.real("sweep_max")?;
        let sweep_points: usize = r.parse("sweep_points", "a positive integer")?;
        let log = match r.text("sweep_scale") {
            ("log", _) => true,
            ("linear", _) => false,
            (v, o) => return Err(config_error(o, "sweep_scale", format!("expected log or linear, got `{v}`"))),
        };
        if sweep_points == 0 || !(sweep_min <= sweep_max) || (log && sweep_min <= 0.0) {
            let (_, o) = r.text("sweep_min");
            return Err(config_error(
                o,
                "sweep_min",
                "need sweep_min <= sweep_max, at least one point, and positive bounds on a log axis",
            ));
        }
        let sweep = SweepAxis {
            param,
            min: sweep_min,
            max: sweep_max,
            points: sweep_points,
            log,
        };

        let times: Vec<f64> = r.list("times", "numbers")?;
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            let (_, o) = r.text("times");
            return Err(config_error(o, "times", "must be positive and strictly increasing"));
        }
        let oracle_configs = {
            let (v, o) = r.text("oracle_configs");
            v.split(',')
                .map(|pair| {
                    let (qs, ns) = pair.trim().split_once(':').ok_or_else(|| {
                        config_error(o, "oracle_configs", format!("expected Q:n_th pairs, got `{pair}`"))
                    })?;
                    let parse = |s: &str| {
                        s.trim().parse::<f64>().map_err(|_| {
                            config_error(o, "oracle_configs", format!("bad number `{s}`"))
                        })
                    };
                    let pair = (parse(qs)?, parse(ns)?);
                    r.check("oracle_configs", spec.with_q(pair.0).and_then(|s| s.with_n_th(pair.1)).map(|_| ()))?;
                    Ok(pair)
                })
                .collect::<Result<Vec<_>>>()?
        };
        let seed: u64 = r.parse("seed", "a non-negative integer")?;

        let mut resolved: BTreeMap<String, String> = r
            .values
            .iter()
            .map(|(k, (v, _))| (k.to_string(), v.clone()))
            .collect();
        resolved.insert("gt_max".into(), format!("{gt_max}"));
        resolved.insert("step".into(), format!("{step}"));
        resolved.insert("scenario".into(), scenario.name().into());

        Ok(Self {
            scenario,
            spec,
            pulses,
            bath,
            gt_max,
            step,
            backend,
            m_values,
            q_values,
            n_th_values,
            pulses_values,
            q_min,
            q_max,
            q_points,
            sweep,
            times,
            oracle_configs,
            seed,
            resolved,
        })
    }

    /// Defaults for `scenario` with no file and no overrides.
    pub fn preset(scenario: Scenario) -> Result<Self> {
        Self::resolve(scenario, &RawConfig::default())
    }

    /// Preset plus `key=value` overrides.
    pub fn with_overrides<S: AsRef<str>>(scenario: Scenario, sets: &[S]) -> Result<Self> {
        let mut raw = RawConfig::default();
        raw.apply_overrides(sets)?;
        Self::resolve(scenario, &raw)
    }

    /// Every parameter and its effective value, sorted by key.
    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

/// Parses a complete document that names its scenario.
pub fn parse_config(source: &str) -> Result<ScenarioConfig> {
    let raw = RawConfig::parse(source)?;
    let Some((name, origin)) = raw.entries.get("scenario").cloned() else {
        return Err(Error::Config {
            line: 0,
            key: "scenario".into(),
            reason: "missing; add `scenario = <name>`".into(),
        });
    };
    let scenario = name
        .parse()
        .map_err(|_| config_error(origin, "scenario", format!("unknown scenario `{name}`")))?;
    ScenarioConfig::resolve(scenario, &raw)
}
