//! Experiment configuration and its line-oriented `key = value` file format.
//!
//! ```text
//! # comments and blank lines are ignored
//! experiment = table1
//! seed = 7
//! trials = 500
//! nt_list = 8, 12, 16, 20, 24, 28, 32
//! methods = naive, alg1, alg2, greedy
//! papc.reset_q = false
//! ```
//!
//! Every key is optional and defaults to the standard simulation setup; an
//! unknown key is an error.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{db_to_linear, PowerModel, QosTargets};
use crate::papc::{StepRule, SubgradientSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Minimum transmit power with all antennas on.
    Naive,
    /// Reweighted total power minimization, single band.
    Alg1,
    /// The same with per-antenna caps.
    Alg2,
    /// Correlation-based greedy antenna deletion.
    Greedy,
    /// Reweighted total power minimization across bands.
    Multiband,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Naive,
        Method::Alg1,
        Method::Alg2,
        Method::Greedy,
        Method::Multiband,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Alg1 => "alg1",
            Method::Alg2 => "alg2",
            Method::Greedy => "greedy",
            Method::Multiband => "multiband",
        }
    }

    /// Whether the method is defined for more than one band.
    pub fn supports_multiband(self) -> bool {
        matches!(self, Method::Naive | Method::Multiband)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PapcConfig {
    /// Initial step; `None` uses `1 / p_a`.
    pub t0: Option<f64>,
    pub rule: StepRule,
    pub max_inner: usize,
    pub violation_tol: f64,
    pub reset_q: bool,
}

impl Default for PapcConfig {
    fn default() -> Self {
        Self {
            t0: None,
            rule: StepRule::Adaptive,
            max_inner: 1000,
            violation_tol: 1e-6,
            reset_q: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub trials: usize,
    pub nt_list: Vec<usize>,
    pub k: usize,
    pub nb_list: Vec<usize>,
    pub gamma_db: f64,
    pub sigma2: f64,
    pub c1: f64,
    pub c2: f64,
    pub p_a: Option<f64>,
    pub delta: f64,
    pub outer_iters: usize,
    pub eps_off: f64,
    pub methods: Vec<Method>,
    pub papc: PapcConfig,
    /// Record wall-clock times in the output. Off by default so that
    /// repeated runs produce identical files.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let pm = PowerModel::default();
        Self {
            experiment: "custom".into(),
            seed: 0,
            trials: 100,
            nt_list: (8..=32).step_by(4).collect(),
            k: 4,
            nb_list: vec![1],
            gamma_db: 3.0,
            sigma2: 1.0,
            c1: pm.c1,
            c2: pm.c2,
            p_a: pm.p_a,
            delta: pm.delta,
            outer_iters: pm.outer_iters,
            eps_off: pm.eps_off,
            methods: vec![Method::Naive, Method::Alg1, Method::Alg2, Method::Greedy],
            papc: PapcConfig::default(),
            timing: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected a boolean, got `{v}`"))),
    }
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = v.to_string(),
            "seed" => self.seed = parse_num(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "nt_list" => self.nt_list = parse_list(key, v)?,
            "k" => self.k = parse_num(key, v)?,
            "nb_list" => self.nb_list = parse_list(key, v)?,
            "gamma_db" => self.gamma_db = parse_num(key, v)?,
            "sigma2" => self.sigma2 = parse_num(key, v)?,
            "c1" => self.c1 = parse_num(key, v)?,
            "c2" => self.c2 = parse_num(key, v)?,
            "p_a" => {
                self.p_a = match v {
                    "none" | "inf" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "delta" => self.delta = parse_num(key, v)?,
            "outer_iters" => self.outer_iters = parse_num(key, v)?,
            "eps_off" => self.eps_off = parse_num(key, v)?,
            "methods" => self.methods = parse_list(key, v)?,
            "timing" => self.timing = parse_bool(key, v)?,
            "papc.t0" => self.papc.t0 = Some(parse_num(key, v)?),
            "papc.rule" => {
                self.papc.rule = match v {
                    "constant" => StepRule::Constant,
                    "diminishing" => StepRule::Diminishing,
                    "adaptive" => StepRule::Adaptive,
                    _ => return Err(Error::Config(format!("`{key}`: unknown step rule `{v}`"))),
                }
            }
            "papc.max_inner" => self.papc.max_inner = parse_num(key, v)?,
            "papc.violation_tol" => self.papc.violation_tol = parse_num(key, v)?,
            "papc.reset_q" => self.papc.reset_q = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if self.nt_list.is_empty() || self.nb_list.is_empty() {
            return bad("nt_list and nb_list must be non-empty".into());
        }
        if let Some(nt) = self.nt_list.iter().find(|&&nt| nt < self.k) {
            return bad(format!("N_t = {nt} is smaller than k = {}", self.k));
        }
        if self.nb_list.contains(&0) {
            return bad("band counts must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.nb_list.iter().any(|&nb| nb > 1) {
            if let Some(m) = self.methods.iter().find(|m| !m.supports_multiband()) {
                return bad(format!("method `{m}` is single-band only but nb_list has more than one band"));
            }
        }
        if self.methods.contains(&Method::Greedy) && self.nt_list.iter().any(|&nt| nt <= self.k) {
            return bad("greedy needs every N_t > k".into());
        }
        if self.methods.contains(&Method::Alg2) && self.p_a.is_none() {
            return bad("alg2 needs p_a".into());
        }
        if !self.gamma_db.is_finite() || !(self.sigma2 > 0.0) {
            return bad("gamma_db must be finite and sigma2 > 0".into());
        }
        if let Some(t0) = self.papc.t0 {
            if !(t0 > 0.0) {
                return bad("papc.t0 must be > 0".into());
            }
        }
        if self.papc.max_inner == 0 {
            return bad("papc.max_inner must be >= 1".into());
        }
        self.power_model()
            .validate()
            .map_err(|e| Error::Config(strip_prefix(e)))
    }

    pub fn power_model(&self) -> PowerModel {
        PowerModel {
            c1: self.c1,
            c2: self.c2,
            p_a: self.p_a,
            delta: self.delta,
            outer_iters: self.outer_iters,
            eps_off: self.eps_off,
        }
    }

    pub fn qos(&self) -> QosTargets {
        QosTargets::uniform(self.k, db_to_linear(self.gamma_db), self.sigma2)
    }

    pub fn schedule(&self) -> SubgradientSchedule {
        let p_a = self.p_a.unwrap_or(f64::INFINITY);
        let mut s = SubgradientSchedule::for_cap(p_a);
        if let Some(t0) = self.papc.t0 {
            s.t0 = t0;
        }
        s.rule = self.papc.rule;
        s.max_inner = self.papc.max_inner;
        s.violation_tol = self.papc.violation_tol;
        s.reset_q = self.papc.reset_q;
        s
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Named sweeps reproducing the standard figures and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Average total power versus the number of antennas.
    Fig1,
    /// Average total power versus the number of bands.
    Fig2,
    /// Average active antennas versus the number of antennas.
    Table1,
    /// Average active antennas versus the number of bands.
    Table2,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let base = ExperimentConfig {
            experiment: self.name().into(),
            ..ExperimentConfig::default()
        };
        match self {
            Preset::Fig1 | Preset::Table1 => ExperimentConfig { trials: 500, ..base },
            Preset::Fig2 | Preset::Table2 => ExperimentConfig {
                trials: 300,
                nt_list: vec![32],
                nb_list: (1..=10).collect(),
                methods: vec![Method::Naive, Method::Multiband],
                ..base
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "table1" => Ok(Preset::Table1),
            "table2" => Ok(Preset::Table2),
            _ => Err(Error::Config(format!("unknown target `{s}`"))),
        }
    }
}
