//! Run configuration: a JSON file, command-line overrides, and the typed plan built from both.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tfbounds_core::bounds::{default_signals, BoundParams, CaseId, SweepSpec};
use tfbounds_core::grid::{GridSpec, SignalKind};
use tfbounds_core::norms::Exponent;
use tfbounds_core::tfr::ReprSpec;
use tfbounds_core::uncertainty::{DsCaseId, DsSweep, LocalUpCase, LocalUpParams, LocalUpSweep, SetDomain, SetSpec};
use tfbounds_core::weights::{builtin_weight, WeightFunction};

/// Invalid configuration; maps to the infeasible-config exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(ConfigError(msg.into()).into())
}

fn parse_all<T>(items: &[String], what: &str) -> anyhow::Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|e| ConfigError(format!("{what} '{s}': {e}")).into()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_width: 20.0, m: 1024 }
    }
}

impl std::str::FromStr for GridConfig {
    type Err = String;

    /// `M` or `HALF_WIDTH,M`.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected M or HALF_WIDTH,M, got '{s}'");
        match s.split_once(',') {
            None => Ok(GridConfig {
                m: s.trim().parse().map_err(|_| bad())?,
                ..GridConfig::default()
            }),
            Some((h, m)) => Ok(GridConfig {
                half_width: h.trim().parse().map_err(|_| bad())?,
                m: m.trim().parse().map_err(|_| bad())?,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub rel: f64,
    pub abs: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rel: tfbounds_core::report::REL_TOL,
            abs: tfbounds_core::report::ABS_TOL,
        }
    }
}

/// Where artifacts go; `-` is standard output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// The command's primary artifact: JSON report, CSV for `counterexample`, PGM for `heatmap`.
    pub out: Option<String>,
    /// Additional CSV table.
    pub csv: Option<String>,
    /// JSON report for commands whose primary artifact is not JSON.
    pub report: Option<String>,
}

/// Everything a run needs. Unset optional fields fall back to each command's battery defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub weights: Vec<String>,
    pub signals: Vec<String>,
    pub cases: Option<Vec<String>>,
    pub lambdas: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub mu_prime: Option<f64>,
    pub ps: Option<Vec<String>>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub window: Option<String>,
    pub sets: Option<Vec<String>>,
    pub s_values: Vec<f64>,
    pub repr: String,
    pub heatmap_side: usize,
    pub tolerances: ToleranceConfig,
    /// Not part of the report, so artifacts written to different paths compare equal.
    #[serde(skip_serializing)]
    pub outputs: OutputConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig::default(),
            weights: vec!["log".into(), "power:0.5".into()],
            signals: default_signals().iter().map(ToString::to_string).collect(),
            cases: None,
            lambdas: None,
            mu: None,
            mu_prime: None,
            ps: None,
            tau: None,
            alpha: None,
            window: None,
            sets: None,
            s_values: vec![1.0, 1.5, 2.0, 3.0, 4.0],
            repr: "wigner".into(),
            heatmap_side: 256,
            tolerances: ToleranceConfig::default(),
            outputs: OutputConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }

    pub fn grid(&self) -> anyhow::Result<GridSpec> {
        GridSpec::symmetric(self.grid.half_width, self.grid.m).map_err(|e| ConfigError(e.to_string()).into())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let t = &self.tolerances;
        if !(t.rel > 0.0 && t.abs > 0.0 && t.rel.is_finite() && t.abs.is_finite()) {
            return invalid(format!("tolerances must be positive, got rel={} abs={}", t.rel, t.abs));
        }
        if self.heatmap_side == 0 {
            return invalid("heatmap_side must be positive");
        }
        self.grid()?;
        self.weight_functions()?;
        self.signal_kinds()?;
        self.exponents(&[])?;
        self.window_kind()?;
        self.set_specs()?;
        Ok(())
    }

    pub fn weight_functions(&self) -> anyhow::Result<Vec<WeightFunction>> {
        self.weights
            .iter()
            .map(|w| builtin_weight(w).map_err(|e| ConfigError(e.to_string()).into()))
            .collect()
    }

    pub fn signal_kinds(&self) -> anyhow::Result<Vec<SignalKind>> {
        parse_all(&self.signals, "signal")
    }

    pub fn exponents(&self, default: &[Exponent]) -> anyhow::Result<Vec<Exponent>> {
        match &self.ps {
            Some(ps) => parse_all(ps, "exponent"),
            None => Ok(default.to_vec()),
        }
    }

    pub fn window_kind(&self) -> anyhow::Result<SignalKind> {
        match &self.window {
            Some(w) => Ok(parse_all::<SignalKind>(std::slice::from_ref(w), "window")?.remove(0)),
            None => Ok(SignalKind::unit_gaussian()),
        }
    }

    pub fn set_specs(&self) -> anyhow::Result<Option<Vec<SetSpec>>> {
        self.sets.as_deref().map(|s| parse_all(s, "set")).transpose()
    }

    fn cases<T>(&self, all: &[T]) -> anyhow::Result<Vec<T>>
    where
        T: std::str::FromStr + Clone,
        T::Err: std::fmt::Display,
    {
        match &self.cases {
            Some(c) => parse_all(c, "case"),
            None => Ok(all.to_vec()),
        }
    }

    pub fn repr(&self) -> anyhow::Result<ReprSpec> {
        self.repr.parse().map_err(|e| ConfigError(format!("representation '{}': {e}", self.repr)).into())
    }

    fn bound_params(&self) -> anyhow::Result<BoundParams> {
        let mut base = BoundParams::new(WeightFunction::log());
        base.mu = self.mu;
        base.window = self.window_kind()?;
        if let Some(tau) = self.tau {
            base.tau = tau;
        }
        Ok(base)
    }

    pub fn bound_sweep(&self) -> anyhow::Result<SweepSpec> {
        let d = SweepSpec::default_battery();
        Ok(SweepSpec {
            cases: self.cases(CaseId::BATTERY.as_slice())?,
            signals: self.signal_kinds()?,
            weights: self.weight_functions()?,
            lambdas: self.lambdas.clone().unwrap_or(d.lambdas),
            ps: self.exponents(&d.ps)?,
            base: self.bound_params()?,
        })
    }

    pub fn ds_sweep(&self) -> anyhow::Result<DsSweep> {
        let d = DsSweep::default_battery();
        let sets = match self.set_specs()? {
            Some(sets) => {
                if let Some(s) = sets.iter().find(|s| !s.fits(SetDomain::PhaseSpace)) {
                    return invalid(format!("set '{s}' is not a phase-space set"));
                }
                sets
            }
            None => d.sets,
        };
        Ok(DsSweep {
            cases: self.cases(DsCaseId::ALL.as_slice())?,
            signals: self.signal_kinds()?,
            weights: self.weight_functions()?,
            lambdas: self.lambdas.clone().unwrap_or(d.lambdas),
            ps: self.exponents(&d.ps)?,
            sets,
            base: self.bound_params()?,
        })
    }

    pub fn local_up_sweep(&self) -> anyhow::Result<LocalUpSweep> {
        let d = LocalUpSweep::default_battery();
        let lambda_mu = if self.lambdas.is_some() || self.mu.is_some() {
            let mu = self.mu.unwrap_or(0.0);
            self.lambdas.clone().unwrap_or_else(|| vec![0.0, 0.5]).into_iter().map(|l| (l, mu)).collect()
        } else {
            d.lambda_mu
        };
        let mut base = LocalUpParams::new(WeightFunction::log());
        base.mu_prime = self.mu_prime;
        base.alpha = self.alpha;
        base.window = self.window_kind()?;
        if let Some(tau) = self.tau {
            base.tau = tau;
        }
        Ok(LocalUpSweep {
            cases: self.cases(LocalUpCase::ALL.as_slice())?,
            signals: self.signal_kinds()?,
            weights: self.weight_functions()?,
            lambda_mu,
            sets: self.set_specs()?,
            base,
        })
    }

    /// The single exponent of the counterexample scan.
    pub fn scan_exponent(&self) -> anyhow::Result<Exponent> {
        match self.exponents(&[Exponent::Finite(2.0)])?.as_slice() {
            [p] => Ok(*p),
            ps => invalid(format!("the counterexample takes one exponent, got {}", ps.len())),
        }
    }

    /// The first configured signal.
    pub fn single_signal(&self) -> anyhow::Result<SignalKind> {
        match self.signal_kinds()?.into_iter().next() {
            Some(s) => Ok(s),
            None => invalid("no signal configured"),
        }
    }
}
