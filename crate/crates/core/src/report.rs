//! Verdict records shared by the bound, uncertainty and identity checks.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Error;
use crate::grid::GridSpec;
use crate::tfr::ConventionRegistry;

/// Relative slack allowed on the right-hand side of non-strict inequalities.
pub const REL_TOL: f64 = 1e-9;
/// Absolute slack allowed on the right-hand side of non-strict inequalities.
pub const ABS_TOL: f64 = 1e-12;

/// `exp(log)` when representable, `None` otherwise.
pub fn representable(log: f64) -> Option<f64> {
    if log.is_nan() || log > 700.0 {
        None
    } else {
        Some(log.exp())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Num(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEntry {
    pub name: String,
    pub log_value: f64,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub strict: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConventionSummary {
    pub c_spwig: f64,
    pub c_fundgabor_phase: bool,
    pub c_bj_multiplier: f64,
}

impl From<&ConventionRegistry> for ConventionSummary {
    fn from(c: &ConventionRegistry) -> Self {
        ConventionSummary {
            c_spwig: c.c_spwig,
            c_fundgabor_phase: c.c_fundgabor_phase,
            c_bj_multiplier: c.c_bj_multiplier,
        }
    }
}

/// Outcome of one inequality check. Values that overflow `f64` are reported as
/// `null` and compared through their logarithms.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictRecord {
    #[serde(rename = "case")]
    pub case_id: String,
    pub params: BTreeMap<String, ParamValue>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub constant: Option<f64>,
    pub ratio: Option<f64>,
    pub pass: bool,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub log_constant: f64,
    pub rhs_norms: Vec<NormEntry>,
    pub details: BTreeMap<String, f64>,
    pub grid: Option<GridSpec>,
    pub conventions: Option<ConventionSummary>,
    pub tolerances: Tolerances,
}

impl VerdictRecord {
    pub fn new(case_id: impl Into<String>) -> Self {
        VerdictRecord {
            case_id: case_id.into(),
            params: BTreeMap::new(),
            lhs: None,
            rhs: None,
            constant: None,
            ratio: None,
            pass: false,
            log_lhs: f64::NAN,
            log_rhs: f64::NAN,
            log_constant: f64::NAN,
            rhs_norms: Vec::new(),
            details: BTreeMap::new(),
            grid: None,
            conventions: None,
            tolerances: Tolerances {
                rel: REL_TOL,
                abs: ABS_TOL,
                strict: false,
            },
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<ParamValue>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    pub fn grid(mut self, g: GridSpec) -> Self {
        self.grid = Some(g);
        self
    }

    pub fn conventions(mut self, c: &ConventionRegistry) -> Self {
        self.conventions = Some(c.into());
        self
    }

    pub fn strict(mut self) -> Self {
        self.tolerances.strict = true;
        self
    }

    pub fn norm(mut self, name: &str, log_value: f64) -> Self {
        self.rhs_norms.push(NormEntry {
            name: name.into(),
            log_value,
            value: representable(log_value),
        });
        self
    }

    pub fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.into(), v);
        self
    }

    /// Records both sides (as logarithms) and decides the verdict.
    pub fn compare(mut self, log_lhs: f64, log_constant: f64, log_rhs: f64) -> Self {
        self.log_lhs = log_lhs;
        self.log_rhs = log_rhs;
        self.log_constant = log_constant;
        self.lhs = representable(log_lhs);
        self.rhs = representable(log_rhs);
        self.constant = representable(log_constant);
        self.ratio = if log_lhs == f64::NEG_INFINITY && log_rhs > f64::NEG_INFINITY {
            Some(0.0)
        } else {
            representable(log_lhs - log_rhs)
        };
        self.pass = holds(log_lhs, log_rhs, self.tolerances.strict);
        self
    }

    /// Re-decides a non-strict verdict with other slacks.
    pub fn rejudge(&mut self, rel: f64, abs: f64) {
        self.tolerances.rel = rel;
        self.tolerances.abs = abs;
        self.pass = holds_with(self.log_lhs, self.log_rhs, self.tolerances.strict, rel, abs);
    }

    pub fn log_ratio(&self) -> f64 {
        self.log_lhs - self.log_rhs
    }
}

/// `lhs ≤ rhs(1 + REL_TOL) + ABS_TOL`, or `lhs < rhs` when strict.
pub fn holds(log_lhs: f64, log_rhs: f64, strict: bool) -> bool {
    holds_with(log_lhs, log_rhs, strict, REL_TOL, ABS_TOL)
}

/// [`holds`] with explicit slacks.
pub fn holds_with(log_lhs: f64, log_rhs: f64, strict: bool, rel: f64, abs: f64) -> bool {
    if log_lhs.is_nan() || log_rhs.is_nan() {
        return false;
    }
    if strict {
        return log_lhs < log_rhs;
    }
    if log_lhs == f64::NEG_INFINITY {
        return true;
    }
    match (representable(log_lhs), representable(log_rhs)) {
        (Some(l), Some(r)) => l <= r * (1.0 + rel) + abs,
        _ => log_lhs <= log_rhs + rel.ln_1p(),
    }
}

/// A sweep item that could not be evaluated.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    #[serde(rename = "case")]
    pub case_id: String,
    pub params: BTreeMap<String, ParamValue>,
    pub kind: String,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(case_id: impl Into<String>, params: BTreeMap<String, ParamValue>, err: &Error) -> Self {
        ErrorRecord {
            case_id: case_id.into(),
            params,
            kind: err.kind().into(),
            message: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepEntry {
    Verdict(VerdictRecord),
    Error(ErrorRecord),
}

impl SweepEntry {
    pub fn verdict(&self) -> Option<&VerdictRecord> {
        match self {
            SweepEntry::Verdict(v) => Some(v),
            SweepEntry::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<&ErrorRecord> {
        match self {
            SweepEntry::Error(e) => Some(e),
            SweepEntry::Verdict(_) => None,
        }
    }
}
