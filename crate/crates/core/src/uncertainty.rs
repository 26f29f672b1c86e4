//! Donoho-Stark principles derived from the mutual estimates, and local
//! uncertainty principles for the Fourier transform and for representations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bounds::{BoundEngine, BoundParams, CaseId, PreparedSignal, Representation, MU_FACTOR};
use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::grid::{GridSpec, PhaseSpaceField, SampledSignal, SignalKind};
use crate::norms::{
    log_dispersion, log_lp_reduce, log_weighted_lp_norm, log_weighted_set_measure, Exponent, MeasureKind, SetMask,
    WeightedNormParams,
};
use crate::report::{ErrorRecord, ParamValue, SweepEntry, VerdictRecord};
use crate::tfr::KernelSpec;
use crate::weights::WeightFunction;

/// Sharp constant `K′(N, α)` of the local uncertainty principle for the Fourier transform.
pub fn price_constant(n: u32, alpha: f64) -> Result<f64> {
    let d = n as f64;
    if n == 0 {
        return param("dimension must be positive");
    }
    if !(alpha > d / 2.0 && alpha.is_finite()) {
        return param(format!("alpha must exceed {} in dimension {n}, got {alpha}", d / 2.0));
    }
    let r = d / (2.0 * alpha);
    Ok(PI.powf(d / 2.0) / alpha / gamma(d / 2.0) * gamma(r) * gamma(1.0 - r) * (1.0 / r - 1.0).powf(r) / (1.0 - r))
}

/// Where a set lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetDomain {
    Time,
    Frequency,
    PhaseSpace,
}

/// A set description, turned into a [`SetMask`] on the grid of a case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SetSpec {
    Empty,
    Full,
    Interval(f64, f64),
    Rect { x: (f64, f64), xi: (f64, f64) },
    /// `{|F| > fraction · max|F|}`; `rep` names the field for phase-space sets.
    Level { rep: Option<String>, fraction: f64 },
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Empty => f.write_str("empty"),
            SetSpec::Full => f.write_str("full"),
            SetSpec::Interval(a, b) => write!(f, "rect:{a},{b}"),
            SetSpec::Rect { x, xi } => write!(f, "rect:{},{},{},{}", x.0, x.1, xi.0, xi.1),
            SetSpec::Level { rep: None, fraction } => write!(f, "level:{fraction}"),
            SetSpec::Level { rep: Some(r), fraction } => write!(f, "level:{r}:{fraction}"),
        }
    }
}

impl FromStr for SetSpec {
    type Err = Error;

    /// `empty`, `full`, `rect:a,b`, `rect:x0,x1,xi0,xi1`, `level:0.5`, `level:tau_wigner:0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("cannot parse set '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        match s.split_once(':') {
            None if s == "empty" => Ok(SetSpec::Empty),
            None if s == "full" => Ok(SetSpec::Full),
            Some(("rect", rest)) => {
                let v: Vec<f64> = rest.split(',').map(num).collect::<Result<_>>()?;
                match v[..] {
                    [a, b] => Ok(SetSpec::Interval(a, b)),
                    [a, b, c, d] => Ok(SetSpec::Rect { x: (a, b), xi: (c, d) }),
                    _ => Err(bad()),
                }
            }
            Some(("level", rest)) => {
                let (rep, frac) = match rest.rsplit_once(':') {
                    Some((r, f)) => (Some(r.to_string()), num(f)?),
                    None => (None, num(rest)?),
                };
                if !(0.0..1.0).contains(&frac) {
                    return param(format!("level fraction must lie in [0,1), got {frac}"));
                }
                Ok(SetSpec::Level { rep, fraction: frac })
            }
            _ => Err(bad()),
        }
    }
}

impl SetSpec {
    /// True when the set can be built in `domain`.
    pub fn fits(&self, domain: SetDomain) -> bool {
        match self {
            SetSpec::Empty | SetSpec::Full => true,
            SetSpec::Interval(..) => domain != SetDomain::PhaseSpace,
            SetSpec::Rect { .. } | SetSpec::Level { rep: Some(_), .. } => domain == SetDomain::PhaseSpace,
            SetSpec::Level { rep: None, .. } => true,
        }
    }

    /// Mask on the grid of `s`; level sets are taken of `|s|`.
    pub fn build_1d(&self, s: &SampledSignal) -> Result<SetMask> {
        let g = s.grid;
        match self {
            SetSpec::Empty => Ok(SetMask::empty_1d(g)),
            SetSpec::Full => Ok(SetMask::full_1d(g)),
            SetSpec::Interval(a, b) => SetMask::interval(g, *a, *b),
            SetSpec::Rect { .. } => param("a rectangle needs a phase-space domain"),
            SetSpec::Level { rep: Some(r), .. } => param(format!("level set of '{r}' needs a phase-space domain")),
            SetSpec::Level { rep: None, fraction } => {
                let thr = fraction * s.max_abs();
                Ok(SetMask {
                    xgrid: g,
                    xigrid: None,
                    coverage: s.values.iter().map(|v| f64::from(u8::from(v.norm() > thr))).collect(),
                })
            }
        }
    }

    /// Mask on `xgrid × xigrid`; level sets call `source` with the requested representation.
    pub fn build_2d(
        &self,
        xgrid: GridSpec,
        xigrid: GridSpec,
        source: impl FnOnce(Option<&str>) -> Result<Arc<PhaseSpaceField>>,
    ) -> Result<SetMask> {
        match self {
            SetSpec::Empty => Ok(SetMask::empty_2d(xgrid, xigrid)),
            SetSpec::Full => Ok(SetMask::full_2d(xgrid, xigrid)),
            SetSpec::Interval(..) => param("an interval needs a one-dimensional domain"),
            SetSpec::Rect { x, xi } => SetMask::rect(xgrid, xigrid, *x, *xi),
            SetSpec::Level { rep, fraction } => Ok(SetMask::superlevel(&*source(rep.as_deref())?, *fraction)),
        }
    }
}

/// Representation named in a level set.
pub fn named_representation(name: &str, window: &SignalKind, tau: f64, kernel: &KernelSpec) -> Result<Representation> {
    Ok(match name {
        "spectrogram" | "sp" => Representation::Spectrogram(window.clone()),
        "rihaczek" => Representation::Rihaczek,
        "tau_wigner" => Representation::TauWigner(tau),
        "wigner" => Representation::TauWigner(0.5),
        "born_jordan" => Representation::BornJordan,
        "cohen" => Representation::Cohen(kernel.clone()),
        _ => return param(format!("unknown representation '{name}'")),
    })
}

fn phase_space_set(
    engine: &BoundEngine,
    f: &PreparedSignal,
    set: &SetSpec,
    default_rep: &Representation,
    window: &SignalKind,
    tau: f64,
    kernel: &KernelSpec,
) -> Result<SetMask> {
    let g = f.grid();
    set.build_2d(g, g.dual(), |name| {
        let rep = match name {
            Some(n) => named_representation(n, window, tau, kernel)?,
            None => default_rep.clone(),
        };
        engine.field(f, &rep)
    })
}

fn log_measure(set: &SetMask) -> f64 {
    set.measure().ln()
}

/// `log ∫_E e^{κω}|s|²`.
fn log_weighted_energy(s: &SampledSignal, set: &SetMask, w: &WeightFunction, kappa: f64) -> Result<f64> {
    if !set.matches_signal(s) {
        return param("set and signal live on different grids");
    }
    Ok(log_lp_reduce(
        Exponent::Finite(1.0),
        s.grid.dx.ln(),
        s.len(),
        |i| {
            let lw = if kappa == 0.0 { 0.0 } else { kappa * w.eval2(s.grid.point(i), 0.0) };
            set.coverage[i].ln() + lw + 2.0 * s.values[i].norm().ln()
        },
        Exec::default(),
    ))
}

fn l2(w: &WeightFunction, lambda: f64) -> Result<WeightedNormParams> {
    WeightedNormParams::new(w.clone(), lambda, Exponent::Finite(2.0))
}

/// `(log ‖e^{λω}s‖₂, log ‖|t − c|^α e^{λω}s‖₂)` for a signal or a field.
fn norm_and_dispersion<'a>(
    obj: impl Into<crate::norms::Sampled<'a>> + Copy,
    center: (f64, f64),
    alpha: f64,
    w: &WeightFunction,
    lambda: f64,
) -> Result<(f64, f64)> {
    let p = l2(w, lambda)?;
    Ok((log_weighted_lp_norm(obj, &p), log_dispersion(obj, center, alpha, &p)))
}

/// `‖f‖₁ ≤ √K′ ‖f‖₂^{1−1/(2α)} ‖|t − t̄|^α f‖₂^{1/(2α)}`.
pub fn verify_sprice(f: &SampledSignal, alpha: f64, tbar: Option<f64>) -> Result<VerdictRecord> {
    let k = price_constant(1, alpha)?;
    let t = tbar.unwrap_or_else(|| f.energy_centroid());
    let (n, d) = norm_and_dispersion(f, (t, 0.0), alpha, &WeightFunction::log(), 0.0)?;
    let e = 1.0 / (2.0 * alpha);
    let log_c = 0.5 * k.ln();
    let lhs = f.l1_norm().ln();
    Ok(VerdictRecord::new("P42")
        .param("alpha", alpha)
        .param("tbar", t)
        .grid(f.grid)
        .norm("||f||_2", n)
        .norm("|| |t-tbar|^alpha f ||_2", d)
        .detail("price_constant", k)
        .compare(lhs, log_c, log_c + (1.0 - e) * n + e * d))
}

/// The two local uncertainty inequalities for `f` and `f̂`, both strict.
pub fn verify_price(
    f: &SampledSignal,
    set: &SetSpec,
    alpha: f64,
    tbar: Option<f64>,
    xibar: Option<f64>,
) -> Result<(VerdictRecord, VerdictRecord)> {
    if f.is_zero() {
        return param("the local uncertainty inequality needs a nonzero signal");
    }
    let hat = crate::grid::fourier_transform(f)?;
    let t = tbar.unwrap_or_else(|| f.energy_centroid());
    let xi = xibar.unwrap_or_else(|| hat.energy_centroid());
    let one = |id: &str, on: &SampledSignal, other: &SampledSignal, center: f64| -> Result<VerdictRecord> {
        let k = price_constant(1, alpha)?;
        let mask = set.build_1d(on)?;
        let (n, d) = norm_and_dispersion(other, (center, 0.0), alpha, &WeightFunction::log(), 0.0)?;
        if d == f64::NEG_INFINITY {
            return Err(Error::Numerical("zero dispersion of a nonzero signal".into()));
        }
        let lhs = log_weighted_energy(on, &mask, &WeightFunction::log(), 0.0)?;
        let log_c = k.ln() + log_measure(&mask);
        let rhs = log_c + (2.0 - 1.0 / alpha) * n + d / alpha;
        let mut rec = VerdictRecord::new(id)
            .param("alpha", alpha)
            .param("set", set.to_string())
            .param("center", center)
            .grid(f.grid)
            .norm("||h||_2", n)
            .norm("|| |t-c|^alpha h ||_2", d)
            .detail("price_constant", k)
            .detail("measure", mask.measure());
        // on a null set both sides vanish
        if mask.measure() > 0.0 {
            rec = rec.strict().detail("margin", 1.0 - (lhs - rhs).exp());
        }
        Ok(rec.compare(lhs, log_c, rhs))
    };
    Ok((one("T41_1", &hat, f, t)?, one("T41_2", f, &hat, xi)?))
}

/// Donoho-Stark cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DsCaseId {
    P32a,
    P32b,
    P36a,
    P36b,
    C39a,
    C39b,
}

impl DsCaseId {
    pub const ALL: [DsCaseId; 6] = [
        DsCaseId::P32a,
        DsCaseId::P32b,
        DsCaseId::P36a,
        DsCaseId::P36b,
        DsCaseId::C39a,
        DsCaseId::C39b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DsCaseId::P32a => "P32a",
            DsCaseId::P32b => "P32b",
            DsCaseId::P36a => "P36a",
            DsCaseId::P36b => "P36b",
            DsCaseId::C39a => "C39a",
            DsCaseId::C39b => "C39b",
        }
    }

    /// The estimate whose right-hand side normalises the concentration.
    pub fn parent(self) -> CaseId {
        match self {
            DsCaseId::P32a => CaseId::T31i,
            DsCaseId::P32b => CaseId::T31ii,
            DsCaseId::P36a => CaseId::T35i,
            DsCaseId::P36b => CaseId::T35ii,
            DsCaseId::C39a => CaseId::C38i,
            DsCaseId::C39b => CaseId::C38ii,
        }
    }

    /// Representation concentrated on `E`.
    pub fn concentrated(self, params: &BoundParams) -> Representation {
        match self {
            DsCaseId::P32a | DsCaseId::C39a => Representation::Spectrogram(params.window.clone()),
            DsCaseId::P32b | DsCaseId::P36b => Representation::Rihaczek,
            DsCaseId::P36a | DsCaseId::C39b => Representation::TauWigner(params.tau),
        }
    }
}

impl fmt::Display for DsCaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DsCaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DsCaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown Donoho-Stark case '{s}'")))
    }
}

/// Checks `m(E) ≥ ρ`, with `ρ` the weighted content of the representation on
/// `E` divided by the full right-hand side of the parent estimate.
pub fn verify_donoho_stark(
    engine: &BoundEngine,
    case: DsCaseId,
    params: &BoundParams,
    f: &PreparedSignal,
    set: &SetSpec,
) -> Result<VerdictRecord> {
    let parent = engine.verify(case.parent(), params, f)?;
    let rep = case.concentrated(params);
    let mask = phase_space_set(engine, f, set, &rep, &params.window, params.tau, &params.kernel)?;
    let profile = engine.profile(f, &rep, &params.weight)?;
    // the squared estimate bounds the square of the sup
    let half = if case.parent().squared() { 0.5 } else { 1.0 };
    let log_bound = half * parent.log_rhs;
    let log_content = profile.log_integral_over(params.lambda, &mask)?;
    let log_rho = log_content - log_bound;
    let log_m = log_measure(&mask);
    let log_cap = log_m + profile.log_sup_over(params.lambda, &mask)? - log_bound;
    if log_rho > log_cap + 1e-9 {
        return Err(Error::Numerical(format!(
            "{case}: concentration {log_rho} exceeds measure times sup {log_cap}"
        )));
    }
    let mut rec = VerdictRecord::new(case.name())
        .grid(engine.grid())
        .conventions(engine.conventions())
        .param("set", set.to_string())
        .norm("content", log_content)
        .norm("parent_rhs", log_bound)
        .detail("rho", log_rho.exp())
        .detail("epsilon", 1.0 - log_rho.exp())
        .detail("measure", mask.measure())
        .detail("parent_log_ratio", parent.log_ratio());
    for (k, v) in parent.params {
        rec.params.entry(k).or_insert(v);
    }
    Ok(rec.compare(log_rho, half * parent.log_constant, log_m))
}

/// Local uncertainty cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum LocalUpCase {
    T41_1,
    T41_2,
    P42,
    P43i,
    P43ii,
    P44i,
    P44ii,
    P44iii,
    P45i,
    P45ii,
    P46i,
    P46ii,
}

impl LocalUpCase {
    pub const ALL: [LocalUpCase; 12] = [
        LocalUpCase::T41_1,
        LocalUpCase::T41_2,
        LocalUpCase::P42,
        LocalUpCase::P43i,
        LocalUpCase::P43ii,
        LocalUpCase::P44i,
        LocalUpCase::P44ii,
        LocalUpCase::P44iii,
        LocalUpCase::P45i,
        LocalUpCase::P45ii,
        LocalUpCase::P46i,
        LocalUpCase::P46ii,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LocalUpCase::T41_1 => "T41_1",
            LocalUpCase::T41_2 => "T41_2",
            LocalUpCase::P42 => "P42",
            LocalUpCase::P43i => "P43i",
            LocalUpCase::P43ii => "P43ii",
            LocalUpCase::P44i => "P44i",
            LocalUpCase::P44ii => "P44ii",
            LocalUpCase::P44iii => "P44iii",
            LocalUpCase::P45i => "P45i",
            LocalUpCase::P45ii => "P45ii",
            LocalUpCase::P46i => "P46i",
            LocalUpCase::P46ii => "P46ii",
        }
    }

    /// α must exceed this.
    pub fn alpha_threshold(self) -> f64 {
        match self {
            LocalUpCase::P43i | LocalUpCase::P43ii | LocalUpCase::P45i | LocalUpCase::P46i => 1.0,
            _ => 0.5,
        }
    }

    pub fn default_alpha(self) -> f64 {
        if self.alpha_threshold() >= 1.0 {
            1.5
        } else {
            1.0
        }
    }

    /// μ′ must exceed this, for the cases that take a μ′.
    pub fn mu_prime_threshold(self, w: &WeightFunction) -> Option<f64> {
        let (k, b) = (w.k(), w.b());
        match self {
            LocalUpCase::P43i | LocalUpCase::P43ii => Some(1.0 / b),
            LocalUpCase::P45i | LocalUpCase::P46i => Some(2.0 / b),
            LocalUpCase::P45ii | LocalUpCase::P46ii => Some(2.0 / b * (k * k + 2.0)),
            _ => None,
        }
    }

    pub fn domain(self) -> Option<SetDomain> {
        match self {
            LocalUpCase::T41_1 | LocalUpCase::P43i | LocalUpCase::P45i | LocalUpCase::P46i => Some(SetDomain::Frequency),
            LocalUpCase::T41_2 | LocalUpCase::P43ii => Some(SetDomain::Time),
            LocalUpCase::P42 => None,
            _ => Some(SetDomain::PhaseSpace),
        }
    }

    pub fn default_kernel(self) -> KernelSpec {
        match self {
            LocalUpCase::P46i => KernelSpec::DiracPlusGaussian { a: 1.0, c: 0.25, d: 0.25 },
            _ => KernelSpec::Gaussian { c: 1.0, d: 1.0 },
        }
    }
}

impl fmt::Display for LocalUpCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LocalUpCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LocalUpCase::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown local uncertainty case '{s}'")))
    }
}

/// Parameters of a local uncertainty check; `None` fields take the case default.
#[derive(Clone, Debug)]
pub struct LocalUpParams {
    pub weight: WeightFunction,
    pub lambda: f64,
    pub mu: f64,
    pub mu_prime: Option<f64>,
    pub alpha: Option<f64>,
    pub tau: f64,
    pub window: SignalKind,
    pub kernel: Option<KernelSpec>,
    /// `(x̄, ξ̄)`; energy centroids when absent.
    pub center: Option<(f64, f64)>,
}

impl LocalUpParams {
    pub fn new(weight: WeightFunction) -> Self {
        LocalUpParams {
            weight,
            lambda: 0.0,
            mu: 0.0,
            mu_prime: None,
            alpha: None,
            tau: 0.5,
            window: SignalKind::unit_gaussian(),
            kernel: None,
            center: None,
        }
    }
}

/// Checks the local uncertainty inequality of `case` on `f` and the set `set`.
pub fn verify_local_up(
    engine: &BoundEngine,
    case: LocalUpCase,
    params: &LocalUpParams,
    f: &PreparedSignal,
    set: &SetSpec,
) -> Result<VerdictRecord> {
    let w = &params.weight;
    let (k, lam, mu) = (w.k(), params.lambda, params.mu);
    if !(lam >= 0.0 && mu >= 0.0 && lam.is_finite() && mu.is_finite()) {
        return param("lambda and mu must be finite and >= 0");
    }
    if !(params.tau > 0.0 && params.tau < 1.0) {
        return param(format!("tau must lie in (0,1), got {}", params.tau));
    }
    let alpha = params.alpha.unwrap_or(case.default_alpha());
    if !(alpha > case.alpha_threshold()) {
        return Err(Error::Infeasible {
            name: "alpha".into(),
            value: alpha,
            threshold: case.alpha_threshold(),
        });
    }
    let mu_p = match (case.mu_prime_threshold(w), params.mu_prime) {
        (None, _) => 0.0,
        (Some(t), None) => MU_FACTOR * t,
        (Some(t), Some(v)) if v > t && v.is_finite() => v,
        (Some(t), Some(v)) => {
            return Err(Error::Infeasible {
                name: "mu_prime".into(),
                value: v,
                threshold: t,
            })
        }
    };
    let kernel = params.kernel.clone().unwrap_or(case.default_kernel());
    let log_k1 = price_constant(1, alpha)?.ln();
    let log_k2 = || Ok::<f64, Error>(price_constant(2, alpha)?.ln());
    let ln2pi = (2.0 * PI).ln();
    let g = engine.window(&params.window)?;
    let (sig, hat) = (&f.signal, &f.hat);
    let center = params.center;
    let t_c = center.map_or_else(|| sig.energy_centroid(), |c| c.0);
    let xi_c = center.map_or_else(|| hat.energy_centroid(), |c| c.1);
    let fields_center = |field: &PhaseSpaceField| center.unwrap_or_else(|| field.energy_centroid());

    let mut rec = VerdictRecord::new(case.name())
        .grid(engine.grid())
        .conventions(engine.conventions())
        .param("signal", f.label.clone())
        .param("omega", w.name())
        .param("lambda", lam)
        .param("mu", mu)
        .param("alpha", alpha)
        .param("set", set.to_string());
    if case.mu_prime_threshold(w).is_some() {
        rec = rec.param("mu_prime", mu_p);
    }

    // energy of f̂ (or f) on a line set, weighted by e^{2λω}
    let line_lhs = |on: &SampledSignal| -> Result<(SetMask, f64)> {
        let mask = set.build_1d(on)?;
        let lhs = log_weighted_energy(on, &mask, w, 2.0 * lam)?;
        Ok((mask, lhs))
    };
    // [e^{K(λ+μ)} ‖e^{K(λ+μ)ω} h‖_∞ / (2π‖g‖²)]² ‖e^{-μ′ω}‖_{L^q(ℝ²)}²
    let line_constant = |window_hat: bool, q: f64| -> Result<f64> {
        let nu = k * (lam + mu);
        Ok(2.0 * (nu + g.log_sup(w, nu, window_hat)? - ln2pi - 2.0 * g.log_l2)
            + 2.0 * w.log_neg_exp_norm(mu_p, Some(q), 2)?)
    };
    // norm^{1−1/α} dispersion^{1/α} of a phase-space field
    let field_terms = |rep: &Representation, nu: f64| -> Result<f64> {
        let field = engine.field(f, rep)?;
        let (n, d) = norm_and_dispersion(&*field, fields_center(&field), alpha, w, nu)?;
        Ok((1.0 - 1.0 / alpha) * n + d / alpha)
    };
    // the f and f̂ norm product of the phase-space cases
    let signal_pair_terms = |nu: f64| -> Result<f64> {
        let (nf, df) = norm_and_dispersion(sig, (t_c, 0.0), alpha, w, nu)?;
        let (nh, dh) = norm_and_dispersion(hat, (xi_c, 0.0), alpha, w, nu)?;
        let e = 1.0 / (2.0 * alpha);
        Ok((1.0 - e) * (nf + nh) + e * (df + dh))
    };
    // e^{Kν} e^{2K²ν} (2π)^{-1} ‖e^{K²ν ω} g‖_∞ ‖e^{K²ν ω} ĝ‖_∞
    let spectrogram_constant = |nu: f64| -> Result<f64> {
        let k2nu = k * k * nu;
        Ok(k * nu + 2.0 * k2nu - ln2pi + g.log_sup(w, k2nu, false)? + g.log_sup(w, k2nu, true)?)
    };
    let plane = |rep: &Representation| -> Result<(SetMask, f64)> {
        let mask = phase_space_set(engine, f, set, rep, &params.window, params.tau, &kernel)?;
        let lhs = engine.profile(f, rep, w)?.log_integral_over(lam, &mask)?;
        Ok((mask, lhs))
    };
    let sp = Representation::Spectrogram(params.window.clone());

    let (lhs, log_c, rhs) = match case {
        LocalUpCase::T41_1 | LocalUpCase::T41_2 => {
            let (a, b) = verify_price(sig, set, alpha, Some(t_c), Some(xi_c))?;
            let mut v = if case == LocalUpCase::T41_1 { a } else { b };
            v.params.insert("signal".into(), ParamValue::from(f.label.clone()));
            return Ok(v);
        }
        LocalUpCase::P42 => {
            let mut v = verify_sprice(sig, alpha, Some(t_c))?;
            v.params.insert("signal".into(), ParamValue::from(f.label.clone()));
            return Ok(v);
        }
        LocalUpCase::P43i | LocalUpCase::P43ii => {
            let on_hat = case == LocalUpCase::P43i;
            let (mask, lhs) = line_lhs(if on_hat { hat } else { sig })?;
            let nu = 2.0 * (k * (lam + mu) + mu_p);
            let c = line_constant(on_hat, 2.0)? + 0.5 * log_k2()?;
            let m = log_weighted_set_measure(MeasureKind::D, &mask, w, mu, lam)?;
            rec = rec.detail("weighted_measure", m.exp());
            (lhs, c, c + m + field_terms(&sp, nu)?)
        }
        LocalUpCase::P44i => {
            let (mask, lhs) = plane(&sp)?;
            let nu = k * k * (lam + mu);
            let c = spectrogram_constant(lam + mu)? + log_k1;
            let m = log_weighted_set_measure(MeasureKind::DPrime, &mask, w, mu, lam)?;
            rec = rec.detail("weighted_measure", m.exp());
            (lhs, c, c + m + signal_pair_terms(nu)?)
        }
        LocalUpCase::P44ii | LocalUpCase::P44iii => {
            let (mask, lhs) = plane(&sp)?;
            let nu = k / 2.0 * (k * lam + mu);
            let time = case == LocalUpCase::P44ii;
            let scale = if time { 0.0 } else { -2.0 * ln2pi };
            let c = scale + k * lam + k * (k * lam + mu) + 2.0 * g.log_sup(w, nu, !time)? + log_k1;
            let kind = if time { MeasureKind::M } else { MeasureKind::MPrime };
            let m = log_weighted_set_measure(kind, &mask, w, mu, lam)?;
            let (s, cen) = if time { (sig, t_c) } else { (hat, xi_c) };
            let (n, d) = norm_and_dispersion(s, (cen, 0.0), alpha, w, nu)?;
            rec = rec.detail("weighted_measure", m.exp());
            (lhs, c, c + m + (2.0 - 1.0 / alpha) * n + d / alpha)
        }
        LocalUpCase::P45i | LocalUpCase::P46i => {
            let (mask, lhs) = line_lhs(hat)?;
            let l1 = 2.0 * (k * (lam + mu) + mu_p);
            let (factor, rep) = if case == LocalUpCase::P45i {
                let wig = engine.window_wigner(&params.window, params.tau, w)?;
                (
                    engine.conventions().c_spwig.ln() + k * l1 + wig.log_norm(k * l1, Exponent::Infinity),
                    Representation::TauWigner(params.tau),
                )
            } else {
                let den = engine.kernel(&kernel)?;
                rec = rec.param("kernel", kernel.to_string()).detail("min_abs_multiplier", den.min_abs_multiplier);
                let q = engine.spectrogram_quotient(&params.window, &kernel, w)?;
                (k * l1 + q.log_norm(k * l1, Exponent::Infinity), Representation::Cohen(kernel.clone()))
            };
            let c = line_constant(true, 1.0)? + factor + 0.5 * log_k2()?;
            let m = log_weighted_set_measure(MeasureKind::D, &mask, w, mu, lam)?;
            rec = rec.detail("weighted_measure", m.exp());
            (lhs, c, c + m + field_terms(&rep, k * l1)?)
        }
        LocalUpCase::P45ii | LocalUpCase::P46ii => {
            let wig_case = case == LocalUpCase::P45ii;
            let rep = if wig_case {
                Representation::TauWigner(params.tau)
            } else {
                rec = rec.param("kernel", kernel.to_string());
                Representation::Cohen(kernel.clone())
            };
            let (mask, lhs) = plane(&rep)?;
            let mut inner = BoundParams::new(w.clone());
            inner.lambda = lam + mu;
            inner.mu = Some(mu_p);
            inner.p = Exponent::Infinity;
            inner.tau = params.tau;
            inner.window = params.window.clone();
            inner.kernel = kernel.clone();
            let (parent, nu2) = if wig_case {
                (CaseId::C38ii, 8.0 * k.powi(4) * (lam + mu) + mu_p)
            } else {
                (CaseId::C310iii, 8.0 * k.powi(5) * (lam + mu) + mu_p)
            };
            let d = engine.constant(parent, &inner)?.log;
            if !d.is_finite() {
                return Err(Error::Kernel(format!("weighted L1 norm of {kernel} is not finite")));
            }
            let c = d + spectrogram_constant(nu2)? + log_k1;
            let m = log_weighted_set_measure(MeasureKind::DPrime, &mask, w, mu, lam)?;
            rec = rec.detail("weighted_measure", m.exp());
            (lhs, c, c + m + signal_pair_terms(k * k * nu2)?)
        }
    };
    Ok(rec.compare(lhs, log_c, rhs))
}

/// Sets used by the Donoho-Stark and local uncertainty batteries.
pub fn battery_sets(domain: SetDomain) -> Vec<SetSpec> {
    match domain {
        SetDomain::PhaseSpace => vec![
            SetSpec::Empty,
            SetSpec::Rect { x: (-2.0, 2.0), xi: (-2.0, 2.0) },
            SetSpec::Rect { x: (-0.5, 1.5), xi: (-1.0, 0.25) },
            SetSpec::Level { rep: None, fraction: 0.5 },
            SetSpec::Level { rep: None, fraction: 0.05 },
        ],
        _ => vec![
            SetSpec::Empty,
            SetSpec::Interval(-2.0, 2.0),
            SetSpec::Interval(-0.3, 1.1),
            SetSpec::Level { rep: None, fraction: 0.5 },
        ],
    }
}

fn sweep_error(case: &str, label: &str, set: &SetSpec, err: &Error) -> SweepEntry {
    let mut params = std::collections::BTreeMap::new();
    params.insert("signal".into(), ParamValue::from(label.to_string()));
    params.insert("set".into(), ParamValue::from(set.to_string()));
    SweepEntry::Error(ErrorRecord::new(case, params, err))
}

/// A Donoho-Stark sweep: every case over signals × weights × λ × p × sets.
#[derive(Clone, Debug)]
pub struct DsSweep {
    pub cases: Vec<DsCaseId>,
    pub signals: Vec<SignalKind>,
    pub weights: Vec<WeightFunction>,
    pub lambdas: Vec<f64>,
    pub ps: Vec<Exponent>,
    pub sets: Vec<SetSpec>,
    /// Supplies τ, μ, the window and the kernels.
    pub base: BoundParams,
}

impl DsSweep {
    pub fn default_battery() -> Self {
        DsSweep {
            cases: DsCaseId::ALL.to_vec(),
            signals: crate::bounds::default_signals(),
            weights: battery_weights(),
            lambdas: vec![0.0, 0.5],
            ps: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity],
            sets: battery_sets(SetDomain::PhaseSpace),
            base: BoundParams::new(WeightFunction::log()),
        }
    }
}

/// A local uncertainty sweep: every case over signals × weights × (λ, μ) × sets.
/// Each case keeps only the sets that live in its domain.
#[derive(Clone, Debug)]
pub struct LocalUpSweep {
    pub cases: Vec<LocalUpCase>,
    pub signals: Vec<SignalKind>,
    pub weights: Vec<WeightFunction>,
    pub lambda_mu: Vec<(f64, f64)>,
    /// Battery sets of each case's domain when absent.
    pub sets: Option<Vec<SetSpec>>,
    /// Supplies μ′, α, τ, the window, the kernel and the center.
    pub base: LocalUpParams,
}

impl LocalUpSweep {
    pub fn default_battery() -> Self {
        LocalUpSweep {
            cases: LocalUpCase::ALL.to_vec(),
            signals: crate::bounds::default_signals(),
            weights: battery_weights(),
            lambda_mu: vec![(0.0, 0.0), (0.5, 0.0), (0.5, 0.5)],
            sets: None,
            base: LocalUpParams::new(WeightFunction::log()),
        }
    }

    fn sets_for(&self, case: LocalUpCase) -> Vec<SetSpec> {
        match (case.domain(), &self.sets) {
            (None, _) => vec![SetSpec::Full],
            (Some(d), None) => battery_sets(d),
            (Some(d), Some(sets)) => sets.iter().filter(|s| s.fits(d)).cloned().collect(),
        }
    }
}

fn battery_weights() -> Vec<WeightFunction> {
    vec![WeightFunction::log(), WeightFunction::power(0.5).expect("valid exponent")]
}

/// Prepares each signal and evaluates its jobs through the engine's executor.
fn run_per_signal<J: Sync>(
    engine: &BoundEngine,
    signals: &[SignalKind],
    jobs: &[J],
    run: impl Fn(&PreparedSignal, &J) -> Result<VerdictRecord> + Sync,
    describe: impl Fn(&J) -> (String, SetSpec) + Sync,
) -> Vec<SweepEntry> {
    let mut out = Vec::new();
    for kind in signals {
        let label = kind.to_string();
        let entry = |job: &J, r: Result<VerdictRecord>| match r {
            Ok(v) => SweepEntry::Verdict(v),
            Err(e) => {
                let (case, set) = describe(job);
                sweep_error(&case, &label, &set, &e)
            }
        };
        match engine.prepare_kind(kind) {
            Ok(f) => out.extend(engine.exec().map(jobs, |job| entry(job, run(&f, job)))),
            Err(e) => out.extend(jobs.iter().map(|job| entry(job, Err(e.clone())))),
        }
    }
    out
}

/// Runs a Donoho-Stark sweep; failures become error records.
pub fn donoho_stark_sweep(engine: &BoundEngine, spec: &DsSweep) -> Vec<SweepEntry> {
    let mut jobs = Vec::new();
    for &case in &spec.cases {
        for w in &spec.weights {
            for &lambda in &spec.lambdas {
                for &p in &spec.ps {
                    let mut params = spec.base.clone();
                    params.weight = w.clone();
                    params.lambda = lambda;
                    params.p = p;
                    for set in &spec.sets {
                        jobs.push((case, params.clone(), set.clone()));
                    }
                }
            }
        }
    }
    run_per_signal(
        engine,
        &spec.signals,
        &jobs,
        |f, (case, params, set)| verify_donoho_stark(engine, *case, params, f, set),
        |(case, _, set)| (case.name().to_string(), set.clone()),
    )
}

/// Runs a local uncertainty sweep; failures become error records.
pub fn local_up_sweep(engine: &BoundEngine, spec: &LocalUpSweep) -> Vec<SweepEntry> {
    let mut jobs = Vec::new();
    for &case in &spec.cases {
        let sets = spec.sets_for(case);
        for w in &spec.weights {
            for &(lambda, mu) in &spec.lambda_mu {
                let mut params = spec.base.clone();
                params.weight = w.clone();
                params.lambda = lambda;
                params.mu = mu;
                for set in &sets {
                    jobs.push((case, params.clone(), set.clone()));
                }
            }
        }
    }
    run_per_signal(
        engine,
        &spec.signals,
        &jobs,
        |f, (case, params, set)| verify_local_up(engine, *case, params, f, set),
        |(case, _, set)| (case.name().to_string(), set.clone()),
    )
}

/// The default Donoho-Stark battery over `signals`.
pub fn donoho_stark_battery(engine: &BoundEngine, signals: &[SignalKind]) -> Vec<SweepEntry> {
    let spec = DsSweep {
        signals: signals.to_vec(),
        ..DsSweep::default_battery()
    };
    donoho_stark_sweep(engine, &spec)
}

/// The default local uncertainty battery over `signals`.
pub fn local_up_battery(engine: &BoundEngine, signals: &[SignalKind]) -> Vec<SweepEntry> {
    let spec = LocalUpSweep {
        signals: signals.to_vec(),
        ..LocalUpSweep::default_battery()
    };
    local_up_sweep(engine, &spec)
}
