//! Explicit constants of the mutual estimates between representations, their
//! verification on sampled signals, and the two-Gaussian scan showing why the
//! Rihaczek-by-Wigner estimate needs a weight.
//!
//! Every constant is assembled as a logarithm. Norms of window- and
//! kernel-derived fields are cached per engine, norms of signal-derived fields
//! per [`PreparedSignal`].

use std::borrow::Borrow;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::grid::{fourier_transform, make_signal, GridSpec, PhaseSpaceField, SampledSignal, SignalKind};
use crate::norms::{log_weighted_lp_norm, Exponent, WeightedNormParams, WeightedProfile};
use crate::report::{holds, ErrorRecord, ParamValue, SweepEntry, VerdictRecord};
use crate::tfr::{
    born_jordan_with, cohen_filter, rihaczek, spectrogram_with, tau_wigner_with, CohenKernel, ConventionRegistry,
    KernelSpec, TauWignerRows, BJ_NODES,
};
use crate::weights::WeightFunction;

/// Default μ is this multiple of the feasibility threshold.
pub const MU_FACTOR: f64 = 1.1;
/// Smallest admissible `min |σ̂₂|` for a quotient kernel.
pub const KERNEL_FLOOR: f64 = 1e-6;
/// Refinement used for every τ-Wigner evaluation.
const REFINE: usize = 4;

/// The mutual estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    /// Spectrogram by Rihaczek forms of signal and window.
    T31i,
    /// Rihaczek by spectrogram.
    T31ii,
    /// τ-Wigner by Rihaczek (squared).
    T35i,
    /// Rihaczek by τ-Wigner.
    T35ii,
    /// Spectrogram by τ-Wigner.
    C38i,
    /// τ-Wigner by spectrogram.
    C38ii,
    /// Born-Jordan by Rihaczek (squared).
    R311BJ,
    /// Born-Jordan by spectrogram.
    R311BJSp,
    /// Cohen class by Wigner.
    C310i,
    /// Cohen class by Rihaczek (squared).
    C310ii,
    /// Cohen class by spectrogram.
    C310iii,
    /// Cohen class by Cohen class.
    T312,
}

impl CaseId {
    /// The default battery.
    pub const BATTERY: [CaseId; 11] = [
        CaseId::T31i,
        CaseId::T31ii,
        CaseId::T35i,
        CaseId::T35ii,
        CaseId::C38i,
        CaseId::C38ii,
        CaseId::R311BJ,
        CaseId::C310i,
        CaseId::C310ii,
        CaseId::C310iii,
        CaseId::T312,
    ];

    pub const ALL: [CaseId; 12] = [
        CaseId::T31i,
        CaseId::T31ii,
        CaseId::T35i,
        CaseId::T35ii,
        CaseId::C38i,
        CaseId::C38ii,
        CaseId::R311BJ,
        CaseId::R311BJSp,
        CaseId::C310i,
        CaseId::C310ii,
        CaseId::C310iii,
        CaseId::T312,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::T31i => "T31i",
            CaseId::T31ii => "T31ii",
            CaseId::T35i => "T35i",
            CaseId::T35ii => "T35ii",
            CaseId::C38i => "C38i",
            CaseId::C38ii => "C38ii",
            CaseId::R311BJ => "R311BJ",
            CaseId::R311BJSp => "R311BJSp",
            CaseId::C310i => "C310i",
            CaseId::C310ii => "C310ii",
            CaseId::C310iii => "C310iii",
            CaseId::T312 => "T312",
        }
    }

    pub fn uses_tau(self) -> bool {
        matches!(self, CaseId::T35i | CaseId::T35ii | CaseId::C38i | CaseId::C38ii)
    }

    pub fn uses_window(self) -> bool {
        matches!(
            self,
            CaseId::T31i | CaseId::T31ii | CaseId::C38i | CaseId::C38ii | CaseId::R311BJSp | CaseId::C310iii
        )
    }

    /// True when the left-hand side is a squared sup norm.
    pub fn squared(self) -> bool {
        matches!(self, CaseId::T35i | CaseId::R311BJ | CaseId::C310ii)
    }

    /// Lower bound μ must exceed, for the cases that take a μ.
    pub fn mu_threshold(self, w: &WeightFunction, p: Exponent) -> Option<f64> {
        let dc = p.double_conjugate().value();
        let (k, b) = (w.k(), w.b());
        match self {
            CaseId::T31ii | CaseId::T35ii => Some(2.0 / (b * dc)),
            CaseId::C38ii | CaseId::R311BJSp | CaseId::C310iii => Some(2.0 / b * (k * k + 2.0 / dc)),
            _ => None,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown bound case '{s}'")))
    }
}

/// Finite search sets replacing the infima in the constants of the
/// Rihaczek-by-τ-Wigner and τ-Wigner-by-spectrogram estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchSet {
    /// Widths of the Gaussian windows tried.
    pub window_widths: Vec<f64>,
    /// Interior points of the feasible (μ′, μ″) segment.
    pub segment_points: usize,
}

impl Default for SearchSet {
    fn default() -> Self {
        SearchSet {
            window_widths: (-4..=4).map(|k| 2f64.powf(k as f64 / 2.0)).collect(),
            segment_points: 11,
        }
    }
}

/// Parameters of one bound check.
#[derive(Clone, Debug)]
pub struct BoundParams {
    pub weight: WeightFunction,
    pub lambda: f64,
    /// `None` picks [`MU_FACTOR`] times the threshold.
    pub mu: Option<f64>,
    pub p: Exponent,
    pub tau: f64,
    pub window: SignalKind,
    /// σ for the Cohen-class-by-Wigner, -Rihaczek and -spectrogram cases.
    pub kernel: KernelSpec,
    /// σ₁ and σ₂ for the Cohen-by-Cohen case.
    pub kernel_num: KernelSpec,
    pub kernel_den: KernelSpec,
    pub search: SearchSet,
}

impl BoundParams {
    pub fn new(weight: WeightFunction) -> Self {
        BoundParams {
            weight,
            lambda: 0.0,
            mu: None,
            p: Exponent::Finite(2.0),
            tau: 0.5,
            window: SignalKind::unit_gaussian(),
            kernel: KernelSpec::Gaussian { c: 1.0, d: 1.0 },
            kernel_num: KernelSpec::WignerGaussian,
            kernel_den: KernelSpec::DiracPlusGaussian { a: 1.0, c: 0.25, d: 0.25 },
            search: SearchSet::default(),
        }
    }

    /// The μ used for `case`, after the feasibility gate.
    pub fn mu_for(&self, case: CaseId) -> Result<Option<f64>> {
        let Some(threshold) = case.mu_threshold(&self.weight, self.p) else {
            return Ok(None);
        };
        match self.mu {
            None => Ok(Some(MU_FACTOR * threshold)),
            Some(mu) if mu > threshold && mu.is_finite() => Ok(Some(mu)),
            Some(mu) => Err(Error::Infeasible {
                name: "mu".into(),
                value: mu,
                threshold,
            }),
        }
    }

    fn validate(&self, case: CaseId) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return param(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if case.uses_tau() && !(self.tau > 0.0 && self.tau < 1.0) {
            return param(format!("tau must lie in (0,1), got {}", self.tau));
        }
        Ok(())
    }

    /// Reproduction parameters for a report.
    pub fn record(&self, case: CaseId, signal: &str) -> std::collections::BTreeMap<String, ParamValue> {
        let mut m = std::collections::BTreeMap::new();
        m.insert("signal".into(), signal.into());
        m.insert("omega".into(), self.weight.name().into());
        m.insert("lambda".into(), self.lambda.into());
        m.insert("p".into(), self.p.to_string().into());
        if let Some(mu) = self.mu_for(case).ok().flatten().or(self.mu) {
            m.insert("mu".into(), mu.into());
        }
        if case.uses_tau() {
            m.insert("tau".into(), self.tau.into());
        }
        if case.uses_window() || case == CaseId::T35ii {
            m.insert("window".into(), self.window.to_string().into());
        }
        match case {
            CaseId::C310i | CaseId::C310ii | CaseId::C310iii => {
                m.insert("kernel".into(), self.kernel.to_string().into());
            }
            CaseId::T312 => {
                m.insert("kernel_num".into(), self.kernel_num.to_string().into());
                m.insert("kernel_den".into(), self.kernel_den.to_string().into());
            }
            _ => {}
        }
        m
    }
}

/// Which representation of a signal a norm is taken of.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Spectrogram(SignalKind),
    Rihaczek,
    TauWigner(f64),
    BornJordan,
    Cohen(KernelSpec),
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Spectrogram(g) => write!(f, "Sp[{g}]"),
            Representation::Rihaczek => f.write_str("R"),
            Representation::TauWigner(t) => write!(f, "Wig[{t}]"),
            Representation::BornJordan => f.write_str("BJ"),
            Representation::Cohen(k) => write!(f, "Q[{k}]"),
        }
    }
}

struct Memo<T>(Mutex<HashMap<String, Arc<T>>>);

impl<T> Memo<T> {
    fn new() -> Self {
        Memo(Mutex::new(HashMap::new()))
    }

    // the lock is not held while computing, so nested lookups cannot deadlock
    fn get_or_try(&self, key: &str, make: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
        if let Some(v) = self.0.lock().unwrap().get(key) {
            return Ok(Arc::clone(v));
        }
        let v = Arc::new(make()?);
        Ok(Arc::clone(self.0.lock().unwrap().entry(key.to_string()).or_insert(v)))
    }
}

/// A window with its transform and norm.
pub struct Window {
    pub signal: SampledSignal,
    pub hat: SampledSignal,
    pub log_l2: f64,
}

impl Window {
    fn new(kind: &SignalKind, grid: GridSpec) -> Result<Self> {
        let signal = make_signal(kind, grid)?;
        signal.check_resolved(&format!("window {kind}"))?;
        if signal.is_zero() {
            return param("window must be nonzero");
        }
        let hat = fourier_transform(&signal)?;
        let log_l2 = signal.l2_norm().ln();
        Ok(Window { signal, hat, log_l2 })
    }

    /// `log ‖e^{νω} g‖_∞` or, with `hat`, of `ĝ`.
    pub fn log_sup(&self, w: &WeightFunction, nu: f64, hat: bool) -> Result<f64> {
        let s = if hat { &self.hat } else { &self.signal };
        Ok(log_weighted_lp_norm(s, &WeightedNormParams::new(w.clone(), nu, Exponent::Infinity)?))
    }
}

/// A signal with its transform and lazily computed representation profiles.
pub struct PreparedSignal {
    pub label: String,
    pub signal: SampledSignal,
    pub hat: SampledSignal,
    fields: Memo<PhaseSpaceField>,
    profiles: Memo<WeightedProfile>,
}

impl PreparedSignal {
    pub fn grid(&self) -> GridSpec {
        self.signal.grid
    }
}

/// A logarithmic constant with the choices made while assembling it.
#[derive(Clone, Debug)]
pub struct Constant {
    pub log: f64,
    pub details: Vec<(&'static str, f64)>,
}

impl Constant {
    fn plain(log: f64) -> Self {
        Constant {
            log,
            details: Vec::new(),
        }
    }

    pub fn value(&self) -> f64 {
        self.log.exp()
    }
}

/// Evaluates constants and bound checks on one grid.
pub struct BoundEngine {
    grid: GridSpec,
    conventions: ConventionRegistry,
    exec: Exec,
    omega: Memo<Vec<f64>>,
    profiles: Memo<WeightedProfile>,
    kernels: Memo<CohenKernel>,
    windows: Memo<Window>,
}

fn ln_2pi() -> f64 {
    (2.0 * PI).ln()
}

impl BoundEngine {
    pub fn new(grid: GridSpec, conventions: &ConventionRegistry, exec: Exec) -> Result<Self> {
        grid.require_centered("bound checks")?;
        Ok(BoundEngine {
            grid,
            conventions: conventions.clone(),
            exec,
            omega: Memo::new(),
            profiles: Memo::new(),
            kernels: Memo::new(),
            windows: Memo::new(),
        })
    }

    /// Engine on the standard grid with the standard calibration.
    pub fn standard() -> Result<Self> {
        BoundEngine::new(GridSpec::standard(), ConventionRegistry::standard()?, Exec::default())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn conventions(&self) -> &ConventionRegistry {
        &self.conventions
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// `ω(|z|)` on the phase-space grid.
    pub fn omega(&self, w: &WeightFunction) -> Arc<Vec<f64>> {
        let (xg, xig) = (self.grid, self.grid.dual());
        let m = xig.m;
        self.omega
            .get_or_try(w.name(), || {
                Ok(self.exec.map_range(xg.m * m, |i| w.eval2(xg.point(i / m), xig.point(i % m))))
            })
            .expect("weight sampling cannot fail")
    }

    pub fn window(&self, kind: &SignalKind) -> Result<Arc<Window>> {
        self.windows.get_or_try(&kind.to_string(), || Window::new(kind, self.grid))
    }

    /// Kernel sampled for this grid; the Born-Jordan multiplier carries its calibration.
    pub fn kernel(&self, spec: &KernelSpec) -> Result<Arc<CohenKernel>> {
        self.kernels.get_or_try(&spec.to_string(), || {
            let k = CohenKernel::build(spec, self.grid, self.grid.dual())?;
            Ok(match spec {
                KernelSpec::BornJordan => k.scaled(self.conventions.c_bj_multiplier),
                _ => k,
            })
        })
    }

    fn cached_profile<B: Borrow<PhaseSpaceField>>(
        &self,
        memo: &Memo<WeightedProfile>,
        key: &str,
        w: &WeightFunction,
        make: impl FnOnce() -> Result<B>,
    ) -> Result<WeightedProfile> {
        let omega = self.omega(w);
        let base = memo.get_or_try(key, || {
            let field = make()?;
            WeightedProfile::new(field.borrow(), Arc::clone(&omega), self.exec)
        })?;
        base.reweighted(omega)
    }

    /// Profile of `Wig_{1−τ}(g̃)`.
    pub fn window_wigner(&self, window: &SignalKind, tau: f64, w: &WeightFunction) -> Result<WeightedProfile> {
        let key = format!("wig-window|{window}|{tau}");
        self.cached_profile(&self.profiles, &key, w, || {
            let g = self.window(window)?;
            tau_wigner_with(&g.signal.reflect()?, 1.0 - tau, REFINE, self.exec)
        })
    }

    /// Profile of the Rihaczek form of the window.
    pub fn window_rihaczek(&self, window: &SignalKind, w: &WeightFunction) -> Result<WeightedProfile> {
        let key = format!("rihaczek-window|{window}");
        self.cached_profile(&self.profiles, &key, w, || rihaczek(&self.window(window)?.signal))
    }

    /// Profile of the kernel σ itself.
    pub fn kernel_spatial(&self, spec: &KernelSpec, w: &WeightFunction) -> Result<WeightedProfile> {
        let key = format!("kernel|{spec}");
        self.cached_profile(&self.profiles, &key, w, || self.kernel(spec)?.spatial(self.exec))
    }

    /// Profile of `F⁻¹(σ̂₁/σ̂₂)`.
    pub fn kernel_quotient(&self, num: &KernelSpec, den: &KernelSpec, w: &WeightFunction) -> Result<WeightedProfile> {
        let key = format!("quotient|{num}|{den}");
        self.cached_profile(&self.profiles, &key, w, || {
            CohenKernel::quotient(&*self.kernel(num)?, &*self.kernel(den)?, KERNEL_FLOOR)?.spatial(self.exec)
        })
    }

    /// Profile of `F⁻¹(σ̂₁/σ̂)` where `σ₁ = c·Wig(g̃)` turns Wigner into spectrogram.
    pub fn spectrogram_quotient(&self, window: &SignalKind, den: &KernelSpec, w: &WeightFunction) -> Result<WeightedProfile> {
        let key = format!("sp-quotient|{window}|{den}");
        self.cached_profile(&self.profiles, &key, w, || {
            let g = self.window(window)?;
            let wig = tau_wigner_with(&g.signal.reflect()?, 0.5, REFINE, self.exec)?;
            let sigma = CohenKernel::from_field(format!("Wig[{window}~]"), &wig, self.exec).scaled(self.conventions.c_spwig);
            CohenKernel::quotient(&sigma, &*self.kernel(den)?, KERNEL_FLOOR)?.spatial(self.exec)
        })
    }

    /// Checks `f` against the grid and the resolution guards.
    pub fn prepare(&self, label: impl Into<String>, f: SampledSignal) -> Result<PreparedSignal> {
        let label = label.into();
        if f.grid != self.grid {
            return param(format!("signal {label} is not sampled on the engine grid"));
        }
        if !f.is_zero() {
            f.check_resolved(&label)?;
        }
        let hat = fourier_transform(&f)?;
        Ok(PreparedSignal {
            label,
            signal: f,
            hat,
            fields: Memo::new(),
            profiles: Memo::new(),
        })
    }

    pub fn prepare_kind(&self, kind: &SignalKind) -> Result<PreparedSignal> {
        self.prepare(kind.to_string(), make_signal(kind, self.grid)?)
    }

    /// The representation itself, computed once per signal.
    pub fn field(&self, f: &PreparedSignal, rep: &Representation) -> Result<Arc<PhaseSpaceField>> {
        f.fields.get_or_try(&rep.to_string(), || {
            let s = &f.signal;
            match rep {
                Representation::Spectrogram(g) => spectrogram_with(s, &self.window(g)?.signal, self.exec),
                Representation::Rihaczek => rihaczek(s),
                Representation::TauWigner(t) => tau_wigner_with(s, *t, REFINE, self.exec),
                Representation::BornJordan => born_jordan_with(s, BJ_NODES, self.exec),
                Representation::Cohen(k) => {
                    let wig = self.field(f, &Representation::TauWigner(0.5))?;
                    cohen_filter(&*self.kernel(k)?, &wig, self.exec)
                }
            }
        })
    }

    pub fn profile(&self, f: &PreparedSignal, rep: &Representation, w: &WeightFunction) -> Result<WeightedProfile> {
        self.cached_profile(&f.profiles, &rep.to_string(), w, || self.field(f, rep))
    }

    /// `log ‖e^{λω} rep(f)‖_p`.
    pub fn log_norm(
        &self,
        f: &PreparedSignal,
        rep: &Representation,
        w: &WeightFunction,
        lambda: f64,
        p: Exponent,
    ) -> Result<f64> {
        Ok(self.profile(f, rep, w)?.log_norm(lambda, p))
    }

    fn log_d2(&self, g: &Window, w: &WeightFunction, lambda: f64, mu: f64, p: Exponent) -> Result<f64> {
        let k = w.k();
        let nu = k * k * lambda;
        Ok(k * (1.0 + 2.0 * k) * lambda + g.log_sup(w, nu, false)? + g.log_sup(w, nu, true)?
            + 2.0 * w.log_neg_exp_norm(mu, p.double_conjugate().finite(), 2)?
            - 2.0 * ln_2pi()
            - 4.0 * g.log_l2)
    }

    /// The τ-Wigner-by-spectrogram constant without its `(τ − τ²)^{-1/2}` factor,
    /// minimised over the feasible `(μ′, μ″)` segment.
    fn log_d6_core(&self, g: &Window, params: &BoundParams, lambda: f64, mu: f64) -> Result<Constant> {
        let w = &params.weight;
        let (k, b) = (w.k(), w.b());
        let dc = params.p.double_conjugate();
        let lo = 1.0 / b;
        let hi = (mu / 2.0 - 2.0 / (b * dc.value())) / (k * k);
        if !(hi > lo) {
            return Err(Error::Infeasible {
                name: "mu".into(),
                value: mu,
                threshold: 2.0 / b * (k * k + 2.0 / dc.value()),
            });
        }
        let n = params.search.segment_points.max(1);
        let mut best: Option<(f64, f64)> = None;
        for i in 1..=n {
            let mu1 = lo + (hi - lo) * i as f64 / (n + 1) as f64;
            let mu2 = mu / 2.0 - k * k * mu1;
            let lam2 = 4.0 * k * k * lambda + mu1;
            let nu = k * k * lam2;
            let v = k * (1.0 + 2.0 * k) * lam2 + g.log_sup(w, nu, false)? + g.log_sup(w, nu, true)?
                + w.log_neg_exp_norm(mu1, Some(2.0), 2)?
                + 2.0 * w.log_neg_exp_norm(mu2, dc.finite(), 2)?;
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, mu1));
            }
        }
        let (v, mu1) = best.expect("segment is nonempty");
        let log = k / 2.0 * (1.0 + 2.0 * k) * lambda - 2.5 * ln_2pi() - 4.0 * g.log_l2 + v;
        Ok(Constant {
            log,
            details: vec![("mu_prime", mu1), ("mu_double_prime", mu / 2.0 - k * k * mu1)],
        })
    }

    /// The constant of `case`, as a logarithm.
    pub fn constant(&self, case: CaseId, params: &BoundParams) -> Result<Constant> {
        params.validate(case)?;
        let mu = params.mu_for(case)?;
        let w = &params.weight;
        let (k, lam, tau) = (w.k(), params.lambda, params.tau);
        let pc = params.p.conjugate();
        let ln_c = self.conventions.c_spwig.ln();
        let base = k * (1.0 + 2.0 * k) * lam;
        let mu_v = || mu.expect("case takes mu");
        Ok(match case {
            CaseId::T31i => Constant::plain(base - ln_2pi()),
            CaseId::T31ii => Constant::plain(self.log_d2(&*self.window(&params.window)?, w, lam, mu_v(), params.p)?),
            CaseId::T35i => Constant::plain(base - ln_2pi() - (tau - tau * tau).ln()),
            CaseId::T35ii => {
                let mu = mu_v();
                let c = 2.0 * k * (k * k * lam + mu);
                let mut best: Option<(f64, f64)> = None;
                for &s in &params.search.window_widths {
                    let kind = SignalKind::gaussian_width(s);
                    let g = match self.window(&kind) {
                        Ok(g) => g,
                        Err(Error::Aliasing { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    let v = self.log_d2(&g, w, lam, mu, params.p)?
                        + c
                        + self.window_wigner(&kind, tau, w)?.log_norm(c, Exponent::Finite(1.0));
                    if best.is_none_or(|(b, _)| v < b) {
                        best = Some((v, s));
                    }
                }
                let (v, s) = best.ok_or_else(|| Error::Numerical("no dictionary window is resolved".into()))?;
                Constant {
                    log: v + ln_c,
                    details: vec![("window_width", s)],
                }
            }
            CaseId::C38i => Constant::plain(
                ln_c + k * lam + self.window_wigner(&params.window, tau, w)?.log_norm(k * lam, pc),
            ),
            CaseId::C38ii => {
                let mut c = self.log_d6_core(&*self.window(&params.window)?, params, lam, mu_v())?;
                c.log -= 0.5 * (tau - tau * tau).ln();
                c
            }
            CaseId::R311BJ => Constant::plain((PI / 2.0).ln() + base),
            CaseId::R311BJSp => {
                let mut c = self.log_d6_core(&*self.window(&params.window)?, params, lam, mu_v())?;
                c.log += PI.ln();
                c
            }
            CaseId::C310i => Constant::plain(k * lam + self.kernel_spatial(&params.kernel, w)?.log_norm(k * lam, pc)),
            CaseId::C310ii => Constant::plain(
                (4.0 / (2.0 * PI)).ln()
                    + k * (2.0 + k + 2.0 * k * k) * lam
                    + 2.0 * self.kernel_spatial(&params.kernel, w)?.log_norm(k * lam, Exponent::Finite(1.0)),
            ),
            CaseId::C310iii => {
                let mut c = self.log_d6_core(&*self.window(&params.window)?, params, k * lam, mu_v())?;
                // τ = 1/2 in the τ-Wigner-by-spectrogram constant
                c.log += k * lam - 0.5 * 0.25f64.ln()
                    + self.kernel_spatial(&params.kernel, w)?.log_norm(k * lam, Exponent::Finite(1.0));
                c
            }
            CaseId::T312 => {
                let den = self.kernel(&params.kernel_den)?;
                if !(den.min_abs_multiplier > KERNEL_FLOOR) {
                    return Err(Error::Kernel(format!(
                        "multiplier of {} comes within {:.3e} of zero",
                        den.name, den.min_abs_multiplier
                    )));
                }
                let mut c = Constant::plain(
                    k * lam + self.kernel_quotient(&params.kernel_num, &params.kernel_den, w)?.log_norm(k * lam, pc),
                );
                c.details.push(("min_abs_multiplier", den.min_abs_multiplier));
                c
            }
        })
    }

    /// Checks the estimate of `case` on `f`.
    pub fn verify(&self, case: CaseId, params: &BoundParams, f: &PreparedSignal) -> Result<VerdictRecord> {
        let constant = self.constant(case, params)?;
        let mu = params.mu_for(case)?;
        let w = &params.weight;
        let (k, lam, p) = (w.k(), params.lambda, params.p);
        let pc = p.conjugate();
        let inf = Exponent::Infinity;
        let sp = Representation::Spectrogram(params.window.clone());
        let wig_tau = Representation::TauWigner(params.tau);
        let wig = Representation::TauWigner(0.5);
        let q = Representation::Cohen(params.kernel.clone());
        let n = |rep: &Representation, l: f64, e: Exponent| -> Result<(String, f64)> {
            Ok((format!("{rep} lambda={l} p={e}"), self.log_norm(f, rep, w, l, e)?))
        };
        let mu_v = mu.unwrap_or(0.0);
        let (lhs_rep, norms) = match case {
            CaseId::T31i => {
                let l2 = 2.0 * k * k * lam;
                let rg = self.window_rihaczek(&params.window, w)?.log_norm(l2, pc);
                (sp.clone(), vec![n(&Representation::Rihaczek, l2, p)?, (format!("R[window] lambda={l2} p={pc}"), rg)])
            }
            CaseId::T31ii => (Representation::Rihaczek, vec![n(&sp, 2.0 * (k * k * lam + mu_v), p)?]),
            CaseId::T35i => {
                let l4 = 4.0 * k * k * lam;
                (wig_tau.clone(), vec![n(&Representation::Rihaczek, l4, p)?, n(&Representation::Rihaczek, l4, pc)?])
            }
            CaseId::T35ii => (Representation::Rihaczek, vec![n(&wig_tau, 2.0 * k * (k * k * lam + mu_v), p)?]),
            CaseId::C38i => (sp.clone(), vec![n(&wig_tau, k * lam, p)?]),
            CaseId::C38ii => (wig_tau.clone(), vec![n(&sp, 8.0 * k.powi(4) * lam + mu_v, p)?]),
            CaseId::R311BJ => {
                let l4 = 4.0 * k * k * lam;
                (Representation::BornJordan, vec![n(&Representation::Rihaczek, l4, p)?, n(&Representation::Rihaczek, l4, pc)?])
            }
            CaseId::R311BJSp => (Representation::BornJordan, vec![n(&sp, 8.0 * k.powi(4) * lam + mu_v, p)?]),
            CaseId::C310i => (q.clone(), vec![n(&wig, k * lam, p)?]),
            CaseId::C310ii => {
                let l4 = 4.0 * k.powi(3) * lam;
                (q.clone(), vec![n(&Representation::Rihaczek, l4, p)?, n(&Representation::Rihaczek, l4, pc)?])
            }
            CaseId::C310iii => (q.clone(), vec![n(&sp, 8.0 * k.powi(5) * lam + mu_v, p)?]),
            CaseId::T312 => (
                Representation::Cohen(params.kernel_num.clone()),
                vec![n(&Representation::Cohen(params.kernel_den.clone()), k * lam, p)?],
            ),
        };
        let sup = self.log_norm(f, &lhs_rep, w, lam, inf)?;
        let log_lhs = if case.squared() { 2.0 * sup } else { sup };
        let log_rhs = constant.log + norms.iter().map(|(_, v)| v).sum::<f64>();
        let mut rec = VerdictRecord::new(case.name())
            .grid(self.grid)
            .conventions(&self.conventions)
            .detail("K", k)
            .detail("b", w.b());
        rec.params = params.record(case, &f.label);
        if let Some(t) = case.mu_threshold(w, p) {
            rec = rec.detail("mu_threshold", t);
        }
        if case.squared() {
            rec = rec.detail("lhs_squared", 1.0);
        }
        for (name, v) in &constant.details {
            rec = rec.detail(name, *v);
        }
        for (name, v) in &norms {
            rec = rec.norm(name, *v);
        }
        Ok(rec.compare(log_lhs, constant.log, log_rhs))
    }

    /// Runs `spec` signal by signal; failures are returned as error records.
    pub fn sweep(&self, spec: &SweepSpec) -> Vec<SweepEntry> {
        let mut out = Vec::new();
        for kind in &spec.signals {
            let label = kind.to_string();
            let jobs: Vec<(CaseId, BoundParams)> = spec.jobs();
            let prepared = match self.prepare_kind(kind) {
                Ok(p) => p,
                Err(e) => {
                    out.extend(
                        jobs.iter()
                            .map(|(c, p)| SweepEntry::Error(ErrorRecord::new(c.name(), p.record(*c, &label), &e))),
                    );
                    continue;
                }
            };
            let run = |(c, p): &(CaseId, BoundParams)| match self.verify(*c, p, &prepared) {
                Ok(v) => SweepEntry::Verdict(v),
                Err(e) => SweepEntry::Error(ErrorRecord::new(c.name(), p.record(*c, &label), &e)),
            };
            // one sequential pass per (case, weight) fills the caches before the parallel pass
            let mut seen = std::collections::BTreeSet::new();
            let mut done: Vec<Option<SweepEntry>> = jobs
                .iter()
                .map(|job| seen.insert((job.0, job.1.weight.name().to_string())).then(|| run(job)))
                .collect();
            let rest: Vec<usize> = (0..jobs.len()).filter(|&i| done[i].is_none()).collect();
            let results = self.exec.map(&rest, |&i| run(&jobs[i]));
            for (i, r) in rest.into_iter().zip(results) {
                done[i] = Some(r);
            }
            out.extend(done.into_iter().map(|e| e.expect("every job ran")));
        }
        out
    }
}

/// `log ‖e^{λω} rep(f)‖_p` on a fresh engine for `f`'s grid.
pub fn verify_bound(case: CaseId, params: &BoundParams, f: &SampledSignal) -> Result<VerdictRecord> {
    let engine = BoundEngine::new(f.grid, ConventionRegistry::standard()?, Exec::default())?;
    let prepared = engine.prepare("signal", f.clone())?;
    engine.verify(case, params, &prepared)
}

/// The signals of the default battery.
pub fn default_signals() -> Vec<SignalKind> {
    ["gaussian", "hermite:1", "hermite:2", "gaussian:chirp=0.5", "gaussian:c=1.5,w=0.8,mod=2"]
        .iter()
        .map(|s| s.parse().expect("builtin signal"))
        .collect()
}

/// A Cartesian sweep over cases, signals, weights, λ and p.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub cases: Vec<CaseId>,
    pub signals: Vec<SignalKind>,
    pub weights: Vec<WeightFunction>,
    pub lambdas: Vec<f64>,
    pub ps: Vec<Exponent>,
    /// Supplies τ, μ, the window, the kernels and the search sets.
    pub base: BoundParams,
}

impl SweepSpec {
    pub fn default_battery() -> Self {
        SweepSpec {
            cases: CaseId::BATTERY.to_vec(),
            signals: default_signals(),
            weights: vec![WeightFunction::log(), WeightFunction::power(0.5).expect("valid exponent")],
            lambdas: vec![0.0, 0.5, 1.0],
            ps: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity],
            base: BoundParams::new(WeightFunction::log()),
        }
    }

    fn jobs(&self) -> Vec<(CaseId, BoundParams)> {
        let mut jobs = Vec::new();
        for &case in &self.cases {
            for w in &self.weights {
                for &lambda in &self.lambdas {
                    for &p in &self.ps {
                        let mut params = self.base.clone();
                        params.weight = w.clone();
                        params.lambda = lambda;
                        params.p = p;
                        jobs.push((case, params));
                    }
                }
            }
        }
        jobs
    }
}

/// Default battery on the standard engine.
pub fn battery_sweep(spec: &SweepSpec) -> Result<Vec<SweepEntry>> {
    Ok(BoundEngine::standard()?.sweep(spec))
}

/// Half width of the scan grid.
pub const SCAN_HALF_WIDTH: f64 = 128.0;
/// Sample count of the scan grid.
pub const SCAN_POINTS: usize = 8192;

/// One row of the two-Gaussian scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub s: f64,
    pub valid: bool,
    /// `‖f‖_∞‖f̂‖_∞ / ‖f‖₂²`.
    pub concentration: Option<f64>,
    /// `‖Rf‖_∞ / ‖Wig f‖_p`.
    pub unweighted_ratio: Option<f64>,
    /// `‖Rf‖_∞ / ‖e^{2Kμω} Wig f‖_p`.
    pub weighted_ratio: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub p: String,
    pub omega: String,
    pub mu: f64,
    /// Constant of the Rihaczek-by-Wigner estimate at λ = 0, τ = 1/2.
    pub bound: f64,
    pub grid: GridSpec,
    pub rows: Vec<ScanRow>,
    /// Concentration strictly increasing over the valid rows.
    pub growth: bool,
    /// Weighted ratio within the bound on every valid row.
    pub bounded: bool,
}

/// Streaming `log`-`ℓ^p` accumulator with a fixed push order.
#[derive(Clone, Copy)]
struct LogAcc {
    p: Exponent,
    top: f64,
    sum: f64,
}

impl LogAcc {
    fn new(p: Exponent) -> Self {
        LogAcc {
            p,
            top: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn push(&mut self, t: f64) {
        let v = match self.p {
            Exponent::Finite(p) => p * t,
            Exponent::Infinity => t,
        };
        if v == f64::NEG_INFINITY {
            return;
        }
        if let Exponent::Infinity = self.p {
            self.top = self.top.max(v);
        } else if v > self.top {
            self.sum = self.sum * (self.top - v).exp() + 1.0;
            self.top = v;
        } else {
            self.sum += (v - self.top).exp();
        }
    }

    fn merge(&mut self, o: &LogAcc) {
        if let Exponent::Infinity = self.p {
            self.top = self.top.max(o.top);
        } else if o.top > self.top {
            self.sum = self.sum * (self.top - o.top).exp() + o.sum;
            self.top = o.top;
        } else if o.top > f64::NEG_INFINITY {
            self.sum += o.sum * (o.top - self.top).exp();
        }
    }

    fn finish(&self, log_quad: f64) -> f64 {
        match self.p {
            Exponent::Infinity => self.top,
            Exponent::Finite(p) => {
                if self.top == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    (log_quad + self.top + self.sum.ln()) / p
                }
            }
        }
    }
}

/// `(log ‖Wig f‖_p, log ‖e^{cω} Wig f‖_p)` without materialising the field.
pub fn streamed_wigner_norms(f: &SampledSignal, w: &WeightFunction, c: f64, p: Exponent, exec: Exec) -> Result<(f64, f64)> {
    const BLOCK: usize = 64;
    let rows = TauWignerRows::new(f, 0.5, REFINE, exec)?;
    let (xg, xig) = (rows.xgrid(), rows.xigrid());
    let m = xg.m;
    let blocks = m.div_ceil(BLOCK);
    let parts = exec.map_range(blocks, |b| {
        let mut buf = vec![Complex64::new(0.0, 0.0); xig.m];
        let (mut plain, mut weighted) = (LogAcc::new(p), LogAcc::new(p));
        for r in b * BLOCK..((b + 1) * BLOCK).min(m) {
            rows.row(r, &mut buf);
            let x = xg.point(r);
            for (k, v) in buf.iter().enumerate() {
                let la = v.norm().ln();
                plain.push(la);
                weighted.push(c * w.eval2(x, xig.point(k)) + la);
            }
        }
        (plain, weighted)
    });
    let (mut plain, mut weighted) = (LogAcc::new(p), LogAcc::new(p));
    for (a, b) in &parts {
        plain.merge(a);
        weighted.merge(b);
    }
    let lq = (xg.dx * xig.dx).ln();
    Ok((plain.finish(lq), weighted.finish(lq)))
}

/// Scans the two-Gaussian family `s ↦ f_s`: the unweighted concentration grows
/// with `s` while the weighted Rihaczek-by-Wigner ratio stays below its constant.
pub fn counterexample_scan(s_values: &[f64], p: Exponent, exec: Exec) -> Result<ScanReport> {
    if let Exponent::Finite(pv) = p {
        if pv < 2.0 {
            return param(format!("the scan needs p >= 2, got {pv}"));
        }
    }
    if let Some(s) = s_values.iter().find(|s| !(**s >= 1.0 && s.is_finite())) {
        return param(format!("scan parameters must be >= 1, got {s}"));
    }
    let w = WeightFunction::log();
    let mut params = BoundParams::new(w.clone());
    params.p = p;
    params.tau = 0.5;
    let mu = params.mu_for(CaseId::T35ii)?.expect("case takes mu");
    params.mu = Some(mu);
    let bound = BoundEngine::standard()?.constant(CaseId::T35ii, &params)?.log;
    let grid = GridSpec::symmetric(SCAN_HALF_WIDTH, SCAN_POINTS)?;
    let c = 2.0 * w.k() * mu;
    let rows: Vec<ScanRow> = s_values
        .iter()
        .map(|&s| {
            let row = |note: String| ScanRow {
                s,
                valid: false,
                concentration: None,
                unweighted_ratio: None,
                weighted_ratio: None,
                note: Some(note),
            };
            let f = match make_signal(&SignalKind::TwoGaussian(s), grid).and_then(|f| {
                f.check_resolved("two-gaussian")?;
                Ok(f)
            }) {
                Ok(f) => f,
                Err(e) => return Ok(row(e.to_string())),
            };
            let hat = fourier_transform(&f)?;
            let log_r = f.max_abs().ln() + hat.max_abs().ln();
            let (plain, weighted) = streamed_wigner_norms(&f, &w, c, p, exec)?;
            Ok(ScanRow {
                s,
                valid: true,
                concentration: Some((log_r - 2.0 * f.l2_norm().ln()).exp()),
                unweighted_ratio: Some((log_r - plain).exp()),
                weighted_ratio: Some((log_r - weighted).exp()),
                note: None,
            })
        })
        .collect::<Result<_>>()?;
    let valid: Vec<&ScanRow> = rows.iter().filter(|r| r.valid).collect();
    let growth = valid
        .windows(2)
        .all(|pair| pair[1].concentration > pair[0].concentration);
    let bounded = valid
        .iter()
        .all(|r| holds(r.weighted_ratio.unwrap().ln(), bound, false));
    Ok(ScanReport {
        p: p.to_string(),
        omega: w.name().to_string(),
        mu,
        bound: bound.exp(),
        grid,
        rows,
        growth,
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_engine() -> BoundEngine {
        let grid = GridSpec::symmetric(12.0, 256).unwrap();
        BoundEngine::new(grid, ConventionRegistry::standard().unwrap(), Exec::default()).unwrap()
    }

    #[test]
    fn closed_form_constants() {
        let e = small_engine();
        let params = BoundParams::new(WeightFunction::log());
        let d1 = e.constant(CaseId::T31i, &params).unwrap().value();
        assert!((d1 - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let d3 = e.constant(CaseId::T35i, &params).unwrap().value();
        assert!((d3 - 4.0 / (2.0 * PI)).abs() < 1e-14);
        let d7 = e.constant(CaseId::R311BJ, &params).unwrap().value();
        assert!((d7 - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn thresholds() {
        let w = WeightFunction::log();
        let two = Exponent::Finite(2.0);
        assert!((CaseId::T35ii.mu_threshold(&w, two).unwrap() - 1.5).abs() < 1e-15);
        assert!((CaseId::T31ii.mu_threshold(&w, Exponent::Infinity).unwrap() - 2.0).abs() < 1e-15);
        assert!((CaseId::C38ii.mu_threshold(&w, two).unwrap() - 2.0 * (1.0 + 1.5)).abs() < 1e-15);
        assert_eq!(CaseId::T31i.mu_threshold(&w, two), None);
        let mut params = BoundParams::new(w);
        params.mu = Some(1.5);
        assert!(matches!(params.mu_for(CaseId::T35ii), Err(Error::Infeasible { .. })));
        params.mu = None;
        assert!((params.mu_for(CaseId::T35ii).unwrap().unwrap() - 1.65).abs() < 1e-12);
    }

    #[test]
    fn case_names_round_trip() {
        for c in CaseId::ALL {
            assert_eq!(c.name().parse::<CaseId>().unwrap(), c);
        }
        assert!("T99".parse::<CaseId>().is_err());
    }

    #[test]
    fn log_accumulator_matches_direct_sum() {
        let t: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        let mut acc = LogAcc::new(Exponent::Finite(2.0));
        let (mut a, mut b) = (LogAcc::new(Exponent::Finite(2.0)), LogAcc::new(Exponent::Finite(2.0)));
        for (i, v) in t.iter().enumerate() {
            acc.push(*v);
            if i < 400 { a.push(*v) } else { b.push(*v) }
        }
        a.merge(&b);
        let direct = (t.iter().map(|v| (2.0 * v).exp()).sum::<f64>()).ln() / 2.0;
        assert!((acc.finish(0.0) - direct).abs() < 1e-12);
        assert!((a.finish(0.0) - direct).abs() < 1e-12);
    }

    #[test]
    fn gaussian_equality_case() {
        let e = small_engine();
        let f = e.prepare_kind(&SignalKind::unit_gaussian()).unwrap();
        let v = e.verify(CaseId::T31i, &BoundParams::new(WeightFunction::log()), &f).unwrap();
        assert!(v.pass);
        assert!((v.lhs.unwrap() - PI).abs() < 1e-10);
        assert!((v.rhs.unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn zero_signal_passes() {
        let e = small_engine();
        let f = e.prepare("zero", SampledSignal::zeros(e.grid())).unwrap();
        let v = e.verify(CaseId::T35i, &BoundParams::new(WeightFunction::log()), &f).unwrap();
        assert!(v.pass);
        assert_eq!(v.lhs, Some(0.0));
    }
}
