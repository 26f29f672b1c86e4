//! Quadratic time-frequency representations and the Cohen class.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::fourier::{transpose, Transform};
use crate::grid::{
    convolve_2d, fourier_transform, fourier_transform_2d, inverse_fourier_transform_2d, make_signal, GridSpec,
    PhaseSpaceField, SampledSignal, SignalKind,
};
use crate::special::gauss_legendre_on;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest refinement tried when looking for an exact node layout.
pub const MAX_REFINE: usize = 64;
/// Default Gauss-Legendre node count for the τ-integral.
pub const BJ_NODES: usize = 64;

fn same_grid(f: &SampledSignal, g: &SampledSignal) -> Result<()> {
    if f.grid != g.grid {
        return param("signal and window live on different grids");
    }
    f.grid.require_centered("time-frequency analysis")
}

/// `V_g f(x, ξ) = ∫ e^{-iyξ} f(y) conj(g(y − x)) dy`.
pub fn stft(f: &SampledSignal, g: &SampledSignal) -> Result<PhaseSpaceField> {
    stft_with(f, g, Exec::default())
}

pub fn stft_with(f: &SampledSignal, g: &SampledSignal, exec: Exec) -> Result<PhaseSpaceField> {
    same_grid(f, g)?;
    f.check_guard("stft signal")?;
    g.check_guard("stft window")?;
    let grid = f.grid;
    let m = grid.m;
    let half = (m / 2) as isize;
    let mut out = PhaseSpaceField::zeros(grid, grid.dual());
    let tr = Transform::forward(grid.x0, grid.dx, m);
    exec.for_each_row(&mut out.values, m, |row_idx, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let gi = j as isize - row_idx as isize + half;
            *v = if (0..m as isize).contains(&gi) {
                f.values[j] * g.values[gi as usize].conj()
            } else {
                ZERO
            };
        }
        tr.apply(row);
    });
    Ok(out)
}

/// Reconstructs `f` from `V_g f` by `‖g‖⁻² ∫ V_g f(x, ξ) M_ξ T_x g dx dξ`.
pub fn stft_inverse(v: &PhaseSpaceField, g: &SampledSignal) -> Result<SampledSignal> {
    let grid = g.grid;
    grid.require_centered("stft inversion")?;
    if v.xgrid != grid || v.xigrid != grid.dual() {
        return param("stft field does not match the window grid");
    }
    let norm2 = g.l2_norm().powi(2);
    if norm2 == 0.0 {
        return param("zero window");
    }
    let m = grid.m;
    let half = (m / 2) as isize;
    let mut rows = v.values.clone();
    let tr = Transform::inverse(grid.x0, grid.dx, m);
    tr.apply_rows(&mut rows, m, Exec::default());
    let values = Exec::default().map_range(m, |j| {
        let mut acc = ZERO;
        for row in 0..m {
            let gi = j as isize - row as isize + half;
            if (0..m as isize).contains(&gi) {
                acc += rows[row * m + j] * g.values[gi as usize];
            }
        }
        acc * grid.dx / norm2
    });
    SampledSignal::new(grid, values)
}

/// `|V_g f|²`.
pub fn spectrogram(f: &SampledSignal, g: &SampledSignal) -> Result<PhaseSpaceField> {
    spectrogram_with(f, g, Exec::default())
}

pub fn spectrogram_with(f: &SampledSignal, g: &SampledSignal, exec: Exec) -> Result<PhaseSpaceField> {
    Ok(stft_with(f, g, exec)?.map(|v| Complex64::new(v.norm_sqr(), 0.0)))
}

/// `f(x) conj(f̂(ξ)) e^{-ixξ}`.
pub fn rihaczek(f: &SampledSignal) -> Result<PhaseSpaceField> {
    f.grid.require_centered("rihaczek distribution")?;
    let hat = fourier_transform(f)?;
    let (xg, xig) = (f.grid, hat.grid);
    let mut out = PhaseSpaceField::zeros(xg, xig);
    Exec::default().for_each_row(&mut out.values, xig.m, |m, row| {
        let x = xg.point(m);
        for (k, v) in row.iter_mut().enumerate() {
            *v = f.values[m] * hat.values[k].conj() * Complex64::from_polar(1.0, -x * xig.point(k));
        }
    });
    Ok(out)
}

/// Complex conjugate of the Rihaczek distribution.
pub fn rihaczek_star(f: &SampledSignal) -> Result<PhaseSpaceField> {
    Ok(rihaczek(f)?.map(|v| v.conj()))
}

fn node_refinement(tau: f64, preferred: usize) -> Option<usize> {
    let fits = |r: usize| ((r as f64 * tau) - (r as f64 * tau).round()).abs() < 1e-12;
    std::iter::once(preferred)
        .filter(|r| r.is_power_of_two() && *r <= MAX_REFINE)
        .chain((0..=6).map(|e| 1usize << e))
        .find(|&r| fits(r))
}

enum RowSource {
    /// Band-limited interpolant on a grid `r` times finer; both arguments land on nodes.
    Nodes {
        fine: Vec<Complex64>,
        r: isize,
        ahead: isize,
        behind: isize,
    },
    /// Precomputed products `f(x_m + τt_n) conj(f(x_m − (1−τ)t_n))` from spectral shifts.
    Table(Vec<Complex64>),
}

/// Row-by-row evaluation of `Wig_τ f(x, ξ) = ∫ e^{-itξ} f(x + τt) conj(f(x − (1−τ)t)) dt`.
pub struct TauWignerRows {
    grid: GridSpec,
    source: RowSource,
    transform: Transform,
}

impl TauWignerRows {
    pub fn new(f: &SampledSignal, tau: f64, refine: usize, exec: Exec) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return param(format!("tau must lie in [0,1], got {tau}"));
        }
        let grid = f.grid;
        grid.require_centered("wigner distribution")?;
        f.check_guard("wigner signal")?;
        let m = grid.m;
        let source = match node_refinement(tau, refine) {
            Some(r) => {
                let fine = crate::grid::refine(f, r)?.values;
                RowSource::Nodes {
                    fine,
                    r: r as isize,
                    ahead: (r as f64 * tau).round() as isize,
                    behind: (r as f64 * (1.0 - tau)).round() as isize,
                }
            }
            None => {
                let hat = fourier_transform(f)?;
                let inv = Transform::inverse(grid.x0, grid.dx, m);
                let shifted = |shift: f64| {
                    let mut buf: Vec<Complex64> = hat
                        .values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * Complex64::from_polar(1.0, shift * hat.grid.point(k)))
                        .collect();
                    inv.apply(&mut buf);
                    buf
                };
                let columns: Vec<Complex64> = exec
                    .map_range(m, |n| {
                        let t = (n as f64 - (m / 2) as f64) * grid.dx;
                        let a = shifted(tau * t);
                        let b = shifted(-(1.0 - tau) * t);
                        a.iter().zip(&b).map(|(p, q)| p * q.conj()).collect::<Vec<_>>()
                    })
                    .into_iter()
                    .flatten()
                    .collect();
                RowSource::Table(transpose(&columns, m, m, exec))
            }
        };
        Ok(TauWignerRows {
            grid,
            source,
            transform: Transform::forward(-((m / 2) as f64) * grid.dx, grid.dx, m),
        })
    }

    pub fn xgrid(&self) -> GridSpec {
        self.grid
    }

    pub fn xigrid(&self) -> GridSpec {
        self.grid.dual()
    }

    /// Writes row `row` (fixed x, all ξ) into `buf`.
    pub fn row(&self, row: usize, buf: &mut [Complex64]) {
        let m = self.grid.m;
        match &self.source {
            RowSource::Nodes { fine, r, ahead, behind } => {
                let len = fine.len() as isize;
                let base = r * row as isize;
                let half = (m / 2) as isize;
                for (n, v) in buf.iter_mut().enumerate() {
                    let s = n as isize - half;
                    let (p, q) = (base + ahead * s, base - behind * s);
                    *v = if (0..len).contains(&p) && (0..len).contains(&q) {
                        fine[p as usize] * fine[q as usize].conj()
                    } else {
                        ZERO
                    };
                }
            }
            RowSource::Table(t) => buf.copy_from_slice(&t[row * m..(row + 1) * m]),
        }
        self.transform.apply(buf);
    }

    pub fn collect(&self, exec: Exec) -> PhaseSpaceField {
        let mut out = PhaseSpaceField::zeros(self.xgrid(), self.xigrid());
        exec.for_each_row(&mut out.values, self.grid.m, |m, row| self.row(m, row));
        out
    }
}

/// τ-Wigner distribution. Exact node lookups on a refined grid are used when
/// `refine·τ` is an integer, spectral shifts otherwise.
pub fn tau_wigner(f: &SampledSignal, tau: f64, refine: usize) -> Result<PhaseSpaceField> {
    tau_wigner_with(f, tau, refine, Exec::default())
}

pub fn tau_wigner_with(f: &SampledSignal, tau: f64, refine: usize, exec: Exec) -> Result<PhaseSpaceField> {
    Ok(TauWignerRows::new(f, tau, refine, exec)?.collect(exec))
}

/// Wigner distribution (τ = 1/2).
pub fn wigner(f: &SampledSignal) -> Result<PhaseSpaceField> {
    tau_wigner(f, 0.5, 4)
}

/// `∫₀¹ Wig_τ f dτ` by Gauss-Legendre quadrature in τ.
pub fn born_jordan(f: &SampledSignal, nodes: usize) -> Result<PhaseSpaceField> {
    born_jordan_with(f, nodes, Exec::default())
}

pub fn born_jordan_with(f: &SampledSignal, nodes: usize, exec: Exec) -> Result<PhaseSpaceField> {
    if nodes < 8 {
        return param(format!("born-jordan quadrature needs at least 8 nodes, got {nodes}"));
    }
    let (taus, weights) = gauss_legendre_on(nodes, 0.0, 1.0);
    let grid = f.grid;
    let mut acc = PhaseSpaceField::zeros(grid, grid.dual());
    // Wig_{1−τ} = conj(Wig_τ) and the nodes are symmetric, so pairs collapse to real parts
    for i in 0..nodes / 2 {
        let w = tau_wigner_with(f, taus[i], 4, exec)?;
        for (a, v) in acc.values.iter_mut().zip(&w.values) {
            a.re += 2.0 * weights[i] * v.re;
        }
    }
    if nodes % 2 == 1 {
        let mid = nodes / 2;
        let w = tau_wigner_with(f, taus[mid], 4, exec)?;
        for (a, v) in acc.values.iter_mut().zip(&w.values) {
            a.re += weights[mid] * v.re;
        }
    }
    Ok(acc)
}

/// Closed-form Cohen kernels, described by their multiplier σ̂(t, η).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    /// σ = δ.
    Identity,
    /// σ(x, ξ) = e^{-cx² - dξ²}.
    Gaussian { c: f64, d: f64 },
    /// σ̂ = a + π(cd)^{-1/2} e^{-t²/(4c) - η²/(4d)}.
    DiracPlusGaussian { a: f64, c: f64, d: f64 },
    /// σ̂ = 1 + t² + η².
    Polynomial,
    /// σ̂ = 2 sin(tη/2)/(tη).
    BornJordan,
    /// σ = Wigner distribution of the unit Gaussian.
    WignerGaussian,
}

impl KernelSpec {
    pub fn multiplier(&self, t: f64, eta: f64) -> Complex64 {
        let re = match *self {
            KernelSpec::Identity => 1.0,
            KernelSpec::Gaussian { c, d } => PI / (c * d).sqrt() * (-t * t / (4.0 * c) - eta * eta / (4.0 * d)).exp(),
            KernelSpec::DiracPlusGaussian { a, c, d } => {
                a + (PI * PI / (c * d)).sqrt() * (-t * t / (4.0 * c) - eta * eta / (4.0 * d)).exp()
            }
            KernelSpec::Polynomial => 1.0 + t * t + eta * eta,
            KernelSpec::BornJordan => {
                let u = t * eta;
                if u.abs() < 1e-8 {
                    1.0 - u * u / 24.0
                } else {
                    2.0 * (u / 2.0).sin() / u
                }
            }
            KernelSpec::WignerGaussian => 2.0 * PI.powf(1.5) * (-(t * t + eta * eta) / 4.0).exp(),
        };
        Complex64::new(re, 0.0)
    }

    /// σ(x, ξ) when the kernel is a function.
    pub fn spatial(&self, x: f64, xi: f64) -> Option<Complex64> {
        match *self {
            KernelSpec::Gaussian { c, d } => Some(Complex64::new((-c * x * x - d * xi * xi).exp(), 0.0)),
            KernelSpec::WignerGaussian => Some(Complex64::new(2.0 * PI.sqrt() * (-x * x - xi * xi).exp(), 0.0)),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { c, d } | KernelSpec::DiracPlusGaussian { c, d, .. } if !(c > 0.0 && d > 0.0) => {
                Err(Error::Kernel("gaussian kernel widths must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Identity => f.write_str("identity"),
            KernelSpec::Gaussian { c, d } => write!(f, "gaussian:c={c},d={d}"),
            KernelSpec::DiracPlusGaussian { a, c, d } => write!(f, "dirac_plus_gaussian:a={a},c={c},d={d}"),
            KernelSpec::Polynomial => f.write_str("polynomial"),
            KernelSpec::BornJordan => f.write_str("born_jordan"),
            KernelSpec::WignerGaussian => f.write_str("wigner_gaussian"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in tail.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Kernel(format!("expected key=value in '{part}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Kernel(format!("bad number in kernel '{s}'")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let get = |k: &str, d: f64| kv.get(k).copied().unwrap_or(d);
        let spec = match head {
            "identity" => KernelSpec::Identity,
            "gaussian" => KernelSpec::Gaussian {
                c: get("c", 1.0),
                d: get("d", 1.0),
            },
            "dirac_plus_gaussian" => KernelSpec::DiracPlusGaussian {
                a: get("a", 1.0),
                c: get("c", 0.25),
                d: get("d", 0.25),
            },
            "polynomial" => KernelSpec::Polynomial,
            "born_jordan" => KernelSpec::BornJordan,
            "wigner_gaussian" => KernelSpec::WignerGaussian,
            _ => return Err(Error::Kernel(format!("unknown kernel '{s}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A Cohen kernel sampled on the dual of a phase-space grid.
#[derive(Clone, Debug)]
pub struct CohenKernel {
    pub name: String,
    pub spec: Option<KernelSpec>,
    /// σ̂ on (dual of x grid) × (dual of ξ grid).
    pub multiplier: PhaseSpaceField,
    pub min_abs_multiplier: f64,
    xgrid: GridSpec,
    xigrid: GridSpec,
}

impl CohenKernel {
    /// Samples a closed-form kernel for fields on `xgrid × xigrid`.
    pub fn build(spec: &KernelSpec, xgrid: GridSpec, xigrid: GridSpec) -> Result<Self> {
        spec.validate()?;
        let s = spec.clone();
        let multiplier = PhaseSpaceField::from_fn(xgrid.dual(), xigrid.dual(), move |t, eta| s.multiplier(t, eta));
        Ok(Self::from_multiplier(spec.to_string(), Some(spec.clone()), multiplier, xgrid, xigrid))
    }

    fn from_multiplier(
        name: String,
        spec: Option<KernelSpec>,
        multiplier: PhaseSpaceField,
        xgrid: GridSpec,
        xigrid: GridSpec,
    ) -> Self {
        let min_abs_multiplier = multiplier.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        CohenKernel {
            name,
            spec,
            multiplier,
            min_abs_multiplier,
            xgrid,
            xigrid,
        }
    }

    /// Kernel whose σ is a sampled field.
    pub fn from_field(name: impl Into<String>, sigma: &PhaseSpaceField, exec: Exec) -> Self {
        let multiplier = fourier_transform_2d(sigma, exec);
        Self::from_multiplier(name.into(), None, multiplier, sigma.xgrid, sigma.xigrid)
    }

    /// Kernel with multiplier `σ̂₁/σ̂₂`; `σ̂₂` must stay above `floor` in modulus.
    pub fn quotient(num: &CohenKernel, den: &CohenKernel, floor: f64) -> Result<Self> {
        if !num.multiplier.same_grid(&den.multiplier) {
            return Err(Error::Kernel("kernels sampled on different grids".into()));
        }
        if !(den.min_abs_multiplier > floor) {
            return Err(Error::Kernel(format!(
                "denominator kernel {} has min |multiplier| {:.3e} <= {floor}",
                den.name, den.min_abs_multiplier
            )));
        }
        let mut m = num.multiplier.clone();
        m.values.iter_mut().zip(&den.multiplier.values).for_each(|(a, b)| *a /= b);
        Ok(Self::from_multiplier(
            format!("({})/({})", num.name, den.name),
            None,
            m,
            num.xgrid,
            num.xigrid,
        ))
    }

    /// Scales the multiplier by `c`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.multiplier.values.iter_mut().for_each(|v| *v *= c);
        self.min_abs_multiplier *= c.abs();
        self
    }

    /// σ on the phase-space grid: closed form when known, numerical inverse transform for
    /// quotient kernels, and a kernel error for distributions that are not functions.
    pub fn spatial(&self, exec: Exec) -> Result<PhaseSpaceField> {
        match &self.spec {
            Some(spec) => {
                if spec.spatial(0.0, 0.0).is_none() {
                    return Err(Error::Kernel(format!("kernel {} is not a function", self.name)));
                }
                let s = spec.clone();
                Ok(PhaseSpaceField::from_fn(self.xgrid, self.xigrid, move |x, xi| {
                    s.spatial(x, xi).unwrap()
                }))
            }
            None => Ok(inverse_fourier_transform_2d(&self.multiplier, self.xgrid, self.xigrid, exec)),
        }
    }
}

/// `Q_σ f = σ ⋆ Wig f`, computed as `F⁻¹(σ̂ · F(Wig f))`.
pub fn cohen_apply(kernel: &CohenKernel, f: &SampledSignal) -> Result<PhaseSpaceField> {
    cohen_apply_with(kernel, f, Exec::default())
}

pub fn cohen_apply_with(kernel: &CohenKernel, f: &SampledSignal, exec: Exec) -> Result<PhaseSpaceField> {
    let w = tau_wigner_with(f, 0.5, 4, exec)?;
    cohen_filter(kernel, &w, exec)
}

/// Applies a kernel to an already computed Wigner distribution.
pub fn cohen_filter(kernel: &CohenKernel, wig: &PhaseSpaceField, exec: Exec) -> Result<PhaseSpaceField> {
    if wig.xgrid != kernel.xgrid || wig.xigrid != kernel.xigrid {
        return Err(Error::Kernel("kernel sampled for a different grid".into()));
    }
    let mut hat = fourier_transform_2d(wig, exec);
    hat.values
        .iter_mut()
        .zip(&kernel.multiplier.values)
        .for_each(|(a, b)| *a *= b);
    Ok(inverse_fourier_transform_2d(&hat, wig.xgrid, wig.xigrid, exec))
}

/// Calibrated normalisations of the identities linking the representations.
#[derive(Clone, Debug, Serialize)]
pub struct ConventionRegistry {
    /// `Sp_g f = c · Wig(g̃) ⋆ Wig f`.
    pub c_spwig: f64,
    /// True once the fundamental identity has been verified at the modulus level.
    pub c_fundgabor_phase: bool,
    /// Factor applied to the closed-form Born-Jordan multiplier.
    pub c_bj_multiplier: f64,
    pub calibration_grid: GridSpec,
    /// Max deviation of `Sp − c·(Wig ⋆ Wig)` relative to `max Sp`.
    pub spwig_residual: f64,
    /// Max deviation in the modulus-level fundamental identity, relative to `max |V|`.
    pub fundgabor_residual: f64,
    /// Relative L² gap between the multiplier and quadrature Born-Jordan paths.
    pub bj_residual: f64,
}

/// Acceptance thresholds for the calibration residuals.
pub const SPWIG_TOL: f64 = 1e-5;
pub const FUNDGABOR_TOL: f64 = 1e-6;
pub const BJ_TOL: f64 = 1e-3;

/// `|V_g f(x, ξ)|` against `(2π)⁻¹ |V_ĝ f̂(ξ, −x)|`, maximal gap relative to `max |V_g f|`.
pub fn fundamental_identity_residual(f: &SampledSignal, g: &SampledSignal) -> Result<f64> {
    let v = stft(f, g)?;
    let (fh, gh) = (fourier_transform(f)?, fourier_transform(g)?);
    let w = stft(&fh, &gh)?;
    let m = f.grid.m;
    let mut err: f64 = 0.0;
    for row in 1..m {
        for k in 0..m {
            // row k of w is ξ_k, column m−row is −x_row
            let rhs = w.get(k, m - row).norm() / (2.0 * PI);
            err = err.max((v.get(row, k).norm() - rhs).abs());
        }
    }
    Ok(err / v.max_abs())
}

/// Spectrogram against `c · Wig(g̃) ⋆ Wig f`; returns `(c, residual)` with the residual relative to `max Sp`.
pub fn spectrogram_wigner_residual(f: &SampledSignal, g: &SampledSignal, c: Option<f64>) -> Result<(f64, f64)> {
    let sp = spectrogram(f, g)?;
    let conv = convolve_2d(&wigner(&g.reflect()?)?, &wigner(f)?, Exec::default())?;
    let (m0, k0) = sp
        .index_of(0.0, 0.0)
        .ok_or_else(|| Error::Convention("origin not on grid".into()))?;
    let c = c.unwrap_or_else(|| sp.get(m0, k0).re / conv.get(m0, k0).re);
    let scaled = conv.map(|v| v * c);
    Ok((c, sp.max_abs_difference(&scaled) / sp.max_abs()))
}

impl ConventionRegistry {
    /// Calibrates on `grid` with `f = g = unit Gaussian`.
    pub fn calibrate(grid: GridSpec) -> Result<Self> {
        let g = make_signal(&SignalKind::unit_gaussian(), grid)?;
        g.check_resolved("calibration gaussian")?;
        let (c_spwig, spwig_residual) = spectrogram_wigner_residual(&g, &g, None)?;
        if !(spwig_residual <= SPWIG_TOL) {
            return Err(Error::Convention(format!("spectrogram/wigner residual {spwig_residual:.3e}")));
        }
        let fundgabor_residual = fundamental_identity_residual(&g, &g)?;
        if !(fundgabor_residual <= FUNDGABOR_TOL) {
            return Err(Error::Convention(format!(
                "fundamental identity residual {fundgabor_residual:.3e}"
            )));
        }
        let raw = CohenKernel::build(&KernelSpec::BornJordan, grid, grid.dual())?;
        let via_kernel = cohen_apply(&raw, &g)?;
        let via_tau = born_jordan(&g, BJ_NODES)?;
        let (m0, k0) = via_tau.index_of(0.0, 0.0).expect("origin on grid");
        let c_bj_multiplier = via_tau.get(m0, k0).re / via_kernel.get(m0, k0).re;
        let bj_residual = via_kernel.map(|v| v * c_bj_multiplier).relative_l2_distance(&via_tau);
        if !(bj_residual <= BJ_TOL) {
            return Err(Error::Convention(format!("born-jordan kernel residual {bj_residual:.3e}")));
        }
        Ok(ConventionRegistry {
            c_spwig,
            c_fundgabor_phase: true,
            c_bj_multiplier,
            calibration_grid: grid,
            spwig_residual,
            fundgabor_residual,
            bj_residual,
        })
    }

    /// Registry calibrated once on the standard grid.
    pub fn standard() -> Result<&'static ConventionRegistry> {
        static REG: OnceLock<Result<ConventionRegistry>> = OnceLock::new();
        REG.get_or_init(|| ConventionRegistry::calibrate(GridSpec::standard()))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Born-Jordan kernel with the calibrated normalisation.
pub fn bj_kernel(xgrid: GridSpec, xigrid: GridSpec, conventions: &ConventionRegistry) -> Result<CohenKernel> {
    Ok(CohenKernel::build(&KernelSpec::BornJordan, xgrid, xigrid)?.scaled(conventions.c_bj_multiplier))
}

/// Selector for the representations exposed on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReprSpec {
    Stft,
    Spectrogram,
    Rihaczek,
    RihaczekStar,
    Wigner,
    TauWigner(f64),
    BornJordan,
    Cohen(KernelSpec),
}

impl fmt::Display for ReprSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReprSpec::Stft => f.write_str("stft"),
            ReprSpec::Spectrogram => f.write_str("spectrogram"),
            ReprSpec::Rihaczek => f.write_str("rihaczek"),
            ReprSpec::RihaczekStar => f.write_str("rihaczek*"),
            ReprSpec::Wigner => f.write_str("wigner"),
            ReprSpec::TauWigner(t) => write!(f, "tau_wigner:{t}"),
            ReprSpec::BornJordan => f.write_str("born_jordan"),
            ReprSpec::Cohen(k) => write!(f, "cohen:{k}"),
        }
    }
}

impl FromStr for ReprSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "stft" => ReprSpec::Stft,
            "spectrogram" => ReprSpec::Spectrogram,
            "rihaczek" => ReprSpec::Rihaczek,
            "rihaczek*" => ReprSpec::RihaczekStar,
            "wigner" => ReprSpec::Wigner,
            "born_jordan" => ReprSpec::BornJordan,
            _ => {
                if let Some(t) = s.strip_prefix("tau_wigner:") {
                    let t: f64 = t
                        .parse()
                        .map_err(|_| Error::Parameter(format!("bad tau in '{s}'")))?;
                    if !(0.0..=1.0).contains(&t) {
                        return param(format!("tau must lie in [0,1], got {t}"));
                    }
                    ReprSpec::TauWigner(t)
                } else if let Some(k) = s.strip_prefix("cohen:") {
                    ReprSpec::Cohen(k.parse()?)
                } else {
                    return param(format!("unknown representation '{s}'"));
                }
            }
        })
    }
}

impl ReprSpec {
    /// Evaluates the representation of `f` (window `g` where one is needed).
    pub fn compute(
        &self,
        f: &SampledSignal,
        g: &SampledSignal,
        conventions: &ConventionRegistry,
    ) -> Result<PhaseSpaceField> {
        match self {
            ReprSpec::Stft => stft(f, g),
            ReprSpec::Spectrogram => spectrogram(f, g),
            ReprSpec::Rihaczek => rihaczek(f),
            ReprSpec::RihaczekStar => rihaczek_star(f),
            ReprSpec::Wigner => wigner(f),
            ReprSpec::TauWigner(t) => tau_wigner(f, *t, 4),
            ReprSpec::BornJordan => born_jordan(f, BJ_NODES),
            ReprSpec::Cohen(KernelSpec::BornJordan) => {
                cohen_apply(&bj_kernel(f.grid, f.grid.dual(), conventions)?, f)
            }
            ReprSpec::Cohen(k) => cohen_apply(&CohenKernel::build(k, f.grid, f.grid.dual())?, f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(grid: GridSpec) -> SampledSignal {
        make_signal(&SignalKind::unit_gaussian(), grid).unwrap()
    }

    fn small() -> GridSpec {
        GridSpec::symmetric(12.0, 256).unwrap()
    }

    fn tau_wigner_gaussian(x: f64, xi: f64, tau: f64) -> Complex64 {
        let (a, b) = (tau, 1.0 - tau);
        let s = a * a + b * b;
        let z = Complex64::new((a - b) * x, xi);
        (z * z / (2.0 * s)).exp() * (-x * x).exp() * (2.0 * PI / s).sqrt()
    }

    #[test]
    fn stft_of_gaussian() {
        let g = unit(small());
        let v = stft(&g, &g).unwrap();
        let err = (0..v.values.len())
            .map(|i| {
                let (x, xi) = v.point(i);
                let exact = Complex64::from_polar(PI.sqrt() * (-(x * x + xi * xi) / 4.0).exp(), -x * xi / 2.0);
                (v.values[i] - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn stft_exec_strategies_agree() {
        let grid = small();
        let f = make_signal(&"hermite:2".parse().unwrap(), grid).unwrap();
        let g = unit(grid);
        let a = stft_with(&f, &g, Exec::Parallel).unwrap();
        let b = stft_with(&f, &g, Exec::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stft_inversion() {
        let grid = small();
        let f = make_signal(&"gaussian:c=1,chirp=0.3".parse().unwrap(), grid).unwrap();
        let g = unit(grid);
        let back = stft_inverse(&stft(&f, &g).unwrap(), &g).unwrap();
        let err: f64 = back.values.iter().zip(&f.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = f.values.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-10, "{}", err / norm);
    }

    #[test]
    fn wigner_paths_match_closed_form() {
        let g = unit(small());
        for tau in [0.0, 0.25, 0.5, 0.3, 0.8] {
            let w = tau_wigner(&g, tau, 4).unwrap();
            let err = (0..w.values.len())
                .map(|i| {
                    let (x, xi) = w.point(i);
                    (w.values[i] - tau_wigner_gaussian(x, xi, tau)).norm()
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "tau={tau}: {err}");
        }
    }

    #[test]
    fn wigner_is_real_and_conjugation_swaps_tau() {
        let f = make_signal(&"gaussian:c=0.5,chirp=0.2,mod=1".parse().unwrap(), small()).unwrap();
        let w = wigner(&f).unwrap();
        assert!(w.values.iter().all(|v| v.im.abs() < 1e-10));
        let a = tau_wigner(&f, 0.3, 4).unwrap();
        let b = tau_wigner(&f, 0.7, 4).unwrap();
        assert!(a.map(|v| v.conj()).max_abs_difference(&b) < 1e-10);
    }

    #[test]
    fn rihaczek_of_gaussian() {
        let g = unit(small());
        let r = rihaczek(&g).unwrap();
        let err = (0..r.values.len())
            .map(|i| {
                let (x, xi) = r.point(i);
                let exact = Complex64::from_polar((2.0 * PI).sqrt() * (-(x * x + xi * xi) / 2.0).exp(), -x * xi);
                (r.values[i] - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
        let rs = rihaczek_star(&g).unwrap();
        assert!((rs.get(130, 120) - r.get(130, 120).conj()).norm() == 0.0);
    }

    #[test]
    fn born_jordan_kernel_matches_quadrature() {
        let grid = small();
        let f = make_signal(&"hermite:1".parse().unwrap(), grid).unwrap();
        let raw = CohenKernel::build(&KernelSpec::BornJordan, grid, grid.dual()).unwrap();
        let a = cohen_apply(&raw, &f).unwrap();
        let b = born_jordan(&f, BJ_NODES).unwrap();
        assert!(a.relative_l2_distance(&b) < 1e-8, "{}", a.relative_l2_distance(&b));
        assert!(matches!(born_jordan(&f, 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn polynomial_kernel_is_a_differential_operator() {
        let g = unit(small());
        let k = CohenKernel::build(&KernelSpec::Polynomial, g.grid, g.grid.dual()).unwrap();
        let q = cohen_apply(&k, &g).unwrap();
        let err = (0..q.values.len())
            .map(|i| {
                let (x, xi) = q.point(i);
                let w = 2.0 * PI.sqrt() * (-x * x - xi * xi).exp();
                (q.values[i] - w * (5.0 - 4.0 * x * x - 4.0 * xi * xi)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn identity_kernel_returns_wigner() {
        let f = make_signal(&"hermite:2".parse().unwrap(), small()).unwrap();
        let k = CohenKernel::build(&KernelSpec::Identity, f.grid, f.grid.dual()).unwrap();
        assert!(cohen_apply(&k, &f).unwrap().max_abs_difference(&wigner(&f).unwrap()) < 1e-12);
    }

    #[test]
    fn dirac_plus_gaussian_matches_direct_convolution() {
        let grid = GridSpec::symmetric(16.0, 128).unwrap();
        let f = unit(grid);
        let spec = KernelSpec::DiracPlusGaussian { a: 1.0, c: 0.25, d: 0.25 };
        let k = CohenKernel::build(&spec, grid, grid.dual()).unwrap();
        assert!(k.min_abs_multiplier > 0.9);
        let q = cohen_apply(&k, &f).unwrap();
        let w = wigner(&f).unwrap();
        let (xg, xig) = (w.xgrid, w.xigrid);
        let quad = w.quad_weight();
        for m in (0..128).step_by(8) {
            for kk in (0..128).step_by(8) {
                let (x, xi) = (xg.point(m), xig.point(kk));
                let mut acc = w.get(m, kk);
                for i in 0..128 {
                    for j in 0..128 {
                        let (dx, dxi) = (x - xg.point(i), xi - xig.point(j));
                        acc += w.get(i, j) * (-0.25 * dx * dx - 0.25 * dxi * dxi).exp() * quad;
                    }
                }
                assert!((acc - q.get(m, kk)).norm() < 1e-5, "{m},{kk}");
            }
        }
    }

    #[test]
    fn quotient_requires_nonvanishing_denominator() {
        let grid = small();
        let a = CohenKernel::build(&KernelSpec::WignerGaussian, grid, grid.dual()).unwrap();
        let bj = CohenKernel::build(&KernelSpec::BornJordan, grid, grid.dual()).unwrap();
        assert!(matches!(CohenKernel::quotient(&a, &bj, 0.5), Err(Error::Kernel(_))));
        let d = CohenKernel::build(&"dirac_plus_gaussian".parse().unwrap(), grid, grid.dual()).unwrap();
        let q = CohenKernel::quotient(&a, &d, 0.9).unwrap();
        assert!(q.spatial(Exec::default()).is_ok());
        assert!(matches!(d.spatial(Exec::default()), Err(Error::Kernel(_))));
    }

    #[test]
    fn kernel_and_repr_parsing() {
        assert_eq!("gaussian".parse::<KernelSpec>().unwrap(), KernelSpec::Gaussian { c: 1.0, d: 1.0 });
        assert!("gaussian:c=-1".parse::<KernelSpec>().is_err());
        assert!("sinc".parse::<KernelSpec>().is_err());
        for s in ["stft", "rihaczek*", "tau_wigner:0.25", "cohen:born_jordan", "born_jordan"] {
            assert_eq!(s.parse::<ReprSpec>().unwrap().to_string(), s);
        }
        assert!("tau_wigner:1.5".parse::<ReprSpec>().is_err());
    }

    #[test]
    fn calibration_on_small_grid() {
        let reg = ConventionRegistry::calibrate(small()).unwrap();
        assert!((reg.c_spwig - 1.0 / (2.0 * PI)).abs() < 1e-8);
        assert!((reg.c_bj_multiplier - 1.0).abs() < 1e-8);
        assert!(reg.c_fundgabor_phase);
    }
}
