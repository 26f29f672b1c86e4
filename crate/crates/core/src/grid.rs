//! Sample grids, sampled signals, phase-space fields and the scaled Fourier transform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::fourier::{transpose, Transform};

/// Fraction of samples (split between both ends) inspected by the boundary guard.
pub const GUARD_FRACTION: f64 = 0.05;
/// Largest admissible ratio between tail and peak magnitude.
pub const GUARD_RATIO: f64 = 1e-8;

/// Uniform grid `x_j = x0 + j·dx`, `j = 0..m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub dx: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn new(x0: f64, dx: f64, m: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) {
            return param(format!("grid step must be positive and finite, got dx={dx}"));
        }
        if m < 8 || !m.is_power_of_two() {
            return param(format!("grid size must be a power of two >= 8, got {m}"));
        }
        Ok(GridSpec { x0, dx, m })
    }

    /// `[-half_width, half_width)` with `m` samples.
    pub fn symmetric(half_width: f64, m: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return param("grid half width must be positive");
        }
        GridSpec::new(-half_width, 2.0 * half_width / m as f64, m)
    }

    /// `[-20, 20)` with 1024 samples.
    pub fn standard() -> Self {
        GridSpec::symmetric(20.0, 1024).expect("valid default grid")
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.point(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.m as f64 * self.dx
    }

    /// Centered frequency grid with step `2π/(m·dx)`.
    pub fn dual(&self) -> GridSpec {
        let dxi = 2.0 * PI / (self.m as f64 * self.dx);
        GridSpec {
            x0: -((self.m / 2) as f64) * dxi,
            dx: dxi,
            m: self.m,
        }
    }

    /// True when `x_{m/2} = 0`.
    pub fn is_centered(&self) -> bool {
        (self.x0 + (self.m / 2) as f64 * self.dx).abs() <= 1e-9 * self.dx
    }

    pub fn centered(&self) -> GridSpec {
        GridSpec {
            x0: -((self.m / 2) as f64) * self.dx,
            ..*self
        }
    }

    pub(crate) fn require_centered(&self, what: &str) -> Result<()> {
        if self.is_centered() {
            Ok(())
        } else {
            param(format!("{what} requires a centered grid"))
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) x {}", self.x0, self.x0 + self.length(), self.m)
    }
}

/// Ratio of the largest magnitude in the outer `GUARD_FRACTION` of samples to the peak.
pub fn tail_ratio(values: &[Complex64]) -> f64 {
    let n = values.len();
    let edge = ((GUARD_FRACTION * 0.5 * n as f64).ceil() as usize).max(1).min(n / 2);
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let tail = values[..edge]
        .iter()
        .chain(&values[n - edge..])
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    tail / peak
}

/// Complex samples of a function of one variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.m {
            return param(format!("{} samples for a grid of {}", values.len(), grid.m));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numerical("non-finite sample".into()));
        }
        Ok(SampledSignal { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.m).map(|j| f(grid.point(j))).collect();
        SampledSignal { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SampledSignal {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.m],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.dx
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Centroid of the energy density `|f|²`.
    pub fn energy_centroid(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (j, v) in self.values.iter().enumerate() {
            num += self.grid.point(j) * v.norm_sqr();
            den += v.norm_sqr();
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SampledSignal {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        SampledSignal {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// `x ↦ f(-x)` on a centered grid; the sample at the left edge has no mirror and is zeroed.
    pub fn reflect(&self) -> Result<Self> {
        self.grid.require_centered("reflection")?;
        let m = self.grid.m;
        let mut values = vec![Complex64::new(0.0, 0.0); m];
        for (j, v) in values.iter_mut().enumerate().skip(1) {
            *v = self.values[m - j];
        }
        Ok(SampledSignal { grid: self.grid, values })
    }

    pub fn tail_ratio(&self) -> f64 {
        tail_ratio(&self.values)
    }

    /// Boundary-decay guard on the samples.
    pub fn check_guard(&self, location: &str) -> Result<()> {
        let tail = self.tail_ratio();
        if tail > GUARD_RATIO {
            return Err(Error::Aliasing {
                location: location.into(),
                tail,
                limit: GUARD_RATIO,
            });
        }
        Ok(())
    }

    /// Guard on both the samples and their spectrum.
    pub fn check_resolved(&self, label: &str) -> Result<()> {
        self.check_guard(&format!("{label} (time tails)"))?;
        let hat = fourier_transform_unguarded(self);
        hat.check_guard(&format!("{label} (frequency tails)"))
    }
}

pub(crate) fn fourier_transform_unguarded(f: &SampledSignal) -> SampledSignal {
    let g = f.grid;
    let mut values = f.values.clone();
    Transform::forward(g.x0, g.dx, g.m).apply(&mut values);
    SampledSignal {
        grid: g.dual(),
        values,
    }
}

pub(crate) fn inverse_unguarded(hat: &SampledSignal, target: GridSpec) -> SampledSignal {
    let mut values = hat.values.clone();
    Transform::inverse(target.x0, target.dx, target.m).apply(&mut values);
    SampledSignal { grid: target, values }
}

/// `f̂(ξ) = ∫ e^{-ixξ} f(x) dx` sampled on the centered dual grid.
pub fn fourier_transform(f: &SampledSignal) -> Result<SampledSignal> {
    f.check_guard("fourier transform input")?;
    Ok(fourier_transform_unguarded(f))
}

/// Inverse transform onto the centered grid whose dual is `hat.grid`.
pub fn inverse_fourier_transform(hat: &SampledSignal) -> Result<SampledSignal> {
    let target = hat.grid.dual();
    inverse_fourier_transform_onto(hat, target)
}

/// Inverse transform onto an explicit grid (same size, step matching the frequency step).
pub fn inverse_fourier_transform_onto(hat: &SampledSignal, target: GridSpec) -> Result<SampledSignal> {
    hat.grid.require_centered("inverse transform input")?;
    if target.m != hat.grid.m || (target.dual().dx - hat.grid.dx).abs() > 1e-12 * hat.grid.dx {
        return param("target grid is not dual to the spectrum grid");
    }
    hat.check_guard("inverse fourier transform input")?;
    Ok(inverse_unguarded(hat, target))
}

/// Band-limited interpolation onto a grid `r` times finer (`r` a power of two).
pub fn refine(f: &SampledSignal, r: usize) -> Result<SampledSignal> {
    if r == 0 || !r.is_power_of_two() {
        return param(format!("refinement factor must be a power of two, got {r}"));
    }
    if r == 1 {
        return Ok(f.clone());
    }
    let hat = fourier_transform(f)?;
    let m = f.grid.m;
    let fine = GridSpec::new(f.grid.x0, f.grid.dx / r as f64, m * r)?;
    let mut padded = vec![Complex64::new(0.0, 0.0); m * r];
    let off = (m * r - m) / 2;
    padded[off..off + m].copy_from_slice(&hat.values);
    let spectrum = SampledSignal {
        grid: fine.dual(),
        values: padded,
    };
    Ok(inverse_unguarded(&spectrum, fine))
}

/// The test signals of the battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SignalKind {
    /// `h·e^{-(x-c)²/(2w²)}·e^{i(chirp·x² + modulation·x)}`.
    Gaussian {
        center: f64,
        width: f64,
        height: f64,
        chirp: f64,
        modulation: f64,
    },
    /// `H_n(x)e^{-x²/2}` with the physicists' Hermite polynomial, `n ≤ 6`.
    Hermite(u32),
    /// `s²e^{-s⁴x²/2} + e^{-x²/(2s⁴)}`.
    TwoGaussian(f64),
}

impl SignalKind {
    pub fn unit_gaussian() -> Self {
        SignalKind::gaussian_width(1.0)
    }

    pub fn gaussian_width(width: f64) -> Self {
        SignalKind::Gaussian {
            center: 0.0,
            width,
            height: 1.0,
            chirp: 0.0,
            modulation: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match *self {
            SignalKind::Gaussian {
                center,
                width,
                height,
                chirp,
                modulation,
            } => {
                let env = height * (-(x - center).powi(2) / (2.0 * width * width)).exp();
                Complex64::from_polar(env, chirp * x * x + modulation * x)
            }
            SignalKind::Hermite(n) => Complex64::new(hermite_poly(n, x) * (-0.5 * x * x).exp(), 0.0),
            SignalKind::TwoGaussian(s) => {
                let s4 = s.powi(4);
                Complex64::new(s * s * (-0.5 * s4 * x * x).exp() + (-x * x / (2.0 * s4)).exp(), 0.0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SignalKind::Gaussian { width, height, .. } if !(width > 0.0) || !height.is_finite() => {
                param("gaussian width must be positive")
            }
            SignalKind::Hermite(n) if n > 6 => param(format!("hermite order {n} exceeds 6")),
            SignalKind::TwoGaussian(s) if !(s > 0.0) => param("two_gaussian parameter must be positive"),
            _ => Ok(()),
        }
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite_poly(n: u32, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalKind::Gaussian {
                center,
                width,
                height,
                chirp,
                modulation,
            } => write!(f, "gaussian:c={center},w={width},h={height},chirp={chirp},mod={modulation}"),
            SignalKind::Hermite(n) => write!(f, "hermite:{n}"),
            SignalKind::TwoGaussian(s) => write!(f, "two_gaussian:s={s}"),
        }
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad number '{v}' in signal '{s}'")))
        };
        match head {
            "gaussian" => {
                let (mut center, mut width, mut height, mut chirp, mut modulation) = (0.0, 1.0, 1.0, 0.0, 0.0);
                for kv in tail.split(',').filter(|p| !p.trim().is_empty()) {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::Parameter(format!("expected key=value in '{kv}'")))?;
                    let v = num(v)?;
                    match k.trim() {
                        "c" => center = v,
                        "w" => width = v,
                        "h" => height = v,
                        "chirp" => chirp = v,
                        "mod" => modulation = v,
                        other => return param(format!("unknown gaussian key '{other}'")),
                    }
                }
                let kind = SignalKind::Gaussian {
                    center,
                    width,
                    height,
                    chirp,
                    modulation,
                };
                kind.validate()?;
                Ok(kind)
            }
            "hermite" => {
                let n: u32 = tail
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parameter(format!("bad hermite order in '{s}'")))?;
                let kind = SignalKind::Hermite(n);
                kind.validate()?;
                Ok(kind)
            }
            "two_gaussian" => {
                let v = tail.trim().strip_prefix("s=").unwrap_or(tail);
                let kind = SignalKind::TwoGaussian(num(v)?);
                kind.validate()?;
                Ok(kind)
            }
            _ => param(format!("unknown signal '{s}'")),
        }
    }
}

/// Samples `kind` on `grid` and checks the boundary guard.
pub fn make_signal(kind: &SignalKind, grid: GridSpec) -> Result<SampledSignal> {
    kind.validate()?;
    let f = SampledSignal::from_fn(grid, |x| kind.eval(x));
    f.check_guard(&kind.to_string())?;
    Ok(f)
}

/// Samples on a product grid, stored row-major with rows along x and columns along ξ.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceField {
    pub xgrid: GridSpec,
    pub xigrid: GridSpec,
    pub values: Vec<Complex64>,
}

impl PhaseSpaceField {
    pub fn zeros(xgrid: GridSpec, xigrid: GridSpec) -> Self {
        PhaseSpaceField {
            xgrid,
            xigrid,
            values: vec![Complex64::new(0.0, 0.0); xgrid.m * xigrid.m],
        }
    }

    pub fn from_fn(xgrid: GridSpec, xigrid: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let mut out = PhaseSpaceField::zeros(xgrid, xigrid);
        Exec::default().for_each_row(&mut out.values, xigrid.m, |m, row| {
            let x = xgrid.point(m);
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(x, xigrid.point(k));
            }
        });
        out
    }

    pub fn rows(&self) -> usize {
        self.xgrid.m
    }

    pub fn cols(&self) -> usize {
        self.xigrid.m
    }

    #[inline]
    pub fn get(&self, m: usize, k: usize) -> Complex64 {
        self.values[m * self.xigrid.m + k]
    }

    #[inline]
    pub fn point(&self, i: usize) -> (f64, f64) {
        let c = self.xigrid.m;
        (self.xgrid.point(i / c), self.xigrid.point(i % c))
    }

    /// `dx·dξ`.
    pub fn quad_weight(&self) -> f64 {
        self.xgrid.dx * self.xigrid.dx
    }

    pub fn same_grid(&self, other: &PhaseSpaceField) -> bool {
        self.xgrid == other.xgrid && self.xigrid == other.xigrid
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.quad_weight()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.quad_weight()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        PhaseSpaceField {
            xgrid: self.xgrid,
            xigrid: self.xigrid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// `‖self − other‖₂ / ‖other‖₂` on a shared grid.
    pub fn relative_l2_distance(&self, other: &PhaseSpaceField) -> f64 {
        let num: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = other.values.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// `max |self − other|`.
    pub fn max_abs_difference(&self, other: &PhaseSpaceField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Index of the sample nearest to `(x, ξ)`, if on the grid.
    pub fn index_of(&self, x: f64, xi: f64) -> Option<(usize, usize)> {
        let m = ((x - self.xgrid.x0) / self.xgrid.dx).round();
        let k = ((xi - self.xigrid.x0) / self.xigrid.dx).round();
        if m < 0.0 || k < 0.0 || m >= self.rows() as f64 || k >= self.cols() as f64 {
            return None;
        }
        Some((m as usize, k as usize))
    }

    /// Energy centroid of `|F|²`.
    pub fn energy_centroid(&self) -> (f64, f64) {
        let (mut sx, mut sxi, mut s) = (0.0, 0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            let e = v.norm_sqr();
            let (x, xi) = self.point(i);
            sx += x * e;
            sxi += xi * e;
            s += e;
        }
        if s == 0.0 {
            (0.0, 0.0)
        } else {
            (sx / s, sxi / s)
        }
    }
}

/// Two-dimensional scaled transform; the result lives on the product of the dual grids.
pub fn fourier_transform_2d(field: &PhaseSpaceField, exec: Exec) -> PhaseSpaceField {
    let (rows, cols) = (field.rows(), field.cols());
    let mut data = field.values.clone();
    Transform::forward(field.xigrid.x0, field.xigrid.dx, cols).apply_rows(&mut data, cols, exec);
    let mut t = transpose(&data, rows, cols, exec);
    Transform::forward(field.xgrid.x0, field.xgrid.dx, rows).apply_rows(&mut t, rows, exec);
    PhaseSpaceField {
        xgrid: field.xgrid.dual(),
        xigrid: field.xigrid.dual(),
        values: transpose(&t, cols, rows, exec),
    }
}

/// Inverse of [`fourier_transform_2d`] onto the given centered grids.
pub fn inverse_fourier_transform_2d(
    field: &PhaseSpaceField,
    xgrid: GridSpec,
    xigrid: GridSpec,
    exec: Exec,
) -> PhaseSpaceField {
    let (rows, cols) = (field.rows(), field.cols());
    let mut data = field.values.clone();
    Transform::inverse(xigrid.x0, xigrid.dx, cols).apply_rows(&mut data, cols, exec);
    let mut t = transpose(&data, rows, cols, exec);
    Transform::inverse(xgrid.x0, xgrid.dx, rows).apply_rows(&mut t, rows, exec);
    PhaseSpaceField {
        xgrid,
        xigrid,
        values: transpose(&t, cols, rows, exec),
    }
}

/// Centered (periodic) convolution `∬ a(y) b(z − y) dy` of two fields on the same grid.
pub fn convolve_2d(a: &PhaseSpaceField, b: &PhaseSpaceField, exec: Exec) -> Result<PhaseSpaceField> {
    if !a.same_grid(b) {
        return param("convolution operands live on different grids");
    }
    a.xgrid.require_centered("convolution")?;
    a.xigrid.require_centered("convolution")?;
    let mut fa = fourier_transform_2d(a, exec);
    let fb = fourier_transform_2d(b, exec);
    fa.values.iter_mut().zip(&fb.values).for_each(|(x, y)| *x *= y);
    Ok(inverse_fourier_transform_2d(&fa, a.xgrid, a.xigrid, exec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(x: f64) -> Complex64 {
        Complex64::new((-x * x / 2.0).exp(), 0.0)
    }

    #[test]
    fn dual_grid_layout() {
        let g = GridSpec::standard();
        let d = g.dual();
        assert!((d.dx - 2.0 * PI / 40.0).abs() < 1e-15);
        assert!(d.is_centered() && g.is_centered());
        assert!((d.dual().dx - g.dx).abs() < 1e-15);
        assert!(GridSpec::new(0.0, 1.0, 100).is_err());
    }

    #[test]
    fn gaussian_transform_closed_form() {
        let g = GridSpec::standard();
        let f = SampledSignal::from_fn(g, gauss);
        let hat = fourier_transform(&f).unwrap();
        let err = (0..g.m)
            .map(|k| {
                let xi = hat.grid.point(k);
                (hat.values[k] - (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp()).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn parseval() {
        let g = GridSpec::standard();
        let f = make_signal(&"hermite:3".parse().unwrap(), g).unwrap();
        let hat = fourier_transform(&f).unwrap();
        let lhs = hat.l2_norm().powi(2);
        let rhs = 2.0 * PI * f.l2_norm().powi(2);
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
    }

    #[test]
    fn round_trip_non_centered() {
        let g = GridSpec::new(-17.5, 0.04, 1024).unwrap();
        let f = SampledSignal::from_fn(g, |x| gauss(x - 1.0) * Complex64::from_polar(1.0, 0.3 * x));
        let hat = fourier_transform(&f).unwrap();
        let back = inverse_fourier_transform_onto(&hat, g).unwrap();
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!((a - b).norm() < 1e-12);
        }
        let centered = inverse_fourier_transform(&hat).unwrap();
        assert!(centered.grid.is_centered());
    }

    #[test]
    fn guard_rejects_truncated_signal() {
        let g = GridSpec::symmetric(3.0, 256).unwrap();
        let f = SampledSignal::from_fn(g, gauss);
        assert!(matches!(fourier_transform(&f), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn coarse_grid_fails_spectral_guard() {
        let g = GridSpec::symmetric(20.0, 64).unwrap();
        let f = make_signal(&SignalKind::unit_gaussian(), g).unwrap();
        assert!(matches!(f.check_resolved("g"), Err(Error::Aliasing { .. })));
        let g = GridSpec::standard();
        make_signal(&SignalKind::unit_gaussian(), g).unwrap().check_resolved("g").unwrap();
    }

    #[test]
    fn refine_keeps_nodes_and_interpolates() {
        let g = GridSpec::standard();
        let kind: SignalKind = "gaussian:mod=1.5".parse().unwrap();
        let f = make_signal(&kind, g).unwrap();
        for r in [1, 2, 4, 8] {
            let fine = refine(&f, r).unwrap();
            assert_eq!(fine.len(), g.m * r);
            for j in 0..g.m {
                assert!((fine.values[j * r] - f.values[j]).norm() < 1e-10);
            }
            for (j, v) in fine.values.iter().enumerate() {
                assert!((v - kind.eval(fine.grid.point(j))).norm() < 1e-10);
            }
        }
        assert!(refine(&f, 3).is_err());
    }

    #[test]
    fn signal_parsing() {
        let k: SignalKind = "gaussian:c=1.5,w=0.8,mod=2".parse().unwrap();
        assert_eq!(k.to_string(), "gaussian:c=1.5,w=0.8,h=1,chirp=0,mod=2");
        assert_eq!(k.to_string().parse::<SignalKind>().unwrap(), k);
        assert_eq!("hermite:3".parse::<SignalKind>().unwrap(), SignalKind::Hermite(3));
        assert_eq!("two_gaussian:s=2".parse::<SignalKind>().unwrap(), SignalKind::TwoGaussian(2.0));
        assert!("hermite:7".parse::<SignalKind>().is_err());
        assert!("gaussian:w=-1".parse::<SignalKind>().is_err());
        assert!("boxcar".parse::<SignalKind>().is_err());
    }

    #[test]
    fn hermite_symmetry() {
        let h1 = SignalKind::Hermite(1);
        assert!((h1.eval(0.7) + h1.eval(-0.7)).norm() < 1e-15);
        assert!((h1.eval(1.0).re - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((hermite_poly(4, 0.5) - (16.0 * 0.0625 - 48.0 * 0.25 + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn two_gaussian_norms() {
        let g = GridSpec::symmetric(60.0, 4096).unwrap();
        let f = make_signal(&SignalKind::TwoGaussian(2.0), g).unwrap();
        let hat = fourier_transform(&f).unwrap();
        let energy = f.l2_norm().powi(2);
        let ratio = f.max_abs() * hat.max_abs() / energy;
        // ‖f‖∞ = s²+1 and ‖f̂‖∞ = (1+s²)√(2π), both at the origin
        let (s, s4) = (2.0f64, 16.0f64);
        let exact_energy = 2.0 * s * s * PI.sqrt() + 2.0 * s * s * (2.0 * PI / (s4 + 1.0 / s4)).sqrt();
        assert!((energy - exact_energy).abs() < 1e-8 * exact_energy);
        assert!((ratio - 25.0 * (2.0 * PI).sqrt() / exact_energy).abs() < 1e-8);
    }

    #[test]
    fn reflection_of_odd_signal() {
        let g = GridSpec::standard();
        let f = make_signal(&SignalKind::Hermite(1), g).unwrap();
        let r = f.reflect().unwrap();
        for j in 1..g.m {
            assert!((r.values[j] + f.values[j]).norm() < 1e-14);
        }
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let g = GridSpec::symmetric(8.0, 32).unwrap();
        let a = PhaseSpaceField::from_fn(g, g, |x, y| Complex64::new((-x * x - y * y).exp(), 0.0));
        let b = PhaseSpaceField::from_fn(g, g, |x, y| Complex64::new((-(x - 0.5).powi(2) - 2.0 * y * y).exp(), x));
        let c = convolve_2d(&a, &b, Exec::Sequential).unwrap();
        let q = g.dx * g.dx;
        for (m, k) in [(16, 16), (10, 20), (3, 28)] {
            let mut direct = Complex64::new(0.0, 0.0);
            for i in 0..32 {
                for j in 0..32 {
                    let (ii, jj) = ((m + 48 - i) % 32, (k + 48 - j) % 32);
                    direct += a.get(i, j) * b.get(ii, jj) * q;
                }
            }
            assert!((direct - c.get(m, k)).norm() < 1e-12, "{m},{k}");
        }
    }

    #[test]
    fn two_dimensional_round_trip() {
        let g = GridSpec::symmetric(6.0, 64).unwrap();
        let f = PhaseSpaceField::from_fn(g, g.dual(), |x, y| Complex64::new((-x * x).exp(), (-y * y).exp()));
        let hat = fourier_transform_2d(&f, Exec::Parallel);
        let back = inverse_fourier_transform_2d(&hat, f.xgrid, f.xigrid, Exec::Sequential);
        assert!(back.max_abs_difference(&f) < 1e-12);
    }
}
