//! Closed-form and structural checks of the transforms: Gaussian oracles,
//! inversion, the calibrated identities between representations, Moyal's
//! identity and quadratic homogeneity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{fourier_transform, make_signal, GridSpec, PhaseSpaceField, SampledSignal, SignalKind};
use crate::tfr::{
    born_jordan, bj_kernel, cohen_apply, fundamental_identity_residual, rihaczek, spectrogram,
    spectrogram_wigner_residual, stft, stft_inverse, tau_wigner, wigner, CohenKernel, ConventionRegistry, KernelSpec,
    BJ_NODES,
};

/// How a check value is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Absolute,
    Relative,
}

/// One named residual against its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub measure: Measure,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64, measure: Measure) -> Self {
        IdentityCheck {
            name: name.into(),
            value,
            tolerance,
            measure,
            pass: value <= tolerance,
        }
    }
}

fn max_abs_error(field: &PhaseSpaceField, exact: impl Fn(f64, f64) -> Complex64) -> f64 {
    (0..field.values.len())
        .map(|i| {
            let (x, xi) = field.point(i);
            (field.values[i] - exact(x, xi)).norm()
        })
        .fold(0.0, f64::max)
}

fn relative_l2(a: &SampledSignal, b: &SampledSignal) -> f64 {
    let err: f64 = a.values.iter().zip(&b.values).map(|(p, q)| (p - q).norm_sqr()).sum();
    let norm: f64 = b.values.iter().map(|q| q.norm_sqr()).sum();
    (err / norm).sqrt()
}

/// τ-Wigner transform of the unit Gaussian.
pub fn tau_wigner_of_gaussian(x: f64, xi: f64, tau: f64) -> Complex64 {
    let (a, b) = (tau, 1.0 - tau);
    let s = a * a + b * b;
    let z = Complex64::new((a - b) * x, xi);
    (z * z / (2.0 * s)).exp() * (-x * x).exp() * (2.0 * PI / s).sqrt()
}

/// Transforms of the unit Gaussian against their closed forms.
pub fn closed_form_suite(grid: GridSpec) -> Result<Vec<IdentityCheck>> {
    const TOL: f64 = 1e-6;
    let g = make_signal(&SignalKind::unit_gaussian(), grid)?;
    let hat = fourier_transform(&g)?;
    let ft_err = hat
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let xi = hat.grid.point(k);
            (v - (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp()).norm()
        })
        .fold(0.0, f64::max);
    let v = stft(&g, &g)?;
    let stft_err = max_abs_error(&v, |x, xi| {
        Complex64::from_polar(PI.sqrt() * (-(x * x + xi * xi) / 4.0).exp(), -x * xi / 2.0)
    });
    let wig_err = max_abs_error(&wigner(&g)?, |x, xi| {
        Complex64::new(2.0 * PI.sqrt() * (-x * x - xi * xi).exp(), 0.0)
    });
    let tau_err = max_abs_error(&tau_wigner(&g, 0.25, 4)?, |x, xi| tau_wigner_of_gaussian(x, xi, 0.25));
    let r_norm = rihaczek(&g)?.l2_norm();
    let r_err = (r_norm - (2.0 * PI).sqrt() * g.l2_norm().powi(2)).abs();
    Ok(vec![
        IdentityCheck::new("fourier_transform_gaussian", ft_err, TOL, Measure::Absolute),
        IdentityCheck::new("stft_gaussian", stft_err, TOL, Measure::Absolute),
        IdentityCheck::new("wigner_gaussian", wig_err, TOL, Measure::Absolute),
        IdentityCheck::new("tau_wigner_gaussian_0.25", tau_err, TOL, Measure::Absolute),
        IdentityCheck::new("rihaczek_norm_gaussian", r_err, TOL, Measure::Absolute),
    ])
}

/// `Wig f(x, ξ) = 2 e^{2ixξ} V_{f̃} f(2x, 2ξ)`, compared where `(2x, 2ξ)` is a grid node.
pub fn wigner_stft_residual(f: &SampledSignal) -> Result<f64> {
    let w = wigner(f)?;
    let v = stft(f, &f.reflect()?)?;
    let (rows, cols) = (w.rows(), w.cols());
    let (hr, hc) = ((rows / 2) as isize, (cols / 2) as isize);
    let mut err: f64 = 0.0;
    for m in 0..rows {
        let m2 = 2 * m as isize - hr;
        if !(0..rows as isize).contains(&m2) {
            continue;
        }
        for k in 0..cols {
            let k2 = 2 * k as isize - hc;
            if !(0..cols as isize).contains(&k2) {
                continue;
            }
            let (x, xi) = w.point(m * cols + k);
            let rhs = 2.0 * Complex64::from_polar(1.0, 2.0 * x * xi) * v.get(m2 as usize, k2 as usize);
            err = err.max((w.get(m, k) - rhs).norm());
        }
    }
    Ok(err)
}

/// Largest relative deviation of `T(cf)` from `|c|² T(f)` over the representations,
/// for `trials` seeded random complex `c`.
pub fn homogeneity_residual(f: &SampledSignal, conventions: &ConventionRegistry, seed: u64, trials: usize) -> Result<f64> {
    let grid = f.grid;
    let g = make_signal(&SignalKind::unit_gaussian(), grid)?;
    let gauss = CohenKernel::build(&KernelSpec::Gaussian { c: 1.0, d: 1.0 }, grid, grid.dual())?;
    let bj = bj_kernel(grid, grid.dual(), conventions)?;
    let reps = |s: &SampledSignal| -> Result<Vec<PhaseSpaceField>> {
        Ok(vec![
            spectrogram(s, &g)?,
            rihaczek(s)?,
            tau_wigner(s, 0.25, 4)?,
            wigner(s)?,
            born_jordan(s, BJ_NODES)?,
            cohen_apply(&gauss, s)?,
            cohen_apply(&bj, s)?,
        ])
    };
    let base = reps(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let scaled = reps(&f.scale(c))?;
        for (a, b) in scaled.iter().zip(&base) {
            let expected = b.map(|v| v * c.norm_sqr());
            worst = worst.max(a.max_abs_difference(&expected) / expected.max_abs());
        }
    }
    Ok(worst)
}

/// The identities between representations, on `grid` with the given calibration.
pub fn identity_suite(grid: GridSpec, conventions: &ConventionRegistry, seed: u64) -> Result<Vec<IdentityCheck>> {
    let g = make_signal(&SignalKind::unit_gaussian(), grid)?;
    let mut checks = Vec::new();
    for kind in ["gaussian", "hermite:2", "gaussian:chirp=0.5"] {
        let f = make_signal(&kind.parse()?, grid)?;
        let back = stft_inverse(&stft(&f, &g)?, &g)?;
        checks.push(IdentityCheck::new(format!("stft_inversion[{kind}]"), relative_l2(&back, &f), 1e-6, Measure::Relative));
    }
    let c = 1.0 / (2.0 * PI);
    checks.push(IdentityCheck::new(
        "spectrogram_wigner_constant",
        (conventions.c_spwig / c - 1.0).abs(),
        1e-5,
        Measure::Relative,
    ));
    for kind in ["gaussian", "hermite:1"] {
        let f = make_signal(&kind.parse()?, grid)?;
        let (_, r) = spectrogram_wigner_residual(&f, &g, Some(c))?;
        checks.push(IdentityCheck::new(format!("spectrogram_wigner[{kind}]"), r, 1e-5, Measure::Relative));
    }
    checks.push(IdentityCheck::new(
        "fundamental_identity_modulus",
        fundamental_identity_residual(&g, &g)?,
        1e-6,
        Measure::Absolute,
    ));
    checks.push(IdentityCheck::new("wigner_stft[gaussian]", wigner_stft_residual(&g)?, 1e-5, Measure::Absolute));
    let bj = bj_kernel(grid, grid.dual(), conventions)?;
    for kind in ["gaussian", "hermite:1"] {
        let f = make_signal(&kind.parse()?, grid)?;
        let gap = cohen_apply(&bj, &f)?.relative_l2_distance(&born_jordan(&f, BJ_NODES)?);
        checks.push(IdentityCheck::new(format!("born_jordan_paths[{kind}]"), gap, 1e-3, Measure::Relative));
    }
    for kind in ["gaussian", "hermite:1", "gaussian:c=1.5,w=0.8,mod=2"] {
        let f = make_signal(&kind.parse()?, grid)?;
        let expected = (2.0 * PI).sqrt() * f.l2_norm().powi(2);
        let moyal = (wigner(&f)?.l2_norm() - expected).abs() / expected;
        checks.push(IdentityCheck::new(format!("moyal[{kind}]"), moyal, 1e-6, Measure::Relative));
    }
    // homogeneity is a structural property; a coarse grid keeps the repeated Born-Jordan evaluations cheap
    let coarse = GridSpec::symmetric(12.0, 256)?;
    let f = make_signal(&"gaussian:c=0.5,chirp=0.2,mod=1".parse()?, coarse)?;
    let coarse_conv = ConventionRegistry::calibrate(coarse)?;
    checks.push(IdentityCheck::new(
        "quadratic_homogeneity",
        homogeneity_residual(&f, &coarse_conv, seed, 3)?,
        1e-10,
        Measure::Relative,
    ));
    Ok(checks)
}

/// Both suites on the standard grid.
pub fn verify_identities(seed: u64) -> Result<Vec<IdentityCheck>> {
    let grid = GridSpec::standard();
    let mut checks = closed_form_suite(grid)?;
    checks.extend(identity_suite(grid, ConventionRegistry::standard()?, seed)?);
    Ok(checks)
}
