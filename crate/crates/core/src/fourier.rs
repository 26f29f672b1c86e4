//! Quadrature-scaled DFT kernels on centered frequency grids.
//!
//! For samples `f_j` at `x_j = x0 + j dx`, the forward map returns
//! `F_k = dx Σ_j f_j e^{-i x_j ξ_k}` at `ξ_k = (k - M/2) dξ`, `dξ = 2π/(M dx)`.
//! The inverse evaluates `(dξ/2π) Σ_k F_k e^{i x_j ξ_k}` on any grid with the
//! matching step.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec::Exec;

type Plan = Arc<dyn Fft<f64>>;

struct Plans {
    planner: FftPlanner<f64>,
    cache: HashMap<(usize, bool), Plan>,
}

fn plans() -> &'static Mutex<Plans> {
    static PLANS: OnceLock<Mutex<Plans>> = OnceLock::new();
    PLANS.get_or_init(|| {
        Mutex::new(Plans {
            planner: FftPlanner::new(),
            cache: HashMap::new(),
        })
    })
}

pub(crate) fn plan(m: usize, forward: bool) -> Plan {
    let mut p = plans().lock().expect("fft plan cache poisoned");
    if let Some(f) = p.cache.get(&(m, forward)) {
        return f.clone();
    }
    let f = if forward {
        p.planner.plan_fft_forward(m)
    } else {
        p.planner.plan_fft_inverse(m)
    };
    p.cache.insert((m, forward), f.clone());
    f
}

/// `e^{-i x0 ξ_k}` for all k. Exact when `x0` sits an integer number of steps
/// from the centered origin.
pub(crate) fn shift_phases(x0: f64, dx: f64, m: usize, sign: f64) -> Vec<Complex64> {
    let half = (m / 2) as i64;
    let offset = x0 / dx + half as f64;
    if (offset - offset.round()).abs() < 1e-9 {
        let c = offset.round() as i64 - half;
        let mm = m as i64;
        (0..m as i64)
            .map(|k| {
                let r = (c * (k - half)).rem_euclid(mm);
                Complex64::from_polar(1.0, -sign * 2.0 * PI * r as f64 / m as f64)
            })
            .collect()
    } else {
        let dxi = 2.0 * PI / (m as f64 * dx);
        (0..m)
            .map(|k| {
                let xi = (k as f64 - half as f64) * dxi;
                Complex64::from_polar(1.0, -sign * x0 * xi)
            })
            .collect()
    }
}

/// Reusable forward or inverse transform for one sample layout.
pub(crate) struct Transform {
    fft: Plan,
    phases: Vec<Complex64>,
    scale: f64,
    forward: bool,
}

impl Transform {
    /// Forward transform of samples on `(x0, dx, m)`.
    pub fn forward(x0: f64, dx: f64, m: usize) -> Self {
        Transform {
            fft: plan(m, true),
            phases: shift_phases(x0, dx, m, 1.0),
            scale: dx,
            forward: true,
        }
    }

    /// Inverse transform landing on `(x0, dx, m)`.
    pub fn inverse(x0: f64, dx: f64, m: usize) -> Self {
        let dxi = 2.0 * PI / (m as f64 * dx);
        Transform {
            fft: plan(m, false),
            phases: shift_phases(x0, dx, m, -1.0),
            scale: dxi / (2.0 * PI),
            forward: false,
        }
    }

    pub fn apply(&self, buf: &mut [Complex64]) {
        if self.forward {
            for v in buf.iter_mut().skip(1).step_by(2) {
                *v = -*v;
            }
            self.fft.process(buf);
            for (v, p) in buf.iter_mut().zip(&self.phases) {
                *v *= p * self.scale;
            }
        } else {
            for (v, p) in buf.iter_mut().zip(&self.phases) {
                *v *= p;
            }
            self.fft.process(buf);
            for (j, v) in buf.iter_mut().enumerate() {
                let s = if j % 2 == 0 { self.scale } else { -self.scale };
                *v *= s;
            }
        }
    }

    /// Applies the transform to every row of a row-major array.
    pub fn apply_rows(&self, data: &mut [Complex64], row_len: usize, exec: Exec) {
        exec.for_each_row(data, row_len, |_, row| self.apply(row));
    }
}

/// Out-of-place transpose of a `rows × cols` row-major array.
pub(crate) fn transpose(data: &[Complex64], rows: usize, cols: usize, exec: Exec) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    exec.for_each_row(&mut out, rows, |c, col| {
        for (r, v) in col.iter_mut().enumerate() {
            *v = data[r * cols + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_float_phases_agree() {
        let m = 64;
        let dx = 0.3;
        let exact = shift_phases(-(m as f64) / 2.0 * dx, dx, m, 1.0);
        let dxi = 2.0 * PI / (m as f64 * dx);
        for (k, p) in exact.iter().enumerate() {
            let xi = (k as f64 - 32.0) * dxi;
            let f = Complex64::from_polar(1.0, (m as f64) / 2.0 * dx * xi);
            assert!((p - f).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let m = 128;
        let (x0, dx) = (-7.3, 0.11);
        let data: Vec<Complex64> = (0..m)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()))
            .collect();
        let mut buf = data.clone();
        Transform::forward(x0, dx, m).apply(&mut buf);
        Transform::inverse(x0, dx, m).apply(&mut buf);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_direct_sum() {
        let m = 32;
        let (x0, dx) = (-2.0, 0.125);
        let data: Vec<Complex64> = (0..m).map(|j| Complex64::new(j as f64, -(j as f64).sqrt())).collect();
        let mut buf = data.clone();
        Transform::forward(x0, dx, m).apply(&mut buf);
        let dxi = 2.0 * PI / (m as f64 * dx);
        for (k, got) in buf.iter().enumerate() {
            let xi = (k as f64 - 16.0) * dxi;
            let direct: Complex64 = data
                .iter()
                .enumerate()
                .map(|(j, f)| f * Complex64::from_polar(dx, -(x0 + j as f64 * dx) * xi))
                .sum();
            assert!((direct - got).norm() < 1e-11);
        }
    }

    #[test]
    fn transpose_round_trip() {
        let data: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let t = transpose(&data, 3, 4, Exec::Sequential);
        assert_eq!(t[1].re, 4.0);
        assert_eq!(transpose(&t, 4, 3, Exec::Parallel), data);
    }
}
