//! Weight functions, their structural constants and the sampled condition checks.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::special::{golden_max, integrate_to_infinity};

/// Tolerance used when certifying the weight conditions on a grid.
pub const CONDITION_TOL: f64 = 1e-12;

type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Log,
    Power(f64),
    Custom(WeightFn),
}

/// A weight ω on [0, ∞) together with the constants the estimates consume.
///
/// Evaluation at a point of ℝⁿ uses the Euclidean norm of that point.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    kind: Kind,
    k: f64,
    a: f64,
    b: f64,
    gamma_prime: bool,
    vanishes_on_unit: bool,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.name)
            .field("k", &self.k)
            .field("a", &self.a)
            .field("b", &self.b)
            .finish()
    }
}

impl WeightFunction {
    /// `max(0, log((1+t)/2))`.
    pub fn log() -> Self {
        WeightFunction {
            name: "log".into(),
            kind: Kind::Log,
            k: 1.0,
            a: -std::f64::consts::LN_2,
            b: 1.0,
            gamma_prime: false,
            vanishes_on_unit: true,
        }
    }

    /// `max(0, t^s - 1)` for `0 < s < 1`.
    pub fn power(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return param(format!("power weight exponent must lie in (0,1), got {s}"));
        }
        Ok(WeightFunction {
            name: format!("power:{s}"),
            kind: Kind::Power(s),
            k: 2f64.powf(s),
            a: power_weight_offset(s),
            b: 1.0,
            gamma_prime: true,
            vanishes_on_unit: true,
        })
    }

    /// A user supplied weight. The constants are taken on trust; run
    /// [`check_weight_conditions`] to certify them.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        k: f64,
        a: f64,
        b: f64,
    ) -> Self {
        let eval: WeightFn = Arc::new(eval);
        let vanishes_on_unit = (0..=100).all(|i| eval(i as f64 / 100.0) == 0.0);
        WeightFunction {
            name: name.into(),
            kind: Kind::Custom(eval),
            k,
            a,
            b,
            gamma_prime: false,
            vanishes_on_unit,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn gamma_prime(&self) -> bool {
        self.gamma_prime
    }
    pub fn vanishes_on_unit(&self) -> bool {
        self.vanishes_on_unit
    }

    /// ω(t) for t ≥ 0; negative arguments are reflected.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.kind {
            Kind::Log => {
                if t <= 1.0 {
                    0.0
                } else {
                    (0.5 * (1.0 + t)).ln()
                }
            }
            Kind::Power(s) => {
                if t <= 1.0 {
                    0.0
                } else {
                    t.powf(*s) - 1.0
                }
            }
            Kind::Custom(f) => f(t),
        }
    }

    /// ω(|(x, ξ)|).
    #[inline]
    pub fn eval2(&self, x: f64, xi: f64) -> f64 {
        self.eval(x.hypot(xi))
    }

    /// ∫₀^∞ r^{dim-1} e^{-s ω(r)} dr for `dim` in {1, 2}; `None` when it diverges.
    pub fn radial_exp_integral(&self, s: f64, dim: u32) -> Option<f64> {
        let d = dim as f64;
        if !(s * self.b > d) {
            return None;
        }
        match self.kind {
            Kind::Log => Some(match dim {
                1 => 1.0 + 2.0 / (s - 1.0),
                _ => 0.5 + 4.0 / (s - 2.0) - 2.0 / (s - 1.0),
            }),
            _ => {
                let inner = if self.vanishes_on_unit {
                    1.0 / d
                } else {
                    let (x, w) = crate::special::gauss_legendre_on(64, 0.0, 1.0);
                    x.iter()
                        .zip(&w)
                        .map(|(r, wt)| wt * r.powf(d - 1.0) * (-s * self.eval(*r)).exp())
                        .sum()
                };
                let outer = integrate_to_infinity(
                    |r| r.powf(d - 1.0) * (-s * self.eval(r)).exp(),
                    1.0,
                    1e-17,
                );
                Some(inner + outer)
            }
        }
    }

    /// log ‖e^{-μω}‖ in L^q(ℝ^dim), `q = None` meaning q = ∞.
    pub fn log_neg_exp_norm(&self, mu: f64, q: Option<f64>, dim: u32) -> Result<f64> {
        let Some(q) = q else {
            return Ok(0.0);
        };
        let surface = if dim == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
        match self.radial_exp_integral(q * mu, dim) {
            Some(v) => Ok((surface * v).ln() / q),
            None => Err(Error::Infeasible {
                name: "mu".into(),
                value: mu,
                threshold: dim as f64 / (self.b * q),
            }),
        }
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn power_weight_offset(s: f64) -> f64 {
    let h = |t: f64| t.powf(s) - 1.0 - t.ln_1p();
    // scan a log grid for the bracket, then refine
    let mut best = (0.0, h(0.0));
    let samples: Vec<f64> = (0..=4000).map(|i| 10f64.powf(-6.0 + 18.0 * i as f64 / 4000.0)).collect();
    let mut best_i = None;
    for (i, &t) in samples.iter().enumerate() {
        let v = h(t);
        if v < best.1 {
            best = (t, v);
            best_i = Some(i);
        }
    }
    if let Some(i) = best_i {
        let lo = samples[i.saturating_sub(1)];
        let hi = samples[(i + 1).min(samples.len() - 1)];
        let (_, neg) = golden_max(|t| -h(t), lo, hi, 1e-14);
        best.1 = best.1.min(-neg);
    }
    best.1
}

/// Parses `log` or `power:<s>`.
pub fn builtin_weight(name: &str) -> Result<WeightFunction> {
    let name = name.trim();
    if name == "log" {
        return Ok(WeightFunction::log());
    }
    if let Some(s) = name.strip_prefix("power:") {
        let s: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("bad power exponent in '{name}'")))?;
        return WeightFunction::power(s);
    }
    param(format!("unknown weight '{name}' (expected log or power:<s>)"))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub condition: String,
    pub pass: bool,
    /// Minimum over the grid of (right side − left side).
    pub margin: f64,
    pub violations: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightConditionReport {
    pub weight: String,
    pub grid_len: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    pub conditions: Vec<ConditionResult>,
    pub gamma_prime: bool,
}

impl WeightConditionReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == name)
    }
}

/// `0` followed by `n` log-spaced points on `[1e-4, 1e8]`.
pub fn default_condition_grid() -> Vec<f64> {
    let n = 2400;
    std::iter::once(0.0)
        .chain((0..n).map(|i| 10f64.powf(-4.0 + 12.0 * i as f64 / (n - 1) as f64)))
        .collect()
}

fn condition(name: &str, slack: impl Iterator<Item = (f64, f64)>) -> ConditionResult {
    let mut margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (t, s) in slack {
        if s.is_nan() {
            violations.push(t);
            continue;
        }
        margin = margin.min(s);
        if s < -CONDITION_TOL {
            violations.push(t);
        }
    }
    if !margin.is_finite() {
        margin = if violations.is_empty() { 0.0 } else { f64::MIN };
    }
    ConditionResult {
        condition: name.into(),
        pass: violations.is_empty(),
        margin,
        violations,
    }
}

/// Samples every structural condition of `w` on `grid`.
pub fn check_weight_conditions(w: &WeightFunction, grid: &[f64]) -> Result<WeightConditionReport> {
    if grid.is_empty() || grid[0] != 0.0 || grid.windows(2).any(|p| p[1] <= p[0]) {
        return param("condition grid must start at 0 and increase strictly");
    }
    let vals: Vec<f64> = grid.iter().map(|&t| w.eval(t)).collect();
    let mut out = Vec::new();

    out.push(condition(
        "monotone",
        std::iter::once((0.0, -vals[0].abs()))
            .chain(grid.windows(2).zip(vals.windows(2)).map(|(t, v)| (t[1], v[1] - v[0]))),
    ));
    out.push(condition(
        "alpha",
        grid.iter()
            .zip(&vals)
            .map(|(&t, &v)| (t, w.k * (1.0 + v) - w.eval(2.0 * t))),
    ));
    let t_max = *grid.last().unwrap();
    let beta_ratio = w.eval(t_max) / t_max;
    out.push(condition("beta", std::iter::once((t_max, 0.01 - beta_ratio))));
    out.push(condition(
        "gamma",
        grid.iter()
            .zip(&vals)
            .map(|(&t, &v)| (t, v - (w.a + w.b * t.ln_1p()))),
    ));
    // convexity of ω(e^u) on the positive part of the grid, checked as
    // non-decreasing slopes in u
    let pos: Vec<(f64, f64)> = grid
        .iter()
        .zip(&vals)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &v)| (t.ln(), v))
        .collect();
    out.push(condition(
        "delta",
        pos.windows(3).map(|p| {
            let s1 = (p[1].1 - p[0].1) / (p[1].0 - p[0].0);
            let s2 = (p[2].1 - p[1].1) / (p[2].0 - p[1].0);
            let scale = 1.0 + s1.abs().max(s2.abs());
            (p[1].0.exp(), (s2 - s1) / scale)
        }),
    ));
    if w.b <= 0.0 {
        out.iter_mut().filter(|c| c.condition == "gamma").for_each(|c| {
            c.pass = false;
            c.margin = c.margin.min(w.b);
        });
    }
    Ok(WeightConditionReport {
        weight: w.name.clone(),
        grid_len: grid.len(),
        grid_min: grid[0],
        grid_max: t_max,
        conditions: out,
        gamma_prime: w.gamma_prime,
    })
}

/// `sup_{t ≥ 0} (s t − ω(e^t))`.
pub fn young_conjugate(w: &WeightFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return param(format!("young conjugate needs s >= 0, got {s}"));
    }
    if !w.vanishes_on_unit {
        return param("young conjugate requires a weight vanishing on [0,1]");
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let phi = |t: f64| s * t - w.eval(t.exp());
    // the objective is concave; grow the bracket until it turns down
    let mut hi = 1.0;
    while phi(2.0 * hi) > phi(hi) {
        hi *= 2.0;
        if hi > 160.0 {
            return Err(Error::Numerical(format!(
                "young conjugate of {} at s={s} is unbounded on the sampled range",
                w.name
            )));
        }
    }
    let (_, v) = golden_max(phi, 0.0, 2.0 * hi, 1e-13);
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weight_vanishes_on_unit_interval() {
        let w = WeightFunction::log();
        assert_eq!(w.eval(1.0), 0.0);
        assert_eq!(w.eval(0.3), 0.0);
        assert!((w.eval(3.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_weight_doubling_bound() {
        let w = WeightFunction::log();
        for i in 0..=10_000 {
            let t = i as f64;
            assert!(w.eval(2.0 * t) - (1.0 + w.eval(t)) <= 1e-15, "t={t}");
        }
    }

    #[test]
    fn power_weight_constants() {
        let w = WeightFunction::power(0.5).unwrap();
        assert!((w.k() - std::f64::consts::SQRT_2).abs() < 1e-15);
        // s = 1/2: t^s - 1 - log(1+t) has a nonnegative derivative, so the minimum is at 0
        assert!((w.a() + 1.0).abs() < 1e-12);
        let r = check_weight_conditions(&w, &default_condition_grid()).unwrap();
        assert!(r.get("alpha").unwrap().margin >= 0.0);
        // small exponents push the minimum away from the origin
        let w = WeightFunction::power(0.1).unwrap();
        let brute = (0..1_000_000)
            .map(|i| {
                let t = 10f64.powf(-3.0 + 17.0 * i as f64 / 1e6);
                t.powf(0.1) - 1.0 - t.ln_1p()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(w.a() <= brute + 1e-9 && w.a() > brute - 1e-6);
    }

    #[test]
    fn power_exponent_validated() {
        assert!(matches!(WeightFunction::power(1.0), Err(Error::Parameter(_))));
        assert!(builtin_weight("power:0").is_err());
        assert!(builtin_weight("cosh").is_err());
        assert_eq!(builtin_weight("power:0.5").unwrap().name(), "power:0.5");
    }

    #[test]
    fn builtins_pass_all_conditions() {
        let grid = default_condition_grid();
        for w in [WeightFunction::log(), WeightFunction::power(0.5).unwrap()] {
            let r = check_weight_conditions(&w, &grid).unwrap();
            assert!(r.all_pass(), "{}: {:?}", w.name(), r);
        }
        assert!(WeightFunction::power(0.5).unwrap().gamma_prime());
    }

    #[test]
    fn zero_weight_fails_log_lower_bound() {
        let w = WeightFunction::custom("zero", |_| 0.0, 1.0, -1.0, 1.0);
        let r = check_weight_conditions(&w, &default_condition_grid()).unwrap();
        assert!(!r.get("gamma").unwrap().pass);
        assert!(!r.get("gamma").unwrap().violations.is_empty());
    }

    #[test]
    fn decreasing_weight_reports_monotonicity_failure() {
        let w = WeightFunction::custom("bad", |t| (-t).exp(), 1.0, -1.0, 1.0);
        let r = check_weight_conditions(&w, &default_condition_grid()).unwrap();
        assert!(!r.get("monotone").unwrap().pass);
    }

    #[test]
    fn quasi_subadditivity() {
        let ts: Vec<f64> = (0..120).map(|i| 10f64.powf(-2.0 + 7.0 * i as f64 / 119.0)).collect();
        for w in [WeightFunction::log(), WeightFunction::power(0.5).unwrap()] {
            for &a in &ts {
                for &b in &ts {
                    assert!(w.eval(a + b) <= w.k() * (1.0 + w.eval(a) + w.eval(b)) + 1e-12);
                }
            }
        }
    }

    fn brute_conjugate(w: &WeightFunction, s: f64, t_max: f64) -> f64 {
        (0..=1_000_000)
            .map(|i| {
                let t = t_max * i as f64 / 1e6;
                s * t - w.eval(t.exp())
            })
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn young_conjugate_matches_brute_force() {
        let w = WeightFunction::log();
        assert_eq!(young_conjugate(&w, 0.0).unwrap(), 0.0);
        let v = young_conjugate(&w, 0.75).unwrap();
        assert!((v - brute_conjugate(&w, 0.75, 40.0)).abs() < 1e-6);
        let p = WeightFunction::power(0.5).unwrap();
        let v = young_conjugate(&p, 2.0).unwrap();
        assert!((v - brute_conjugate(&p, 2.0, 20.0)).abs() < 1e-6);
        assert!(young_conjugate(&p, 2.0).unwrap() >= young_conjugate(&p, 1.0).unwrap());
    }

    #[test]
    fn young_conjugate_of_log_weight_diverges_past_slope_one() {
        let w = WeightFunction::log();
        assert!(matches!(young_conjugate(&w, 2.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn young_conjugate_is_convex() {
        let p = WeightFunction::power(0.5).unwrap();
        let ss: Vec<f64> = (0..40).map(|i| 0.1 * i as f64).collect();
        let v: Vec<f64> = ss.iter().map(|&s| young_conjugate(&p, s).unwrap()).collect();
        for w in v.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-9);
        }
    }

    #[test]
    fn lp_integral_converges() {
        // grid quadrature of e^{-λpω} over [-T, T]
        let quad = |w: &WeightFunction, e: f64, t: f64| {
            let n = 4_000_000usize;
            let h = 2.0 * t / n as f64;
            (0..n).map(|i| (-e * w.eval(-t + (i as f64 + 0.5) * h)).exp()).sum::<f64>() * h
        };
        let cases = [
            (WeightFunction::log(), 5.0),
            (WeightFunction::log(), 8.0),
            (WeightFunction::power(0.5).unwrap(), 1.2),
        ];
        for (w, e) in cases {
            let a = quad(&w, e, 1e3);
            let b = quad(&w, e, 2e3);
            assert!(b - a < 1e-8, "{} {e}: {}", w.name(), b - a);
        }
    }

    #[test]
    fn neg_exp_norm_matches_quadrature() {
        for w in [WeightFunction::log(), WeightFunction::power(0.5).unwrap()] {
            let s = 4.5;
            let closed = w.radial_exp_integral(s, 2).unwrap();
            let numeric = integrate_to_infinity(|r| r * (-s * w.eval(r)).exp(), 0.0, 1e-17);
            assert!((closed - numeric).abs() < 1e-9 * closed, "{}", w.name());
            let closed = w.radial_exp_integral(s, 1).unwrap();
            let numeric = integrate_to_infinity(|r| (-s * w.eval(r)).exp(), 0.0, 1e-17);
            assert!((closed - numeric).abs() < 1e-9 * closed);
        }
        assert!(WeightFunction::log().radial_exp_integral(2.0, 2).is_none());
        assert!(matches!(
            WeightFunction::log().log_neg_exp_norm(0.5, Some(2.0), 2),
            Err(Error::Infeasible { .. })
        ));
        assert_eq!(WeightFunction::log().log_neg_exp_norm(0.5, None, 2).unwrap(), 0.0);
    }
}
