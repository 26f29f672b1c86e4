use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use tfbounds_core::bounds::{BoundEngine, BoundParams};
use tfbounds_core::grid::{GridSpec, SampledSignal, SignalKind};
use tfbounds_core::report::SweepEntry;
use tfbounds_core::uncertainty::{
    donoho_stark_battery, local_up_battery, price_constant, verify_donoho_stark, verify_local_up, verify_price,
    verify_sprice, DsCaseId, LocalUpCase, LocalUpParams, SetSpec,
};
use tfbounds_core::weights::WeightFunction;

fn summarize(entries: &[SweepEntry]) -> Vec<String> {
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    for e in entries {
        match e {
            SweepEntry::Verdict(v) => {
                let slot = worst.entry(v.case_id.clone()).or_insert(f64::NEG_INFINITY);
                *slot = slot.max(v.log_ratio());
                if !v.pass {
                    failures.push(format!("{} {:?} {:?}", v.case_id, v.params, v.details));
                }
            }
            SweepEntry::Error(r) => failures.push(format!("{} {:?} {}", r.case_id, r.params, r.message)),
        }
    }
    for (c, r) in worst {
        eprintln!("{c}: max log ratio {r:.4}");
    }
    failures
}

#[test]
fn donoho_stark_battery_passes_on_hermite() {
    let start = Instant::now();
    let engine = BoundEngine::standard().unwrap();
    let entries = donoho_stark_battery(&engine, &["hermite:1".parse().unwrap()]);
    eprintln!("{} DS entries in {:?}", entries.len(), start.elapsed());
    let failures = summarize(&entries);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn local_up_battery_passes_on_chirp() {
    let start = Instant::now();
    let engine = BoundEngine::standard().unwrap();
    let entries = local_up_battery(&engine, &["gaussian:chirp=0.5".parse().unwrap()]);
    eprintln!("{} local entries in {:?}", entries.len(), start.elapsed());
    let failures = summarize(&entries);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn full_grid_gaussian_concentration() {
    let engine = BoundEngine::standard().unwrap();
    let g = engine.grid();
    let f = engine.prepare_kind(&SignalKind::unit_gaussian()).unwrap();
    let set = SetSpec::Rect {
        x: (g.x0 - g.dx / 2.0, g.x0 + g.m as f64 * g.dx - g.dx / 2.0),
        xi: (-20.0, 20.0),
    };
    let v = verify_donoho_stark(&engine, DsCaseId::P32a, &BoundParams::new(WeightFunction::log()), &f, &set).unwrap();
    assert!(v.pass);
    assert!((v.details["measure"] - 1600.0).abs() < 1e-9, "{}", v.details["measure"]);
    assert!((v.details["rho"] - 2.0 * PI).abs() < 1e-6, "{}", v.details["rho"]);
    let empty = verify_donoho_stark(&engine, DsCaseId::P32a, &BoundParams::new(WeightFunction::log()), &f, &SetSpec::Empty).unwrap();
    assert!(empty.pass);
    assert_eq!(empty.details["rho"], 0.0);
}

#[test]
fn superlevel_example() {
    let engine = BoundEngine::standard().unwrap();
    let f = engine.prepare_kind(&"hermite:1".parse().unwrap()).unwrap();
    let mut params = BoundParams::new(WeightFunction::log());
    params.tau = 0.25;
    let set: SetSpec = "level:tau_wigner:0.5".parse().unwrap();
    let v = verify_donoho_stark(&engine, DsCaseId::P36a, &params, &f, &set).unwrap();
    assert!(v.pass);
    assert!(v.details["measure"] > 0.0 && v.details["rho"] > 0.0);
}

#[test]
fn local_lhs_shrinks_on_nested_sets() {
    let engine = BoundEngine::standard().unwrap();
    let f = engine.prepare_kind(&"gaussian:chirp=0.5".parse().unwrap()).unwrap();
    let mut params = LocalUpParams::new(WeightFunction::log());
    params.alpha = Some(1.0);
    let mut last = f64::INFINITY;
    for r in [4.0, 3.0, 2.0, 1.0, 0.5, 0.25] {
        let set = SetSpec::Rect { x: (-r, r), xi: (-r, r) };
        let v = verify_local_up(&engine, LocalUpCase::P44ii, &params, &f, &set).unwrap();
        assert!(v.pass);
        assert!(v.log_lhs <= last);
        last = v.log_lhs;
    }
}

#[test]
fn p43_example() {
    let engine = BoundEngine::standard().unwrap();
    let f = engine.prepare_kind(&SignalKind::unit_gaussian()).unwrap();
    let mut params = LocalUpParams::new(WeightFunction::log());
    params.mu_prime = Some(1.2);
    params.alpha = Some(1.5);
    let v = verify_local_up(&engine, LocalUpCase::P43i, &params, &f, &SetSpec::Interval(-2.0, 2.0)).unwrap();
    assert!(v.pass);
    params.mu_prime = Some(0.9);
    assert!(verify_local_up(&engine, LocalUpCase::P43i, &params, &f, &SetSpec::Interval(-2.0, 2.0)).is_err());
}

#[test]
fn zero_signal_local_cases_pass() {
    let engine = BoundEngine::standard().unwrap();
    let f = engine.prepare("zero", SampledSignal::zeros(engine.grid())).unwrap();
    let params = LocalUpParams::new(WeightFunction::log());
    for case in LocalUpCase::ALL {
        if matches!(case, LocalUpCase::T41_1 | LocalUpCase::T41_2) {
            continue;
        }
        let set = match case.domain() {
            Some(tfbounds_core::uncertainty::SetDomain::PhaseSpace) => SetSpec::Rect { x: (-1.0, 1.0), xi: (-1.0, 1.0) },
            _ => SetSpec::Interval(-1.0, 1.0),
        };
        let v = verify_local_up(&engine, case, &params, &f, &set).unwrap();
        assert!(v.pass, "{case}");
    }
}

#[test]
fn price_inequalities_are_strict() {
    let grid = GridSpec::standard();
    for kind in ["gaussian", "hermite:1", "gaussian:chirp=0.5"] {
        let f = tfbounds_core::grid::make_signal(&kind.parse().unwrap(), grid).unwrap();
        for alpha in [0.75, 1.0, 2.0] {
            for set in ["rect:-1,1", "rect:-3,0.5", "empty"] {
                let (a, b) = verify_price(&f, &set.parse().unwrap(), alpha, None, None).unwrap();
                assert!(a.pass && b.pass, "{kind} {alpha} {set}");
                if set != "empty" {
                    assert!(a.tolerances.strict && b.tolerances.strict);
                    assert!(a.details["margin"] > 0.0 && b.details["margin"] > 0.0);
                }
            }
        }
        assert!(verify_sprice(&f, 1.0, None).unwrap().pass);
    }
    let zero = SampledSignal::zeros(grid);
    let v = verify_sprice(&zero, 1.0, Some(0.0)).unwrap();
    assert!(v.pass);
}

#[test]
fn sprice_center_scan_favours_centroid() {
    let grid = GridSpec::standard();
    let f = tfbounds_core::grid::make_signal(&"gaussian:c=1.5".parse().unwrap(), grid).unwrap();
    let best = (-40..=40)
        .map(|i| i as f64 * 0.1)
        .min_by(|a, b| {
            let ra = verify_sprice(&f, 1.0, Some(*a)).unwrap().log_rhs;
            let rb = verify_sprice(&f, 1.0, Some(*b)).unwrap().log_rhs;
            ra.total_cmp(&rb)
        })
        .unwrap();
    assert!((best - 1.5).abs() < 0.11, "{best}");
}

// ‖f‖₁² / (‖f‖₂^{2−1/α} ‖t^α f‖₂^{1/α}) at the extremal f = 1/(1 + |t|^{2α})
#[test]
fn price_constant_matches_extremal_ratio() {
    for alpha in [1.0, 2.0] {
        let (n, half) = (1_000_000usize, 2000.0);
        let dt = 2.0 * half / n as f64;
        let (mut l1, mut l2, mut mom) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let t = -half + (i as f64 + 0.5) * dt;
            let f = 1.0 / (1.0 + t.abs().powf(2.0 * alpha));
            l1 += f * dt;
            l2 += f * f * dt;
            mom += t.abs().powf(2.0 * alpha) * f * f * dt;
        }
        let ratio = l1 * l1 / (l2.sqrt().powf(2.0 - 1.0 / alpha) * mom.sqrt().powf(1.0 / alpha));
        let k = price_constant(1, alpha).unwrap();
        assert!((ratio / k - 1.0).abs() < 0.01, "alpha={alpha}: {ratio} vs {k}");
    }
}
