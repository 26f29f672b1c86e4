//! One function per subcommand. Each returns the run's outcome after writing its artifacts.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::Context;
use serde::Serialize;
use tfbounds_core::bounds::{counterexample_scan, BoundEngine};
use tfbounds_core::export::{scan_csv, sweep_csv, Heatmap};
use tfbounds_core::grid::{make_signal, GridSpec};
use tfbounds_core::identities::{closed_form_suite, identity_suite, IdentityCheck};
use tfbounds_core::report::{ErrorRecord, ParamValue, SweepEntry};
use tfbounds_core::tfr::ConventionRegistry;
use tfbounds_core::uncertainty::{donoho_stark_sweep, local_up_sweep};
use tfbounds_core::{Error, Exec};

use crate::config::RunConfig;

/// How a run ended; ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Infeasible,
    Defect,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Defect => 2,
            Outcome::Infeasible => 3,
        }
    }

    fn of_error_kind(kind: &str) -> Self {
        match kind {
            "numerical" | "convention" => Outcome::Defect,
            _ => Outcome::Infeasible,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub outcome: Outcome,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    summary: &'a Summary,
    results: T,
}

fn write_artifact(path: &str, bytes: &[u8]) -> anyhow::Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        out.flush()?;
        Ok(())
    } else {
        std::fs::write(path, bytes).with_context(|| format!("writing {path}"))
    }
}

fn json<T: Serialize>(command: &'static str, cfg: &RunConfig, summary: &Summary, results: T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Report {
        command,
        config: cfg,
        summary,
        results,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn print_summary(command: &str, s: &Summary) {
    eprintln!(
        "{command}: {} checked, {} passed, {} failed, {} errors -> {:?}",
        s.total, s.passed, s.failed, s.errors, s.outcome
    );
}

fn calibrate(grid: GridSpec) -> tfbounds_core::Result<ConventionRegistry> {
    if grid == GridSpec::standard() {
        ConventionRegistry::standard().cloned()
    } else {
        ConventionRegistry::calibrate(grid)
    }
}

fn grid_params(grid: GridSpec) -> BTreeMap<String, ParamValue> {
    let mut m = BTreeMap::new();
    m.insert("grid".into(), ParamValue::from(grid.to_string()));
    m
}

#[derive(Serialize)]
struct IdentityResults {
    checks: Vec<IdentityCheck>,
    errors: Vec<ErrorRecord>,
}

pub fn verify_identities(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let grid = cfg.grid()?;
    let mut results = IdentityResults {
        checks: Vec::new(),
        errors: Vec::new(),
    };
    let mut record = |stage: &str, r: tfbounds_core::Result<Vec<IdentityCheck>>| match r {
        Ok(c) => results.checks.extend(c),
        Err(e) => results.errors.push(ErrorRecord::new(stage, grid_params(grid), &e)),
    };
    match calibrate(grid) {
        Ok(conv) => {
            record("closed_form", closed_form_suite(grid));
            record("identities", identity_suite(grid, &conv, cfg.seed));
        }
        Err(e) => record("calibration", Err(e)),
    }
    let failed = results.checks.iter().filter(|c| !c.pass).count();
    let outcome = results
        .errors
        .iter()
        .map(|e| Outcome::of_error_kind(&e.kind))
        .chain((failed > 0).then_some(Outcome::Defect))
        .max()
        .unwrap_or(Outcome::Pass);
    let summary = Summary {
        total: results.checks.len(),
        passed: results.checks.len() - failed,
        failed,
        errors: results.errors.len(),
        outcome,
    };
    let bytes = json("verify-identities", cfg, &summary, &results)?;
    write_artifact(cfg.outputs.out.as_deref().unwrap_or("-"), &bytes)?;
    print_summary("verify-identities", &summary);
    Ok(outcome)
}

fn sweep_summary(entries: &[SweepEntry]) -> Summary {
    let verdicts: Vec<_> = entries.iter().filter_map(SweepEntry::verdict).collect();
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    let errors: Vec<_> = entries.iter().filter_map(SweepEntry::error).collect();
    let outcome = errors
        .iter()
        .map(|e| Outcome::of_error_kind(&e.kind))
        .chain((failed > 0).then_some(Outcome::Defect))
        .max()
        .unwrap_or(Outcome::Pass);
    Summary {
        total: entries.len(),
        passed: verdicts.len() - failed,
        failed,
        errors: errors.len(),
        outcome,
    }
}

fn finish_sweep(command: &'static str, cfg: &RunConfig, mut entries: Vec<SweepEntry>) -> anyhow::Result<Outcome> {
    for e in &mut entries {
        if let SweepEntry::Verdict(v) = e {
            v.rejudge(cfg.tolerances.rel, cfg.tolerances.abs);
        }
    }
    let summary = sweep_summary(&entries);
    let bytes = json(command, cfg, &summary, &entries)?;
    write_artifact(cfg.outputs.out.as_deref().unwrap_or("-"), &bytes)?;
    if let Some(path) = &cfg.outputs.csv {
        write_artifact(path, sweep_csv(&entries).as_bytes())?;
    }
    print_summary(command, &summary);
    Ok(summary.outcome)
}

fn engine(cfg: &RunConfig) -> anyhow::Result<BoundEngine> {
    let grid = cfg.grid()?;
    Ok(BoundEngine::new(grid, &calibrate(grid)?, Exec::default())?)
}

pub fn verify_bounds(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let spec = cfg.bound_sweep()?;
    let entries = engine(cfg)?.sweep(&spec);
    finish_sweep("verify-bounds", cfg, entries)
}

pub fn donoho_stark(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let spec = cfg.ds_sweep()?;
    let entries = donoho_stark_sweep(&engine(cfg)?, &spec);
    finish_sweep("donoho-stark", cfg, entries)
}

pub fn local_up(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let spec = cfg.local_up_sweep()?;
    let entries = local_up_sweep(&engine(cfg)?, &spec);
    finish_sweep("local-up", cfg, entries)
}

pub fn counterexample(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let p = cfg.scan_exponent()?;
    let scan = counterexample_scan(&cfg.s_values, p, Exec::default())?;
    let valid = scan.rows.iter().filter(|r| r.valid).count();
    let outcome = if scan.growth && scan.bounded {
        Outcome::Pass
    } else {
        Outcome::Defect
    };
    let summary = Summary {
        total: scan.rows.len(),
        passed: if outcome == Outcome::Pass { valid } else { 0 },
        failed: if outcome == Outcome::Pass { 0 } else { valid },
        errors: scan.rows.len() - valid,
        outcome,
    };
    let table = scan_csv(&scan.rows);
    write_artifact(cfg.outputs.out.as_deref().unwrap_or("-"), table.as_bytes())?;
    if let Some(path) = &cfg.outputs.csv {
        write_artifact(path, table.as_bytes())?;
    }
    if let Some(path) = &cfg.outputs.report {
        write_artifact(path, &json("counterexample", cfg, &summary, &scan)?)?;
    }
    print_summary("counterexample", &summary);
    Ok(outcome)
}

#[derive(Serialize)]
struct HeatmapResults {
    signal: String,
    repr: String,
    grid: GridSpec,
    width: usize,
    height: usize,
    min: f64,
    max: f64,
    negative_samples: usize,
}

pub fn heatmap(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let grid = cfg.grid()?;
    let kind = cfg.single_signal()?;
    let repr = cfg.repr()?;
    let f = make_signal(&kind, grid)?;
    f.check_resolved(&kind.to_string())?;
    let g = make_signal(&cfg.window_kind()?, grid)?;
    let field = repr.compute(&f, &g, &calibrate(grid)?)?;
    let map = Heatmap::from_field(&field, cfg.heatmap_side);
    let results = HeatmapResults {
        signal: kind.to_string(),
        repr: repr.to_string(),
        grid,
        width: map.width(),
        height: map.height(),
        min: map.values.iter().copied().fold(f64::INFINITY, f64::min),
        max: map.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        negative_samples: map.negative_count(),
    };
    let summary = Summary {
        total: 1,
        passed: 1,
        failed: 0,
        errors: 0,
        outcome: Outcome::Pass,
    };
    write_artifact(cfg.outputs.out.as_deref().unwrap_or("-"), &map.to_pgm())?;
    if let Some(path) = &cfg.outputs.csv {
        write_artifact(path, map.to_csv().as_bytes())?;
    }
    if let Some(path) = &cfg.outputs.report {
        write_artifact(path, &json("heatmap", cfg, &summary, &results)?)?;
    }
    eprintln!(
        "heatmap: {} of {}, {}x{}, {} negative samples",
        results.repr, results.signal, results.width, results.height, results.negative_samples
    );
    Ok(Outcome::Pass)
}

/// Exit code for an error that escaped a command.
pub fn error_exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<crate::config::ConfigError>().is_some() {
        return Outcome::Infeasible.exit_code();
    }
    match e.downcast_ref::<Error>() {
        Some(core) if core.is_configuration() => Outcome::Infeasible.exit_code(),
        Some(_) => Outcome::Defect.exit_code(),
        None => 1,
    }
}
