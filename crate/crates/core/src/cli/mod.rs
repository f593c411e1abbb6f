//! Batch front end: `solve`, `compare`, `contours` and `selftest`.
//!
//! Every command writes its artifacts before reporting, so a failed run still
//! leaves its history behind. Floating-point output uses 17 significant
//! digits.

mod config;
pub mod selftest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

pub use config::{ContoursConfig, GeometryConfig, LoadedConfig, OutputConfig, PhysicsConfig, RunConfig, SchemeConfig};

use crate::analysis::{predicted_rate, rate_contours, RateGrid, RATE_WINDOW};
use crate::error::{Error, Result};
use crate::geometry::PhaseMap;
use crate::solvers::{estimate_rate, solve, SolveResult, Status};
use crate::spectral_ops::{FourierProjector, GradientProjection};
use crate::transform::SchemeKind;

/// What a command did: `success` drives the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub success: bool,
    pub report: String,
    pub artifacts: Vec<PathBuf>,
}

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float is a JSON number"))
    } else {
        Value::Null
    }
}

fn complex(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

/// Rewrite every non-integer number with 17 significant digits.
fn fixed_precision(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(Value::Number(n), num),
        Value::Array(a) => Value::Array(a.into_iter().map(fixed_precision).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, fixed_precision(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIters => "max_iters",
        Status::Diverged => "diverged",
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_history(path: &Path, result: &SolveResult) -> Result<()> {
    let rows = result.history.records.iter().map(|r| {
        vec![r.iter.to_string(), fmt_f64(r.sigma_star.re), fmt_f64(r.sigma_star.im), fmt_f64(r.residual)]
    });
    write_csv(path, &["iter", "sigma_star_re", "sigma_star_im", "residual"], rows)
}

fn write_fields(path: &Path, map: &PhaseMap, result: &SolveResult) -> Result<()> {
    let (e, j) = (&result.e_field, &result.j_field);
    let rows = (0..map.ny()).flat_map(|jy| {
        (0..map.nx()).map(move |ix| {
            let idx = jy * map.nx() + ix;
            let mut row = vec![ix.to_string(), jy.to_string(), (map.is_phase1(idx) as u8).to_string()];
            for f in [e, j] {
                let v = f.at(idx);
                for c in v {
                    row.push(fmt_f64(c.re));
                    row.push(fmt_f64(c.im));
                }
            }
            row
        })
    });
    let header = [
        "i", "j", "phase1", "e_x_re", "e_x_im", "e_y_re", "e_y_im", "j_x_re", "j_x_im", "j_y_re", "j_y_im",
    ];
    write_csv(path, &header, rows)
}

/// Per-scheme summary shared by `solve` and `compare`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: SchemeKind,
    pub status: Option<Status>,
    pub iterations: Option<usize>,
    pub sigma_star: Option<Complex64>,
    pub exact_error: Option<f64>,
    pub estimated_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
    pub error: Option<String>,
}

impl SchemeSummary {
    fn new(scheme: SchemeKind, cfg: &RunConfig, run: &Result<SolveResult>) -> Self {
        let interval = cfg.interval().ok();
        let predicted = predicted_rate(scheme, cfg.sigma1(), interval.as_ref()).ok();
        match run {
            Ok(r) => Self {
                scheme,
                status: Some(r.status),
                iterations: Some(r.iterations()),
                sigma_star: Some(r.sigma_star),
                exact_error: cfg.exact_reference().map(|x| (r.sigma_star - x).norm()),
                estimated_rate: estimate_rate(&r.history, RATE_WINDOW).ok(),
                predicted_rate: predicted,
                error: None,
            },
            Err(e) => Self {
                scheme,
                status: None,
                iterations: None,
                sigma_star: None,
                exact_error: None,
                estimated_rate: None,
                predicted_rate: predicted,
                error: Some(e.to_string()),
            },
        }
    }

    pub fn converged(&self) -> bool {
        self.status == Some(Status::Converged)
    }

    fn status_label(&self) -> &'static str {
        self.status.map_or("error", status_name)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn short(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

fn run_scheme(cfg: &RunConfig, map: &PhaseMap, scheme: SchemeKind) -> Result<SolveResult> {
    solve(map, &cfg.solver_config(scheme)?)
}

/// Solve once with `scheme.name`, writing `<prefix>_history.csv`,
/// `<prefix>_result.json` and optionally `<prefix>_fields.csv`.
pub fn cmd_solve(path: &Path, overrides: &[String]) -> Result<Outcome> {
    let loaded = LoadedConfig::load(path, overrides)?;
    let cfg = &loaded.config;
    let map = cfg.build_map(&loaded.base)?;
    let scheme = cfg.scheme.name;
    let result = run_scheme(cfg, &map, scheme)?;
    let summary = SchemeSummary::new(scheme, cfg, &Ok(result.clone()));

    let history = loaded.output_path("history.csv");
    write_history(&history, &result)?;
    let mut artifacts = vec![history];
    if cfg.output.fields {
        let fields = loaded.output_path("fields.csv");
        write_fields(&fields, &map, &result)?;
        artifacts.push(fields);
    }
    let echo = serde_json::to_value(cfg).map_err(|e| Error::Io(e.to_string()))?;
    let doc = json!({
        "scheme": scheme.name(),
        "sigma_star": complex(result.sigma_star),
        "status": status_name(result.status),
        "iterations": result.iterations(),
        "final_residual": num(result.final_residual()),
        "estimated_rate": summary.estimated_rate.map_or(Value::Null, num),
        "predicted_rate": summary.predicted_rate.map_or(Value::Null, num),
        "exact_sigma_star": cfg.exact_reference().map_or(Value::Null, complex),
        "sigma0": complex(result.sigma0),
        "config": fixed_precision(echo),
    });
    let json_path = loaded.output_path("result.json");
    write_json(&json_path, &doc)?;
    artifacts.push(json_path);

    let mut report = String::new();
    let _ = writeln!(
        report,
        "{scheme}: {} after {} iterations, sigma* = {:.10}{:+.10}i, residual {:.3e}",
        status_name(result.status),
        result.iterations(),
        result.sigma_star.re,
        result.sigma_star.im,
        result.final_residual()
    );
    let _ = writeln!(
        report,
        "estimated rate {}  predicted rate {}",
        short(summary.estimated_rate),
        short(summary.predicted_rate)
    );
    Ok(Outcome { success: summary.converged(), report, artifacts })
}

/// Run every scheme in `scheme.compare` on one geometry, one history CSV
/// each plus `<prefix>_summary.csv`.
pub fn cmd_compare(path: &Path, overrides: &[String]) -> Result<Outcome> {
    let loaded = LoadedConfig::load(path, overrides)?;
    let cfg = &loaded.config;
    let schemes = cfg
        .scheme
        .compare
        .clone()
        .ok_or_else(|| Error::Config("compare needs scheme.compare with at least two schemes".into()))?;
    let map = cfg.build_map(&loaded.base)?;
    let map = &map;
    let runs: Vec<Result<SolveResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = schemes.iter().map(|&k| s.spawn(move || run_scheme(cfg, map, k))).collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });

    let mut artifacts = vec![];
    let mut summaries = vec![];
    for (&scheme, run) in schemes.iter().zip(&runs) {
        if let Ok(r) = run {
            let p = loaded.output_path(&format!("{}_history.csv", scheme.name()));
            write_history(&p, r)?;
            artifacts.push(p);
        }
        summaries.push(SchemeSummary::new(scheme, cfg, run));
    }
    let header = [
        "scheme",
        "status",
        "iterations",
        "sigma_star_re",
        "sigma_star_im",
        "exact_error",
        "estimated_rate",
        "predicted_rate",
        "note",
    ];
    let rows = summaries.iter().map(|s| {
        vec![
            s.scheme.name().to_string(),
            s.status_label().to_string(),
            s.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt(s.sigma_star.map(|z| z.re)),
            opt(s.sigma_star.map(|z| z.im)),
            opt(s.exact_error),
            opt(s.estimated_rate),
            opt(s.predicted_rate),
            s.error.clone().unwrap_or_default(),
        ]
    });
    let table = loaded.output_path("summary.csv");
    write_csv(&table, &header, rows)?;
    artifacts.push(table);

    let mut report = format!(
        "{:<10} {:<10} {:>6} {:>14} {:>12} {:>10} {:>10}\n",
        "scheme", "status", "iters", "sigma*", "|err|", "rate", "predicted"
    );
    for s in &summaries {
        let _ = writeln!(
            report,
            "{:<10} {:<10} {:>6} {:>14} {:>12} {:>10} {:>10}{}",
            s.scheme.name(),
            s.status_label(),
            s.iterations.map_or_else(|| "-".into(), |i| i.to_string()),
            s.sigma_star.map_or_else(|| "-".into(), |z| format!("{:.8}", z.re)),
            s.exact_error.map_or_else(|| "-".into(), |e| format!("{e:.3e}")),
            short(s.estimated_rate),
            short(s.predicted_rate),
            s.error.as_ref().map(|e| format!("  ({e})")).unwrap_or_default()
        );
    }
    Ok(Outcome { success: summaries.iter().all(SchemeSummary::converged), report, artifacts })
}

pub fn write_rate_grid(path: &Path, grid: &RateGrid) -> Result<()> {
    let rows = grid.samples().map(|(z, v, flagged)| {
        vec![fmt_f64(z.re), fmt_f64(z.im), fmt_f64(v), (flagged as u8).to_string()]
    });
    write_csv(path, &["re", "im", "abs_z", "flag"], rows)
}

/// `|z|` over the `[contours]` window, written to `<prefix>_contours.csv`.
pub fn cmd_contours(path: &Path, overrides: &[String]) -> Result<Outcome> {
    let loaded = LoadedConfig::load(path, overrides)?;
    let cfg = &loaded.config;
    let window = cfg.window()?;
    let c = cfg.contours.as_ref().expect("window() checked the table");
    let scheme = c.scheme.unwrap_or(cfg.scheme.name);
    let interval = cfg.interval()?;
    let grid = rate_contours(scheme, Some(&interval), window, (c.nr, c.ni))?;
    let out = loaded.output_path("contours.csv");
    write_rate_grid(&out, &grid)?;
    let flagged = grid.flagged.iter().filter(|&&f| f).count();
    let report = format!(
        "{scheme}: {}x{} samples, {flagged} flagged, max |z| {}\n",
        c.nr,
        c.ni,
        short(grid.max_unflagged())
    );
    Ok(Outcome { success: true, report, artifacts: vec![out] })
}

/// Invariant suites against `proj`, which must act on
/// [`selftest::SELFTEST_GRID`]-sided fields.
pub fn cmd_selftest_with(proj: &dyn GradientProjection) -> Outcome {
    let rep = selftest::selftest_with(proj);
    Outcome { success: rep.passed(), report: rep.render(), artifacts: vec![] }
}

pub fn cmd_selftest() -> Outcome {
    let n = selftest::SELFTEST_GRID;
    cmd_selftest_with(&FourierProjector::new(n, n))
}
