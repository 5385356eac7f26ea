//! Subcommand implementations. Each returns the process exit code.

use std::path::{Path, PathBuf};

use darksol_core::evolve::{dynamics, evolve_nls, make_ansatz, EvolveOptions};
use darksol_core::heteroclinic::{minimize, select_truncation};
use darksol_core::periodic_orbit::{monotone_iteration_oracle, solve_periodic};
use darksol_core::reduction::{lift, to_allen_cahn};
use darksol_core::verify::{gradient_consistency, verify_soliton, Diagnostic, SolitonReport, Status};
use darksol_core::{CheckedProblem, Grid, PeriodicProfile, Profile};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{LoadedConfig, RunConfig};
use crate::error::{at, CliError, CliResult};
use crate::io::{csv_string, fmt_real, text_row, write_atomic, write_json, Table};
use crate::report;
use crate::svg::{line_plot, Series};

pub struct Context {
    pub config: LoadedConfig,
    pub out: PathBuf,
    /// Directory holding stored profiles (`verify`, `evolve`); defaults to `out`.
    pub input: Option<PathBuf>,
    pub workers: usize,
    pub seed: u64,
}

impl Context {
    fn cfg(&self) -> &RunConfig {
        &self.config.config
    }

    fn out_dir(&self) -> CliResult<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::io(&self.out, e))?;
        Ok(&self.out)
    }

    fn header(&self, command: &str) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("schema_version".into(), json!(report::SCHEMA_VERSION));
        m.insert("csv_schemas".into(), report::csv_schemas());
        m.insert("command".into(), json!(command));
        m.insert("config_hash".into(), json!(self.config.hash));
        m.insert("seed".into(), json!(self.seed));
        m.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
        m
    }
}

fn period_nodes(phi_plus: &PeriodicProfile) -> Vec<f64> {
    (0..phi_plus.len()).map(|k| k as f64 * phi_plus.step()).collect()
}

fn write_phi_plus(dir: &Path, phi_plus: &PeriodicProfile) -> CliResult<()> {
    let x = period_nodes(phi_plus);
    write_atomic(&dir.join("phi_plus.csv"), csv_string(&["x", "phi_plus"], &[&x, phi_plus.values()]).as_bytes())
}

pub fn solve_periodic_cmd(ctx: &Context) -> CliResult<u8> {
    let cfg = ctx.cfg();
    let p = cfg.problem(None, None)?;
    let sol = solve_periodic(&p, &cfg.periodic_options()).map_err(at("periodic_orbit"))?;
    let oracle = monotone_iteration_oracle(&p, cfg.oracle_tol()).map_err(|e| e.to_string());
    let dir = ctx.out_dir()?;
    write_phi_plus(dir, &sol.phi_plus)?;
    let mut r = ctx.header("solve-periodic");
    r.insert("problem".into(), report::problem(&p));
    r.insert("periodic".into(), report::periodic(&sol, &p));
    r.insert("monotone_oracle".into(), report::oracle(&oracle, &sol));
    write_json(&dir.join("report.json"), &Value::Object(r))?;
    Ok(0)
}

/// Output of the full pipeline for one problem.
pub struct Soliton {
    pub problem: CheckedProblem,
    pub phi_plus: PeriodicProfile,
    pub periodic: Value,
    pub minimizer: Option<Value>,
    pub w: Profile,
    pub phi: Profile,
}

/// With `with_oracle`, the periodic section also carries the monotone-sweep pair.
pub fn compute_soliton(cfg: &RunConfig, p: CheckedProblem, with_oracle: bool) -> CliResult<Soliton> {
    let sol = solve_periodic(&p, &cfg.periodic_options()).map_err(at("periodic_orbit"))?;
    let mut periodic = report::periodic(&sol, &p);
    if with_oracle {
        let pair = monotone_iteration_oracle(&p, cfg.oracle_tol()).map_err(|e| e.to_string());
        periodic["monotone_oracle"] = report::oracle(&pair, &sol);
    }
    let ac = to_allen_cahn(&p, &sol.phi_plus).map_err(at("reduction"))?;
    let half_length = match cfg.minimize.half_length {
        Some(l) => l,
        None => select_truncation(&p, &ac).half_length,
    };
    let m = minimize(&ac, &cfg.minimize_options(half_length)).map_err(at("heteroclinic"))?;
    let phi = lift(&m.w, &sol.phi_plus).map_err(at("reduction"))?;
    Ok(Soliton {
        periodic,
        minimizer: Some(report::minimizer(&m)),
        problem: p,
        phi_plus: sol.phi_plus,
        w: m.w,
        phi,
    })
}

/// Runs every check; the JSON is a pure function of the inputs and the seed.
pub fn check_soliton(
    cfg: &RunConfig,
    p: &CheckedProblem,
    phi_plus: &PeriodicProfile,
    w: &Profile,
    phi: &Profile,
    seed: u64,
) -> CliResult<(SolitonReport, Value)> {
    let r = verify_soliton(p, phi_plus, w, phi, &cfg.verify_options()).map_err(at("verify"))?;
    let op = to_allen_cahn(p, phi_plus)
        .and_then(|ac| ac.on_grid(&w.grid))
        .map_err(at("reduction"))?;
    let trials = cfg.gradient_trials();
    let g = gradient_consistency(&op, trials, seed);
    let v = report::verification(&r, p, w, g, trials, seed);
    Ok((r, v))
}

fn status_code(r: &SolitonReport) -> u8 {
    match r.status() {
        Status::Verified => 0,
        Status::PropertyViolated | Status::UnsupportedRegime => 4,
    }
}

fn report_violations(r: &SolitonReport) {
    let v = report::violations(r);
    if !v.is_empty() {
        eprintln!("verify: property margins not positive: {} (status {})", v.join(", "), r.status().as_str());
    }
    if r.flags.contains(&Diagnostic::TailSaturated) {
        eprintln!("verify: w reaches exactly -1 or 1 in the tails; a shorter half_length keeps the tail resolvable");
    }
}

pub fn solve_soliton_cmd(ctx: &Context) -> CliResult<u8> {
    let cfg = ctx.cfg();
    let p = cfg.problem(None, None)?;
    let s = compute_soliton(cfg, p, true)?;
    let (r, verification) = check_soliton(cfg, &s.problem, &s.phi_plus, &s.w, &s.phi, ctx.seed)?;

    let dir = ctx.out_dir()?;
    write_phi_plus(dir, &s.phi_plus)?;
    let ext = s.phi_plus.extend_to(&s.w.grid).map_err(at("model"))?;
    let op = to_allen_cahn(&s.problem, &s.phi_plus)
        .and_then(|ac| ac.on_grid(&s.w.grid))
        .map_err(at("reduction"))?;
    let residual = op.residual(&s.w.values);
    let x: Vec<f64> = s.w.grid.nodes().collect();
    let csv = csv_string(
        &["x", "phi_plus_ext", "w", "phi", "residual_reduced"],
        &[&x, &ext.values, &s.w.values, &s.phi.values, &residual],
    );
    write_atomic(&dir.join("soliton.csv"), csv.as_bytes())?;

    let neg: Vec<f64> = ext.values.iter().map(|v| -v).collect();
    let modulus: Vec<f64> = s.phi.values.iter().map(|v| v.abs()).collect();
    let svg = line_plot(
        "dark soliton",
        &x,
        &[
            Series { label: "phi", y: &s.phi.values, color: "#1f77b4", dashed: false },
            Series { label: "|phi|", y: &modulus, color: "#2ca02c", dashed: false },
            Series { label: "+phi_plus", y: &ext.values, color: "#7f7f7f", dashed: true },
            Series { label: "-phi_plus", y: &neg, color: "#7f7f7f", dashed: true },
        ],
    );
    write_atomic(&dir.join("plot.svg"), svg.as_bytes())?;

    let code = status_code(&r);
    let mut out = ctx.header("solve-soliton");
    out.insert("problem".into(), report::problem(&s.problem));
    out.insert("periodic".into(), s.periodic);
    if let Some(m) = s.minimizer {
        out.insert("minimizer".into(), m);
    }
    out.insert("verification".into(), verification);
    out.insert("exit_code".into(), json!(code));
    write_json(&dir.join("report.json"), &Value::Object(out))?;
    report_violations(&r);
    Ok(code)
}

/// Reads `phi_plus.csv` and `soliton.csv` written by `solve-soliton`.
pub fn load_soliton(cfg: &RunConfig, p: CheckedProblem, dir: &Path) -> CliResult<Soliton> {
    let pp = Table::read(&dir.join("phi_plus.csv"))?;
    let n = cfg.nodes_per_period()?;
    let values = pp.column("phi_plus")?;
    pp.column("x")?;
    if values.len() != n {
        return Err(CliError::Validation(format!(
            "schema: phi_plus.csv has {} rows, the config has {n} nodes per period",
            values.len()
        )));
    }
    let phi_plus = PeriodicProfile::new(cfg.model.period, values.to_vec()).map_err(at("model"))?;

    let t = Table::read(&dir.join("soliton.csv"))?;
    t.require(&["x", "phi_plus_ext", "w", "phi", "residual_reduced"])?;
    let x = t.column("x")?;
    let half_length = *x.last().ok_or_else(|| CliError::Validation("schema: soliton.csv has no rows".into()))?;
    let grid = Grid::symmetric(half_length, cfg.step()?).map_err(at("model"))?;
    if grid.len() != x.len() || x.iter().enumerate().any(|(i, v)| (v - grid.x(i)).abs() > 1e-9 * (1.0 + v.abs())) {
        return Err(CliError::Validation(
            "schema: soliton.csv x column is not the symmetric grid of the configured step".into(),
        ));
    }
    let w = Profile::new(grid, t.column("w")?.to_vec()).map_err(at("model"))?;
    let phi = Profile::new(grid, t.column("phi")?.to_vec()).map_err(at("model"))?;
    Ok(Soliton {
        periodic: Value::Null,
        minimizer: None,
        problem: p,
        phi_plus,
        w,
        phi,
    })
}

pub fn verify_cmd(ctx: &Context) -> CliResult<u8> {
    let cfg = ctx.cfg();
    let p = cfg.problem(None, None)?;
    let input = ctx.input.clone().unwrap_or_else(|| ctx.out.clone());
    let s = load_soliton(cfg, p, &input)?;
    let (r, verification) = check_soliton(cfg, &s.problem, &s.phi_plus, &s.w, &s.phi, ctx.seed)?;
    let code = status_code(&r);
    let dir = ctx.out_dir()?;
    let mut out = ctx.header("verify");
    out.insert("problem".into(), report::problem(&s.problem));
    out.insert("verification".into(), verification);
    out.insert("exit_code".into(), json!(code));
    write_json(&dir.join("report.json"), &Value::Object(out))?;
    report_violations(&r);
    Ok(code)
}

/// Acceptance thresholds of the dynamical check.
pub const MODULUS_TOL: f64 = 1e-4;
pub const PHASE_TOL: f64 = 1e-3;

pub fn evolve_cmd(ctx: &Context) -> CliResult<u8> {
    let cfg = ctx.cfg();
    let e = &cfg.evolve;
    let opts = EvolveOptions {
        dt: e.dt,
        t_max: e.t_max,
        snapshot_every: e.snapshot_every,
    };
    opts.check().map_err(at("evolve"))?;
    let p = cfg.problem(None, None)?;
    let s = match &ctx.input {
        Some(dir) => load_soliton(cfg, p, dir)?,
        None => compute_soliton(cfg, p, false)?,
    };
    let lambda = s.problem.lambda();
    let traj = evolve_nls(&make_ansatz(&s.phi, lambda, 0.0), &s.problem, &opts).map_err(at("evolve"))?;
    let d = dynamics(&traj, &s.phi, lambda).map_err(at("evolve"))?;

    let dir = ctx.out_dir()?;
    let mut csv = String::from("t,x,re,im,modulus\n");
    for snap in &traj.snapshots {
        let f = &snap.field;
        for (i, m) in f.modulus().into_iter().enumerate() {
            csv.push_str(&text_row(&[
                fmt_real(snap.t),
                fmt_real(f.grid.x(i)),
                fmt_real(f.re[i]),
                fmt_real(f.im[i]),
                fmt_real(m),
            ]));
        }
    }
    write_atomic(&dir.join("snapshots.csv"), csv.as_bytes())?;

    let drift_tol = 2.0 * s.w.grid.step();
    let modulus_ok = d.max_modulus_deviation <= MODULUS_TOL;
    let phase_ok = d.phase_rel_err <= PHASE_TOL;
    let drift_ok = d.kink_drift.is_some_and(|v| v <= drift_tol);
    let mut out = ctx.header("evolve");
    out.insert("problem".into(), report::problem(&s.problem));
    out.insert(
        "dynamics".into(),
        json!({
            "dt": opts.dt,
            "t_max": opts.t_max,
            "steps": traj.steps,
            "snapshots": traj.snapshots.len(),
            "half_length": s.w.grid.xmax(),
            "h": s.w.grid.step(),
            "max_modulus_deviation": d.max_modulus_deviation,
            "phase_slope": d.phase_slope,
            "phase_rel_err": d.phase_rel_err,
            "reference_x": d.reference_x,
            "kink_drift": d.kink_drift,
            "tolerances": { "modulus": MODULUS_TOL, "phase_rel": PHASE_TOL, "drift": drift_tol },
            "checks": { "modulus": modulus_ok, "phase": phase_ok, "drift": drift_ok },
        }),
    );
    let code = if modulus_ok && phase_ok && drift_ok { 0 } else { 4 };
    out.insert("exit_code".into(), json!(code));
    write_json(&dir.join("dynamics.json"), &Value::Object(out))?;
    if code != 0 {
        eprintln!("evolve: dynamical check failed (modulus {modulus_ok}, phase {phase_ok}, drift {drift_ok})");
    }
    Ok(code)
}

pub const SUMMARY_HEADER: [&str; 17] = [
    "index",
    "lambda",
    "amplitude",
    "status",
    "exit_code",
    "half_length",
    "energy",
    "c0_left",
    "c0_right",
    "r2_left",
    "r2_right",
    "amplitude_margin",
    "monotonicity_margin",
    "ratio_err_left",
    "ratio_err_right",
    "uniqueness_margin",
    "message",
];

struct Row {
    lambda: f64,
    amplitude: f64,
    outcome: Result<(SolitonReport, f64), CliError>,
}

fn run_row(cfg: &RunConfig, lambda: f64, amplitude: f64) -> Row {
    let outcome = (|| {
        let p = cfg.problem(Some(lambda), Some(amplitude))?;
        let s = compute_soliton(cfg, p, false)?;
        let r = verify_soliton(&s.problem, &s.phi_plus, &s.w, &s.phi, &cfg.verify_options()).map_err(at("verify"))?;
        Ok((r, s.w.grid.xmax()))
    })();
    Row {
        lambda,
        amplitude,
        outcome,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn summary_line(index: usize, row: &Row) -> String {
    let head = [index.to_string(), fmt_real(row.lambda), fmt_real(row.amplitude)];
    let tail: Vec<String> = match &row.outcome {
        Ok((r, l)) => {
            let d = r.decay;
            vec![
                r.status().as_str().to_string(),
                status_code(r).to_string(),
                fmt_real(*l),
                fmt_real(r.energy),
                opt(d.map(|d| d.left.rate)),
                opt(d.map(|d| d.right.rate)),
                opt(d.map(|d| d.left.r2)),
                opt(d.map(|d| d.right.r2)),
                fmt_real(r.amplitude_margin),
                fmt_real(r.monotonicity_margin),
                fmt_real(r.asymptotic_ratio_err.0),
                fmt_real(r.asymptotic_ratio_err.1),
                opt(r.uniqueness_margin),
                String::new(),
            ]
        }
        Err(e) => {
            let status = match e {
                CliError::Validation(_) => "validation-error",
                CliError::NonConvergence(_) => "nonconvergence",
                CliError::Property(_) => "property-violated",
                CliError::Io(_) => "io-error",
            };
            let mut v = vec![status.to_string(), e.exit_code().to_string()];
            v.extend(std::iter::repeat_n(String::new(), 11));
            v.push(e.to_string().replace([',', '\n', '"'], ";"));
            v
        }
    };
    text_row(&head.into_iter().chain(tail).collect::<Vec<_>>())
}

pub fn sweep_cmd(ctx: &Context) -> CliResult<u8> {
    let cfg = ctx.cfg();
    let lambdas = cfg.sweep.lambda.clone().unwrap_or_else(|| vec![cfg.model.lambda]);
    let amplitudes = cfg.sweep.amplitude.clone().unwrap_or_else(|| vec![cfg.coefficient.a]);
    let jobs: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|l| amplitudes.iter().map(move |a| (*l, *a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("sweep: cannot start workers: {e}")))?;

    let dir = ctx.out_dir()?;
    let parts = dir.join("sweep_rows");
    std::fs::create_dir_all(&parts).map_err(|e| CliError::io(&parts, e))?;
    let row_files: Vec<PathBuf> = pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(i, (l, a))| {
                let path = parts.join(format!("row_{i:06}.csv"));
                write_atomic(&path, summary_line(i, &run_row(cfg, *l, *a)).as_bytes())?;
                Ok(path)
            })
            .collect::<CliResult<_>>()
    })?;

    let mut csv = SUMMARY_HEADER.join(",");
    csv.push('\n');
    for path in &row_files {
        csv.push_str(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?);
    }
    write_atomic(&dir.join("summary.csv"), csv.as_bytes())?;
    std::fs::remove_dir_all(&parts).map_err(|e| CliError::io(&parts, e))?;
    Ok(0)
}
