//! JSON views of solver results. Keys are emitted in sorted order.

use darksol_core::heteroclinic::Minimizer;
use darksol_core::periodic_orbit::{MonotonePair, PeriodicSolution};
use darksol_core::verify::{SolitonReport, TailFit};
use darksol_core::{CheckedProblem, Model, Profile};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Column layout of every CSV the tool writes.
pub fn csv_schemas() -> Value {
    json!({
        "phi_plus.csv": "x,phi_plus",
        "soliton.csv": "x,phi_plus_ext,w,phi,residual_reduced",
        "snapshots.csv": "t,x,re,im,modulus",
        "summary.csv": crate::commands::SUMMARY_HEADER.join(","),
    })
}

pub fn problem(p: &CheckedProblem) -> Value {
    let (kind, g1) = match p.model() {
        Model::Cubic { .. } => ("cubic", None),
        Model::CubicQuintic { g1, .. } => ("cubic-quintic", Some(*g1)),
    };
    let c = p.problem().coefficient();
    json!({
        "kind": kind,
        "lambda": p.lambda(),
        "g1": g1,
        "period": c.period(),
        "n_per_period": c.nodes_per_period(),
        "h": c.step(),
        "coefficient_min": c.min(),
        "coefficient_max": c.max(),
    })
}

pub fn periodic(sol: &PeriodicSolution, p: &CheckedProblem) -> Value {
    json!({
        "bracket": { "lower": sol.bracket.lower, "upper": sol.bracket.upper },
        "residual": sol.residual,
        "iterations": sol.iterations,
        "min": sol.phi_plus.min(),
        "max": sol.phi_plus.max(),
        "uniqueness": uniqueness(p),
    })
}

pub fn oracle(result: &Result<MonotonePair, String>, newton: &PeriodicSolution) -> Value {
    match result {
        Ok(pair) => {
            let dist = pair
                .from_below
                .values()
                .iter()
                .zip(newton.phi_plus.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            json!({
                "sweeps": pair.sweeps,
                "ordered": pair.ordered,
                "gap": pair.gap(),
                "distance_to_newton": dist,
            })
        }
        Err(msg) => json!({ "error": msg }),
    }
}

fn uniqueness(p: &CheckedProblem) -> Value {
    match p.uniqueness() {
        Some(d) => json!({ "margin": d.margin, "condition_holds": d.holds }),
        None => Value::Null,
    }
}

pub fn minimizer(m: &Minimizer) -> Value {
    json!({
        "half_length": m.w.grid.xmax(),
        "h": m.w.grid.step(),
        "nodes": m.w.len(),
        "energy": m.energy,
        "energy_initial": m.energy_log.first(),
        "accepted_steps": m.energy_log.len().saturating_sub(1),
        "descent_steps": m.descent_steps,
        "newton_iterations": m.newton_iterations,
        "grad_norm": m.grad_norm,
        "polish_singular": m.polish_singular,
    })
}

fn tail(t: &TailFit) -> Value {
    json!({
        "rate": t.rate,
        "r2": t.r2,
        "points": t.points,
        "underflow": t.underflow,
        "derivative_rate": t.derivative_rate,
        "derivative_r2": t.derivative_r2,
    })
}

/// Everything `verify` recomputes from stored profiles.
pub fn verification(
    r: &SolitonReport,
    p: &CheckedProblem,
    w: &Profile,
    gradient_rel_err: f64,
    trials: usize,
    seed: u64,
) -> Value {
    json!({
        "half_length": w.grid.xmax(),
        "h": w.grid.step(),
        "nodes": w.len(),
        "residual_phi_sup": r.residual_phi_sup,
        "residual_reduced_sup": r.residual_reduced_sup,
        "amplitude_margin": r.amplitude_margin,
        "monotonicity_margin": r.monotonicity_margin,
        "decay": r.decay.map(|d| json!({ "left": tail(&d.left), "right": tail(&d.right) })),
        "asymptotic_ratio_err": { "left": r.asymptotic_ratio_err.0, "right": r.asymptotic_ratio_err.1 },
        "energy": r.energy,
        "crossing": r.crossing,
        "uniqueness": uniqueness(p),
        "quintic_sufficient_margin": r.quintic_sufficient_margin,
        "gradient_consistency": { "trials": trials, "seed": seed, "max_rel_err": gradient_rel_err },
        "flags": r.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>(),
        "status": r.status().as_str(),
    })
}

/// Names of the properties whose margins are not positive.
pub fn violations(r: &SolitonReport) -> Vec<&'static str> {
    let mut v = Vec::new();
    if !(r.amplitude_margin > 0.0) {
        v.push("amplitude_margin");
    }
    if !(r.monotonicity_margin > 0.0) {
        v.push("monotonicity_margin");
    }
    match r.decay {
        Some(d) if d.left.rate > 0.0 && d.right.rate > 0.0 => {}
        _ => v.push("decay_rate"),
    }
    if r.flags.contains(&darksol_core::verify::Diagnostic::QuinticSufficientConditionFails) {
        v.push("quintic_sufficient_condition");
    }
    v
}
