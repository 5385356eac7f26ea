//! The full chain: background, reduction, minimization, lift.

use crate::error::Result;
use crate::heteroclinic::{minimize, select_truncation, MinimizeOptions, Minimizer};
use crate::model::{CheckedProblem, Profile};
use crate::periodic_orbit::{solve_periodic, PeriodicSolution, PeriodicSolveOptions};
use crate::reduction::{lift, to_allen_cahn, WeightedAC};

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonRun {
    pub periodic: PeriodicSolution,
    pub reduced: WeightedAC,
    pub minimizer: Minimizer,
    /// `φ = φ₊ w` on the minimizer grid.
    pub phi: Profile,
}

/// Runs every stage. `half_length` of `None` picks the automatic truncation.
pub fn solve_soliton(
    p: &CheckedProblem,
    periodic_opts: &PeriodicSolveOptions,
    half_length: Option<f64>,
    grad_tol: Option<f64>,
) -> Result<SolitonRun> {
    let periodic = solve_periodic(p, periodic_opts)?;
    let reduced = to_allen_cahn(p, &periodic.phi_plus)?;
    let mut opts = MinimizeOptions::with_half_length(half_length.unwrap_or_else(|| select_truncation(p, &reduced).half_length));
    if let Some(tol) = grad_tol {
        opts.grad_tol = tol;
    }
    let minimizer = minimize(&reduced, &opts)?;
    let phi = lift(&minimizer.w, &periodic.phi_plus)?;
    Ok(SolitonRun {
        periodic,
        reduced,
        minimizer,
        phi,
    })
}
