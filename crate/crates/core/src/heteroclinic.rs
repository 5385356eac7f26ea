//! Minimization of the reduced energy on `[−L, L]` with `w(∓L) = ∓1`.
//!
//! A preconditioned gradient flow with backtracking drives the energy down
//! from a `tanh` guess, clamping iterates to `[−1, 1]`; a damped, shifted
//! Newton iteration then polishes the minimizer.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Ldlt;
use crate::math::{abs, ceil, round, sqrt, sup_norm, tanh};
use crate::model::{count_steps, CheckedProblem, Grid, Model, Profile};
use crate::periodic_orbit::bracket_bounds;
use crate::reduction::{ReducedOperator, WeightedAC};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    /// Half-length `L` of the truncated domain; an integer multiple of the period.
    pub half_length: f64,
    /// Bound on `max_i |∂E/∂w_i| / h` over interior nodes.
    pub grad_tol: f64,
    pub max_outer_iters: usize,
    pub newton_polish: bool,
}

impl MinimizeOptions {
    pub fn with_half_length(half_length: f64) -> MinimizeOptions {
        MinimizeOptions {
            half_length,
            grad_tol: 1e-8,
            max_outer_iters: 20_000,
            newton_polish: true,
        }
    }

    fn check(&self, period: f64) -> Result<()> {
        if !(self.half_length > 0.0) {
            return Err(Error::InvalidOption("half_length must be positive"));
        }
        count_steps(self.half_length, period)?;
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidOption("grad_tol must be positive"));
        }
        Ok(())
    }
}

/// Linearized decay rate and the half-length derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub kappa: f64,
    pub half_length: f64,
}

/// Lower bound on the decay rate of `w → ±1` from the bracket.
pub fn decay_rate_lower_bound(p: &CheckedProblem) -> f64 {
    match p.model() {
        Model::Cubic { g } => 2.0 * sqrt(-p.lambda() * g.min() / g.max()),
        Model::CubicQuintic { g1, .. } => {
            let b = bracket_bounds(p);
            let rate2 = |rho: f64| 2.0 * g1 * rho * rho + 4.0 * rho * rho * rho * rho;
            let k2 = rate2(b.lower);
            if k2 > 0.0 {
                sqrt(k2)
            } else if rate2(b.upper) > 0.0 {
                sqrt(rate2(b.upper))
            } else {
                2.0 * b.lower * b.lower
            }
        }
    }
}

/// Smallest multiple of the period that is at least `max(12/κ, 3T)`, with `κ`
/// the Floquet decay rate of the linearization (the a-priori bound when the
/// linearization is not hyperbolic).
pub fn select_truncation(p: &CheckedProblem, ac: &WeightedAC) -> Truncation {
    let kappa = ac.floquet_decay_rate().unwrap_or_else(|| decay_rate_lower_bound(p));
    let period = p.period();
    let target = (12.0 / kappa).max(3.0 * period);
    // κ is only second-order accurate; do not add a period for a rounding excess
    let periods = ceil(target / period - 1e-3).max(1.0);
    Truncation {
        kappa,
        half_length: periods * period,
    }
}

/// `tanh(κ(x − center)/2)` with the end nodes pinned to `∓1` and the interior
/// kept strictly inside `(−1, 1)`.
pub fn initial_guess_centered(grid: &Grid, kappa: f64, center: f64) -> Profile {
    const EPS: f64 = 1e-12;
    let n = grid.len();
    let values = (0..n)
        .map(|i| {
            if i == 0 {
                -1.0
            } else if i == n - 1 {
                1.0
            } else {
                tanh(0.5 * kappa * (grid.x(i) - center)).clamp(-1.0 + EPS, 1.0 - EPS)
            }
        })
        .collect();
    Profile {
        grid: *grid,
        values,
    }
}

pub fn initial_guess(grid: &Grid, kappa: f64) -> Profile {
    initial_guess_centered(grid, kappa, 0.0)
}

/// Line-search state carried between [`descent_step`] calls.
#[derive(Debug, Clone, Default)]
pub struct StepState {
    /// Last accepted step length.
    pub tau: f64,
    precond: Option<Ldlt>,
}

impl StepState {
    pub fn new() -> Self {
        StepState {
            tau: 0.5,
            precond: None,
        }
    }
}

const ARMIJO: f64 = 1e-4;

fn clamp_interior(w: &mut [f64]) {
    let n = w.len();
    for v in &mut w[1..n - 1] {
        *v = v.clamp(-1.0, 1.0);
    }
}

/// One backtracking step of the gradient flow in the metric of the kinetic
/// operator shifted by the bound on the nonlinear slope.
///
/// Returns the new iterate and its energy; the energy never increases.
pub fn descent_step(w: &[f64], op: &ReducedOperator, state: &mut StepState) -> Result<(Vec<f64>, f64)> {
    let energy = op.energy(w);
    let r = op.residual(w);
    if sup_norm(&r) == 0.0 {
        return Ok((w.to_vec(), energy));
    }
    if state.precond.is_none() {
        let mut p = op.kinetic_matrix();
        p.add_diagonal(op.force_slope_bound());
        state.precond = Some(p.ldlt()?);
    }
    let n = w.len();
    let interior_r = &r[1..n - 1];
    let dir = state.precond.as_ref().map(|f| f.solve(interior_r)).unwrap_or_default();
    let h = op.grid().step();
    let slope = 2.0 * op.kinetic_factor() * h * interior_r.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();

    let mut tau = (2.0 * state.tau).min(1.0);
    if !(tau > 0.0) {
        tau = 1.0;
    }
    for _ in 0..=60 {
        let mut trial = w.to_vec();
        for (t, d) in trial[1..n - 1].iter_mut().zip(&dir) {
            *t += tau * d;
        }
        clamp_interior(&mut trial);
        let e = op.energy(&trial);
        if e <= energy - ARMIJO * tau * slope {
            state.tau = tau;
            return Ok((trial, e));
        }
        tau *= 0.5;
    }
    Err(Error::LineSearchFailure)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polish {
    pub w: Vec<f64>,
    pub iterations: usize,
    /// Final sup norm of the reduced residual.
    pub residual: f64,
    /// Energy after each accepted Newton step.
    pub energies: Vec<f64>,
}

const MAX_POLISH_ITERS: usize = 100;

/// Shift added to `−∂R/∂w`: follows the residual, floored so rounding noise
/// cannot drive the kink along its (near-)neutral translation mode.
fn newton_shift(residual: f64) -> f64 {
    residual.clamp(1e-6, 1e-3)
}

/// Largest shift tried before the linearization is declared indefinite.
const MAX_SHIFT: f64 = 1.0;

/// Factors `−∂R/∂w + μI`, raising `μ` tenfold until it is positive definite.
fn shifted_factor(op: &ReducedOperator, w: &[f64], mut shift: f64) -> Result<Ldlt> {
    let base = op.negative_jacobian(w);
    while shift <= MAX_SHIFT {
        let mut m = base.clone();
        m.add_diagonal(shift);
        if let Ok(f) = m.ldlt() {
            if f.is_positive_definite() {
                return Ok(f);
            }
        }
        shift *= 10.0;
    }
    Err(Error::SingularLinearization)
}

/// Damped Newton iteration on the reduced residual with the end nodes fixed.
///
/// A step is accepted if it gives an Armijo decrease of the energy, or if it
/// lowers the residual without raising the energy beyond rounding; the first
/// rule moves a pinned kink off an energy saddle, the second resolves the last
/// digits where energy differences drown in rounding.
///
/// A small negative curvature (a perturbed translation mode) is absorbed by
/// a larger shift; if no shift up to 1 makes the linearization positive
/// definite the iterate is not near a minimizer and
/// [`Error::SingularLinearization`] is returned.
pub fn newton_polish(w: &[f64], op: &ReducedOperator, tol: f64) -> Result<Polish> {
    let n = w.len();
    let h = op.grid().step();
    let mut w = w.to_vec();
    let mut r = op.residual(&w);
    let mut norm = sup_norm(&r);
    let mut energy = op.energy(&w);
    let mut energies = Vec::new();
    for it in 0..=MAX_POLISH_ITERS {
        let factor = shifted_factor(op, &w, newton_shift(norm))?;
        if norm <= tol {
            return Ok(Polish {
                w,
                iterations: it,
                residual: norm,
                energies,
            });
        }
        if it == MAX_POLISH_ITERS {
            break;
        }
        let delta = factor.solve(&r[1..n - 1]);
        // the shifted system is positive definite, so delta is a descent direction of E
        let slope = 2.0 * op.kinetic_factor() * h * r[1..n - 1].iter().zip(&delta).map(|(a, b)| a * b).sum::<f64>();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let mut trial = w.clone();
            for (t, d) in trial[1..n - 1].iter_mut().zip(&delta) {
                *t += step * d;
            }
            clamp_interior(&mut trial);
            let tr = op.residual(&trial);
            let tnorm = sup_norm(&tr);
            let te = op.energy(&trial);
            let descends = te <= energy - ARMIJO * step * slope;
            let settles = tnorm < norm && te <= energy + energy_slack(energy);
            if descends || settles {
                w = trial;
                r = tr;
                norm = tnorm;
                energy = te;
                energies.push(te);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: energies.len(),
        residual: norm,
    })
}

/// Rounding allowance when comparing discrete energies.
pub fn energy_slack(energy: f64) -> f64 {
    1e-13 * (1.0 + abs(energy))
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub w: Profile,
    pub energy: f64,
    /// Energy of the initial guess followed by every accepted iterate.
    pub energy_log: Vec<f64>,
    pub descent_steps: usize,
    pub newton_iterations: usize,
    /// Final `max_i |∂E/∂w_i| / h`.
    pub grad_norm: f64,
    /// Set when the Newton polish was abandoned for a singular linearization.
    pub polish_singular: bool,
}

/// Gradient norm below which the flow hands over to Newton.
const POLISH_SWITCH: f64 = 1e-2;

/// `tanh` guess centred at 0, or, if 0 is not a local minimum of the guess
/// energy over node-centred guesses, at the local minimum reached by walking
/// downhill from 0 one node at a time (at most half a period; ties go right).
///
/// On a coefficient symmetric about 0 the flow keeps an odd guess odd, so a
/// guess centred on a pinning maximum would stall on that saddle.
pub fn best_initial_guess(op: &ReducedOperator, kappa: f64, period: f64) -> Profile {
    let grid = *op.grid();
    let h = grid.step();
    let half = round(0.5 * period / h) as i64;
    let energy = |k: i64| op.energy(&initial_guess_centered(&grid, kappa, k as f64 * h).values);
    let lower = |e: f64, than: f64| e < than - energy_slack(than);

    let e0 = energy(0);
    let (ep, em) = (energy(1), energy(-1));
    let step = if lower(ep, e0) && ep <= em {
        1
    } else if lower(em, e0) {
        -1
    } else {
        0
    };
    let mut k = 0i64;
    if step != 0 {
        let mut e = if step > 0 { ep } else { em };
        k = step;
        while k.abs() < half {
            let next = energy(k + step);
            if !lower(next, e) {
                break;
            }
            k += step;
            e = next;
        }
    }
    initial_guess_centered(&grid, kappa, k as f64 * h)
}

/// Minimizes from the `tanh` guess whose rate is the linearized decay rate of
/// `ac`, centred by [`best_initial_guess`].
pub fn minimize(ac: &WeightedAC, opts: &MinimizeOptions) -> Result<Minimizer> {
    opts.check(ac.period())?;
    let grid = Grid::symmetric(opts.half_length, ac.step())?;
    let kappa = ac
        .floquet_decay_rate()
        .or_else(|| ac.decay_rate_bound())
        .unwrap_or(2.0 / ac.period());
    let op = ac.on_grid(&grid)?;
    minimize_from(&op, best_initial_guess(&op, kappa, ac.period()), opts)
}

/// Minimizes from a given profile; its end values are kept.
pub fn minimize_from(op: &ReducedOperator, w0: Profile, opts: &MinimizeOptions) -> Result<Minimizer> {
    if w0.grid != *op.grid() {
        return Err(Error::GridMismatch);
    }
    if !(opts.grad_tol > 0.0) {
        return Err(Error::InvalidOption("grad_tol must be positive"));
    }
    let grid = w0.grid;
    let scale = 2.0 * op.kinetic_factor();
    let grad_norm = |w: &[f64]| scale * sup_norm(&op.residual(w));

    let mut w = w0.values;
    let mut energy = op.energy(&w);
    let mut log = alloc::vec![energy];
    let mut state = StepState::new();
    let mut steps = 0usize;
    let mut newton_iterations = 0usize;
    let mut polish = opts.newton_polish;
    let mut polish_singular = false;

    loop {
        let g = grad_norm(&w);
        if g <= opts.grad_tol {
            break;
        }
        let budget_left = steps < opts.max_outer_iters;
        if polish && (g <= POLISH_SWITCH || !budget_left) {
            match newton_polish(&w, op, opts.grad_tol / scale) {
                Ok(out) => {
                    newton_iterations += out.iterations;
                    log.extend_from_slice(&out.energies);
                    if let Some(e) = out.energies.last() {
                        energy = *e;
                    }
                    w = out.w;
                    continue;
                }
                Err(Error::SingularLinearization) => {
                    polish_singular = true;
                    polish = false;
                }
                Err(Error::NonConvergence { .. }) => polish = false,
                Err(e) => return Err(e),
            }
            continue;
        }
        if !budget_left {
            return Err(Error::NonConvergence {
                iterations: steps,
                residual: g,
            });
        }
        match descent_step(&w, op, &mut state) {
            Ok((next, e)) => {
                w = next;
                energy = e;
                log.push(e);
                steps += 1;
            }
            Err(Error::LineSearchFailure) if polish => {
                steps = opts.max_outer_iters;
            }
            Err(Error::LineSearchFailure) => {
                return Err(Error::NonConvergence {
                    iterations: steps,
                    residual: g,
                })
            }
            Err(e) => return Err(e),
        }
    }

    let min_increment = w
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::INFINITY, f64::min);
    // rounding in saturated tails is not a loss of monotonicity; verify reports the exact margin
    if min_increment < -4.0 * f64::EPSILON {
        return Err(Error::MonotonicityLoss(min_increment));
    }
    let g = grad_norm(&w);
    Ok(Minimizer {
        w: Profile { grid, values: w },
        energy,
        energy_log: log,
        descent_steps: steps,
        newton_iterations,
        grad_norm: g,
        polish_singular,
    })
}

/// Zero of the linear interpolant at the first sign change of `w`.
pub fn report_crossing(w: &Profile) -> Result<f64> {
    let grid = &w.grid;
    for (i, pair) in w.values.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a == 0.0 {
            return Ok(grid.x(i));
        }
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            if b == 0.0 {
                return Ok(grid.x(i + 1));
            }
            return Ok(grid.x(i) - a * grid.step() / (b - a));
        }
    }
    if w.values.last() == Some(&0.0) {
        return Ok(grid.xmax());
    }
    Err(Error::NoSignChange)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_coefficient, validate_problem, CoefficientRole, CoefficientSpec, PeriodicProfile, Problem};
    use crate::reduction::to_allen_cahn;

    fn constant_cubic(lambda: f64) -> CheckedProblem {
        let g = sample_coefficient(CoefficientSpec::Constant(1.0), 1.0, 64, CoefficientRole::Nonlinearity)
            .unwrap();
        validate_problem(Problem::cubic(lambda, g)).unwrap()
    }

    #[test]
    fn truncation_rule() {
        let select = |lambda: f64| {
            let p = constant_cubic(lambda);
            let phi = PeriodicProfile::constant(1.0, 64, libm::sqrt(-lambda)).unwrap();
            select_truncation(&p, &to_allen_cahn(&p, &phi).unwrap())
        };
        let t = select(-1.0);
        assert!((t.kappa - 2.0).abs() < 1e-3);
        assert_eq!(t.half_length, 6.0);
        let t = select(-0.01);
        assert!((t.kappa - 0.2).abs() < 1e-4);
        assert_eq!(t.half_length, 60.0);
        // a steep decay is floored at three periods
        assert_eq!(select(-100.0).half_length, 3.0);
        assert_eq!(decay_rate_lower_bound(&constant_cubic(-1.0)), 2.0);
    }

    #[test]
    fn guess_shape() {
        let grid = Grid::symmetric(4.0, 0.25).unwrap();
        let w = initial_guess(&grid, 2.0);
        assert_eq!(w.values[0], -1.0);
        assert_eq!(*w.values.last().unwrap(), 1.0);
        assert_eq!(w.values[grid.len() / 2], 0.0);
        assert!(w.values.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn crossing() {
        let grid = Grid::symmetric(5.0, 0.01).unwrap();
        let w = Profile::from_fn(grid, libm::tanh).unwrap();
        assert!(report_crossing(&w).unwrap().abs() <= 0.01);
        let w = Profile::from_fn(grid, |x| libm::tanh(x - 0.3)).unwrap();
        assert!((report_crossing(&w).unwrap() - 0.3).abs() <= 0.01);
        let w = Profile::from_fn(grid, |_| 1.0).unwrap();
        assert_eq!(report_crossing(&w), Err(Error::NoSignChange));
    }

    #[test]
    fn descent_step_properties() {
        let p = constant_cubic(-1.0);
        let ac = to_allen_cahn(&p, &PeriodicProfile::constant(1.0, 64, 1.0).unwrap()).unwrap();
        let grid = Grid::symmetric(6.0, 1.0 / 64.0).unwrap();
        let op = ac.on_grid(&grid).unwrap();

        let flat = Profile::from_fn(grid, |_| 1.0).unwrap();
        let (same, e) = descent_step(&flat.values, &op, &mut StepState::new()).unwrap();
        assert_eq!(same, flat.values);
        assert_eq!(e, 0.0);

        let mut wild = initial_guess(&grid, 0.7).values.iter().map(|v| 1.5 * v).collect::<Vec<_>>();
        let last = wild.len() - 1;
        (wild[0], wild[last]) = (-1.0, 1.0);
        let (next, _) = descent_step(&wild, &op, &mut StepState::new()).unwrap();
        assert!(next[1..next.len() - 1].iter().all(|v| v.abs() <= 1.0));

        let guess = initial_guess(&grid, 1.0);
        let e0 = op.energy(&guess.values);
        let (_, e1) = descent_step(&guess.values, &op, &mut StepState::new()).unwrap();
        assert!(e1 < e0);
    }

    #[test]
    fn zero_profile_is_not_a_minimizer() {
        let p = constant_cubic(-1.0);
        let ac = to_allen_cahn(&p, &PeriodicProfile::constant(1.0, 64, 1.0).unwrap()).unwrap();
        let grid = Grid::symmetric(6.0, 1.0 / 64.0).unwrap();
        let op = ac.on_grid(&grid).unwrap();
        let zero = alloc::vec![0.0; grid.len()];
        assert_eq!(newton_polish(&zero, &op, 1e-10), Err(Error::SingularLinearization));
    }

    #[test]
    fn options_are_checked() {
        let p = constant_cubic(-1.0);
        let ac = to_allen_cahn(&p, &PeriodicProfile::constant(1.0, 64, 1.0).unwrap()).unwrap();
        let opts = MinimizeOptions::with_half_length(2.5);
        assert!(matches!(minimize(&ac, &opts), Err(Error::Incommensurate { .. })));
        let opts = MinimizeOptions {
            grad_tol: 0.0,
            ..MinimizeOptions::with_half_length(3.0)
        };
        assert!(matches!(minimize(&ac, &opts), Err(Error::InvalidOption(_))));
    }
}
