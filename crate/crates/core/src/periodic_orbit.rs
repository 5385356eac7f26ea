//! Positive periodic background `φ₊` of the stationary equation.
//!
//! Both models are written as `−α φ'' + f(x, φ) = 0` with
//!
//! * cubic: `α = ½`, `f = λφ + g φ³`;
//! * cubic-quintic: `α = 1`, `f = (λ − V) φ + g₁ φ³ + φ⁵`.
//!
//! The constant levels of [`Bracket`] are a lower and an upper solution, and the
//! second-order three-point discretization inherits the bracket through the
//! discrete maximum principle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::solve_cyclic_tridiagonal;
use crate::math::{abs, sqrt, sup_norm};
use crate::model::{CheckedProblem, Model, PeriodicProfile, UniquenessDiagnostic};

/// Constant sub/supersolution levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lower).min(self.upper)
    }
}

/// Positive root `ρ` of `ρ⁴ + g₁ρ² − μ = 0`.
pub fn quintic_level(g1: f64, mu: f64) -> f64 {
    // (1/√2) sqrt(sqrt(g₁² + 4μ) − g₁), rationalized when g₁ > 0 to avoid cancellation
    let disc = sqrt(g1 * g1 + 4.0 * mu);
    let s = if g1 > 0.0 {
        2.0 * mu / (disc + g1)
    } else {
        (disc - g1) / 2.0
    };
    sqrt(s)
}

pub fn bracket_bounds(p: &CheckedProblem) -> Bracket {
    match p.model() {
        Model::Cubic { g } => Bracket {
            lower: sqrt(-p.lambda() / g.max()),
            upper: sqrt(-p.lambda() / g.min()),
        },
        Model::CubicQuintic { v, g1 } => Bracket {
            lower: quintic_level(*g1, v.min() - p.lambda()),
            upper: quintic_level(*g1, v.max() - p.lambda()),
        },
    }
}

pub fn uniqueness_diagnostic(p: &CheckedProblem) -> Option<UniquenessDiagnostic> {
    match p.model() {
        Model::Cubic { g } => Some(UniquenessDiagnostic::for_extrema(g.min(), g.max())),
        Model::CubicQuintic { .. } => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicSolveOptions {
    /// Sup norm of the discrete stationary residual.
    pub residual_tol: f64,
    pub max_newton_iters: usize,
    /// Initial Newton step length in `(0, 1]`.
    pub damping: f64,
}

impl Default for PeriodicSolveOptions {
    fn default() -> Self {
        PeriodicSolveOptions {
            residual_tol: 1e-10,
            max_newton_iters: 50,
            damping: 1.0,
        }
    }
}

impl PeriodicSolveOptions {
    fn check(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidOption("residual_tol must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidOption("damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSolution {
    pub phi_plus: PeriodicProfile,
    pub bracket: Bracket,
    /// Sup norm of the residual in the printed form of the equation.
    pub residual: f64,
    pub iterations: usize,
}

/// Discrete stationary operator on one period.
pub(crate) struct Stationary<'a> {
    lambda: f64,
    model: &'a Model,
    h: f64,
    n: usize,
}

impl<'a> Stationary<'a> {
    pub(crate) fn new(p: &'a CheckedProblem) -> Self {
        Stationary {
            lambda: p.lambda(),
            model: p.model(),
            h: p.step(),
            n: p.nodes_per_period(),
        }
    }

    fn diffusion(&self) -> f64 {
        match self.model {
            Model::Cubic { .. } => 0.5,
            Model::CubicQuintic { .. } => 1.0,
        }
    }

    /// Sign turning `−αφ'' + f` into the printed form of the equation.
    fn printed_sign(&self) -> f64 {
        match self.model {
            Model::Cubic { .. } => 1.0,
            Model::CubicQuintic { .. } => -1.0,
        }
    }

    #[inline]
    pub(crate) fn reaction(&self, k: i64, phi: f64) -> f64 {
        let phi2 = phi * phi;
        match self.model {
            Model::Cubic { g } => phi * (self.lambda + g.at_node(k) * phi2),
            Model::CubicQuintic { v, g1 } => {
                phi * (self.lambda - v.at_node(k) + g1 * phi2 + phi2 * phi2)
            }
        }
    }

    #[inline]
    fn reaction_slope(&self, k: i64, phi: f64) -> f64 {
        let phi2 = phi * phi;
        match self.model {
            Model::Cubic { g } => self.lambda + 3.0 * g.at_node(k) * phi2,
            Model::CubicQuintic { v, g1 } => {
                self.lambda - v.at_node(k) + 3.0 * g1 * phi2 + 5.0 * phi2 * phi2
            }
        }
    }

    /// Upper bound of `∂f/∂φ` over the bracket and all nodes.
    fn max_slope(&self, b: &Bracket) -> f64 {
        match self.model {
            Model::Cubic { g } => self.lambda + 3.0 * g.max() * b.upper * b.upper,
            Model::CubicQuintic { v, g1 } => {
                // convex quadratic in s = φ², so the maximum sits at an end
                let q = |s: f64| 3.0 * g1 * s + 5.0 * s * s;
                let (l2, u2) = (b.lower * b.lower, b.upper * b.upper);
                self.lambda - v.min() + q(l2).max(q(u2))
            }
        }
    }

    /// `−αφ'' + f(φ)` at every node of one period.
    fn operator(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let c = self.diffusion() / (self.h * self.h);
        (0..n)
            .map(|i| {
                let left = phi[(i + n - 1) % n];
                let right = phi[(i + 1) % n];
                -c * (left - 2.0 * phi[i] + right) + self.reaction(i as i64, phi[i])
            })
            .collect()
    }

    pub(crate) fn printed_residual(&self, phi: &[f64]) -> Vec<f64> {
        let s = self.printed_sign();
        self.operator(phi).into_iter().map(|r| s * r).collect()
    }
}

/// Newton's method on the periodic three-point discretization, started from
/// the middle of the bracket and globalized by step halving.
pub fn solve_periodic(p: &CheckedProblem, opts: &PeriodicSolveOptions) -> Result<PeriodicSolution> {
    opts.check()?;
    let op = Stationary::new(p);
    let bracket = bracket_bounds(p);
    let n = op.n;
    let c = op.diffusion() / (op.h * op.h);

    let mut phi = vec![0.5 * (bracket.lower + bracket.upper); n];
    let mut res = op.operator(&phi);
    let mut norm = sup_norm(&res);
    let mut clamped_iterations = 0usize;

    for iter in 0..=opts.max_newton_iters {
        if norm <= opts.residual_tol {
            return Ok(PeriodicSolution {
                phi_plus: PeriodicProfile::new(p.period(), phi)?,
                bracket,
                residual: norm,
                iterations: iter,
            });
        }
        if iter == opts.max_newton_iters {
            break;
        }
        let sub = vec![-c; n];
        let sup = vec![-c; n];
        let diag: Vec<f64> = (0..n)
            .map(|i| 2.0 * c + op.reaction_slope(i as i64, phi[i]))
            .collect();
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;

        let mut step = opts.damping;
        let mut accepted = None;
        for _ in 0..=30 {
            let mut clamped = false;
            let trial: Vec<f64> = phi
                .iter()
                .zip(&delta)
                .map(|(v, d)| {
                    let t = v + step * d;
                    if !bracket.contains(t) {
                        clamped = true;
                    }
                    bracket.clamp(t)
                })
                .collect();
            let trial_res = op.operator(&trial);
            let trial_norm = sup_norm(&trial_res);
            if trial_norm < norm {
                accepted = Some((trial, trial_res, trial_norm, clamped));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, trial_res, trial_norm, clamped)) = accepted else {
            return Err(Error::NonConvergence {
                iterations: iter + 1,
                residual: norm,
            });
        };
        if clamped {
            clamped_iterations += 1;
            if clamped_iterations > 1 {
                return Err(Error::BracketViolation(iter + 1));
            }
        }
        phi = trial;
        res = trial_res;
        norm = trial_norm;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_newton_iters,
        residual: norm,
    })
}

/// Sup norm of the printed stationary residual of a periodic profile.
pub fn periodic_residual(p: &CheckedProblem, phi: &PeriodicProfile) -> Result<f64> {
    if phi.len() != p.nodes_per_period() {
        return Err(Error::GridMismatch);
    }
    Ok(sup_norm(&Stationary::new(p).printed_residual(phi.values())))
}

/// Result of the two monotone sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonePair {
    /// Limit of the increasing sweep started at the lower solution.
    pub from_below: PeriodicProfile,
    /// Limit of the decreasing sweep started at the upper solution.
    pub from_above: PeriodicProfile,
    pub sweeps: usize,
    /// Whether `below ≤ above` held (to a few ulps) at every iteration.
    pub ordered: bool,
}

impl MonotonePair {
    /// Sup distance between the two limits; nonzero signals several periodic solutions.
    pub fn gap(&self) -> f64 {
        self.from_below
            .values()
            .iter()
            .zip(self.from_above.values())
            .fold(0.0, |m, (a, b)| m.max(abs(a - b)))
    }
}

const MAX_SWEEPS: usize = 200_000;

/// Independent solution by monotone iteration between the constant lower and
/// upper solutions.
///
/// Each sweep solves `(−α D² + M) φ_{k+1} = M φ_k − f(φ_k)` with `M` bounding
/// `∂f/∂φ` on the bracket, so the map is order preserving and the sweeps from
/// below and above increase and decrease monotonically. Iteration stops once
/// the extrapolated distance to the limit, `d_k r/(1 − r)` with the observed
/// contraction `r`, drops below `tol` on both sweeps.
pub fn monotone_iteration_oracle(p: &CheckedProblem, tol: f64) -> Result<MonotonePair> {
    if !(tol > 0.0) {
        return Err(Error::InvalidOption("tol must be positive"));
    }
    let op = Stationary::new(p);
    let bracket = bracket_bounds(p);
    let n = op.n;
    let c = op.diffusion() / (op.h * op.h);
    let shift = op.max_slope(&bracket).max(1e-3 * abs(p.lambda()).max(1e-3));

    let sub = vec![-c; n];
    let sup = vec![-c; n];
    let diag = vec![2.0 * c + shift; n];
    let sweep = |phi: &[f64]| -> Result<Vec<f64>> {
        let rhs: Vec<f64> = (0..n)
            .map(|i| shift * phi[i] - op.reaction(i as i64, phi[i]))
            .collect();
        solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)
    };

    let mut below = vec![bracket.lower; n];
    let mut above = vec![bracket.upper; n];
    let mut ordered = true;
    let mut prev_diff = [f64::INFINITY; 2];
    for k in 1..=MAX_SWEEPS {
        let next_below = sweep(&below)?;
        let next_above = sweep(&above)?;
        let diff = [dist(&next_below, &below), dist(&next_above, &above)];
        below = next_below;
        above = next_above;
        let slack = 4.0 * f64::EPSILON * bracket.upper;
        if below.iter().zip(&above).any(|(b, a)| *b > *a + slack) {
            ordered = false;
        }
        let done = (0..2).all(|s| {
            if diff[s] == 0.0 {
                return true;
            }
            let r = diff[s] / prev_diff[s];
            r < 1.0 && diff[s] * r / (1.0 - r) < tol && diff[s] < tol
        });
        if done {
            return Ok(MonotonePair {
                from_below: PeriodicProfile::new(p.period(), below)?,
                from_above: PeriodicProfile::new(p.period(), above)?,
                sweeps: k,
                ordered,
            });
        }
        prev_diff = diff;
    }
    Err(Error::NonConvergence {
        iterations: MAX_SWEEPS,
        residual: dist(&below, &above),
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max(abs(x - y)))
}
