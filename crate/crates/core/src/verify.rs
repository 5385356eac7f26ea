//! Numerical checks of the properties of a computed dark soliton.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::heteroclinic::report_crossing;
use crate::math::{abs, ln, sin, sup_norm, tanh};
use crate::model::{CheckedProblem, Grid, Model, PeriodicProfile, Profile};
use crate::periodic_orbit::bracket_bounds;
use crate::reduction::{to_allen_cahn, ReducedOperator, WeightedAC};

/// Tail differences at or below this are treated as underflow.
pub const TAIL_FLOOR: f64 = 1e-14;

/// Sup norm of the second-order discretized stationary equation (printed
/// form) at the interior nodes of `phi`.
pub fn residual_phi(phi: &Profile, p: &CheckedProblem) -> Result<f64> {
    let grid = &phi.grid;
    let k0 = p.coefficient().samples().aligned_offset(grid)?;
    let h2 = grid.step() * grid.step();
    let lambda = p.lambda();
    let f = &phi.values;
    let mut worst = 0.0f64;
    for i in 1..f.len() - 1 {
        let lap = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h2;
        let k = k0 + i as i64;
        let u = f[i];
        let r = match p.model() {
            Model::Cubic { g } => -0.5 * lap + lambda * u + g.at_node(k) * u * u * u,
            Model::CubicQuintic { v, g1 } => {
                let u2 = u * u;
                lap + (v.at_node(k) - lambda) * u - g1 * u2 * u - u2 * u2 * u
            }
        };
        worst = worst.max(abs(r));
    }
    Ok(worst)
}

/// `1 − max |w|` over interior nodes.
pub fn check_amplitude(w: &[f64]) -> f64 {
    let n = w.len();
    if n < 3 {
        return 1.0;
    }
    1.0 - sup_norm(&w[1..n - 1])
}

/// `min (w_{i+1} − w_i) / h`.
pub fn check_monotone(w: &Profile) -> f64 {
    let h = w.grid.step();
    w.values
        .windows(2)
        .map(|p| (p[1] - p[0]) / h)
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares fit of `log|φ − φ±|` against `|x|` on one tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Fitted decay rate `C₀` (negated slope).
    pub rate: f64,
    pub r2: f64,
    pub points: usize,
    /// Some window nodes fell below [`TAIL_FLOOR`] and were dropped.
    pub underflow: bool,
    /// Same fit on the staggered difference of `φ − φ±`.
    pub derivative_rate: Option<f64>,
    pub derivative_r2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub left: TailFit,
    pub right: TailFit,
}

/// Slope, intercept and `r²` of the least-squares line through `(x, y)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = syy - slope * sxy;
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some((slope, intercept, r2))
}

fn fit_tail(xs: &[f64], diffs: &[f64], h: f64) -> Result<TailFit> {
    let mut underflow = false;
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(diffs)
        .filter_map(|(x, d)| {
            if abs(*d) > TAIL_FLOOR {
                Some((abs(*x), ln(abs(*d))))
            } else {
                underflow = true;
                None
            }
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::TailUnderflow);
    }
    let (slope, _, r2) = linear_fit(&pts).ok_or(Error::TailUnderflow)?;

    let dpts: Vec<(f64, f64)> = (0..xs.len().saturating_sub(1))
        .filter_map(|i| {
            let d = (diffs[i + 1] - diffs[i]) / h;
            (abs(d) > TAIL_FLOOR).then(|| (abs(0.5 * (xs[i] + xs[i + 1])), ln(abs(d))))
        })
        .collect();
    let deriv = if dpts.len() >= 3 { linear_fit(&dpts) } else { None };
    Ok(TailFit {
        rate: -slope,
        r2,
        points: pts.len(),
        underflow,
        derivative_rate: deriv.map(|d| -d.0),
        derivative_r2: deriv.map(|d| d.2),
    })
}

/// Fits the exponential approach of `φ` to `φ±` on the outer `tail_fraction`
/// of each half-domain, after removing a collar of two periods at each end.
pub fn fit_decay_rate(phi: &Profile, phi_plus: &PeriodicProfile, tail_fraction: f64) -> Result<DecayFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidOption("tail_fraction must lie in (0, 1]"));
    }
    let grid = &phi.grid;
    let ext = phi_plus.extend_to(grid)?;
    let collar = 2.0 * phi_plus.period();
    let outer = grid.xmax().min(-grid.xmin()) - collar;
    if !(outer > 0.0) {
        return Err(Error::InsufficientData("domain shorter than the boundary collars"));
    }
    let inner = (1.0 - tail_fraction) * outer;
    let tol = 1e-9 * grid.step();
    let h = grid.step();

    let mut right = (Vec::new(), Vec::new());
    let mut left = (Vec::new(), Vec::new());
    for i in 0..grid.len() {
        let x = grid.x(i);
        if x >= inner - tol && x <= outer + tol {
            right.0.push(x);
            right.1.push(phi.values[i] - ext.values[i]);
        }
        if x <= -inner + tol && x >= -outer - tol {
            left.0.push(x);
            left.1.push(phi.values[i] + ext.values[i]);
        }
    }
    Ok(DecayFit {
        left: fit_tail(&left.0, &left.1, h)?,
        right: fit_tail(&right.0, &right.1, h)?,
    })
}

/// `sup |φ/φ± − 1|` over the outer `tail_fraction` of each half-domain,
/// returned as `(left, right)`.
pub fn check_asymptotic_ratio(phi: &Profile, phi_plus: &PeriodicProfile, tail_fraction: f64) -> Result<(f64, f64)> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidOption("tail_fraction must lie in (0, 1]"));
    }
    let grid = &phi.grid;
    let ext = phi_plus.extend_to(grid)?;
    let tol = 1e-9 * grid.step();
    let right_from = (1.0 - tail_fraction) * grid.xmax();
    let left_to = (1.0 - tail_fraction) * grid.xmin();
    let (mut left, mut right) = (0.0f64, 0.0f64);
    for i in 0..grid.len() {
        let x = grid.x(i);
        let ratio = phi.values[i] / ext.values[i];
        if x >= right_from - tol {
            right = right.max(abs(ratio - 1.0));
        }
        if x <= left_to + tol {
            left = left.max(abs(-ratio - 1.0));
        }
    }
    Ok((left, right))
}

/// Random smooth profile with end values `∓1`.
fn random_profile(grid: &Grid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let half = 0.5 * (grid.xmax() - grid.xmin());
    let kappa: f64 = rng.random_range(0.5..3.0);
    let center: f64 = rng.random_range(-0.25..0.25) * half;
    let modes: [f64; 3] = [
        rng.random_range(-0.2..0.2),
        rng.random_range(-0.2..0.2),
        rng.random_range(-0.2..0.2),
    ];
    let n = grid.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                return -1.0;
            }
            if i == n - 1 {
                return 1.0;
            }
            let x = grid.x(i);
            let s = (x - grid.xmin()) / (2.0 * half);
            let bump: f64 = modes
                .iter()
                .enumerate()
                .map(|(k, a)| a * sin((k + 1) as f64 * core::f64::consts::PI * s))
                .sum();
            tanh(0.5 * kappa * (x - center)) + bump
        })
        .collect()
}

const FD_STEP: f64 = 1e-5;
const FD_NODES: usize = 40;

/// Worst relative error between [`ReducedOperator::gradient`] and central
/// differences of [`ReducedOperator::energy`] over `n_trials` random smooth
/// profiles, measured as `max |g − g_fd| / max |g|` on sampled nodes.
pub fn gradient_consistency(op: &ReducedOperator, n_trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = *op.grid();
    let n = grid.len();
    let mut worst = 0.0f64;
    for _ in 0..n_trials {
        let w = random_profile(&grid, &mut rng);
        let g = op.gradient(&w);
        let nodes: Vec<usize> = if n - 2 <= FD_NODES {
            (1..n - 1).collect()
        } else {
            (0..FD_NODES).map(|_| rng.random_range(1..n - 1)).collect()
        };
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        let mut probe = w.clone();
        for &i in &nodes {
            probe[i] = w[i] + FD_STEP;
            let ep = op.energy(&probe);
            probe[i] = w[i] - FD_STEP;
            let em = op.energy(&probe);
            probe[i] = w[i];
            let fd = (ep - em) / (2.0 * FD_STEP);
            err = err.max(abs(fd - g[i]));
            scale = scale.max(abs(g[i]));
        }
        let rel = if scale == 0.0 {
            if err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            err / scale
        };
        worst = worst.max(rel);
    }
    worst
}

/// Margin of the sufficient condition `g₁/4 + ρ₁²/3 ≥ 0` (cubic-quintic only).
pub fn quintic_sufficient_margin(p: &CheckedProblem) -> Option<f64> {
    match p.model() {
        Model::Cubic { .. } => None,
        Model::CubicQuintic { g1, .. } => {
            let rho1 = bracket_bounds(p).lower;
            Some(0.25 * g1 + rho1 * rho1 / 3.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    /// `g_min ≤ g_max/3`: the classical uniqueness condition fails.
    UniquenessConditionFails,
    TailUnderflowLeft,
    TailUnderflowRight,
    DecayFitFailed,
    /// `g₁/4 + ρ₁²/3 < 0`.
    QuinticSufficientConditionFails,
    /// The quintic energy density bracket is negative somewhere.
    QuinticNegativeBracket,
    /// The only interior nodes with `|w| ≥ 1` are end runs equal to `∓1`:
    /// the tail fell below the resolution of `f64` near 1.
    TailSaturated,
}

impl Diagnostic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Diagnostic::UniquenessConditionFails => "uniqueness-condition-fails",
            Diagnostic::TailUnderflowLeft => "tail-underflow-left",
            Diagnostic::TailUnderflowRight => "tail-underflow-right",
            Diagnostic::DecayFitFailed => "decay-fit-failed",
            Diagnostic::QuinticSufficientConditionFails => "quintic-sufficient-condition-fails",
            Diagnostic::QuinticNegativeBracket => "quintic-negative-bracket",
            Diagnostic::TailSaturated => "tail-saturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Every checked property holds with a positive margin.
    Verified,
    /// Converged, but some property margin is not positive.
    PropertyViolated,
    /// Cubic-quintic run outside the sufficient condition.
    UnsupportedRegime,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::PropertyViolated => "property-violated",
            Status::UnsupportedRegime => "unsupported-regime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub decay_tail_fraction: f64,
    pub ratio_tail_fraction: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            decay_tail_fraction: 0.5,
            ratio_tail_fraction: 0.25,
        }
    }
}

/// True when interior nodes reach `|w| = 1` only as runs of exact `-1` at the
/// left end or exact `1` at the right end.
pub fn tail_saturated(w: &[f64]) -> bool {
    let n = w.len();
    if n < 3 {
        return false;
    }
    let interior = &w[1..n - 1];
    let left = interior.iter().take_while(|v| **v == -1.0).count();
    let right = interior.iter().rev().take_while(|v| **v == 1.0).count();
    let rest = &interior[left..interior.len().saturating_sub(right).max(left)];
    left + right > 0 && rest.iter().all(|v| v.abs() < 1.0)
}

/// Verification record of one computed soliton.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonReport {
    pub residual_phi_sup: f64,
    pub residual_reduced_sup: f64,
    pub amplitude_margin: f64,
    pub monotonicity_margin: f64,
    pub decay: Option<DecayFit>,
    /// `(left, right)`.
    pub asymptotic_ratio_err: (f64, f64),
    pub energy: f64,
    pub crossing: Option<f64>,
    pub uniqueness_margin: Option<f64>,
    pub quintic_sufficient_margin: Option<f64>,
    /// Sorted, without repetitions.
    pub flags: Vec<Diagnostic>,
}

impl SolitonReport {
    pub fn status(&self) -> Status {
        if self.flags.contains(&Diagnostic::QuinticSufficientConditionFails) {
            return Status::UnsupportedRegime;
        }
        let decays = self
            .decay
            .map(|d| d.left.rate > 0.0 && d.right.rate > 0.0)
            .unwrap_or(false);
        if self.amplitude_margin > 0.0 && self.monotonicity_margin > 0.0 && decays {
            Status::Verified
        } else {
            Status::PropertyViolated
        }
    }
}

/// Runs every check on `w` and `φ = φ₊ w` (both on the same grid).
pub fn verify_soliton(
    p: &CheckedProblem,
    phi_plus: &PeriodicProfile,
    w: &Profile,
    phi: &Profile,
    opts: &VerifyOptions,
) -> Result<SolitonReport> {
    if w.grid != phi.grid {
        return Err(Error::GridMismatch);
    }
    let ac: WeightedAC = to_allen_cahn(p, phi_plus)?;
    let op = ac.on_grid(&w.grid)?;
    let mut flags = Vec::new();

    if let Some(d) = p.uniqueness() {
        if !d.holds {
            flags.push(Diagnostic::UniquenessConditionFails);
        }
    }
    let quintic_margin = quintic_sufficient_margin(p);
    if quintic_margin.is_some_and(|m| m < 0.0) {
        flags.push(Diagnostic::QuinticSufficientConditionFails);
    }
    if op.negative_bracket_nodes(&w.values) > 0 {
        flags.push(Diagnostic::QuinticNegativeBracket);
    }
    if tail_saturated(&w.values) {
        flags.push(Diagnostic::TailSaturated);
    }

    let decay = match fit_decay_rate(phi, phi_plus, opts.decay_tail_fraction) {
        Ok(d) => {
            if d.left.underflow {
                flags.push(Diagnostic::TailUnderflowLeft);
            }
            if d.right.underflow {
                flags.push(Diagnostic::TailUnderflowRight);
            }
            Some(d)
        }
        Err(Error::TailUnderflow) | Err(Error::InsufficientData(_)) => {
            flags.push(Diagnostic::DecayFitFailed);
            None
        }
        Err(e) => return Err(e),
    };
    flags.sort();
    flags.dedup();

    Ok(SolitonReport {
        residual_phi_sup: residual_phi(phi, p)?,
        residual_reduced_sup: sup_norm(&op.residual(&w.values)),
        amplitude_margin: check_amplitude(&w.values),
        monotonicity_margin: check_monotone(w),
        decay,
        asymptotic_ratio_err: check_asymptotic_ratio(phi, phi_plus, opts.ratio_tail_fraction)?,
        energy: op.energy(&w.values),
        crossing: report_crossing(w).ok(),
        uniqueness_margin: p.uniqueness().map(|d| d.margin),
        quintic_sufficient_margin: quintic_margin,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_and_monotonicity() {
        let grid = Grid::symmetric(3.0, 0.01).unwrap();
        let w = Profile::from_fn(grid, tanh).unwrap();
        assert!(check_amplitude(&w.values) > 0.0);
        assert!(check_monotone(&w) > 0.0);

        let mut touched = w.values.clone();
        touched[100] = 1.0;
        assert_eq!(check_amplitude(&touched), 0.0);

        let flat = Profile::from_fn(grid, |_| 0.25).unwrap();
        assert_eq!(check_monotone(&flat), 0.0);
    }

    #[test]
    fn saturation_is_only_an_end_run() {
        assert!(!tail_saturated(&[-1.0, -0.5, 0.0, 0.5, 1.0]));
        assert!(tail_saturated(&[-1.0, -0.5, 0.0, 1.0, 1.0]));
        assert!(tail_saturated(&[-1.0, -1.0, -1.0, 1.0, 1.0]));
        assert!(!tail_saturated(&[-1.0, -0.5, 1.0, 0.5, 1.0]));
        assert!(!tail_saturated(&[-1.0, -0.5, 1.2, 0.5, 1.0]));
    }

    #[test]
    fn linear_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let (s, c, r2) = linear_fit(&pts).unwrap();
        assert!((s + 2.0).abs() < 1e-14 && (c - 3.0).abs() < 1e-13 && (r2 - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn ratio_of_background_is_exact() {
        let phi_plus = PeriodicProfile::new(1.0, (0..16).map(|k| 1.0 + 0.01 * k as f64).collect()).unwrap();
        let grid = Grid::symmetric(4.0, 1.0 / 16.0).unwrap();
        let ext = phi_plus.extend_to(&grid).unwrap();
        let (_, right) = check_asymptotic_ratio(&ext, &phi_plus, 0.25).unwrap();
        assert_eq!(right, 0.0);
        let kink = Profile {
            grid,
            values: ext
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| if grid.x(i) < 0.0 { -v } else { *v })
                .collect(),
        };
        assert_eq!(check_asymptotic_ratio(&kink, &phi_plus, 0.25).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn tail_underflow_is_reported() {
        let phi_plus = PeriodicProfile::constant(1.0, 16, 1.0).unwrap();
        let grid = Grid::symmetric(8.0, 1.0 / 16.0).unwrap();
        let step = Profile::from_fn(grid, |x| if x < 0.0 { -1.0 } else { 1.0 }).unwrap();
        assert_eq!(fit_decay_rate(&step, &phi_plus, 0.5), Err(Error::TailUnderflow));
    }
}
