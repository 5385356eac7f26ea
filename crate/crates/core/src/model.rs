//! Grids, sampled periodic coefficients and problem validation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, round};

/// Relative slack used when checking that a step divides a length.
const ALIGN_TOL: f64 = 1e-9;

/// Uniform one-dimensional mesh `x_i = xmin + i h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    xmin: f64,
    xmax: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn uniform(xmin: f64, xmax: f64, n: usize) -> Result<Grid> {
        if n < 3 {
            return Err(Error::TooFewNodes(n));
        }
        if !(xmax > xmin) || !xmin.is_finite() || !xmax.is_finite() {
            return Err(Error::EmptyInterval { xmin, xmax });
        }
        let h = (xmax - xmin) / (n - 1) as f64;
        Ok(Grid { xmin, xmax, n, h })
    }

    /// Symmetric grid on `[-half_length, half_length]` with the given step.
    pub fn symmetric(half_length: f64, h: f64) -> Result<Grid> {
        if !(h > 0.0) {
            return Err(Error::InvalidOption("grid step must be positive"));
        }
        let cells = count_steps(2.0 * half_length, h)?;
        Grid::uniform(-half_length, half_length, cells + 1)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.xmin + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Index of `xmin` on the lattice `h Z`, if `xmin` is a lattice point.
    pub fn lattice_offset(&self) -> Result<i64> {
        let k = round(self.xmin / self.h);
        if abs(self.xmin / self.h - k) > 1e-6 {
            return Err(Error::GridMismatch);
        }
        Ok(k as i64)
    }
}

pub fn make_uniform_grid(xmin: f64, xmax: f64, n: usize) -> Result<Grid> {
    Grid::uniform(xmin, xmax, n)
}

/// Number of steps `length / h`, rejected unless it is an integer.
pub fn count_steps(length: f64, h: f64) -> Result<usize> {
    let ratio = length / h;
    let k = round(ratio);
    if !(k >= 1.0) || abs(ratio - k) > ALIGN_TOL * k.max(1.0) {
        return Err(Error::Incommensurate { period: length, step: h });
    }
    Ok(k as usize)
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Profile> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Profile { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Profile> {
        Profile::new(grid, grid.nodes().map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Samples of a `period`-periodic function on the nodes `k h`, `h = period / len`.
/// Node `k` of the whole lattice maps to sample `k mod len`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    period: f64,
    values: Vec<f64>,
}

impl PeriodicProfile {
    pub fn new(period: f64, values: Vec<f64>) -> Result<PeriodicProfile> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::NonPositivePeriod(period));
        }
        if values.len() < 3 {
            return Err(Error::TooFewNodes(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(PeriodicProfile { period, values })
    }

    pub fn constant(period: f64, n: usize, value: f64) -> Result<PeriodicProfile> {
        PeriodicProfile::new(period, alloc::vec![value; n])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn step(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at_node(&self, k: i64) -> f64 {
        self.values[k.rem_euclid(self.values.len() as i64) as usize]
    }

    /// Value at the lattice node nearest to `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.at_node(round(x / self.step()) as i64)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same samples as seen from a lattice shifted by `nodes`.
    pub fn rotated(&self, nodes: i64) -> PeriodicProfile {
        let values = (0..self.values.len() as i64)
            .map(|k| self.at_node(k + nodes))
            .collect();
        PeriodicProfile {
            period: self.period,
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PeriodicProfile {
        PeriodicProfile {
            period: self.period,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Checks that `grid` sits on this profile's lattice.
    pub fn aligned_offset(&self, grid: &Grid) -> Result<i64> {
        let h = self.step();
        if abs(grid.step() - h) > ALIGN_TOL * h {
            return Err(Error::GridMismatch);
        }
        let k = round(grid.xmin() / h);
        if abs(grid.xmin() / h - k) > 1e-6 {
            return Err(Error::GridMismatch);
        }
        Ok(k as i64)
    }

    /// Node values on `grid` by exact periodic extension.
    pub fn extend_to(&self, grid: &Grid) -> Result<Profile> {
        let k0 = self.aligned_offset(grid)?;
        let values = (0..grid.len())
            .map(|i| self.at_node(k0 + i as i64))
            .collect();
        Ok(Profile {
            grid: *grid,
            values,
        })
    }
}

/// Which role a coefficient plays; the nonlinearity must stay positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientRole {
    Nonlinearity,
    Potential,
}

/// A periodic coefficient with its extrema over the sample nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    samples: PeriodicProfile,
    cmin: f64,
    cmax: f64,
}

impl Coefficient {
    pub fn from_samples(samples: PeriodicProfile, role: CoefficientRole) -> Result<Coefficient> {
        let (cmin, cmax) = (samples.min(), samples.max());
        if role == CoefficientRole::Nonlinearity && !(cmin > 0.0) {
            return Err(Error::NonPositiveNonlinearity(cmin));
        }
        Ok(Coefficient {
            samples,
            cmin,
            cmax,
        })
    }

    pub fn samples(&self) -> &PeriodicProfile {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.samples.period()
    }

    pub fn step(&self) -> f64 {
        self.samples.step()
    }

    pub fn nodes_per_period(&self) -> usize {
        self.samples.len()
    }

    pub fn min(&self) -> f64 {
        self.cmin
    }

    pub fn max(&self) -> f64 {
        self.cmax
    }

    #[inline]
    pub fn at_node(&self, k: i64) -> f64 {
        self.samples.at_node(k)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.samples.eval(x)
    }

    pub fn is_constant(&self) -> bool {
        self.cmin == self.cmax
    }
}

/// How a coefficient is supplied.
pub enum CoefficientSpec<'a> {
    Constant(f64),
    Closed(&'a dyn Fn(f64) -> f64),
    /// Node values on `[0, T)`; the node count is taken from the table.
    Table(&'a [f64]),
}

/// Samples `spec` on `n_per_period` nodes `k T / n` of one period.
pub fn sample_coefficient(
    spec: CoefficientSpec<'_>,
    period: f64,
    n_per_period: usize,
    role: CoefficientRole,
) -> Result<Coefficient> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::NonPositivePeriod(period));
    }
    let h = period / n_per_period as f64;
    let values: Vec<f64> = match spec {
        CoefficientSpec::Constant(c) => alloc::vec![c; n_per_period],
        CoefficientSpec::Closed(f) => (0..n_per_period).map(|k| f(k as f64 * h)).collect(),
        CoefficientSpec::Table(t) => {
            if t.len() != n_per_period {
                return Err(Error::Incommensurate {
                    period,
                    step: period / t.len() as f64,
                });
            }
            t.to_vec()
        }
    };
    Coefficient::from_samples(PeriodicProfile::new(period, values)?, role)
}

/// The stationary model and its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// `-½φ'' + λφ + g(x)φ³ = 0`.
    Cubic { g: Coefficient },
    /// `φ'' + (V(x) − λ)φ − g₁φ³ − φ⁵ = 0`.
    CubicQuintic { v: Coefficient, g1: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub lambda: f64,
    pub model: Model,
}

impl Problem {
    pub fn cubic(lambda: f64, g: Coefficient) -> Problem {
        Problem {
            lambda,
            model: Model::Cubic { g },
        }
    }

    pub fn cubic_quintic(lambda: f64, v: Coefficient, g1: f64) -> Problem {
        Problem {
            lambda,
            model: Model::CubicQuintic { v, g1 },
        }
    }

    /// The coefficient that carries the period and the lattice.
    pub fn coefficient(&self) -> &Coefficient {
        match &self.model {
            Model::Cubic { g } => g,
            Model::CubicQuintic { v, .. } => v,
        }
    }

    pub fn period(&self) -> f64 {
        self.coefficient().period()
    }

    pub fn step(&self) -> f64 {
        self.coefficient().step()
    }

    pub fn nodes_per_period(&self) -> usize {
        self.coefficient().nodes_per_period()
    }

    pub fn is_cubic(&self) -> bool {
        matches!(self.model, Model::Cubic { .. })
    }
}

/// Margin `g_min − g_max/3` of the classical uniqueness condition.
///
/// Informational only: no solver path reads it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessDiagnostic {
    pub margin: f64,
    pub holds: bool,
}

impl UniquenessDiagnostic {
    pub fn for_extrema(g_min: f64, g_max: f64) -> UniquenessDiagnostic {
        let margin = g_min - g_max / 3.0;
        UniquenessDiagnostic {
            margin,
            holds: margin > 0.0,
        }
    }
}

/// A problem that passed [`validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedProblem {
    problem: Problem,
    uniqueness: Option<UniquenessDiagnostic>,
}

impl CheckedProblem {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn into_problem(self) -> Problem {
        self.problem
    }

    pub fn lambda(&self) -> f64 {
        self.problem.lambda
    }

    pub fn model(&self) -> &Model {
        &self.problem.model
    }

    /// `None` for the cubic-quintic model.
    pub fn uniqueness(&self) -> Option<UniquenessDiagnostic> {
        self.uniqueness
    }

    /// Overrides the diagnostic flag; used to show it is pure metadata.
    pub fn set_uniqueness_flag(&mut self, holds: bool) {
        if let Some(d) = self.uniqueness.as_mut() {
            d.holds = holds;
        }
    }
}

impl core::ops::Deref for CheckedProblem {
    type Target = Problem;
    fn deref(&self) -> &Problem {
        &self.problem
    }
}

pub fn validate_problem(p: Problem) -> Result<CheckedProblem> {
    if !p.lambda.is_finite() {
        return Err(Error::InvalidOption("lambda must be finite"));
    }
    let coefficient = p.coefficient();
    if !(coefficient.period() > 0.0) {
        return Err(Error::NonPositivePeriod(coefficient.period()));
    }
    let uniqueness = match &p.model {
        Model::Cubic { g } => {
            if !(g.min() > 0.0) {
                return Err(Error::NonPositiveNonlinearity(g.min()));
            }
            if p.lambda >= 0.0 {
                return Err(Error::LambdaNotNegative(p.lambda));
            }
            Some(UniquenessDiagnostic::for_extrema(g.min(), g.max()))
        }
        Model::CubicQuintic { v, g1 } => {
            if !g1.is_finite() {
                return Err(Error::InvalidOption("g1 must be finite"));
            }
            if p.lambda >= v.min() {
                return Err(Error::LambdaNotBelowMinV {
                    lambda: p.lambda,
                    min_v: v.min(),
                });
            }
            None
        }
    };
    Ok(CheckedProblem {
        problem: p,
        uniqueness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn grid_steps() {
        assert_eq!(make_uniform_grid(0.0, 1.0, 11).unwrap().step(), 0.1);
        let g = make_uniform_grid(-20.0, 20.0, 4001).unwrap();
        assert!((g.step() - 0.01).abs() < 1e-15);
        assert_eq!(make_uniform_grid(0.0, 1.0, 2), Err(Error::TooFewNodes(2)));
        assert!(matches!(
            make_uniform_grid(1.0, 1.0, 5),
            Err(Error::EmptyInterval { .. })
        ));
    }

    #[test]
    fn symmetric_grid_rejects_incommensurate_step() {
        let g = Grid::symmetric(6.0, 1.0 / 256.0).unwrap();
        assert_eq!(g.len(), 12 * 256 + 1);
        assert_eq!(g.lattice_offset().unwrap(), -6 * 256);
        assert!(matches!(
            count_steps(1.0, 0.3),
            Err(Error::Incommensurate { .. })
        ));
    }

    #[test]
    fn coefficient_extrema() {
        let c = sample_coefficient(CoefficientSpec::Constant(1.0), 1.0, 64, CoefficientRole::Nonlinearity)
            .unwrap();
        assert_eq!((c.min(), c.max()), (1.0, 1.0));

        let f = |x: f64| 1.0 + 0.5 * libm::sin(2.0 * PI * x);
        let c = sample_coefficient(CoefficientSpec::Closed(&f), 1.0, 256, CoefficientRole::Nonlinearity)
            .unwrap();
        // 256 divisible by 4: the extrema are sampled exactly up to rounding
        assert!((c.min() - 0.5).abs() < 1e-12);
        assert!((c.max() - 1.5).abs() < 1e-12);

        let neg = sample_coefficient(CoefficientSpec::Constant(-1.0), 1.0, 16, CoefficientRole::Nonlinearity);
        assert_eq!(neg, Err(Error::NonPositiveNonlinearity(-1.0)));
        assert!(sample_coefficient(CoefficientSpec::Constant(-1.0), 1.0, 16, CoefficientRole::Potential).is_ok());
        assert_eq!(
            sample_coefficient(CoefficientSpec::Constant(1.0), 0.0, 16, CoefficientRole::Potential),
            Err(Error::NonPositivePeriod(0.0))
        );
    }

    #[test]
    fn periodic_extension_is_exact() {
        let f = |x: f64| 1.0 + 0.3 * libm::cos(2.0 * PI * x / 2.5);
        let c = sample_coefficient(CoefficientSpec::Closed(&f), 2.5, 50, CoefficientRole::Nonlinearity)
            .unwrap();
        let h = c.step();
        for k in -120i64..120 {
            let x = k as f64 * h;
            assert_eq!(c.at_node(k).to_bits(), c.at_node(k + 50).to_bits());
            assert_eq!(c.eval(x).to_bits(), c.eval(x + 2.5).to_bits());
        }
    }

    #[test]
    fn validation_cases() {
        let one = sample_coefficient(CoefficientSpec::Constant(1.0), 1.0, 32, CoefficientRole::Nonlinearity)
            .unwrap();
        let ok = validate_problem(Problem::cubic(-1.0, one.clone())).unwrap();
        let d = ok.uniqueness().unwrap();
        assert!(d.holds);
        assert!((d.margin - 2.0 / 3.0).abs() < 1e-15);

        assert_eq!(
            validate_problem(Problem::cubic(0.5, one.clone())),
            Err(Error::LambdaNotNegative(0.5))
        );

        let f = |x: f64| 1.0 + 0.9 * libm::sin(2.0 * PI * x);
        let g = sample_coefficient(CoefficientSpec::Closed(&f), 1.0, 256, CoefficientRole::Nonlinearity)
            .unwrap();
        let d = validate_problem(Problem::cubic(-1.0, g)).unwrap().uniqueness().unwrap();
        assert!(!d.holds);
        assert!((d.margin - (0.1 - 1.9 / 3.0)).abs() < 1e-12);

        let v0 = sample_coefficient(CoefficientSpec::Constant(0.0), 1.0, 32, CoefficientRole::Potential)
            .unwrap();
        assert!(validate_problem(Problem::cubic_quintic(-1.0, v0.clone(), 0.0)).is_ok());
        assert!(matches!(
            validate_problem(Problem::cubic_quintic(0.0, v0, 0.0)),
            Err(Error::LambdaNotBelowMinV { .. })
        ));
    }

    #[test]
    fn validation_is_idempotent() {
        let f = |x: f64| 2.0 + libm::sin(2.0 * PI * x);
        let g = sample_coefficient(CoefficientSpec::Closed(&f), 1.0, 40, CoefficientRole::Nonlinearity)
            .unwrap();
        let once = validate_problem(Problem::cubic(-0.7, g)).unwrap();
        let twice = validate_problem(once.clone().into_problem()).unwrap();
        assert_eq!(once, twice);
    }
}
