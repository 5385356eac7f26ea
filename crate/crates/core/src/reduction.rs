//! Reduction `w = φ/φ₊` to a weighted Allen–Cahn problem.
//!
//! With `a = φ₊²` the reduced equations read
//!
//! * cubic: `(a w')' = b w(w² − 1)`, `b = 2gφ₊⁴`;
//! * cubic-quintic: `(a w')' = b w(w² − 1) + c w(w⁴ − 1)`, `b = g₁φ₊⁴`, `c = φ₊⁶`,
//!
//! and they are the Euler–Lagrange equations of
//!
//! * `E(w) = ∫ a w'² + gφ₊⁴(1 − w²)²`,
//! * `E(w) = ∫ ½ a w'² + φ₊⁴[g₁/4 + φ₊²(2 + w²)/6](1 − w²)²`.
//!
//! # Discretization
//!
//! The discrete energy is a midpoint sum of the kinetic term plus a trapezoid
//! sum of the potential. `w'` at the midpoint `m + ½` uses the fourth-order
//! staggered difference `(w_{m−1} − 27w_m + 27w_{m+1} − w_{m+2}) / 24h` and `a`
//! the matching four-point interpolation. Nodes outside the grid take the value
//! of the nearest boundary node. The residual is defined from this energy, so
//! `∂E/∂w_i = −2·kinetic_factor·h·R_i` holds exactly at interior nodes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::SymBand;
use crate::math::sqrt;
use crate::model::{CheckedProblem, Grid, Model, PeriodicProfile, Profile};

/// Stencil of the staggered derivative at `m + ½` on nodes `m − 1 ..= m + 2`, times `24h`.
pub(crate) const STAGGER: [f64; 4] = [1.0, -27.0, 27.0, -1.0];
/// Midpoint interpolation on nodes `m − 1 ..= m + 2`, times 16.
const MIDPOINT: [f64; 4] = [-1.0, 9.0, 9.0, -1.0];
/// Half bandwidth of the reduced Jacobian.
pub const HALF_BANDWIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedKind {
    Cubic,
    CubicQuintic,
}

/// Coefficients of the reduced problem on one period.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAC {
    pub a: PeriodicProfile,
    pub b: PeriodicProfile,
    pub c: PeriodicProfile,
    pub kind: ReducedKind,
    pub kinetic_factor: f64,
}

pub fn to_allen_cahn(p: &CheckedProblem, phi_plus: &PeriodicProfile) -> Result<WeightedAC> {
    if phi_plus.len() != p.nodes_per_period() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = phi_plus.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveBackground(i));
    }
    let period = phi_plus.period();
    let a = phi_plus.map(|v| v * v);
    let fourth: Vec<f64> = phi_plus.values().iter().map(|v| v * v * v * v).collect();
    match p.model() {
        Model::Cubic { g } => {
            let b = fourth
                .iter()
                .enumerate()
                .map(|(k, f)| 2.0 * g.at_node(k as i64) * f)
                .collect();
            Ok(WeightedAC {
                a,
                b: PeriodicProfile::new(period, b)?,
                c: PeriodicProfile::constant(period, phi_plus.len(), 0.0)?,
                kind: ReducedKind::Cubic,
                kinetic_factor: 1.0,
            })
        }
        Model::CubicQuintic { g1, .. } => Ok(WeightedAC {
            a,
            b: PeriodicProfile::new(period, fourth.iter().map(|f| g1 * f).collect())?,
            c: phi_plus.map(|v| {
                let v2 = v * v;
                v2 * v2 * v2
            }),
            kind: ReducedKind::CubicQuintic,
            kinetic_factor: 0.5,
        }),
    }
}

impl WeightedAC {
    pub fn period(&self) -> f64 {
        self.a.period()
    }

    pub fn step(&self) -> f64 {
        self.a.step()
    }

    /// `min (2b + 4c)/a` over the period: the squared decay rate of the
    /// linearization at `w = ±1` with frozen coefficients, if positive.
    pub fn decay_rate_bound(&self) -> Option<f64> {
        let k2 = (0..self.a.len() as i64)
            .map(|k| (2.0 * self.b.at_node(k) + 4.0 * self.c.at_node(k)) / self.a.at_node(k))
            .fold(f64::INFINITY, f64::min);
        (k2 > 0.0).then(|| sqrt(k2))
    }

    /// Floquet exponent of the linearization `(a v')' = (2b + 4c) v` at
    /// `w = ±1`, from the transfer matrix of the three-point scheme over one
    /// period. `None` when the linearization has no exponential dichotomy.
    pub fn floquet_decay_rate(&self) -> Option<f64> {
        let h = self.step();
        let n = self.a.len() as i64;
        // columns of the transfer matrix acting on (v_{i-1}, v_i)
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        for i in 0..n {
            let a_minus = 0.5 * (self.a.at_node(i) + self.a.at_node(i - 1));
            let a_plus = 0.5 * (self.a.at_node(i) + self.a.at_node(i + 1));
            let q = 2.0 * self.b.at_node(i) + 4.0 * self.c.at_node(i);
            let keep = (a_plus + a_minus + h * h * q) / a_plus;
            let back = -a_minus / a_plus;
            for col in &mut m {
                let next = keep * col[1] + back * col[0];
                *col = [col[1], next];
            }
        }
        let trace = crate::math::abs(m[0][0] + m[1][1]);
        if !(trace > 2.0) || !trace.is_finite() {
            return None;
        }
        let rho = 0.5 * (trace + sqrt(trace * trace - 4.0));
        Some(crate::math::ln(rho) / self.period())
    }

    /// Assembles the discrete operator on a grid aligned with the period lattice.
    pub fn on_grid(&self, grid: &Grid) -> Result<ReducedOperator> {
        let k0 = self.a.aligned_offset(grid)?;
        let n = grid.len();
        let a_mid = (0..n - 1)
            .map(|m| {
                let base = k0 + m as i64 - 1;
                MIDPOINT
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * self.a.at_node(base + j as i64))
                    .sum::<f64>()
                    / 16.0
            })
            .collect();
        let b = (0..n).map(|i| self.b.at_node(k0 + i as i64)).collect();
        let c = (0..n).map(|i| self.c.at_node(k0 + i as i64)).collect();
        Ok(ReducedOperator {
            grid: *grid,
            kind: self.kind,
            kinetic_factor: self.kinetic_factor,
            a_mid,
            b,
            c,
        })
    }
}

/// The reduced problem assembled on a concrete grid.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    grid: Grid,
    kind: ReducedKind,
    kinetic_factor: f64,
    a_mid: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ReducedOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kinetic_factor(&self) -> f64 {
        self.kinetic_factor
    }

    pub fn kind(&self) -> ReducedKind {
        self.kind
    }

    fn n(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    fn ghost(&self, w: &[f64], j: isize) -> f64 {
        let last = w.len() as isize - 1;
        w[j.clamp(0, last) as usize]
    }

    /// Staggered derivative at midpoint `m + ½`.
    #[inline]
    pub fn stagger(&self, w: &[f64], m: usize) -> f64 {
        let h = self.grid.step();
        let base = m as isize - 1;
        let s: f64 = STAGGER
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.ghost(w, base + j as isize))
            .sum();
        s / (24.0 * h)
    }

    /// Potential density at node `i`.
    #[inline]
    fn potential(&self, i: usize, w: f64) -> f64 {
        let s = 1.0 - w * w;
        match self.kind {
            ReducedKind::Cubic => 0.5 * self.b[i] * s * s,
            ReducedKind::CubicQuintic => {
                (0.25 * self.b[i] + self.c[i] * (2.0 + w * w) / 6.0) * s * s
            }
        }
    }

    /// Nonlinear term of the reduced equation, `P'(w) / (2·kinetic_factor)`.
    #[inline]
    pub fn force(&self, i: usize, w: f64) -> f64 {
        let w2 = w * w;
        let cubic = self.b[i] * w * (w2 - 1.0);
        match self.kind {
            ReducedKind::Cubic => cubic,
            ReducedKind::CubicQuintic => cubic + self.c[i] * w * (w2 * w2 - 1.0),
        }
    }

    #[inline]
    fn force_slope(&self, i: usize, w: f64) -> f64 {
        let w2 = w * w;
        let cubic = self.b[i] * (3.0 * w2 - 1.0);
        match self.kind {
            ReducedKind::Cubic => cubic,
            ReducedKind::CubicQuintic => cubic + self.c[i] * (5.0 * w2 * w2 - 1.0),
        }
    }

    pub fn energy(&self, w: &[f64]) -> f64 {
        let n = self.n();
        let h = self.grid.step();
        let kinetic: f64 = (0..n - 1)
            .map(|m| {
                let d = self.stagger(w, m);
                self.a_mid[m] * d * d
            })
            .sum();
        let interior: f64 = (1..n - 1).map(|i| self.potential(i, w[i])).sum();
        let ends = 0.5 * (self.potential(0, w[0]) + self.potential(n - 1, w[n - 1]));
        h * (self.kinetic_factor * kinetic + interior + ends)
    }

    /// `∂E/∂w_i` at interior nodes; boundary entries are zero.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n();
        let h = self.grid.step();
        let mut g = vec![0.0; n];
        let scale = 2.0 * self.kinetic_factor * h / (24.0 * h);
        for m in 0..n - 1 {
            let q = self.a_mid[m] * self.stagger(w, m) * scale;
            for (j, c) in STAGGER.iter().enumerate() {
                let node = m as isize - 1 + j as isize;
                if node >= 1 && node < n as isize - 1 {
                    g[node as usize] += c * q;
                }
            }
        }
        for i in 1..n - 1 {
            g[i] += h * 2.0 * self.kinetic_factor * self.force(i, w[i]);
        }
        g
    }

    /// Nodewise residual `(a w')' − nonlinear term`; boundary entries are zero.
    pub fn residual(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n();
        let h = self.grid.step();
        let flux: Vec<f64> = (0..n - 1).map(|m| self.a_mid[m] * self.stagger(w, m)).collect();
        let q = |m: isize| -> f64 {
            if m < 0 || m > n as isize - 2 {
                0.0
            } else {
                flux[m as usize]
            }
        };
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let k = i as isize;
            let div = (27.0 * (q(k) - q(k - 1)) - (q(k + 1) - q(k - 2))) / (24.0 * h);
            r[i] = div - self.force(i, w[i]);
        }
        r
    }

    /// Kinetic part of `−∂R/∂w` on the interior unknowns.
    pub fn kinetic_matrix(&self) -> SymBand {
        let n = self.n();
        let h = self.grid.step();
        let mut k = SymBand::zeros(n - 2, HALF_BANDWIDTH);
        let norm = 1.0 / (24.0 * h * 24.0 * h);
        for m in 0..n - 1 {
            // interior unknowns touched by this midpoint, as (unknown index, coefficient)
            let mut touched = [(0usize, 0.0f64); 4];
            let mut count = 0;
            for (j, c) in STAGGER.iter().enumerate() {
                let node = m as isize - 1 + j as isize;
                if node >= 1 && node < n as isize - 1 {
                    touched[count] = (node as usize - 1, *c);
                    count += 1;
                }
            }
            for x in 0..count {
                for y in 0..=x {
                    let (i, ci) = touched[x];
                    let (j, cj) = touched[y];
                    let v = self.a_mid[m] * ci * cj * norm;
                    if i == j {
                        k.add(i, i, v);
                    } else {
                        k.add(i, j, v);
                    }
                }
            }
        }
        k
    }

    /// `−∂R/∂w` on the interior unknowns, i.e. the Hessian of `E / (2·kinetic_factor·h)`.
    pub fn negative_jacobian(&self, w: &[f64]) -> SymBand {
        let mut m = self.kinetic_matrix();
        for i in 1..self.n() - 1 {
            m.add(i - 1, i - 1, self.force_slope(i, w[i]));
        }
        m
    }

    /// Nodes where `g₁/4 + φ₊²(2 + w²)/6` is negative (cubic-quintic only).
    pub fn negative_bracket_nodes(&self, w: &[f64]) -> usize {
        match self.kind {
            ReducedKind::Cubic => 0,
            ReducedKind::CubicQuintic => (0..self.n())
                .filter(|&i| 0.25 * self.b[i] + self.c[i] * (2.0 + w[i] * w[i]) / 6.0 < 0.0)
                .count(),
        }
    }

    /// Upper bound of `|∂(nonlinear term)/∂w|` on `[−1, 1]`.
    pub fn force_slope_bound(&self) -> f64 {
        let bmax = self.b.iter().fold(0.0f64, |m, v| m.max(crate::math::abs(*v)));
        let cmax = self.c.iter().fold(0.0f64, |m, v| m.max(crate::math::abs(*v)));
        2.0 * bmax + 4.0 * cmax
    }
}

pub fn energy(w: &Profile, ac: &WeightedAC) -> Result<f64> {
    Ok(ac.on_grid(&w.grid)?.energy(&w.values))
}

pub fn energy_gradient(w: &Profile, ac: &WeightedAC) -> Result<Profile> {
    let g = ac.on_grid(&w.grid)?.gradient(&w.values);
    Ok(Profile { grid: w.grid, values: g })
}

pub fn residual_reduced(w: &Profile, ac: &WeightedAC) -> Result<Profile> {
    let r = ac.on_grid(&w.grid)?.residual(&w.values);
    Ok(Profile { grid: w.grid, values: r })
}

/// `φ = φ₊ w` on `w`'s grid.
pub fn lift(w: &Profile, phi_plus: &PeriodicProfile) -> Result<Profile> {
    let ext = phi_plus.extend_to(&w.grid)?;
    let values = ext.values.iter().zip(&w.values).map(|(p, w)| p * w).collect();
    Ok(Profile { grid: w.grid, values })
}

/// `w = φ / φ₊` on `φ`'s grid.
pub fn divide_by_background(phi: &Profile, phi_plus: &PeriodicProfile) -> Result<Profile> {
    let ext = phi_plus.extend_to(&phi.grid)?;
    let values = phi.values.iter().zip(&ext.values).map(|(f, p)| f / p).collect();
    Ok(Profile { grid: phi.grid, values })
}
