//! Crank–Nicolson integration of the time-dependent equation, used to check
//! that `ψ = e^{iλt} φ` is a solitary wave.
//!
//! Cubic: `iψ_t = −½ψ_xx + g|ψ|²ψ`.
//! Cubic-quintic: `iψ_t = −ψ_xx − Vψ + g₁|ψ|²ψ + |ψ|⁴ψ`.
//!
//! The Laplacian is the divergence of the staggered fourth-order flux used by
//! [`crate::reduction`] with unit weight, so a computed constant-coefficient
//! soliton is a discrete stationary state up to the solver tolerance.
//! Boundary nodes are pinned to `e^{iλt} ψ₀(±L)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::BandLu;
use crate::math::{abs, atan2, ceil, cos, sin};
use crate::model::{CheckedProblem, Grid, Model, Profile};
use crate::reduction::STAGGER;
use crate::verify::linear_fit;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexField {
    pub fn new(grid: Grid, re: Vec<f64>, im: Vec<f64>) -> Result<ComplexField> {
        if re.len() != grid.len() || im.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = re.iter().zip(&im).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(ComplexField { grid, re, im })
    }

    fn from_complex(grid: Grid, z: &[Complex64]) -> ComplexField {
        ComplexField {
            grid,
            re: z.iter().map(|v| v.re).collect(),
            im: z.iter().map(|v| v.im).collect(),
        }
    }

    fn to_complex(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.re.iter().zip(&self.im).map(|(a, b)| libm::hypot(*a, *b)).collect()
    }

    pub fn phase(&self, i: usize) -> f64 {
        atan2(self.im[i], self.re[i])
    }
}

/// `e^{iλt} φ`.
pub fn make_ansatz(phi: &Profile, lambda: f64, t: f64) -> ComplexField {
    let (c, s) = (cos(lambda * t), sin(lambda * t));
    ComplexField {
        grid: phi.grid,
        re: phi.values.iter().map(|v| c * v).collect(),
        im: phi.values.iter().map(|v| s * v).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Store a snapshot every this many steps (the final state is always stored).
    pub snapshot_every: usize,
}

impl EvolveOptions {
    pub fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidOption("dt must be positive"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidOption("t_max must be positive"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidOption("snapshot_every must be at least 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ceil(self.t_max / self.dt - 1e-9) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ComplexField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub dt: f64,
}

/// Rows of the discrete Laplacian at interior nodes as `(column, weight)` lists.
fn laplacian_row(i: usize, n: usize, h: f64) -> [(usize, f64); 7] {
    let mut row = [(0usize, 0.0f64); 7];
    for (k, slot) in row.iter_mut().enumerate() {
        slot.0 = (i + k).saturating_sub(3).min(n - 1);
    }
    let norm = 1.0 / (24.0 * h * 24.0 * h);
    let i = i as isize;
    for (m, weight) in [(i, 27.0), (i - 1, -27.0), (i + 1, -1.0), (i - 2, 1.0)] {
        if m < 0 || m > n as isize - 2 {
            continue;
        }
        for (j, c) in STAGGER.iter().enumerate() {
            let node = (m - 1 + j as isize).clamp(0, n as isize - 1) as usize;
            let slot = (node as isize - i + 3) as usize;
            row[slot].1 += weight * c * norm;
        }
    }
    // clamped duplicate columns near the boundary: fold weights onto one slot
    for a in 0..7 {
        for b in a + 1..7 {
            if row[b].0 == row[a].0 && row[b].1 != 0.0 {
                row[a].1 += row[b].1;
                row[b].1 = 0.0;
            }
        }
    }
    row
}

struct Hamiltonian {
    /// `(column, weight)` rows of the linear part at interior nodes.
    rows: Vec<[(usize, f64); 7]>,
    /// Diagonal potential of the linear part.
    diag: Vec<f64>,
    model: NonlinearKind,
}

#[derive(Clone, Copy)]
enum NonlinearKind {
    Cubic,
    Quintic(f64),
}

impl Hamiltonian {
    fn new(p: &CheckedProblem, grid: &Grid) -> Result<Hamiltonian> {
        let n = grid.len();
        let h = grid.step();
        let k0 = p.coefficient().samples().aligned_offset(grid)?;
        let (lap_scale, kind) = match p.model() {
            Model::Cubic { .. } => (-0.5, NonlinearKind::Cubic),
            Model::CubicQuintic { g1, .. } => (-1.0, NonlinearKind::Quintic(*g1)),
        };
        let rows = (0..n)
            .map(|i| {
                let mut r = if i == 0 || i == n - 1 {
                    [(i, 0.0); 7]
                } else {
                    laplacian_row(i, n, h)
                };
                for e in r.iter_mut() {
                    e.1 *= lap_scale;
                }
                r
            })
            .collect();
        let diag = (0..n)
            .map(|i| match p.model() {
                Model::Cubic { .. } => 0.0,
                Model::CubicQuintic { v, .. } => -v.at_node(k0 + i as i64),
            })
            .collect();
        Ok(Hamiltonian { rows, diag, model: kind })
    }

    fn apply_linear(&self, psi: &[Complex64], i: usize) -> Complex64 {
        let mut s = Complex64::new(self.diag[i], 0.0) * psi[i];
        for &(j, w) in &self.rows[i] {
            s += psi[j] * w;
        }
        s
    }
}

fn nonlinear_coefficient(kind: NonlinearKind, g: f64, rho: f64) -> f64 {
    match kind {
        NonlinearKind::Cubic => g * rho,
        NonlinearKind::Quintic(g1) => g1 * rho + rho * rho,
    }
}

/// Integrates from `ψ₀` to `t_max` with implicit midpoint steps.
///
/// Each step solves `(I + i dt/2 H_lin) ψⁿ⁺¹ = (I − i dt/2 H_lin) ψⁿ − i dt N(ψ̄) ψ̄`
/// with `ψ̄ = (ψⁿ + ψⁿ⁺¹)/2`: a predictor with `ψ̄ = ψⁿ` and one correction.
pub fn evolve_nls(psi0: &ComplexField, p: &CheckedProblem, opts: &EvolveOptions) -> Result<Trajectory> {
    opts.check()?;
    let grid = psi0.grid;
    let n = grid.len();
    if n < 8 {
        return Err(Error::TooFewNodes(n));
    }
    let ham = Hamiltonian::new(p, &grid)?;
    let k0 = p.coefficient().samples().aligned_offset(&grid)?;
    let g: Vec<f64> = match p.model() {
        Model::Cubic { g } => (0..n).map(|i| g.at_node(k0 + i as i64)).collect(),
        Model::CubicQuintic { .. } => vec![0.0; n],
    };
    let dt = opts.dt;
    let half = Complex64::new(0.0, 0.5 * dt);

    let mut lhs = BandLu::<Complex64>::zeros(n, 3, 3);
    lhs.set(0, 0, Complex64::new(1.0, 0.0));
    lhs.set(n - 1, n - 1, Complex64::new(1.0, 0.0));
    for i in 1..n - 1 {
        let mut entries = [(0usize, Complex64::new(0.0, 0.0)); 7];
        for (e, &(j, w)) in entries.iter_mut().zip(&ham.rows[i]) {
            *e = (j, half * w);
        }
        for (j, v) in entries {
            if j == i {
                continue;
            }
            if v != Complex64::new(0.0, 0.0) {
                lhs.set(i, j, v);
            }
        }
        let own: Complex64 = entries.iter().filter(|e| e.0 == i).map(|e| e.1).sum();
        lhs.set(i, i, Complex64::new(1.0, 0.0) + half * ham.diag[i] + own);
    }
    let lhs = lhs.factor()?;

    let lambda = p.lambda();
    let left0 = Complex64::new(psi0.re[0], psi0.im[0]);
    let right0 = Complex64::new(psi0.re[n - 1], psi0.im[n - 1]);

    let mut psi = psi0.to_complex();
    let steps = opts.steps();
    let mut snapshots = vec![Snapshot { t: 0.0, field: psi0.clone() }];
    let mut explicit = vec![Complex64::new(0.0, 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut guess = psi.clone();

    for step in 1..=steps {
        let t = step as f64 * dt;
        let rot = Complex64::new(cos(lambda * t), sin(lambda * t));
        for i in 1..n - 1 {
            explicit[i] = psi[i] - half * ham.apply_linear(&psi, i);
        }
        guess.copy_from_slice(&psi);
        let mut last_change = 0.0f64;
        for sweep in 0..2 {
            for i in 1..n - 1 {
                let mid = 0.5 * (psi[i] + guess[i]);
                let nl = nonlinear_coefficient(ham.model, g[i], mid.norm_sqr());
                next[i] = explicit[i] - 2.0 * half * nl * mid;
            }
            next[0] = rot * left0;
            next[n - 1] = rot * right0;
            lhs.solve_in_place(&mut next);
            let change = next
                .iter()
                .zip(&guess)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            if !change.is_finite() || next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::StepDivergence(step));
            }
            if sweep == 1 && last_change > 0.0 && change > 0.5 * last_change {
                return Err(Error::StepDivergence(step));
            }
            last_change = change;
            guess.copy_from_slice(&next);
        }
        psi.copy_from_slice(&guess);
        if step % opts.snapshot_every == 0 || step == steps {
            snapshots.push(Snapshot {
                t,
                field: ComplexField::from_complex(grid, &psi),
            });
        }
    }
    Ok(Trajectory { snapshots, steps, dt })
}

/// `max_t sup_x ||ψ| − |φ||` over the stored snapshots.
pub fn max_modulus_deviation(traj: &Trajectory, phi: &Profile) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        if s.field.len() != phi.len() {
            return Err(Error::GridMismatch);
        }
        for (m, v) in s.field.modulus().iter().zip(&phi.values) {
            worst = worst.max(abs(m - abs(*v)));
        }
    }
    Ok(worst)
}

/// Interior node halfway between the centre and the right end, where the
/// modulus of a dark soliton is close to the background.
pub fn reference_node(grid: &Grid) -> usize {
    let n = grid.len();
    (3 * (n - 1)) / 4
}

/// Least-squares rate of the unwrapped phase at `node`.
pub fn fit_phase_slope(traj: &Trajectory, node: usize) -> Result<f64> {
    if traj.snapshots.len() < 2 {
        return Err(Error::InsufficientData("phase fit needs at least two snapshots"));
    }
    let first = &traj.snapshots[0].field;
    if node >= first.len() {
        return Err(Error::GridMismatch);
    }
    let scale = first.modulus().iter().fold(0.0f64, |m, v| m.max(*v));
    let tau = 2.0 * core::f64::consts::PI;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(traj.snapshots.len());
    for s in &traj.snapshots {
        let f = &s.field;
        if libm::hypot(f.re[node], f.im[node]) < 1e-3 * scale {
            return Err(Error::PhaseUndefined);
        }
        let mut phase = f.phase(node);
        if let Some(&(_, prev)) = pts.last() {
            phase -= tau * libm::round((phase - prev) / tau);
        }
        pts.push((s.t, phase));
    }
    linear_fit(&pts)
        .map(|f| f.0)
        .ok_or(Error::InsufficientData("degenerate time samples"))
}

/// Relative error of the fitted phase rotation rate at `node` against `λ`.
pub fn phase_rotation_check(traj: &Trajectory, lambda: f64, node: usize) -> Result<f64> {
    let slope = fit_phase_slope(traj, node)?;
    Ok(abs(slope - lambda) / abs(lambda))
}

/// Zero of `Re(ψ e^{−iλt})` nearest the centre of the grid, by linear interpolation.
pub fn kink_center(field: &ComplexField, lambda: f64, t: f64) -> Result<f64> {
    let (c, s) = (cos(lambda * t), sin(lambda * t));
    let real: Vec<f64> = field.re.iter().zip(&field.im).map(|(a, b)| a * c + b * s).collect();
    let grid = &field.grid;
    let centre = 0.5 * (grid.xmin() + grid.xmax());
    let mut best: Option<f64> = None;
    for i in 0..real.len() - 1 {
        let (a, b) = (real[i], real[i + 1]);
        if a == 0.0 || a * b < 0.0 {
            let x = if a == 0.0 {
                grid.x(i)
            } else {
                grid.x(i) + grid.step() * a / (a - b)
            };
            if best.is_none_or(|y| abs(x - centre) < abs(y - centre)) {
                best = Some(x);
            }
        }
    }
    best.ok_or(Error::NoSignChange)
}

/// `max_t |x₀(t) − x₀(0)|` for the kink centre.
pub fn kink_drift(traj: &Trajectory, lambda: f64) -> Result<f64> {
    let first = traj.snapshots.first().ok_or(Error::InsufficientData("empty trajectory"))?;
    let x0 = kink_center(&first.field, lambda, first.t)?;
    let mut worst = 0.0f64;
    for s in &traj.snapshots {
        worst = worst.max(abs(kink_center(&s.field, lambda, s.t)? - x0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub max_modulus_deviation: f64,
    /// Fitted phase rate at the reference node.
    pub phase_slope: f64,
    pub phase_rel_err: f64,
    pub kink_drift: Option<f64>,
    pub reference_x: f64,
}

/// Summary metrics of a solitary-wave trajectory started from `e^{iλ·0}φ`.
pub fn dynamics(traj: &Trajectory, phi: &Profile, lambda: f64) -> Result<Dynamics> {
    let node = reference_node(&phi.grid);
    let phase_slope = fit_phase_slope(traj, node)?;
    Ok(Dynamics {
        max_modulus_deviation: max_modulus_deviation(traj, phi)?,
        phase_slope,
        phase_rel_err: abs(phase_slope - lambda) / abs(lambda),
        kink_drift: kink_drift(traj, lambda).ok(),
        reference_x: phi.grid.x(node),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_coefficient, validate_problem, CoefficientRole, CoefficientSpec, Problem};

    #[test]
    fn ansatz_rotates_uniformly() {
        let grid = Grid::symmetric(2.0, 0.125).unwrap();
        let phi = Profile::from_fn(grid, crate::math::tanh).unwrap();
        let a0 = make_ansatz(&phi, -1.0, 0.0);
        assert_eq!(a0.re, phi.values);
        assert!(a0.im.iter().all(|v| *v == 0.0));
        let half = make_ansatz(&phi, -1.0, core::f64::consts::PI);
        for (r, v) in half.re.iter().zip(&phi.values) {
            assert!((r + v).abs() < 1e-15);
        }
        let m = make_ansatz(&phi, -1.0, 0.7).modulus();
        for (r, v) in m.iter().zip(&phi.values) {
            assert!((r - v.abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_is_exact_on_quadratics() {
        let n = 40;
        let h = 0.1;
        for i in 3..n - 3 {
            let row = laplacian_row(i, n, h);
            let s: f64 = row.iter().map(|(j, w)| w * (*j as f64 * h).powi(2)).sum();
            assert!((s - 2.0).abs() < 1e-9, "{i}: {s}");
            let c: f64 = row.iter().map(|(_, w)| w).sum();
            assert!(c.abs() < 1e-9);
        }
        // constant extension keeps constants in the kernel at the edges
        for i in [1, 2, n - 3, n - 2] {
            let c: f64 = laplacian_row(i, n, h).iter().map(|(_, w)| w).sum();
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn options_are_checked() {
        let bad = EvolveOptions { dt: 1e-3, t_max: 0.0, snapshot_every: 1 };
        assert!(matches!(bad.check(), Err(Error::InvalidOption(_))));
        let bad = EvolveOptions { dt: 0.0, t_max: 1.0, snapshot_every: 1 };
        assert!(bad.check().is_err());
        assert_eq!(EvolveOptions { dt: 1e-3, t_max: 5.0, snapshot_every: 1 }.steps(), 5000);
    }

    #[test]
    fn constant_background_is_stationary() {
        let g = sample_coefficient(CoefficientSpec::Constant(1.0), 1.0, 16, CoefficientRole::Nonlinearity).unwrap();
        let p = validate_problem(Problem::cubic(-1.0, g)).unwrap();
        let grid = Grid::symmetric(2.0, 1.0 / 16.0).unwrap();
        let phi = Profile::from_fn(grid, |_| 1.0).unwrap();
        let opts = EvolveOptions { dt: 0.01, t_max: 1.0, snapshot_every: 10 };
        let traj = evolve_nls(&make_ansatz(&phi, -1.0, 0.0), &p, &opts).unwrap();
        // one corrector leaves an O(dt³) defect per step
        assert!(max_modulus_deviation(&traj, &phi).unwrap() < 1e-4);
        assert!(phase_rotation_check(&traj, -1.0, reference_node(&grid)).unwrap() < 1e-4);
    }

    #[test]
    fn single_snapshot_is_insufficient() {
        let grid = Grid::symmetric(1.0, 0.25).unwrap();
        let phi = Profile::from_fn(grid, |_| 1.0).unwrap();
        let traj = Trajectory {
            snapshots: vec![Snapshot { t: 0.0, field: make_ansatz(&phi, -1.0, 0.0) }],
            steps: 0,
            dt: 0.1,
        };
        assert!(matches!(
            phase_rotation_check(&traj, -1.0, 4),
            Err(Error::InsufficientData(_))
        ));
    }
}
