//! Solver output against independently computed references.

mod common;

use common::*;
use darksol_core::heteroclinic::report_crossing;
use darksol_core::periodic_orbit::*;
use darksol_core::pipeline::solve_soliton;
use darksol_core::verify::*;
use std::f64::consts::PI;

#[test]
fn closed_form_kink_satisfies_discrete_equation() {
    // the oracle itself: tanh substituted into the 3-point stationary operator
    let p = cubic(-1.0, 100, |_| 1.0);
    let grid = darksol_core::Grid::symmetric(20.0, 0.01).unwrap();
    let phi = darksol_core::Profile::from_fn(grid, f64::tanh).unwrap();
    let r = residual_phi(&phi, &p).unwrap();
    assert!(r < 1e-4, "{r}");
    let coarse = darksol_core::Grid::symmetric(20.0, 0.02).unwrap();
    let p2 = cubic(-1.0, 50, |_| 1.0);
    let r2 = residual_phi(&darksol_core::Profile::from_fn(coarse, f64::tanh).unwrap(), &p2).unwrap();
    assert!((r2 / r - 4.0).abs() < 0.1, "residual ratio {}", r2 / r);
}

#[test]
fn cubic_kink_matches_tanh() {
    for lambda in [-1.0f64, -2.0] {
        let p = cubic(lambda, 100, |_| 1.0);
        let run = solve_soliton(&p, &PeriodicSolveOptions::default(), Some(12.0), None).unwrap();
        let x0 = report_crossing(&run.minimizer.w).unwrap();
        let k = (-lambda).sqrt();
        let worst = run
            .phi
            .grid
            .nodes()
            .zip(&run.phi.values)
            .filter(|(x, _)| x.abs() <= 10.0)
            .map(|(x, v)| (v - k * (k * (x - x0)).tanh()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "lambda {lambda}: {worst}");
    }
}

#[test]
fn quintic_kink_matches_quadrature() {
    let p = quintic(-1.0, 0.0, 100, |_| 0.0);
    let run = solve_soliton(&p, &PeriodicSolveOptions::default(), Some(16.0), None).unwrap();
    assert!(run.periodic.phi_plus.values().iter().all(|v| (v - 1.0).abs() < 1e-14));

    // w' = (1 − w²) sqrt((w² + 2)/3), w(0) = 0, sampled at the grid step
    let h = 0.01;
    let sub = 100;
    let oracle = rk4(|w| (1.0 - w * w) * ((w * w + 2.0) / 3.0).sqrt(), 0.0, h / sub as f64, 1400 * sub, sub);
    let x0 = report_crossing(&run.minimizer.w).unwrap();
    assert!(x0.abs() < 1e-9);
    let w = &run.minimizer.w;
    let mid = (w.len() - 1) / 2;
    let mut worst = 0.0f64;
    for (j, o) in oracle.iter().enumerate() {
        worst = worst.max((w.values[mid + j] - o).abs());
        worst = worst.max((w.values[mid - j] + o).abs());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn newton_agrees_with_monotone_iteration() {
    let p = cubic(-1.0, 100, |x| 1.0 + 0.5 * (2.0 * PI * x).sin());
    let sol = solve_periodic(&p, &PeriodicSolveOptions::default()).unwrap();
    let pair = monotone_iteration_oracle(&p, 1e-11).unwrap();
    assert!(pair.ordered);
    assert!(pair.gap() < 1e-9);
    let dist = sol
        .phi_plus
        .values()
        .iter()
        .zip(pair.from_below.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dist < 1e-8, "{dist}");
    assert!(sol.residual <= 1e-10);
}

#[test]
fn quintic_background_agrees_with_monotone_iteration() {
    let p = quintic(-1.0, 0.5, 64, |x| 0.3 * (2.0 * PI * x).cos());
    let sol = solve_periodic(&p, &PeriodicSolveOptions::default()).unwrap();
    let pair = monotone_iteration_oracle(&p, 1e-11).unwrap();
    let dist = sol
        .phi_plus
        .values()
        .iter()
        .zip(pair.from_above.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dist < 1e-8, "{dist}");
    let b = bracket_bounds(&p);
    assert!(sol.phi_plus.values().iter().all(|v| b.lower < *v && *v < b.upper));
}

#[test]
fn periodic_background_converges_at_second_order() {
    let g = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).sin();
    let solve = |n: usize| solve_periodic(&cubic(-1.0, n, g), &PeriodicSolveOptions::default()).unwrap().phi_plus;
    let (a, b, c) = (solve(25), solve(50), solve(100));
    let diff = |coarse: &darksol_core::PeriodicProfile, fine: &darksol_core::PeriodicProfile| {
        (0..coarse.len() as i64)
            .map(|k| (coarse.at_node(k) - fine.at_node(2 * k)).abs())
            .fold(0.0, f64::max)
    };
    let ratio = diff(&a, &b) / diff(&b, &c);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn decay_rate_scales_with_sqrt_of_lambda() {
    for (lambda, l, expected) in [(-0.25, 24.0, 1.0), (-1.0, 12.0, 2.0), (-4.0, 6.0, 4.0)] {
        let p = cubic(lambda, 100, |_| 1.0);
        let run = solve_soliton(&p, &PeriodicSolveOptions::default(), Some(l), None).unwrap();
        let fit = fit_decay_rate(&run.phi, &run.periodic.phi_plus, 0.5).unwrap();
        for tail in [fit.left, fit.right] {
            assert!((tail.rate / expected - 1.0).abs() < 0.03, "{lambda}: {tail:?}");
            assert!(tail.r2 >= 0.999);
        }
    }
}
