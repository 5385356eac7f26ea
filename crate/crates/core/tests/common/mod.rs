#![allow(dead_code)]

use darksol_core::*;
use std::f64::consts::PI;

pub fn cubic(lambda: f64, n: usize, g: impl Fn(f64) -> f64) -> CheckedProblem {
    let g = sample_coefficient(CoefficientSpec::Closed(&g), 1.0, n, CoefficientRole::Nonlinearity).unwrap();
    validate_problem(Problem::cubic(lambda, g)).unwrap()
}

pub fn quintic(lambda: f64, g1: f64, n: usize, v: impl Fn(f64) -> f64) -> CheckedProblem {
    let v = sample_coefficient(CoefficientSpec::Closed(&v), 1.0, n, CoefficientRole::Potential).unwrap();
    validate_problem(Problem::cubic_quintic(lambda, v, g1)).unwrap()
}

/// `1 + Σ a_k cos 2πkx + b_k sin 2πkx`.
pub fn fourier(coeffs: &[(f64, f64)]) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        1.0 + coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let t = 2.0 * PI * (k + 1) as f64 * x;
                a * t.cos() + b * t.sin()
            })
            .sum::<f64>()
    }
}

/// Classical RK4 for a scalar autonomous ODE, sampled every `every` steps.
pub fn rk4(f: impl Fn(f64) -> f64, y0: f64, step: f64, steps: usize, every: usize) -> Vec<f64> {
    let mut out = vec![y0];
    let mut y = y0;
    for s in 1..=steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * step * k1);
        let k3 = f(y + 0.5 * step * k2);
        let k4 = f(y + step * k3);
        y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if s % every == 0 {
            out.push(y);
        }
    }
    out
}
