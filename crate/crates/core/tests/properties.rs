//! Randomized invariants over smooth periodic coefficients.

mod common;

use common::*;
use darksol_core::heteroclinic::energy_slack;
use darksol_core::periodic_orbit::*;
use darksol_core::pipeline::solve_soliton;
use darksol_core::reduction::to_allen_cahn;
use darksol_core::verify::*;
use darksol_core::*;
use proptest::prelude::*;

fn coefficients() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // amplitudes keep g within [0.1, 1.9]
    prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 1..=3)
        .prop_filter("nonconstant", |c| c.iter().any(|(a, b)| a.abs() + b.abs() > 0.02))
        .prop_map(|c| {
            let total: f64 = c.iter().map(|(a, b)| a.abs() + b.abs()).sum();
            let s = if total > 0.9 { 0.9 / total } else { 1.0 };
            c.into_iter().map(|(a, b)| (a * s, b * s)).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn background_lies_strictly_inside_bracket(c in coefficients(), lambda in -4.0f64..-0.25) {
        let p = cubic(lambda, 64, fourier(&c));
        let sol = solve_periodic(&p, &PeriodicSolveOptions::default()).unwrap();
        let b = bracket_bounds(&p);
        prop_assert!(sol.phi_plus.values().iter().all(|v| b.lower < *v && *v < b.upper));
        prop_assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn quintic_background_lies_inside_bracket(c in coefficients(), g1 in -0.5f64..1.0) {
        let p = quintic(-1.5, g1, 64, |x| fourier(&c)(x) - 1.0);
        let sol = solve_periodic(&p, &PeriodicSolveOptions::default()).unwrap();
        let b = bracket_bounds(&p);
        prop_assert!(sol.phi_plus.values().iter().all(|v| b.lower < *v && *v < b.upper));
    }

    #[test]
    fn gradient_matches_energy_differences(c in coefficients(), seed in any::<u64>()) {
        let p = cubic(-1.0, 32, fourier(&c));
        let sol = solve_periodic(&p, &PeriodicSolveOptions::default()).unwrap();
        let ac = to_allen_cahn(&p, &sol.phi_plus).unwrap();
        let op = ac.on_grid(&Grid::symmetric(3.0, ac.step()).unwrap()).unwrap();
        prop_assert!(gradient_consistency(&op, 4, seed) <= 1e-6);

        let q = quintic(-1.0, 0.3, 32, |x| 0.5 * (fourier(&c)(x) - 1.0));
        let sol = solve_periodic(&q, &PeriodicSolveOptions::default()).unwrap();
        let ac = to_allen_cahn(&q, &sol.phi_plus).unwrap();
        let op = ac.on_grid(&Grid::symmetric(3.0, ac.step()).unwrap()).unwrap();
        prop_assert!(gradient_consistency(&op, 4, seed) <= 1e-6);
    }

    #[test]
    fn soliton_properties_hold(c in coefficients(), lambda in -2.0f64..-0.5) {
        let p = cubic(lambda, 50, fourier(&c));
        let run = solve_soliton(&p, &PeriodicSolveOptions::default(), None, None).unwrap();
        let log = &run.minimizer.energy_log;
        prop_assert!(log.windows(2).all(|e| e[1] <= e[0] + energy_slack(e[0])));
        let report = verify_soliton(&p, &run.periodic.phi_plus, &run.minimizer.w, &run.phi, &VerifyOptions::default()).unwrap();
        prop_assert!(report.amplitude_margin > 0.0, "{report:?}");
        prop_assert!(report.monotonicity_margin > 0.0, "{report:?}");
        prop_assert_eq!(report.status(), Status::Verified);
        // φ and φ₊ have the same sign pattern as w
        for (w, phi) in run.minimizer.w.values.iter().zip(&run.phi.values) {
            prop_assert!(w * phi >= 0.0);
        }
    }

    #[test]
    fn interior_is_insensitive_to_truncation(c in coefficients()) {
        let p = cubic(-1.0, 50, fourier(&c));
        let short = solve_soliton(&p, &PeriodicSolveOptions::default(), None, None).unwrap();
        let l = short.phi.grid.xmax();
        let long = solve_soliton(&p, &PeriodicSolveOptions::default(), Some(l + 1.0), None).unwrap();
        let shift = 50; // one period of nodes
        let mut worst = 0.0f64;
        for (i, x) in short.phi.grid.nodes().enumerate() {
            if x.abs() <= l - 2.0 {
                worst = worst.max((short.phi.values[i] - long.phi.values[i + shift]).abs());
            }
        }
        prop_assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn extension_is_periodic(values in prop::collection::vec(0.1f64..2.0, 4..40), periods in 1usize..5) {
        let n = values.len();
        let profile = PeriodicProfile::new(1.0, values).unwrap();
        let grid = Grid::symmetric(periods as f64, 1.0 / n as f64).unwrap();
        let ext = profile.extend_to(&grid).unwrap();
        for i in 0..grid.len() - n {
            prop_assert_eq!(ext.values[i], ext.values[i + n]);
        }
    }
}
