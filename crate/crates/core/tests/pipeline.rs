//! End-to-end properties of the kernel, wave and spectral stages on random
//! catalog potentials.

use num_complex::Complex;
use proptest::prelude::*;
use weyldyn::kernel::eval_w;
use weyldyn::oracle::ode_weyl_oracle;
use weyldyn::spectral::{convergence_region, m_from_weyl, weyl_solution, TruncationPolicy};
use weyldyn::wave::solve_wave;
use weyldyn::{compute_norms, neumann_solve, BoundaryControl, Potential, SpectralPoint, TriangleGrid};

fn potential(kind: u8, a: f64, b: f64) -> Potential<f64> {
    match kind % 4 {
        0 => Potential::constant_box(a, b).unwrap(),
        1 => Potential::exponential(a, b).unwrap(),
        2 => Potential::sech2(b, a).unwrap(),
        _ => Potential::bump_train(a, b.min(1.0)).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_ordering(kind in 0u8..4, a in 0.1f64..3.0, b in 0.2f64..2.0) {
        let p = potential(kind, a, b);
        let n = compute_norms(&p, 0.01).unwrap();
        if let Some(l1) = n.l1.finite() {
            prop_assert!(n.windowed <= l1 * (1.0 + 1e-9) + 1e-12);
        }
        prop_assert!(n.windowed_scaled <= 2.0 * n.windowed * (1.0 + 1e-9) + 1e-12);
        let region = convergence_region(&n);
        prop_assert!(region.threshold() <= region.windowed_threshold);
        prop_assert!(region.threshold() > 0.0);
    }

    #[test]
    fn threshold_grows_with_height(a in 0.1f64..3.0, scale in 1.1f64..4.0, b in 0.2f64..2.0) {
        let low = convergence_region(&compute_norms(&Potential::constant_box(a, b).unwrap(), 0.01).unwrap());
        let high = convergence_region(&compute_norms(&Potential::constant_box(a * scale, b).unwrap(), 0.01).unwrap());
        prop_assert!(high.threshold() > low.threshold());
    }

    /// `w(x, x) = −½ ∫_0^x q` on the characteristic.
    #[test]
    fn diagonal_is_half_mass(kind in 0u8..3, a in 0.1f64..2.0, b in 0.3f64..2.0) {
        let p = potential(kind, a, b);
        let field = neumann_solve(&p, TriangleGrid::new(3.0, 0.05).unwrap(), 1e-12, 80).unwrap();
        for k in 0..=30 {
            let x = k as f64 * 0.05;
            let w = eval_w(&field, x, x).unwrap();
            prop_assert!((w + 0.5 * p.antiderivative(x)).abs() < 1e-10, "x = {x}: {w}");
        }
    }

    #[test]
    fn wave_map_is_linear_and_delay_equivariant(
        kind in 0u8..3,
        a in 0.1f64..2.0,
        b in 0.3f64..2.0,
        alpha in -2.0f64..2.0,
        delay in 1usize..10,
    ) {
        let p = potential(kind, a, b);
        let h = 0.05;
        let t_end = 2.0;
        let field = neumann_solve(&p, TriangleGrid::new(2.0 * t_end, h).unwrap(), 1e-12, 80).unwrap();
        let f = BoundaryControl::from_fn(|t: f64| t * t, t_end, h, false).unwrap();
        let g = BoundaryControl::from_fn(|t: f64| (t * t * t).sin(), t_end, h, false).unwrap();
        let fg: Vec<f64> = f.samples().iter().zip(g.samples()).map(|(x, y)| x + alpha * y).collect();
        let fg = BoundaryControl::new(fg, h, false).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * h).collect();
        let uf = solve_wave(&f, &field, &grid, &grid).unwrap();
        let ug = solve_wave(&g, &field, &grid, &grid).unwrap();
        let ufg = solve_wave(&fg, &field, &grid, &grid).unwrap();
        for ix in 0..grid.len() {
            for it in 0..grid.len() {
                let lin = uf.u[ix][it] + alpha * ug.u[ix][it];
                prop_assert!((ufg.u[ix][it] - lin).abs() < 1e-12 * (1.0 + lin.abs()));
            }
        }
        let ud = solve_wave(&f.delayed(delay), &field, &grid, &grid).unwrap();
        for ix in 0..grid.len() {
            for it in delay..grid.len() {
                let shifted = uf.u[ix][it - delay];
                prop_assert!((ud.u[ix][it] - shifted).abs() < 1e-11 * (1.0 + shifted.abs()));
            }
            for it in 0..delay {
                prop_assert_eq!(ud.u[ix][it], 0.0);
            }
        }
    }

    #[test]
    fn free_m_is_ik(re in -3.0f64..3.0, im in 0.2f64..4.0) {
        let p = Potential::<f64>::zero();
        let sp = SpectralPoint::new(Complex::new(re, im)).unwrap();
        let field = neumann_solve(&p, TriangleGrid::new(2.0, 0.05).unwrap(), 1e-12, 10).unwrap();
        let region = convergence_region(&compute_norms(&p, 0.01).unwrap());
        let s = weyl_solution(&field, &region, sp, &[0.0, 0.05, 0.1], 1.0, &TruncationPolicy::default()).unwrap();
        let m = m_from_weyl(&s, 0.05).unwrap().m;
        prop_assert!((m - Complex::new(-im, re)).norm() < 1e-10);
        let (_, oracle) = ode_weyl_oracle(&p, sp, 1.0, &[]).unwrap();
        prop_assert!((oracle.m - Complex::new(-im, re)).norm() < 1e-10);
    }
}
