//! Reference solutions that do not touch the kernel: an adaptive ODE solve
//! for the Weyl solution and a leapfrog finite-difference solve of the wave
//! problem. Only `Potential` is shared with the pipeline under test.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::scalar::Real;
use crate::spectral::{MValue, Route, SpectralPoint};
use crate::wave::{BoundaryControl, WaveField};

/// Growth allowed between two renormalisations.
const MAX_GROWTH: f64 = 1e12;
/// Leapfrog blow-up factor relative to `max |f|`.
const UNSTABLE_FACTOR: f64 = 1e6;

type State<T> = [Complex<T>; 2];

/// Weyl solution by integrating `u″ = (q − k²) u` from `x_start` down to 0.
///
/// The start data `u = e^{ikX}`, `u′ = ik e^{ikX}` is the decaying free
/// solution, exact once `q` vanishes beyond `x_start`. Integrating towards the
/// origin the Weyl solution is the growing direction, so the solve is stable;
/// the state is rescaled at every unit step and at every requested abscissa.
///
/// Returns `û` on `x_grid` normalised to `û(0) = 1`, and `m = û′(0)/û(0)`.
pub fn ode_weyl_oracle<T: Real>(
    p: &Potential<T>,
    k: SpectralPoint<T>,
    x_start: T,
    x_grid: &[T],
) -> Result<(Vec<Complex<T>>, MValue<T>)> {
    if x_start < p.x_max() {
        return Err(Error::InvalidParameter(format!(
            "x_start = {x_start} lies inside the support (x_max = {})",
            p.x_max()
        )));
    }
    if let Some(&x) = x_grid.iter().find(|&&x| x < T::zero() || x > x_start) {
        return Err(Error::InvalidParameter(format!(
            "grid point {x} outside [0, {x_start}]"
        )));
    }
    let k = k.k();
    let ik = Complex::<T>::i() * k;
    let k2 = k * k;

    // Stop points in decreasing order, from x_start to 0.
    let mut stops: Vec<T> = vec![x_start, T::zero()];
    stops.extend(p.breakpoints().into_iter().filter(|&b| b > T::zero() && b < x_start));
    stops.extend(x_grid.iter().copied());
    let mut n = T::one();
    while n < x_start {
        stops.push(n);
        n += T::one();
    }
    stops.sort_by(|a, b| b.partial_cmp(a).expect("finite stop points"));
    let merge = T::lit(1e-12) * x_start.max(T::one());
    stops.dedup_by(|a, b| (*a - *b).abs() <= merge);

    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
    let e = (ik * x_start).exp();
    let mut y: State<T> = [e, ik * e];
    // ln of the factor divided out so far.
    let mut log_scale = T::zero();
    let mut at_stop: Vec<(T, Complex<T>, T)> = Vec::with_capacity(stops.len());
    at_stop.push((stops[0], y[0], log_scale));
    let mut step = -T::lit(0.05);

    for w in stops.windows(2) {
        let (from, to) = (w[0], w[1]);
        let (lo, hi) = (to, from);
        let nudge = T::lit(1e-13) * hi.max(T::one());
        let rhs = |x: T, y: &State<T>| -> State<T> {
            let q = p.eval(x.max(lo + nudge).min(hi - nudge));
            [y[1], (Complex::from(q) - k2) * y[0]]
        };
        let before = norm(&y);
        step = dp45(&rhs, from, to, &mut y, step, tol);
        let after = norm(&y);
        if after / before > T::lit(MAX_GROWTH) || !after.is_finite() {
            return Err(Error::BlowUp {
                ratio: (after / before).as_f64(),
            });
        }
        log_scale += after.ln();
        y = [y[0] / after, y[1] / after];
        at_stop.push((to, y[0], log_scale));
    }

    let (_, u0, s0) = *at_stop.last().expect("origin is a stop");
    let m = y[1] / y[0];
    let values = x_grid
        .iter()
        .map(|&x| {
            let (_, u, s) = at_stop
                .iter()
                .find(|(xs, _, _)| (*xs - x).abs() <= merge)
                .copied()
                .expect("every grid point is a stop");
            u / u0 * (s - s0).exp()
        })
        .collect();
    Ok((
        values,
        MValue {
            z: k2,
            m,
            route: Route::OdeOracle,
        },
    ))
}

fn norm<T: Real>(y: &State<T>) -> T {
    (y[0].norm_sqr() + y[1].norm_sqr()).sqrt()
}

/// Dormand–Prince 5(4) from `a` to `b` (either direction). Returns the last
/// accepted step so the next segment can reuse it.
fn dp45<T: Real, F: Fn(T, &State<T>) -> State<T>>(
    f: &F,
    a: T,
    b: T,
    y: &mut State<T>,
    step_hint: T,
    tol: T,
) -> T {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // Fifth-order weights minus embedded fourth-order weights.
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];

    let span = b - a;
    if span == T::zero() {
        return step_hint;
    }
    let dir = span.signum();
    let mut h = step_hint.abs().min(span.abs()) * dir;
    let mut x = a;
    let mut last = h;
    while (b - x) * dir > T::zero() {
        let remaining = b - x;
        let final_step = h.abs() >= remaining.abs();
        if final_step {
            h = remaining;
        }
        let mut k: [State<T>; 7] = [[Complex::new(T::zero(), T::zero()); 2]; 7];
        k[0] = f(x, y);
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let aj = T::lit(A[s][j]);
                if aj != T::zero() {
                    ys[0] += kj[0] * (aj * h);
                    ys[1] += kj[1] * (aj * h);
                }
            }
            k[s] = f(x + T::lit(C[s]) * h, &ys);
        }
        let mut y_new = *y;
        let mut err = [Complex::new(T::zero(), T::zero()); 2];
        for (s, ks) in k.iter().enumerate() {
            let bs = T::lit(A[6][s.min(5)]);
            if s < 6 && bs != T::zero() {
                y_new[0] += ks[0] * (bs * h);
                y_new[1] += ks[1] * (bs * h);
            }
            let es = T::lit(E[s]);
            err[0] += ks[0] * (es * h);
            err[1] += ks[1] * (es * h);
        }
        let scale = |i: usize| tol + tol * y[i].norm().max(y_new[i].norm());
        let ratio = (err[0].norm() / scale(0)).max(err[1].norm() / scale(1));
        if ratio <= T::one() {
            x = if final_step { b } else { x + h };
            *y = y_new;
            last = h;
        }
        let grow = if ratio == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * ratio.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h *= grow;
    }
    last
}

/// Wave problem `u_tt − u_xx + q u = 0` with zero initial data and
/// `u(0, t) = f(t)`, by leapfrog at unit Courant number.
///
/// The field is returned on `x, t ∈ {0, h, …, T}`; the solver runs on
/// `[0, T + 2h]` so the artificial right edge never reaches it.
pub fn fd_wave_oracle<T: Real>(
    p: &Potential<T>,
    f: &BoundaryControl<T>,
    t_end: T,
    h: T,
) -> Result<WaveField<T>> {
    if !(h > T::zero()) || !(t_end > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "need positive T and h, got T = {t_end}, h = {h}"
        )));
    }
    let steps = (t_end / h).round();
    if (steps * h - t_end).abs() > T::lit(1e-9) * t_end {
        return Err(Error::InvalidParameter(format!(
            "h = {h} does not divide T = {t_end}"
        )));
    }
    let n = steps.to_usize().expect("step count fits usize");
    let nx = n + 2;
    let fs = (0..=n)
        .map(|j| f.value(T::from_index(j) * h))
        .collect::<Result<Vec<T>>>()?;
    let f_max = fs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let limit = T::lit(UNSTABLE_FACTOR) * f_max.max(T::min_positive_value());
    let h2q: Vec<T> = (0..=nx).map(|i| h * h * p.eval(T::from_index(i) * h)).collect();

    let mut u = vec![vec![T::zero(); n + 1]; n + 1];
    let record = |u: &mut Vec<Vec<T>>, row: &[T], j: usize| {
        for (col, &v) in u.iter_mut().zip(row) {
            col[j] = v;
        }
    };
    // Rest at t = 0; at t = h only the boundary value has moved, since
    // u(x, h) = f(h − x) vanishes for x ≥ h.
    let mut prev = vec![T::zero(); nx + 1];
    prev[0] = fs[0];
    record(&mut u, &prev, 0);
    if n == 0 {
        return Ok(WaveField {
            xs: vec![T::zero()],
            ts: vec![T::zero()],
            u,
        });
    }
    let mut cur = vec![T::zero(); nx + 1];
    cur[0] = fs[1];
    record(&mut u, &cur, 1);
    let mut max_u = T::zero();
    for j in 1..n {
        let mut next = vec![T::zero(); nx + 1];
        next[0] = fs[j + 1];
        for i in 1..nx {
            next[i] = cur[i - 1] + cur[i + 1] - prev[i] - h2q[i] * cur[i];
            max_u = max_u.max(next[i].abs());
        }
        if max_u > limit || !max_u.is_finite() {
            return Err(Error::Unstable { max_u: max_u.as_f64() });
        }
        prev = cur;
        cur = next;
        record(&mut u, &cur, j + 1);
    }
    let grid: Vec<T> = (0..=n).map(|j| T::from_index(j) * h).collect();
    Ok(WaveField {
        xs: grid.clone(),
        ts: grid,
        u,
    })
}

/// `u_x(0, t)` from an FD field by the one-sided second-order difference.
pub fn fd_boundary_flux<T: Real>(field: &WaveField<T>, h: T) -> Vec<T> {
    let two_h = T::lit(2.0) * h;
    (0..field.ts.len())
        .map(|j| {
            (-T::lit(3.0) * field.u[0][j] + T::lit(4.0) * field.u[1][j] - field.u[2][j]) / two_h
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// `m` for `q = c` on `[0, L)` by matching at `x = L`.
    fn box_m(height: f64, width: f64, k: Complex<f64>) -> Complex<f64> {
        let ik = c(0.0, 1.0) * k;
        let mu = (c(height, 0.0) - k * k).sqrt();
        let th = (mu * width).tanh();
        (ik - mu * th) / (c(1.0, 0.0) - ik / mu * th)
    }

    #[test]
    fn free_oracle_is_exact() {
        let p = Potential::<f64>::zero();
        for k in [c(0.0, 1.0), c(0.0, 2.0), c(1.0, 2.0)] {
            let sp = SpectralPoint::new(k).unwrap();
            let xs = [0.0, 0.5, 1.0, 3.0];
            let (u, m) = ode_weyl_oracle(&p, sp, 6.0, &xs).unwrap();
            assert!((m.m - c(0.0, 1.0) * k).norm() < 1e-10);
            assert_eq!(m.route, Route::OdeOracle);
            for (x, v) in xs.iter().zip(&u) {
                assert!((v - (c(0.0, 1.0) * k * *x).exp()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn box_matches_matched_solution() {
        let p = Potential::<f64>::constant_box(1.0, 1.0).unwrap();
        for k in [c(0.0, 2.0), c(0.0, 3.0), c(0.7, 1.3), c(-2.0, 0.4)] {
            let (_, m) = ode_weyl_oracle(&p, SpectralPoint::new(k).unwrap(), 2.0, &[]).unwrap();
            let exact = box_m(1.0, 1.0, k);
            assert!((m.m - exact).norm() < 1e-9 * exact.norm(), "{} vs {exact}", m.m);
        }
    }

    #[test]
    fn long_constant_box_gives_shifted_free_m() {
        let p = Potential::<f64>::constant_box(0.5, 12.0).unwrap();
        let (_, m) = ode_weyl_oracle(&p, SpectralPoint::from_kappa(2.0).unwrap(), 12.0, &[]).unwrap();
        assert!((m.m - c(-(4.5f64).sqrt(), 0.0)).norm() < 1e-6);
    }

    #[test]
    fn start_point_invariance() {
        let cases = [
            Potential::<f64>::exponential(1.0, 1.0).unwrap(),
            Potential::sech2(1.0, 3.0).unwrap(),
            Potential::constant_box(-1.0, 2.0).unwrap(),
        ];
        let sp = SpectralPoint::new(c(0.5, 2.0)).unwrap();
        for p in &cases {
            let x0 = p.x_max().max(1.0);
            let (_, a) = ode_weyl_oracle(p, sp, x0, &[]).unwrap();
            let (_, b) = ode_weyl_oracle(p, sp, x0 + 2.0, &[]).unwrap();
            assert!((a.m - b.m).norm() < 1e-8 * a.m.norm());
        }
    }

    #[test]
    fn oracle_rejects_bad_start() {
        let p = Potential::<f64>::constant_box(1.0, 3.0).unwrap();
        let sp = SpectralPoint::from_kappa(1.0).unwrap();
        assert!(ode_weyl_oracle(&p, sp, 2.0, &[]).is_err());
        assert!(ode_weyl_oracle(&p, sp, 4.0, &[5.0]).is_err());
        let far = SpectralPoint::from_kappa(40.0).unwrap();
        assert!(matches!(
            ode_weyl_oracle(&p, far, 4.0, &[]),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn free_leapfrog_is_an_exact_shift() {
        let h = 0.05;
        let f = BoundaryControl::from_fn(|t: f64| t * t, 3.0, h, true).unwrap();
        let u = fd_wave_oracle(&Potential::zero(), &f, 3.0, h).unwrap();
        for (i, x) in u.xs.iter().enumerate() {
            for (j, t) in u.ts.iter().enumerate() {
                let exact = if j >= i { (t - x) * (t - x) } else { 0.0 };
                assert!((u.u[i][j] - exact).abs() < 1e-12, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn leapfrog_is_causal_with_potential() {
        let h = 0.02;
        let f = BoundaryControl::from_fn(|t: f64| t.powi(3), 2.0, h, true).unwrap();
        let p = Potential::constant_box(1.0, 1.0).unwrap();
        let u = fd_wave_oracle(&p, &f, 2.0, h).unwrap();
        for i in 0..u.xs.len() {
            for j in 0..i {
                assert_eq!(u.u[i][j], 0.0);
            }
        }
        let flux = fd_boundary_flux(&u, h);
        assert_eq!(flux.len(), u.ts.len());
        // For q = 0 the flux would be −3t²; the potential only perturbs it.
        assert!((flux[50] + 3.0).abs() < 0.2);
    }
}
