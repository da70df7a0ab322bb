//! One-dimensional quadrature helpers.

use crate::scalar::Real;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// `tol` is an absolute tolerance for the whole interval. Recursion stops at
/// depth 50, which is far below the resolution of `f64`.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    if b <= a {
        return T::zero();
    }
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Adaptive Simpson over `[a, b]`, split first at every breakpoint inside it.
pub fn integrate_piecewise<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    breakpoints: &[T],
    tol: T,
) -> T {
    if b <= a {
        return T::zero();
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    let pieces = T::from_index(cuts.len() - 1);
    cuts.windows(2)
        .map(|w| {
            // Nudge inward so one-sided values at a jump are used.
            let eps = (w[1] - w[0]) * T::lit(1e-14);
            adaptive_simpson(f, w[0] + eps, w[1] - eps, tol / pieces)
        })
        .sum()
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half = T::lit(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    recurse(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
}

/// Composite trapezoid rule for samples on a uniform grid of step `h`.
pub fn trapezoid<T: Real>(samples: &[T], h: T) -> T {
    match samples.len() {
        0 | 1 => T::zero(),
        n => {
            let interior: T = samples[1..n - 1].iter().copied().sum();
            h * (interior + T::lit(0.5) * (samples[0] + samples[n - 1]))
        }
    }
}
