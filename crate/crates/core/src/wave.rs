//! Wave solution `u^f(x, t) = f(t − x) + ∫_x^t w(x, s) f(t − s) ds`, the
//! response function `r = w_x(0, ·)` and the response operator
//! `(R f)(t) = −f′(t) + ∫_0^t r(s) f(t − s) ds`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{eval_w, KernelField};
use crate::scalar::Real;

/// Dirichlet boundary data `f` sampled on `t_n = n h`, `n = 0..`.
#[derive(Clone, Debug)]
pub struct BoundaryControl<T> {
    samples: Vec<T>,
    h: T,
    smooth: bool,
}

impl<T: Real> BoundaryControl<T> {
    /// `smooth` declares `f ∈ C²` with `f(0) = f′(0) = 0`; the claim is
    /// checked against the samples (`|f(h)| ≤ h² max|f″|`).
    pub fn new(samples: Vec<T>, h: T, smooth: bool) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "a boundary control needs at least two samples".into(),
            ));
        }
        if !(h > T::zero()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {h}")));
        }
        if samples[0] != T::zero() {
            return Err(Error::InvalidParameter(format!(
                "boundary control must start from rest, f(0) = {}",
                samples[0]
            )));
        }
        if smooth && !compatible_at_zero(&samples, h) {
            return Err(Error::NonSmoothControl);
        }
        Ok(BoundaryControl { samples, h, smooth })
    }

    /// Sample `f` on `[0, t_end]`.
    pub fn from_fn<F: Fn(T) -> T>(f: F, t_end: T, h: T, smooth: bool) -> Result<Self> {
        let n = (t_end / h).round().to_usize().unwrap_or(0);
        Self::new((0..=n).map(|k| f(T::from_index(k) * h)).collect(), h, smooth)
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn duration(&self) -> T {
        T::from_index(self.samples.len() - 1) * self.h
    }

    /// `f(t)` by linear interpolation; zero for `t ≤ 0`.
    pub fn value(&self, t: T) -> Result<T> {
        if t <= T::zero() {
            return Ok(T::zero());
        }
        let pos = t / self.h;
        let r = pos.round();
        let pos = if (pos - r).abs() < T::lit(1e-9) { r } else { pos };
        let last = self.samples.len() - 1;
        if pos > T::from_index(last) {
            return Err(Error::InvalidParameter(format!(
                "control sampled up to {}, requested t = {t}",
                self.duration()
            )));
        }
        let k = pos.floor().to_usize().unwrap_or(0).min(last);
        if k == last {
            return Ok(self.samples[last]);
        }
        let a = pos - T::from_index(k);
        Ok(self.samples[k] + a * (self.samples[k + 1] - self.samples[k]))
    }

    /// `f′` on the sample grid: centred differences inside, second-order
    /// one-sided at both ends.
    pub fn derivative(&self) -> Vec<T> {
        let f = &self.samples;
        let n = f.len();
        let two_h = T::lit(2.0) * self.h;
        (0..n)
            .map(|k| {
                if n < 3 {
                    (f[n - 1] - f[0]) / self.h
                } else if k == 0 {
                    (-T::lit(3.0) * f[0] + T::lit(4.0) * f[1] - f[2]) / two_h
                } else if k == n - 1 {
                    (T::lit(3.0) * f[k] - T::lit(4.0) * f[k - 1] + f[k - 2]) / two_h
                } else {
                    (f[k + 1] - f[k - 1]) / two_h
                }
            })
            .collect()
    }

    /// The control delayed by `steps` samples, `f(t − steps·h)`.
    pub fn delayed(&self, steps: usize) -> Self {
        let mut samples = vec![T::zero(); steps];
        samples.extend_from_slice(&self.samples[..self.samples.len() - steps.min(self.samples.len() - 1)]);
        BoundaryControl {
            samples,
            h: self.h,
            smooth: self.smooth,
        }
    }
}

fn compatible_at_zero<T: Real>(f: &[T], h: T) -> bool {
    let max_second = f
        .windows(3)
        .map(|w| (w[2] - T::lit(2.0) * w[1] + w[0]).abs())
        .fold(T::zero(), T::max);
    let scale = f.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    // f(h) = h² f″(θ)/2 when f(0) = f′(0) = 0.
    f[1].abs() <= max_second + T::lit(1e-12) * scale.max(T::one()) * h
}

/// Samples of `r` on `t_n = n h`.
///
/// Samples from `n = 3` on are `(4 w(h, t) − w(2h, t)) / 2h`, a one-sided
/// second-order `w_x(0, t)` that uses `w(0, t) = 0`. The first three samples
/// are start-up values: they make every trapezoidal integral of `r` equal
/// the same one-sided `x`-difference of the trapezoidal integrals
/// `∫_x^T w(x, t) g(t) dt` used by the Weyl and wave routes, so the
/// response and Weyl routes agree to rounding.
#[derive(Clone, Debug)]
pub struct ResponseFunction<T> {
    pub samples: Vec<T>,
    pub h: T,
}

impl<T: Real> ResponseFunction<T> {
    pub fn t_max(&self) -> T {
        T::from_index(self.samples.len() - 1) * self.h
    }

    /// `r(t)` by linear interpolation inside the sampled range.
    pub fn value(&self, t: T) -> Option<T> {
        if t < T::zero() || t > self.t_max() * (T::one() + T::lit(1e-12)) {
            return None;
        }
        let pos = t / self.h;
        let last = self.samples.len() - 1;
        let k = pos.floor().to_usize().unwrap_or(0).min(last);
        if k == last {
            return Some(self.samples[last]);
        }
        let a = pos - T::from_index(k);
        Some(self.samples[k] + a * (self.samples[k + 1] - self.samples[k]))
    }
}

/// `u^f` on every `(x, t)` pair of the two grids; `u[ix][it]`.
#[derive(Clone, Debug)]
pub struct WaveField<T> {
    pub xs: Vec<T>,
    pub ts: Vec<T>,
    pub u: Vec<Vec<T>>,
}

impl<T: Real> WaveField<T> {
    /// Discrete `L²` norm on a uniform `(x, t)` grid of step `h`.
    pub fn l2_norm(&self, h: T) -> T {
        (self.u.iter().flatten().map(|v| *v * *v).sum::<T>() * h * h).sqrt()
    }
}

/// Evaluate the wave representation on `x_grid × t_grid`.
///
/// The `s`-integral uses the trapezoid rule on `s = x, x + h, …` with the
/// control step `h`, closing with a partial step when `t − x` is not a
/// multiple of it.
pub fn solve_wave<T: Real>(
    f: &BoundaryControl<T>,
    field: &KernelField<T>,
    x_grid: &[T],
    t_grid: &[T],
) -> Result<WaveField<T>> {
    let eta_max = field.grid.eta_max();
    let t_top = t_grid.iter().copied().fold(T::zero(), T::max);
    if t_top > f.duration() * (T::one() + T::lit(1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "control sampled up to {}, wave requested up to t = {t_top}",
            f.duration()
        )));
    }
    for &x in x_grid {
        for &t in t_grid {
            if x <= t && t + x > eta_max * (T::one() + T::lit(1e-12)) {
                return Err(Error::OutOfDomain {
                    x: x.as_f64(),
                    t: t.as_f64(),
                    eta_max: eta_max.as_f64(),
                });
            }
        }
    }
    let u = x_grid
        .par_iter()
        .map(|&x| {
            t_grid
                .iter()
                .map(|&t| wave_point(f, field, x, t))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveField {
        xs: x_grid.to_vec(),
        ts: t_grid.to_vec(),
        u,
    })
}

fn wave_point<T: Real>(f: &BoundaryControl<T>, field: &KernelField<T>, x: T, t: T) -> Result<T> {
    if x > t {
        return Ok(T::zero());
    }
    let h = f.h();
    let span = t - x;
    let mut steps = (span / h).floor().to_usize().unwrap_or(0);
    let mut rest = span - T::from_index(steps) * h;
    if rest > h * (T::one() - T::lit(1e-9)) {
        steps += 1;
        rest = T::zero();
    } else if rest < h * T::lit(1e-9) {
        rest = T::zero();
    }
    let g = |s: T| -> Result<T> { Ok(eval_w(field, x, s)? * f.value(t - s)?) };
    let half = T::lit(0.5);
    let mut acc = T::zero();
    let mut prev = g(x)?;
    for m in 1..=steps {
        let cur = g(x + T::from_index(m) * h)?;
        acc += half * h * (prev + cur);
        prev = cur;
    }
    if rest > T::zero() {
        acc += half * rest * (prev + g(t)?);
    }
    Ok(f.value(span)? + acc)
}

/// Extract `r(t) = w_x(0, t)` on `[0, t_r]` with step `h_t`.
///
/// `h_t` must be a whole multiple of the kernel step and `t_r + 2 h_t` must
/// fit in the kernel triangle.
pub fn response_function<T: Real>(field: &KernelField<T>, t_r: T, h_t: T) -> Result<ResponseFunction<T>> {
    let kh = field.grid.h();
    let ratio = h_t / kh;
    if !(h_t > T::zero()) || (ratio - ratio.round()).abs() > T::lit(1e-9) || ratio.round() < T::one() {
        return Err(Error::InvalidParameter(format!(
            "response step {h_t} must be a whole multiple of the kernel step {kh}"
        )));
    }
    let steps = (t_r / h_t).round();
    if (t_r / h_t - steps).abs() > T::lit(1e-9) {
        return Err(Error::InvalidParameter(format!(
            "t_r = {t_r} is not a multiple of the response step {h_t}"
        )));
    }
    let n = steps.to_usize().unwrap_or(0);
    if n < 2 {
        return Err(Error::StepTooCoarse(format!(
            "need t_r ≥ 2·h_t, got t_r = {t_r}, h_t = {h_t}"
        )));
    }
    if t_r + T::lit(2.0) * h_t > field.grid.eta_max() * (T::one() + T::lit(1e-12)) {
        return Err(Error::StepTooCoarse(format!(
            "2·h_t beyond the kernel triangle at t = {t_r} (eta_max = {})",
            field.grid.eta_max()
        )));
    }
    let two = T::lit(2.0);
    let w = |x: T, t: T| eval_w(field, x, t);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = T::from_index(k) * h_t;
        let r = match k {
            0 => T::zero(),
            1 => w(h_t, h_t)? / h_t,
            2 => (two * w(h_t, t)? - T::lit(0.25) * w(two * h_t, t)?) / h_t,
            _ => (T::lit(4.0) * w(h_t, t)? - w(two * h_t, t)?) / (two * h_t),
        };
        samples.push(r);
    }
    Ok(ResponseFunction { samples, h: h_t })
}

/// `(R f)(t_n) = −f′(t_n) + ∫_0^{t_n} r(s) f(t_n − s) ds` on the control grid.
///
/// The output covers the common range of `f` and `r`.
pub fn apply_response_operator<T: Real>(f: &BoundaryControl<T>, r: &ResponseFunction<T>) -> Result<Vec<T>> {
    if !f.is_smooth() {
        return Err(Error::NonSmoothControl);
    }
    let h = f.h();
    if (r.h - h).abs() > T::lit(1e-12) * h {
        return Err(Error::InvalidParameter(format!(
            "control step {h} differs from response step {}",
            r.h
        )));
    }
    let fs = f.samples();
    let n = fs.len().min(r.samples.len());
    let df = f.derivative();
    let half = T::lit(0.5);
    Ok((0..n)
        .map(|k| {
            let conv = if k == 0 {
                T::zero()
            } else {
                let inner: T = (1..k).map(|m| r.samples[m] * fs[k - m]).sum();
                h * (inner + half * (r.samples[0] * fs[k] + r.samples[k] * fs[0]))
            };
            -df[k] + conv
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{neumann_solve, TriangleGrid};
    use crate::potential::Potential;

    fn cubic(h: f64, t_end: f64) -> BoundaryControl<f64> {
        BoundaryControl::from_fn(|t: f64| t * t * t, t_end, h, true).unwrap()
    }

    #[test]
    fn control_validation() {
        assert!(BoundaryControl::new(vec![1.0, 2.0], 0.1, false).is_err());
        // f(t) = t has f′(0) ≠ 0.
        let lin = BoundaryControl::from_fn(|t: f64| t, 1.0, 0.1, true);
        assert!(matches!(lin, Err(Error::NonSmoothControl)));
        assert!(BoundaryControl::from_fn(|t: f64| t, 1.0, 0.1, false).is_ok());
        assert!(BoundaryControl::from_fn(|t: f64| t * t, 1.0, 0.1, true).is_ok());
    }

    #[test]
    fn free_wave_is_a_shift() {
        let p = Potential::<f64>::zero();
        let k = neumann_solve(&p, TriangleGrid::new(4.0, 0.05).unwrap(), 1e-12, 10).unwrap();
        let f = BoundaryControl::from_fn(|t: f64| t * t, 2.0, 0.05, true).unwrap();
        let xs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let u = solve_wave(&f, &k, &xs, &xs).unwrap();
        for (ix, &x) in xs.iter().enumerate() {
            for (it, &t) in xs.iter().enumerate() {
                let exact = if t >= x { (t - x) * (t - x) } else { 0.0 };
                assert!((u.u[ix][it] - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn free_response_operator() {
        let p = Potential::<f64>::zero();
        let k = neumann_solve(&p, TriangleGrid::new(3.0, 0.01).unwrap(), 1e-12, 10).unwrap();
        let r = response_function(&k, 2.0, 0.01).unwrap();
        assert!(r.samples.iter().all(|&v| v == 0.0));
        let f = BoundaryControl::from_fn(|t: f64| t * t, 2.0, 0.01, true).unwrap();
        let out = apply_response_operator(&f, &r).unwrap();
        for (k, v) in out.iter().enumerate() {
            assert!((v + 2.0 * k as f64 * 0.01).abs() < 1e-11);
        }
    }

    #[test]
    fn causality_and_linearity() {
        let p = Potential::<f64>::constant_box(1.0, 1.0).unwrap();
        let k = neumann_solve(&p, TriangleGrid::new(4.0, 0.02).unwrap(), 1e-12, 60).unwrap();
        let f = cubic(0.02, 2.0);
        let g = BoundaryControl::from_fn(|t: f64| (t * t) * (1.0 - t / 4.0), 2.0, 0.02, true).unwrap();
        let xs = [0.5, 1.0, 1.5];
        let ts = [0.2, 0.4, 1.0, 1.8];
        let u = solve_wave(&f, &k, &xs, &ts).unwrap();
        assert_eq!(u.u[1][1], 0.0);
        assert_eq!(u.u[2][2], 0.0);

        let r = response_function(&k, 2.0, 0.02).unwrap();
        let (a, b) = (1.7, -0.3);
        let combo_samples: Vec<f64> = f
            .samples()
            .iter()
            .zip(g.samples())
            .map(|(x, y)| a * x + b * y)
            .collect();
        let combo = BoundaryControl::new(combo_samples, 0.02, true).unwrap();
        let rf = apply_response_operator(&f, &r).unwrap();
        let rg = apply_response_operator(&g, &r).unwrap();
        let rc = apply_response_operator(&combo, &r).unwrap();
        for k in 0..rc.len() {
            assert!((rc[k] - (a * rf[k] + b * rg[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_equivariance() {
        let p = Potential::<f64>::exponential(1.0, 1.0).unwrap();
        let h = 0.02;
        let k = neumann_solve(&p, TriangleGrid::new(4.0, h).unwrap(), 1e-12, 60).unwrap();
        let f = cubic(h, 2.0);
        let delayed = f.delayed(10);
        let xs: Vec<f64> = (0..=25).map(|i| i as f64 * 2.0 * h).collect();
        let ts: Vec<f64> = (0..=50).map(|i| i as f64 * 2.0 * h).collect();
        let u = solve_wave(&f, &k, &xs, &ts).unwrap();
        let ud = solve_wave(&delayed, &k, &xs, &ts).unwrap();
        for ix in 0..xs.len() {
            for it in 5..ts.len() {
                assert!((ud.u[ix][it] - u.u[ix][it - 5]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn response_rejects_rough_controls_and_bad_steps() {
        let p = Potential::<f64>::constant_box(1.0, 1.0).unwrap();
        let k = neumann_solve(&p, TriangleGrid::new(2.0, 0.02).unwrap(), 1e-12, 60).unwrap();
        assert!(matches!(response_function(&k, 2.0, 0.02), Err(Error::StepTooCoarse(_))));
        assert!(response_function(&k, 1.0, 0.03).is_err());
        let r = response_function(&k, 1.0, 0.02).unwrap();
        let rough = BoundaryControl::from_fn(|t: f64| t, 1.0, 0.02, false).unwrap();
        assert!(matches!(apply_response_operator(&rough, &r), Err(Error::NonSmoothControl)));
    }

    #[test]
    fn response_function_pointwise_limit() {
        // Away from the start-up samples r approaches w_x(0, t); near t = 0
        // that is −q(0)/2.
        let p = Potential::<f64>::exponential(1.0, 1.0).unwrap();
        let k = neumann_solve(&p, TriangleGrid::new(2.0, 0.005).unwrap(), 1e-12, 60).unwrap();
        let r = response_function(&k, 1.0, 0.005).unwrap();
        assert!((r.samples[3] + 0.5).abs() < 0.02);
        assert!((r.value(0.0151).unwrap() - r.samples[3]).abs() < 1e-3);
    }
}
