//! Spectral side: the Weyl solution
//! `û(x, k) = e^{ikx} + ∫_x^∞ w(x, t) e^{ikt} dt`, the Titchmarsh–Weyl
//! m-function by three routes, the A-amplitude and the regions of `k` where
//! the transform is known to converge.
//!
//! Conventions: Weyl routes take the wavenumber `k` (`Im k > 0`, `z = k²`);
//! the Laplace-type routes take `κ > 0` with `z = −κ²`, i.e. `k = iκ`.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernel::{eval_w, KernelField};
use crate::potential::PotentialNorms;
use crate::scalar::Real;
use crate::wave::ResponseFunction;

/// Relative margin added to `κ* = √(2/‖q̃‖)` in the windowed threshold.
/// The region is open, so the infimum (margin 0) is reported.
pub const KAPPA_STAR_MARGIN: f64 = 0.0;

/// Spectral wavenumber `k` with `Im k > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint<T> {
    k: Complex<T>,
}

impl<T: Real> SpectralPoint<T> {
    pub fn new(k: Complex<T>) -> Result<Self> {
        if !(k.im > T::zero()) || !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spectral point needs Im k > 0, got k = {k}"
            )));
        }
        Ok(SpectralPoint { k })
    }

    /// `k = iκ`, the point `z = −κ²`.
    pub fn from_kappa(kappa: T) -> Result<Self> {
        Self::new(Complex::new(T::zero(), kappa))
    }

    /// The root `k = √z` with `Im k > 0`.
    pub fn from_z(z: Complex<T>) -> Result<Self> {
        let mut k = z.sqrt();
        if k.im < T::zero() {
            k = -k;
        }
        Self::new(k)
    }

    pub fn k(&self) -> Complex<T> {
        self.k
    }

    pub fn z(&self) -> Complex<T> {
        self.k * self.k
    }

    /// `κ = −ik`; real and positive on the imaginary `k` axis.
    pub fn kappa(&self) -> Complex<T> {
        Complex::new(self.k.im, -self.k.re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Route {
    WeylDef,
    ResponseRep,
    AmplitudeRep,
    OdeOracle,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::WeylDef => "weyl_def",
            Route::ResponseRep => "response_rep",
            Route::AmplitudeRep => "amplitude_rep",
            Route::OdeOracle => "ode_oracle",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One value `m(z)` together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MValue<T> {
    pub z: Complex<T>,
    pub m: Complex<T>,
    pub route: Route,
}

/// Sampled Weyl solution `û(x, k)`; `values[i]` belongs to `x_grid[i]`.
#[derive(Clone, Debug)]
pub struct WeylSample<T> {
    pub x_grid: Vec<T>,
    pub values: Vec<Complex<T>>,
    pub k: SpectralPoint<T>,
    /// Bound on the neglected `∫_{T}^∞ |w(x, t) e^{ikt}| dt`, max over the grid.
    pub tail_bound: T,
}

/// Lower bounds on `Im k` above which the kernel representation is proven
/// to give the Weyl solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRegion<T> {
    pub norms: PotentialNorms<T>,
    /// `‖q‖_{L¹}/4`, absent when the L¹ norm is infinite.
    pub l1_threshold: Option<T>,
    /// `e‖q̃‖/2`.
    pub stirling_branch: T,
    /// `√(‖q̃‖/2)` as printed in the windowed-class statement.
    pub printed_sqrt_branch: T,
    /// `κ*‖q̃‖/2` with the smallest admissible `κ* = √(2/‖q̃‖)(1 + margin)`.
    pub kappa_branch: T,
    /// Maximum of the three windowed-class branches.
    pub windowed_threshold: T,
    /// `√(2‖q̃‖)`: the smallest exponential growth rate in `t` of the windowed
    /// kernel bound over all `κ`. Diagnostic only.
    pub growth_infimum: T,
}

impl<T: Real> ConvergenceRegion<T> {
    /// Either class statement suffices, so the smaller applicable threshold.
    pub fn threshold(&self) -> T {
        match self.l1_threshold {
            Some(l1) => l1.min(self.windowed_threshold),
            None => self.windowed_threshold,
        }
    }

    pub fn contains(&self, im_k: T) -> bool {
        im_k > self.threshold()
    }

    /// Whether the printed `√(‖q̃‖/2)` and the derived `κ*‖q̃‖/2` coincide.
    pub fn threshold_forms_agree(&self) -> bool {
        (self.printed_sqrt_branch - self.kappa_branch).abs()
            <= T::lit(1e-12) * self.printed_sqrt_branch.max(T::one())
    }

    /// Bound on `∫_{t_trunc}^∞ |w(x, t)| e^{−b t} dt`, `b = Im k`, from the
    /// tighter of the applicable pointwise kernel bounds; `+∞` if neither
    /// bound decays.
    pub fn tail_bound(&self, x: T, t_trunc: T, im_k: T) -> T {
        let from = t_trunc.max(x);
        let windowed = window_tail_bound(self.norms.windowed_scaled, x, from, im_k);
        match self.norms.l1.finite() {
            Some(l1) => l1_tail_bound(l1, x, from, im_k).min(windowed),
            None => windowed,
        }
    }
}

pub fn convergence_region<T: Real>(norms: &PotentialNorms<T>) -> ConvergenceRegion<T> {
    let s = norms.windowed_scaled;
    let half = T::lit(0.5);
    let (stirling, printed, kappa_branch) = if s > T::zero() {
        let kappa_star = (T::lit(2.0) / s).sqrt() * (T::one() + T::lit(KAPPA_STAR_MARGIN));
        (T::E() * s * half, (s * half).sqrt(), kappa_star * s * half)
    } else {
        (T::zero(), T::zero(), T::zero())
    };
    ConvergenceRegion {
        norms: *norms,
        l1_threshold: norms.l1.finite().map(|l1| l1 / T::lit(4.0)),
        stirling_branch: stirling,
        printed_sqrt_branch: printed,
        kappa_branch,
        windowed_threshold: stirling.max(printed).max(kappa_branch),
        growth_infimum: (T::lit(2.0) * s).sqrt(),
    }
}

/// `∫_T^∞ ½‖q‖ e^{‖q‖(t−x)/4} e^{−b t} dt`.
pub fn l1_tail_bound<T: Real>(l1: T, x: T, t_trunc: T, b: T) -> T {
    if l1 == T::zero() {
        return T::zero();
    }
    let rate = b - l1 / T::lit(4.0);
    if rate <= T::zero() {
        return T::infinity();
    }
    T::lit(0.5) * l1 * (-l1 * x / T::lit(4.0) - rate * t_trunc).exp() / rate
}

/// Integral over `[T, ∞)` of the windowed kernel bound times `e^{−b t}`,
/// with `κ = √(2/‖q̃‖)`, the choice minimising its growth rate in `t`.
pub fn window_tail_bound<T: Real>(s: T, x: T, t_trunc: T, b: T) -> T {
    if s == T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let kappa = (T::lit(2.0) / s).sqrt();
    let beta = b - s * kappa * half - T::one() / kappa;
    let stirling_rate = b - T::E() * s * half;
    if beta <= T::zero() || stirling_rate <= T::zero() {
        return T::infinity();
    }
    let first = s / T::lit(4.0)
        * (x * (T::one() / kappa - s * kappa * half) - beta * t_trunc).exp()
        * ((x + t_trunc) / beta + T::one() / (beta * beta));
    let second = s * T::E() / (T::lit(4.0) * T::TAU().sqrt())
        * (-x * T::E() * s * half - stirling_rate * t_trunc).exp()
        / stirling_rate;
    first + second
}

/// Whether `weyl_solution` and the Laplace routes check the region and the
/// truncation tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy<T> {
    pub tail_tol: Option<T>,
    pub enforce_region: bool,
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        TruncationPolicy {
            tail_tol: None,
            enforce_region: true,
        }
    }
}

fn check_region<T: Real>(region: &ConvergenceRegion<T>, im_k: T, policy: &TruncationPolicy<T>) -> Result<()> {
    if policy.enforce_region && !region.contains(im_k) {
        return Err(Error::Region {
            im_k: im_k.as_f64(),
            threshold: region.threshold().as_f64(),
        });
    }
    Ok(())
}

fn check_tail<T: Real>(tail: T, policy: &TruncationPolicy<T>) -> Result<()> {
    match policy.tail_tol {
        Some(tol) if !(tail <= tol) => Err(Error::Truncation {
            tail_bound: tail.as_f64(),
            tol: tol.as_f64(),
        }),
        _ => Ok(()),
    }
}

/// `û(x, k) = e^{ikx} + ∫_x^{t_trunc} w(x, t) e^{ikt} dt` on `x_grid`.
///
/// The `t`-integral is a trapezoid sum on the kernel grid `t = m h`, starting
/// from the node `t = x` (the kernel jumps to zero below it). `t_trunc` must
/// be a multiple of the kernel step.
pub fn weyl_solution<T: Real>(
    field: &KernelField<T>,
    region: &ConvergenceRegion<T>,
    k: SpectralPoint<T>,
    x_grid: &[T],
    t_trunc: T,
    policy: &TruncationPolicy<T>,
) -> Result<WeylSample<T>> {
    let kv = k.k();
    check_region(region, kv.im, policy)?;
    let h = field.grid.h();
    let steps = (t_trunc / h).round();
    if !(t_trunc > T::zero()) || (t_trunc / h - steps).abs() > T::lit(1e-9) {
        return Err(Error::InvalidParameter(format!(
            "t_trunc = {t_trunc} must be a positive multiple of the kernel step {h}"
        )));
    }
    let last = steps.to_usize().unwrap_or(0);
    let x_top = x_grid.iter().copied().fold(T::zero(), T::max);
    if x_grid.iter().any(|&x| x < T::zero()) {
        return Err(Error::InvalidParameter("x grid must be non-negative".into()));
    }
    if t_trunc + x_top > field.grid.eta_max() * (T::one() + T::lit(1e-12)) {
        return Err(Error::OutOfDomain {
            x: x_top.as_f64(),
            t: t_trunc.as_f64(),
            eta_max: field.grid.eta_max().as_f64(),
        });
    }
    let i = Complex::<T>::i();
    let phase = |t: T| (i * kv * t).exp();
    let half = T::lit(0.5);

    let mut values = Vec::with_capacity(x_grid.len());
    let mut tail = T::zero();
    for &x in x_grid {
        let mut integral = Complex::new(T::zero(), T::zero());
        if x < t_trunc {
            // Nodes: x itself, then every grid point strictly above it.
            let pos = x / h;
            let snapped = if (pos - pos.round()).abs() < T::lit(1e-9) { pos.round() } else { pos };
            let first = if snapped == snapped.floor() {
                snapped.to_usize().unwrap_or(0) + 1
            } else {
                snapped.ceil().to_usize().unwrap_or(0)
            };
            let mut prev_t = x;
            let mut prev = phase(x) * eval_w(field, x, x)?;
            for m in first..=last {
                let t = T::from_index(m) * h;
                let cur = phase(t) * eval_w(field, x, t)?;
                integral += (prev + cur) * (half * (t - prev_t));
                prev_t = t;
                prev = cur;
            }
        }
        values.push(phase(x) + integral);
        tail = tail.max(region.tail_bound(x, t_trunc, kv.im));
    }
    check_tail(tail, policy)?;
    Ok(WeylSample {
        x_grid: x_grid.to_vec(),
        values,
        k,
        tail_bound: tail,
    })
}

/// `m(k²) = û_x(0, k) / û(0, k)`.
///
/// The free wave `e^{ikx}` is differentiated exactly; the kernel part
/// `û − e^{ikx}` by the second-order one-sided difference on `0, h, 2h`.
pub fn m_from_weyl<T: Real>(sample: &WeylSample<T>, h: T) -> Result<MValue<T>> {
    let find = |target: T| {
        sample
            .x_grid
            .iter()
            .position(|&x| (x - target).abs() <= T::lit(1e-9) * h)
            .ok_or_else(|| {
                Error::StepTooCoarse(format!("Weyl sample has no node at x = {target}"))
            })
    };
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter(format!("difference step must be positive, got {h}")));
    }
    let (i0, i1, i2) = (find(T::zero())?, find(h)?, find(T::lit(2.0) * h)?);
    let kv = sample.k.k();
    let i = Complex::<T>::i();
    let scattered = |idx: usize| sample.values[idx] - (i * kv * sample.x_grid[idx]).exp();
    let d = (scattered(i1) * T::lit(4.0) - scattered(i2) - scattered(i0) * T::lit(3.0)) / (T::lit(2.0) * h);
    let m = (i * kv + d) / sample.values[i0];
    Ok(MValue {
        z: sample.k.z(),
        m,
        route: Route::WeylDef,
    })
}

/// Rough size of `∫_{T}^∞ r e^{−κt}`: the largest `|r|` over the last
/// tenth of the samples, propagated with `e^{−κT}/κ`.
fn response_tail_estimate<T: Real>(r: &ResponseFunction<T>, kappa: T) -> T {
    let n = r.samples.len();
    let start = n - (n / 10).max(1);
    let level = r.samples[start..].iter().fold(T::zero(), |m, v| m.max(v.abs()));
    level * (-kappa * r.t_max()).exp() / kappa
}

/// `m(−κ²) = −κ + ∫_0^{T_r} r(α) e^{−κα} dα` (trapezoid).
///
/// No pointwise bound on `r` is available, so the truncation check uses
/// [`response_tail_estimate`].
pub fn m_from_response<T: Real>(
    r: &ResponseFunction<T>,
    kappa: T,
    region: &ConvergenceRegion<T>,
    policy: &TruncationPolicy<T>,
) -> Result<MValue<T>> {
    if !(kappa > T::zero()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    check_region(region, kappa, policy)?;
    check_tail(response_tail_estimate(r, kappa), policy)?;
    let integral = laplace_trapezoid(&r.samples, r.h, |t| (-kappa * t).exp());
    Ok(MValue {
        z: Complex::new(-kappa * kappa, T::zero()),
        m: Complex::new(-kappa + integral, T::zero()),
        route: Route::ResponseRep,
    })
}

fn laplace_trapezoid<T: Real, F: Fn(T) -> T>(samples: &[T], h: T, weight: F) -> T {
    let n = samples.len();
    let half = T::lit(0.5);
    samples
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let w = if j == 0 || j == n - 1 { half * h } else { h };
            w * r * weight(T::from_index(j) * h)
        })
        .sum()
}

/// Samples of `A(α) = −2 r(2α)` on `α_j = j h_r / 2`, so that `2α_j` lands
/// on the response grid.
#[derive(Clone, Debug)]
pub struct AmplitudeFunction<T> {
    pub samples: Vec<T>,
    pub h: T,
}

impl<T: Real> AmplitudeFunction<T> {
    pub fn alpha_max(&self) -> T {
        T::from_index(self.samples.len() - 1) * self.h
    }
}

pub fn a_amplitude<T: Real>(r: &ResponseFunction<T>) -> AmplitudeFunction<T> {
    let h = r.h * T::lit(0.5);
    let samples = (0..r.samples.len())
        .map(|j| {
            let two_alpha = T::lit(2.0) * T::from_index(j) * h;
            -T::lit(2.0) * r.value(two_alpha).unwrap_or(r.samples[j])
        })
        .collect();
    AmplitudeFunction { samples, h }
}

/// `m(−κ²) = −κ − ∫_0^{α_max} A(α) e^{−2ακ} dα` (trapezoid).
pub fn m_from_amplitude<T: Real>(
    a: &AmplitudeFunction<T>,
    kappa: T,
    region: &ConvergenceRegion<T>,
    policy: &TruncationPolicy<T>,
) -> Result<MValue<T>> {
    if !(kappa > T::zero()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    check_region(region, kappa, policy)?;
    let two = T::lit(2.0);
    let n = a.samples.len();
    let start = n - (n / 10).max(1);
    let level = a.samples[start..].iter().fold(T::zero(), |m, v| m.max(v.abs()));
    check_tail(level * (-two * kappa * a.alpha_max()).exp() / (two * kappa), policy)?;
    let integral = laplace_trapezoid(&a.samples, a.h, |alpha| (-two * alpha * kappa).exp());
    Ok(MValue {
        z: Complex::new(-kappa * kappa, T::zero()),
        m: Complex::new(-kappa - integral, T::zero()),
        route: Route::AmplitudeRep,
    })
}
