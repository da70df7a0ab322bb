//! Potentials `q(x)` on the half-line: a small catalog of closed forms plus
//! piecewise-linear sampled data, together with the two norms the kernel
//! estimates are phrased in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Real;

/// Neglected tail mass used to pick the truncation point of decaying kinds.
const TAIL_MASS: f64 = 1e-12;
/// Default truncation point for the non-decaying bump train.
pub const BUMP_TRAIN_DEFAULT_TRUNCATION: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    Zero,
    ConstantBox,
    Exponential,
    Sech2,
    BumpTrain,
    Sampled,
}

impl PotentialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PotentialKind::Zero => "zero",
            PotentialKind::ConstantBox => "constant_box",
            PotentialKind::Exponential => "exponential",
            PotentialKind::Sech2 => "sech2",
            PotentialKind::BumpTrain => "bump_train",
            PotentialKind::Sampled => "sampled",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "zero" => PotentialKind::Zero,
            "constant_box" | "box" => PotentialKind::ConstantBox,
            "exponential" => PotentialKind::Exponential,
            "sech2" => PotentialKind::Sech2,
            "bump_train" => PotentialKind::BumpTrain,
            "sampled" => PotentialKind::Sampled,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown potential kind `{other}`"
                )))
            }
        })
    }
}

#[derive(Clone, Debug)]
enum Shape<T> {
    Zero,
    Box { height: T, width: T },
    Exponential { height: T, rate: T },
    Sech2 { kappa: T, center: T },
    BumpTrain { height: T, duty: T },
    Sampled(Samples<T>),
}

#[derive(Clone, Debug)]
struct Samples<T> {
    xs: Vec<T>,
    qs: Vec<T>,
    /// `∫_0^{x_k} q` and `∫_0^{x_k} |q|` at the sample abscissae.
    mass: Vec<T>,
    abs_mass: Vec<T>,
}

/// A real potential on `[0, ∞)`.
///
/// At a jump discontinuity `eval` returns the mean of the one-sided limits;
/// trapezoidal sums over grids that hit the jump stay second order that way.
#[derive(Clone, Debug)]
pub struct Potential<T> {
    kind: PotentialKind,
    shape: Shape<T>,
    params: Vec<T>,
    x_max: T,
}

/// L¹ norm, with an explicit infinite value for potentials that are only
/// locally integrable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum L1Norm<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> L1Norm<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            L1Norm::Finite(v) => Some(v),
            L1Norm::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, L1Norm::Finite(_))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            L1Norm::Finite(v) => v.as_f64(),
            L1Norm::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialNorms<T> {
    /// `∫_0^∞ |q|`.
    pub l1: L1Norm<T>,
    /// `sup_{x≥0} ∫_x^{x+1} |q|`.
    pub windowed: T,
    /// Windowed norm of the stretched potential `q(γ/2)`.
    pub windowed_scaled: T,
}

impl<T: Real> Potential<T> {
    pub fn zero() -> Self {
        Potential {
            kind: PotentialKind::Zero,
            shape: Shape::Zero,
            params: Vec::new(),
            x_max: T::zero(),
        }
    }

    /// `q = c` on `[0, L)`, zero beyond.
    pub fn constant_box(height: T, width: T) -> Result<Self> {
        check_finite(&[height, width])?;
        if width <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "box width must be positive, got {width}"
            )));
        }
        Ok(Potential {
            kind: PotentialKind::ConstantBox,
            shape: Shape::Box { height, width },
            params: vec![height, width],
            x_max: width,
        })
    }

    /// `q = c·exp(−a x)`.
    pub fn exponential(height: T, rate: T) -> Result<Self> {
        check_finite(&[height, rate])?;
        if rate <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        let x_max = if height == T::zero() {
            T::zero()
        } else {
            ((height.abs() / rate) / T::lit(TAIL_MASS)).ln().max(T::zero()) / rate
        };
        Ok(Potential {
            kind: PotentialKind::Exponential,
            shape: Shape::Exponential { height, rate },
            params: vec![height, rate],
            x_max,
        })
    }

    /// `q = −2κ² sech²(κ(x − x₀))`.
    pub fn sech2(kappa: T, center: T) -> Result<Self> {
        check_finite(&[kappa, center])?;
        if kappa <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "sech2 kappa must be positive, got {kappa}"
            )));
        }
        // Tail mass 2κ(1 − tanh κ(X − x₀)) ≈ 4κ e^{−2κ(X − x₀)}.
        let x_max = (center
            + (T::lit(4.0) * kappa / T::lit(TAIL_MASS)).ln() / (T::lit(2.0) * kappa))
            .max(T::zero());
        Ok(Potential {
            kind: PotentialKind::Sech2,
            shape: Shape::Sech2 { kappa, center },
            params: vec![kappa, center],
            x_max,
        })
    }

    /// Unit-period train: `q = c` on `[n, n + d)`, zero on `[n + d, n + 1)`.
    ///
    /// The train never decays, so `x_max` is only the cut-off used by the
    /// ODE oracle and the norm sweeps.
    pub fn bump_train(height: T, duty: T) -> Result<Self> {
        Self::bump_train_truncated(height, duty, T::lit(BUMP_TRAIN_DEFAULT_TRUNCATION))
    }

    pub fn bump_train_truncated(height: T, duty: T, truncation: T) -> Result<Self> {
        check_finite(&[height, duty, truncation])?;
        if !(duty > T::zero() && duty <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "bump duty must lie in (0, 1], got {duty}"
            )));
        }
        if truncation <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "bump truncation must be positive, got {truncation}"
            )));
        }
        Ok(Potential {
            kind: PotentialKind::BumpTrain,
            shape: Shape::BumpTrain { height, duty },
            params: vec![height, duty, truncation],
            x_max: truncation,
        })
    }

    /// Piecewise-linear interpolant of `(x, q)` rows; zero beyond the last row.
    pub fn from_samples(rows: &[(T, T)]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        if rows[0].0 != T::zero() {
            return Err(Error::InvalidParameter(format!(
                "sampled potential must start at x = 0, got {}",
                rows[0].0
            )));
        }
        for (row, &(x, q)) in rows.iter().enumerate() {
            check_finite(&[x, q])?;
            if row > 0 && x <= rows[row - 1].0 {
                return Err(Error::NonMonotone { row });
            }
        }
        let xs: Vec<T> = rows.iter().map(|r| r.0).collect();
        let qs: Vec<T> = rows.iter().map(|r| r.1).collect();
        let mut mass = vec![T::zero(); xs.len()];
        let mut abs_mass = vec![T::zero(); xs.len()];
        for k in 1..xs.len() {
            let dx = xs[k] - xs[k - 1];
            mass[k] = mass[k - 1] + dx * (qs[k] + qs[k - 1]) * T::lit(0.5);
            abs_mass[k] = abs_mass[k - 1] + abs_linear_integral(dx, qs[k - 1], qs[k]);
        }
        let x_max = *xs.last().expect("non-empty");
        Ok(Potential {
            kind: PotentialKind::Sampled,
            params: Vec::new(),
            shape: Shape::Sampled(Samples {
                xs,
                qs,
                mass,
                abs_mass,
            }),
            x_max,
        })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Truncation point: beyond it oracles and norms treat `q` as zero.
    pub fn x_max(&self) -> T {
        self.x_max
    }

    /// `q(x)` for `x ≥ 0` (negative `x` is clamped to 0).
    pub fn eval(&self, x: T) -> T {
        let x = x.max(T::zero());
        let half = T::lit(0.5);
        match &self.shape {
            Shape::Zero => T::zero(),
            Shape::Box { height, width } => {
                if x < *width {
                    *height
                } else if x == *width {
                    *height * half
                } else {
                    T::zero()
                }
            }
            Shape::Exponential { height, rate } => *height * (-*rate * x).exp(),
            Shape::Sech2 { kappa, center } => {
                let s = T::one() / (*kappa * (x - *center)).cosh();
                -T::lit(2.0) * *kappa * *kappa * s * s
            }
            Shape::BumpTrain { height, duty } => {
                if *duty >= T::one() {
                    return *height;
                }
                let frac = x - x.floor();
                if x > T::zero() && frac == T::zero() {
                    *height * half
                } else if frac < *duty {
                    *height
                } else if frac == *duty {
                    *height * half
                } else {
                    T::zero()
                }
            }
            Shape::Sampled(s) => s.eval(x),
        }
    }

    /// `q(x)` with the tail beyond `x_max` removed.
    pub fn eval_truncated(&self, x: T) -> T {
        if x > self.x_max {
            T::zero()
        } else {
            self.eval(x)
        }
    }

    /// `∫_0^x q`, in closed form.
    pub fn antiderivative(&self, x: T) -> T {
        let x = x.max(T::zero());
        match &self.shape {
            Shape::Zero => T::zero(),
            Shape::Box { height, width } => *height * x.min(*width),
            Shape::Exponential { height, rate } => {
                *height / *rate * -(-*rate * x).exp_m1()
            }
            Shape::Sech2 { kappa, center } => {
                -T::lit(2.0) * *kappa * ((*kappa * (x - *center)).tanh() + (*kappa * *center).tanh())
            }
            Shape::BumpTrain { height, duty } => {
                let whole = x.floor();
                *height * (whole * *duty + (x - whole).min(*duty))
            }
            Shape::Sampled(s) => s.integral(x, false),
        }
    }

    /// `∫_0^x |q|`, in closed form.
    pub fn abs_antiderivative(&self, x: T) -> T {
        match &self.shape {
            Shape::Sampled(s) => s.integral(x.max(T::zero()), true),
            // Every closed-form kind has constant sign.
            _ => self.antiderivative(x).abs(),
        }
    }

    /// Points in `[0, x_max]` where `q` is not smooth.
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.shape {
            Shape::Box { width, .. } => vec![*width],
            Shape::BumpTrain { duty, .. } => {
                let mut out = Vec::new();
                let mut n = T::zero();
                while n <= self.x_max {
                    if n > T::zero() {
                        out.push(n);
                    }
                    let up = n + *duty;
                    if *duty < T::one() && up <= self.x_max {
                        out.push(up);
                    }
                    n += T::one();
                }
                out
            }
            Shape::Sampled(s) => s.xs.clone(),
            _ => Vec::new(),
        }
    }

    /// True when `∫_0^∞ |q| = ∞` (the bump train with nonzero height).
    pub fn has_infinite_mass(&self) -> bool {
        matches!(self.shape, Shape::BumpTrain { height, .. } if height != T::zero())
    }

    /// `∫ |q|` beyond `x_max`, known analytically for the decaying kinds.
    fn tail_abs_mass(&self) -> T {
        match &self.shape {
            Shape::Exponential { height, rate } => {
                height.abs() / *rate * (-*rate * self.x_max).exp()
            }
            Shape::Sech2 { kappa, center } => {
                T::lit(2.0) * *kappa * (T::one() - (*kappa * (self.x_max - *center)).tanh())
            }
            _ => T::zero(),
        }
    }

    fn truncated_abs_antiderivative(&self, x: T) -> T {
        self.abs_antiderivative(x.min(self.x_max))
    }

    /// Smallest sample spacing for sampled data.
    fn sample_spacing(&self) -> Option<T> {
        match &self.shape {
            Shape::Sampled(s) if s.xs.len() > 1 => s
                .xs
                .windows(2)
                .map(|w| w[1] - w[0])
                .reduce(T::min),
            _ => None,
        }
    }

    /// True if no value of `q` on its support is negative.
    pub fn is_nonnegative(&self) -> bool {
        match &self.shape {
            Shape::Zero => true,
            Shape::Box { height, .. }
            | Shape::Exponential { height, .. }
            | Shape::BumpTrain { height, .. } => *height >= T::zero(),
            Shape::Sech2 { .. } => false,
            Shape::Sampled(s) => s.qs.iter().all(|&q| q >= T::zero()),
        }
    }
}

impl<T: Real> Samples<T> {
    fn segment(&self, x: T) -> usize {
        // index k with xs[k] <= x < xs[k+1]
        match self
            .xs
            .binary_search_by(|p| p.partial_cmp(&x).expect("finite abscissa"))
        {
            Ok(k) => k.min(self.xs.len().saturating_sub(2)),
            Err(k) => k - 1,
        }
    }

    fn eval(&self, x: T) -> T {
        let last = *self.xs.last().expect("non-empty");
        if x > last {
            return T::zero();
        }
        if self.xs.len() == 1 || x == last {
            // Jump to zero at the end of the data.
            return *self.qs.last().expect("non-empty") * T::lit(0.5);
        }
        let k = self.segment(x);
        let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.qs[k] + t * (self.qs[k + 1] - self.qs[k])
    }

    fn integral(&self, x: T, abs: bool) -> T {
        let table = if abs { &self.abs_mass } else { &self.mass };
        let last = *self.xs.last().expect("non-empty");
        if self.xs.len() == 1 {
            return T::zero();
        }
        if x >= last {
            return *table.last().expect("non-empty");
        }
        let k = self.segment(x);
        let dx = x - self.xs[k];
        let qx = self.eval(x);
        let partial = if abs {
            abs_linear_integral(dx, self.qs[k], qx)
        } else {
            dx * (self.qs[k] + qx) * T::lit(0.5)
        };
        table[k] + partial
    }
}

/// `∫ |q|` over a segment of length `dx` on which `q` is linear from `q0` to `q1`.
fn abs_linear_integral<T: Real>(dx: T, q0: T, q1: T) -> T {
    let half = T::lit(0.5);
    if q0 * q1 >= T::zero() {
        return dx * (q0.abs() + q1.abs()) * half;
    }
    let root = dx * q0.abs() / (q0.abs() + q1.abs());
    half * (root * q0.abs() + (dx - root) * q1.abs())
}

fn check_finite<T: Real>(values: &[T]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidParameter(format!("non-finite parameter {v}"))),
        None => Ok(()),
    }
}

/// Build a catalog potential from its kind and parameter list.
///
/// | kind           | params                                    |
/// |----------------|-------------------------------------------|
/// | `zero`         | none                                      |
/// | `constant_box` | height `c`, width `L`                     |
/// | `exponential`  | height `c`, rate `a`                      |
/// | `sech2`        | `κ`, centre `x₀`                          |
/// | `bump_train`   | height `c`, duty `d`, optional truncation |
pub fn make_catalog_potential<T: Real>(kind: PotentialKind, params: &[T]) -> Result<Potential<T>> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{kind} expects {n} parameters, got {}",
                params.len()
            )))
        }
    };
    match kind {
        PotentialKind::Zero => {
            want(0)?;
            Ok(Potential::zero())
        }
        PotentialKind::ConstantBox => {
            want(2)?;
            Potential::constant_box(params[0], params[1])
        }
        PotentialKind::Exponential => {
            want(2)?;
            Potential::exponential(params[0], params[1])
        }
        PotentialKind::Sech2 => {
            want(2)?;
            Potential::sech2(params[0], params[1])
        }
        PotentialKind::BumpTrain => match params.len() {
            2 => Potential::bump_train(params[0], params[1]),
            3 => Potential::bump_train_truncated(params[0], params[1], params[2]),
            n => Err(Error::InvalidParameter(format!(
                "bump_train expects 2 or 3 parameters, got {n}"
            ))),
        },
        PotentialKind::Sampled => Err(Error::InvalidParameter(
            "sampled potentials are built from data, not parameters".into(),
        )),
    }
}

pub fn load_sampled_potential<T: Real>(rows: &[(T, T)]) -> Result<Potential<T>> {
    Potential::from_samples(rows)
}

/// L¹ norm and the two windowed norms.
///
/// Window positions are swept at `min(window_grid_step, sample spacing)/4`,
/// plus every position that puts a window edge on a breakpoint.
pub fn compute_norms<T: Real>(p: &Potential<T>, window_grid_step: T) -> Result<PotentialNorms<T>> {
    if !(window_grid_step > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "window grid step must be positive, got {window_grid_step}"
        )));
    }
    let l1 = if p.has_infinite_mass() {
        L1Norm::Infinite
    } else {
        let breaks = p.breakpoints();
        let body = quad::integrate_piecewise(
            &|x| p.eval(x).abs(),
            T::zero(),
            p.x_max(),
            &breaks,
            T::lit(1e-13),
        );
        L1Norm::Finite(body + p.tail_abs_mass())
    };

    let step = p
        .sample_spacing()
        .map_or(window_grid_step, |s| s.min(window_grid_step))
        / T::lit(4.0);
    let windowed = sweep_window(p, T::one(), T::one(), step);
    // ∫_γ^{γ+1} |q(s/2)| ds = 2 ∫_{γ/2}^{γ/2+1/2} |q|
    let windowed_scaled = sweep_window(p, T::lit(0.5), T::lit(2.0), step);
    Ok(PotentialNorms {
        l1,
        windowed,
        windowed_scaled,
    })
}

/// `sup_{x ≥ 0} scale · ∫_x^{x+len} |q|` over the truncated potential.
fn sweep_window<T: Real>(p: &Potential<T>, len: T, scale: T, step: T) -> T {
    let mass = |x: T| p.truncated_abs_antiderivative(x + len) - p.truncated_abs_antiderivative(x);
    let mut best = mass(T::zero());
    let end = p.x_max();
    let mut k = 0usize;
    loop {
        let x = T::from_index(k) * step;
        if x > end {
            break;
        }
        best = best.max(mass(x));
        k += 1;
    }
    for b in p.breakpoints() {
        for x in [b, b - len] {
            if x >= T::zero() {
                best = best.max(mass(x));
            }
        }
    }
    scale * best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential() {
        let p = Potential::<f64>::zero();
        assert_eq!(p.eval(0.3), 0.0);
        let n = compute_norms(&p, 0.01).unwrap();
        assert_eq!(n.l1, L1Norm::Finite(0.0));
        assert_eq!(n.windowed, 0.0);
        assert_eq!(n.windowed_scaled, 0.0);
    }

    #[test]
    fn box_values_and_norms() {
        let p = Potential::<f64>::constant_box(1.0, 1.0).unwrap();
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(1.5), 0.0);
        assert_eq!(p.eval(1.0), 0.5);
        let n = compute_norms(&p, 0.01).unwrap();
        assert!((n.l1.finite().unwrap() - 1.0).abs() < 1e-10);
        assert!((n.windowed - 1.0).abs() < 1e-10);
        assert!((n.windowed_scaled - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bump_train_norms() {
        let p = Potential::<f64>::bump_train(1.0, 0.5).unwrap();
        let n = compute_norms(&p, 0.01).unwrap();
        assert_eq!(n.l1, L1Norm::Infinite);
        assert!((n.windowed - 0.5).abs() < 1e-12);
        // Half-unit x-windows hold at most one half bump of mass 0.5; doubled.
        assert!((n.windowed_scaled - 1.0).abs() < 1e-12);
        assert_eq!(p.eval(0.25), 1.0);
        assert_eq!(p.eval(0.75), 0.0);
        assert_eq!(p.eval(1.5), 0.5);
    }

    #[test]
    fn bump_train_antiderivative_counts_periods() {
        let p = Potential::<f64>::bump_train(2.0, 0.25).unwrap();
        assert!((p.antiderivative(3.1) - 2.0 * (0.75 + 0.1)).abs() < 1e-14);
    }

    #[test]
    fn exponential_and_sech2_closed_forms() {
        let p = Potential::<f64>::exponential(1.0, 1.0).unwrap();
        let n = compute_norms(&p, 0.01).unwrap();
        assert!((n.l1.finite().unwrap() - 1.0).abs() < 1e-8);
        assert!((n.windowed - (1.0 - (-1.0f64).exp())).abs() < 1e-8);
        assert!((n.windowed_scaled - 2.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-8);
        assert!(p.x_max() > 27.0);

        let s = Potential::<f64>::sech2(1.0, 0.0).unwrap();
        let n = compute_norms(&s, 0.01).unwrap();
        assert!((n.l1.finite().unwrap() - 2.0).abs() < 1e-8);
        assert!((n.windowed - 2.0 * 1f64.tanh()).abs() < 1e-8);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let catalog: Vec<Potential<f64>> = vec![
            Potential::<f64>::exponential(-1.5, 0.7).unwrap(),
            Potential::<f64>::sech2(1.3, 0.8).unwrap(),
            Potential::<f64>::constant_box(2.0, 0.6).unwrap(),
        ];
        for p in &catalog {
            for &x in &[0.0, 0.3, 1.7, 4.0] {
                let q = quad::integrate_piecewise(&|s| p.eval(s), 0.0, x, &p.breakpoints(), 1e-13);
                assert!((q - p.antiderivative(x)).abs() < 1e-10, "{} at {x}", p.kind());
            }
        }
    }

    #[test]
    fn sampled_loader() {
        let p = Potential::<f64>::from_samples(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(p.eval(0.5), 0.0);
        let p = Potential::<f64>::from_samples(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(p.eval(0.5), 1.0);
        assert!((compute_norms(&p, 0.01).unwrap().l1.finite().unwrap() - 1.0).abs() < 1e-12);
        let p = Potential::<f64>::from_samples(&[(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)]).unwrap();
        assert_eq!(p.x_max(), 2.0);
        assert!((compute_norms(&p, 0.01).unwrap().l1.finite().unwrap() - 2.0).abs() < 1e-12);
        assert!((p.eval(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_abs_mass_through_sign_change() {
        let p = Potential::<f64>::from_samples(&[(0.0, -1.0), (2.0, 1.0)]).unwrap();
        assert!((p.abs_antiderivative(2.0) - 1.0).abs() < 1e-15);
        assert!(p.antiderivative(2.0).abs() < 1e-15);
        assert!((p.abs_antiderivative(0.5) - 0.5 * (1.0 + 0.5) * 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_loader_errors() {
        assert!(matches!(Potential::<f64>::from_samples(&[]), Err(Error::EmptyInput)));
        assert!(matches!(
            Potential::<f64>::from_samples(&[(0.0, 1.0), (1.0, 1.0), (1.0, 2.0)]),
            Err(Error::NonMonotone { row: 2 })
        ));
        assert!(Potential::<f64>::from_samples(&[(0.5, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn catalog_parameter_validation() {
        assert!(make_catalog_potential::<f64>(PotentialKind::ConstantBox, &[1.0, 0.0]).is_err());
        assert!(make_catalog_potential::<f64>(PotentialKind::Exponential, &[1.0, -1.0]).is_err());
        assert!(make_catalog_potential::<f64>(PotentialKind::BumpTrain, &[1.0, 1.5]).is_err());
        assert!(make_catalog_potential::<f64>(PotentialKind::Sech2, &[0.0, 1.0]).is_err());
        assert!(make_catalog_potential::<f64>(PotentialKind::Zero, &[1.0]).is_err());
        assert!("nonsense".parse::<PotentialKind>().is_err());
        let p = make_catalog_potential::<f64>("bump_train".parse().unwrap(), &[1.0, 0.5, 10.0]).unwrap();
        assert_eq!(p.x_max(), 10.0);
    }

    #[test]
    fn windowed_not_increased_by_truncation() {
        let rows: Vec<(f64, f64)> = (0..=300)
            .map(|i| {
                let x = i as f64 * 0.01;
                (x, (3.0 * x).sin().abs() * (1.0 + x))
            })
            .collect();
        let full = Potential::<f64>::from_samples(&rows).unwrap();
        let cut = Potential::<f64>::from_samples(&rows[..150]).unwrap();
        let nf = compute_norms(&full, 0.01).unwrap();
        let nc = compute_norms(&cut, 0.01).unwrap();
        assert!(nc.windowed <= nf.windowed + 1e-12);
        assert!(nf.windowed <= nf.l1.finite().unwrap() + 1e-12);
        assert!(nf.windowed_scaled <= 2.0 * nf.windowed * (1.0 + 1e-6));
    }

    #[test]
    fn f32_catalog_evaluates() {
        let p = Potential::<f32>::constant_box(1.0, 1.0).unwrap();
        let n = compute_norms(&p, 0.01).unwrap();
        assert!((n.windowed - 1.0).abs() < 1e-5);
    }
}
