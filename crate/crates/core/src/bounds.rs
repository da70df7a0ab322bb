//! Numerical checkers for the kernel estimates: the Goursat bound, the L¹
//! and windowed bounds on `|w|`, the per-term induction bound, the weighted
//! window inequality used to prove it, and the Herglotz sign of `m`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{neumann_solve_observed, term_bound, KernelField, TriangleGrid};
use crate::potential::{Potential, PotentialNorms};
use crate::scalar::{ln_factorial, Real};
use crate::spectral::MValue;

/// Relative slack on every inequality.
pub const BOUND_SLACK: f64 = 1e-6;
/// `Im m` below this is a Herglotz violation.
pub const HERGLOTZ_FLOOR: f64 = -1e-10;
/// Violations listed per report; later ones are dropped.
const MAX_LISTED: usize = 100;

/// `½ A e^{(s − x) A / 4}` with `A = ∫_0^{(s+x)/2} |q|`.
pub fn gursa_bound<T: Real>(p: &Potential<T>, x: T, s: T) -> T {
    let mass = p.abs_antiderivative(T::lit(0.5) * (s + x));
    T::lit(0.5) * mass * (T::lit(0.25) * (s - x) * mass).exp()
}

/// `½ ‖q‖_{L¹} e^{‖q‖_{L¹}(t − x)/4}`.
pub fn w_bound_l1<T: Real>(norms: &PotentialNorms<T>, x: T, t: T) -> Result<T> {
    let l1 = norms.l1.finite().ok_or(Error::InfiniteNorm)?;
    Ok(T::lit(0.5) * l1 * (T::lit(0.25) * l1 * (t - x)).exp())
}

/// Windowed-class bound on `|w(x, t)|` with free parameter `κ > 0`.
pub fn w_bound_window<T: Real>(norms: &PotentialNorms<T>, x: T, t: T, kappa: T) -> T {
    let s = norms.windowed_scaled;
    if s == T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let e = T::E();
    let first = s * (x + t) / T::lit(4.0) * ((t - x) * s * kappa * half + (t + x) / kappa).exp();
    let second = s * e / (T::lit(4.0) * T::TAU().sqrt()) * ((t - x) * e * s * half).exp();
    first + second
}

/// `ln √(2π) + n ln(n/e)`, the log of the Stirling lower bound for `n!`.
pub fn ln_stirling_floor<T: Real>(n: usize) -> T {
    let half_ln_tau = T::lit(0.5) * T::TAU().ln();
    if n == 0 {
        return half_ln_tau;
    }
    let nf = T::from_index(n);
    half_ln_tau + nf * (nf.ln() - T::one())
}

/// True when `n! ≥ √(2π)(n/e)ⁿ` holds in log space.
pub fn stirling_floor_holds<T: Real>(n: usize) -> bool {
    ln_factorial::<T>(n) >= ln_stirling_floor::<T>(n)
}

/// A non-negative step function: `heights[i]` on `[edges[i], edges[i + 1])`,
/// zero before `edges[0]` and after the last edge.
#[derive(Clone, Debug)]
pub struct StepFunction<T> {
    edges: Vec<T>,
    heights: Vec<T>,
}

impl<T: Real> StepFunction<T> {
    pub fn new(edges: Vec<T>, heights: Vec<T>) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if edges.len() != heights.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} heights need {} edges, got {}",
                heights.len(),
                heights.len() + 1,
                edges.len()
            )));
        }
        if edges[0] < T::zero() {
            return Err(Error::InvalidParameter("edges must be non-negative".into()));
        }
        if let Some(row) = (1..edges.len()).find(|&i| edges[i] <= edges[i - 1]) {
            return Err(Error::NonMonotone { row });
        }
        if let Some(i) = heights.iter().position(|&c| c < T::zero() || !c.is_finite()) {
            return Err(Error::NegativeSample {
                x: edges[i].as_f64(),
                value: heights[i].as_f64(),
            });
        }
        Ok(StepFunction { edges, heights })
    }

    pub fn eval(&self, x: T) -> T {
        match self.edges.iter().rposition(|&e| e <= x) {
            Some(i) if i < self.heights.len() => self.heights[i],
            _ => T::zero(),
        }
    }

    /// `∫_0^x f`, exact.
    pub fn integral(&self, x: T) -> T {
        self.heights
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c * (x.min(e[1]) - e[0]).max(T::zero()))
            .sum()
    }

    /// `sup_x ∫_x^{x+1} f`, exact: the window mass is piecewise linear in
    /// `x` with kinks where a window end crosses an edge.
    pub fn windowed_norm(&self) -> T {
        let mass = |x: T| self.integral(x + T::one()) - self.integral(x);
        self.edges
            .iter()
            .flat_map(|&e| [e, e - T::one()])
            .filter(|&x| x >= T::zero())
            .chain(std::iter::once(T::zero()))
            .map(mass)
            .fold(T::zero(), T::max)
    }
}

/// Both sides of `∫_0^a (x + b)ⁿ f ≤ (a + b + 1)^{n+1}/(n + 1) · ‖f‖`.
///
/// The left side is a brute-force trapezoid sum with a fixed number of panels on
/// every piece of `[0, a]` between edges, so it never straddles a jump.
pub fn lemma1_check<T: Real>(f: &StepFunction<T>, a: T, b: T, n: usize) -> Result<(T, T)> {
    if a < T::zero() || b < T::zero() || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need a, b ≥ 0 and n ≥ 1, got a = {a}, b = {b}, n = {n}"
        )));
    }
    const PER_CELL: usize = 256;
    let weight = |x: T| (x + b).powi(n as i32);
    let mut cuts: Vec<T> = f.edges.iter().copied().filter(|&e| e > T::zero() && e < a).collect();
    cuts.insert(0, T::zero());
    cuts.push(a);
    let mut lhs = T::zero();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let c = f.eval(T::lit(0.5) * (lo + hi));
        if c == T::zero() {
            continue;
        }
        let dx = (hi - lo) / T::from_index(PER_CELL);
        let inner: T = (1..PER_CELL).map(|i| weight(lo + T::from_index(i) * dx)).sum();
        lhs += c * dx * (T::lit(0.5) * (weight(lo) + weight(hi)) + inner);
    }
    let n1 = T::from_index(n + 1);
    let rhs = (a + b + T::one()).powi(n as i32 + 1) / n1 * f.windowed_norm();
    Ok((lhs, rhs))
}

/// Outcome of one inequality check over a set of nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub check: String,
    pub nodes_tested: usize,
    /// Largest `lhs / rhs` seen (for the Herglotz check: largest `−Im m / |m|`).
    pub max_ratio: f64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// Node coordinates, e.g. `[x, t]`, `[n, xi, eta]` or `[Re z, Im z]`.
    pub at: Vec<f64>,
    pub value: f64,
    pub bound: f64,
}

impl BoundReport {
    fn new(check: impl Into<String>) -> Self {
        BoundReport {
            check: check.into(),
            nodes_tested: 0,
            max_ratio: 0.0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Record `value ≤ bound·(1 + slack)` at `at`.
    fn record(&mut self, at: &[f64], value: f64, bound: f64) {
        self.nodes_tested += 1;
        if value > 0.0 {
            let ratio = if bound > 0.0 { value / bound } else { f64::INFINITY };
            self.max_ratio = self.max_ratio.max(ratio);
        }
        if !(value <= bound * (1.0 + BOUND_SLACK)) && self.violations.len() < MAX_LISTED {
            self.violations.push(Violation {
                at: at.to_vec(),
                value,
                bound,
            });
        }
    }

    fn merge(&mut self, other: BoundReport) {
        self.nodes_tested += other.nodes_tested;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        let room = MAX_LISTED.saturating_sub(self.violations.len());
        self.violations.extend(other.violations.into_iter().take(room));
    }
}

/// `|w|` against `bound(x, t)` on every node of the triangle.
pub fn check_w_nodes<T: Real, B: Fn(T, T) -> T>(check: &str, field: &KernelField<T>, bound: B) -> BoundReport {
    let mut report = BoundReport::new(check);
    for (i, j, v) in field.nodes() {
        let (x, t) = field.grid.node_xt(i, j);
        report.record(&[x.as_f64(), t.as_f64()], v.abs().as_f64(), bound(x, t).as_f64());
    }
    report
}

pub fn check_gursa<T: Real>(p: &Potential<T>, field: &KernelField<T>) -> BoundReport {
    check_w_nodes("gursa_bound", field, |x, t| gursa_bound(p, x, t))
}

pub fn check_w_l1<T: Real>(norms: &PotentialNorms<T>, field: &KernelField<T>) -> Result<BoundReport> {
    let l1 = norms.l1.finite().ok_or(Error::InfiniteNorm)?;
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    Ok(check_w_nodes("w_bound_l1", field, |x, t| {
        half * l1 * (quarter * l1 * (t - x)).exp()
    }))
}

pub fn check_w_window<T: Real>(norms: &PotentialNorms<T>, field: &KernelField<T>, kappa: T) -> BoundReport {
    check_w_nodes(&format!("w_bound_window(kappa={kappa})"), field, |x, t| {
        w_bound_window(norms, x, t, kappa)
    })
}

/// Solve for the kernel while checking every unsigned term `KⁿQ` against
/// the induction bound node by node.
pub fn check_term_bounds<T: Real>(
    p: &Potential<T>,
    grid: TriangleGrid<T>,
    tol: T,
    max_terms: usize,
    q_tilde_norm: T,
) -> Result<(KernelField<T>, BoundReport)> {
    let mut report = BoundReport::new("term_bound");
    let field = neumann_solve_observed(p, grid, tol, max_terms, |n, term| {
        let mut part = BoundReport::new("term_bound");
        let h = term.grid.h();
        for (i, j, v) in term.nodes() {
            let (xi, eta) = (T::from_index(i) * h, T::from_index(j) * h);
            let bound = term_bound(n, xi, eta, q_tilde_norm);
            part.record(&[n as f64, xi.as_f64(), eta.as_f64()], v.abs().as_f64(), bound.as_f64());
        }
        report.merge(part);
    })?;
    Ok((field, report))
}

/// Flags every value with `Im m < −1e−10`. Values must have `Im z > 0`.
pub fn herglotz_check<T: Real>(values: &[MValue<T>]) -> BoundReport {
    let mut report = BoundReport::new("herglotz");
    report.max_ratio = f64::NEG_INFINITY;
    for v in values {
        let im = v.m.im.as_f64();
        report.nodes_tested += 1;
        let norm = v.m.norm().as_f64();
        if norm > 0.0 {
            report.max_ratio = report.max_ratio.max(-im / norm);
        }
        if im < HERGLOTZ_FLOOR && report.violations.len() < MAX_LISTED {
            report.violations.push(Violation {
                at: vec![v.z.re.as_f64(), v.z.im.as_f64()],
                value: im,
                bound: HERGLOTZ_FLOOR,
            });
        }
    }
    if report.nodes_tested == 0 {
        report.max_ratio = 0.0;
    }
    report
}
