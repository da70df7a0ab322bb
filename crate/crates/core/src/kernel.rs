//! Goursat kernel `w(x, t)` of the wave representation, computed in
//! characteristic coordinates `ξ = t − x`, `η = t + x` from the integral
//! equation `v = Q − K v` by summing the Neumann series
//! `v = Σ (−1)ⁿ KⁿQ`.
//!
//! `Q(ξ, η) = −½ ∫_{ξ/2}^{η/2} q` and
//! `(K v)(ξ, η) = ¼ ∫_0^ξ dξ₁ ∫_ξ^η dη₁ q((η₁ − ξ₁)/2) v(ξ₁, η₁)`.
//! In these coordinates the kernel satisfies `v_ξη = −¼ q((η−ξ)/2) v` with
//! `v(η, η) = 0` and `v(0, η) = −½ ∫_0^{η/2} q`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::scalar::{ln_factorial, Real};

/// Uniform grid on the triangle `0 ≤ ξ ≤ η ≤ eta_max`; node `(i, j)` sits at
/// `(ξ, η) = (i h, j h)` with `i ≤ j ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleGrid<T> {
    eta_max: T,
    h: T,
    n: usize,
}

impl<T: Real> TriangleGrid<T> {
    pub fn new(eta_max: T, h: T) -> Result<Self> {
        if !(h > T::zero()) || !(eta_max > T::zero()) || !h.is_finite() || !eta_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs positive eta_max and h, got eta_max = {eta_max}, h = {h}"
            )));
        }
        let ratio = eta_max / h;
        let n = ratio.round();
        if (ratio - n).abs() > T::lit(1e-9) * ratio.max(T::one()) {
            return Err(Error::InvalidParameter(format!(
                "h = {h} does not divide eta_max = {eta_max}"
            )));
        }
        let n = n.to_usize().expect("grid size fits usize");
        Ok(TriangleGrid {
            eta_max: T::from_index(n) * h,
            h,
            n,
        })
    }

    /// Grid with `n` steps of size `h`.
    pub fn with_steps(n: usize, h: T) -> Result<Self> {
        Self::new(T::from_index(n) * h, h)
    }

    pub fn eta_max(&self) -> T {
        self.eta_max
    }

    pub fn h(&self) -> T {
        self.h
    }

    /// Number of steps along each axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j <= self.n);
        j * (j + 1) / 2 + i
    }

    /// Node `(i, j)` in `(x, t)` coordinates.
    pub fn node_xt(&self, i: usize, j: usize) -> (T, T) {
        let half = T::lit(0.5) * self.h;
        (T::from_index(j - i) * half, T::from_index(j + i) * half)
    }
}

/// A field on the triangle grid, such as `v` or a single Neumann term.
#[derive(Clone, Debug)]
pub struct KernelField<T> {
    pub grid: TriangleGrid<T>,
    pub v: Vec<T>,
    /// Index of the last Neumann term included (0 when only `Q` was needed).
    pub terms_used: usize,
    /// Max-norm of that last term.
    pub last_term_max: T,
}

impl<T: Real> KernelField<T> {
    fn from_values(grid: TriangleGrid<T>, v: Vec<T>) -> Self {
        let last_term_max = max_abs(&v);
        KernelField {
            grid,
            v,
            terms_used: 0,
            last_term_max,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.v[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.v)
    }

    /// Iterate `(i, j, v)` with `η` rows outermost.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..=self.grid.n).flat_map(move |j| (0..=j).map(move |i| (i, j, self.at(i, j))))
    }
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// `Q(ξ, η) = −½ ∫_{ξ/2}^{η/2} q` on every node, from a single table of
/// `∫_0^{jh/2} q` so that `Q(ξ_i, η_j) = −½ (C_j − C_i)`.
pub fn build_q<T: Real>(p: &Potential<T>, grid: TriangleGrid<T>) -> KernelField<T> {
    let half_h = T::lit(0.5) * grid.h;
    let cumulative: Vec<T> = (0..=grid.n)
        .map(|j| p.antiderivative(T::from_index(j) * half_h))
        .collect();
    let mut v = vec![T::zero(); grid.node_count()];
    for j in 0..=grid.n {
        let row = grid.index(0, j);
        for i in 0..j {
            v[row + i] = -T::lit(0.5) * (cumulative[j] - cumulative[i]);
        }
    }
    KernelField::from_values(grid, v)
}

/// The integral operator `K` bound to a potential and a grid.
///
/// Each application is `O(N²)`: for every `η₁` row the `ξ₁`-trapezoid sums
/// `G(i, η₁)` are prefix sums along the row, and the `η₁`-trapezoid over
/// `[ξ_i, η_j]` is a running sum of `G(i, ·)` down the rows.
pub struct KOperator<T> {
    grid: TriangleGrid<T>,
    /// `q(d h / 2)` for `d = 0..=n`.
    q_diag: Vec<T>,
}

impl<T: Real> KOperator<T> {
    pub fn new(p: &Potential<T>, grid: TriangleGrid<T>) -> Self {
        let half_h = T::lit(0.5) * grid.h;
        let q_diag = (0..=grid.n).map(|d| p.eval(T::from_index(d) * half_h)).collect();
        KOperator { grid, q_diag }
    }

    pub fn apply(&self, field: &KernelField<T>) -> KernelField<T> {
        assert_eq!(field.grid, self.grid, "field and operator grids differ");
        let grid = self.grid;
        let h = grid.h;
        let half = T::lit(0.5);

        // G(i, b) = ∫_0^{ξ_i} q((η_b − ξ₁)/2) v(ξ₁, η_b) dξ₁, one η row per task.
        let mut g = vec![T::zero(); grid.node_count()];
        let rows = split_rows(&mut g, grid.n);
        rows.into_par_iter().enumerate().for_each(|(b, row)| {
            let base = grid.index(0, b);
            let f = |a: usize| self.q_diag[b - a] * field.v[base + a];
            let f0 = f(0);
            let mut prefix = T::zero();
            for (a, slot) in row.iter_mut().enumerate() {
                let fa = f(a);
                prefix += fa;
                *slot = h * (prefix - half * (f0 + fa));
            }
        });

        // (Kv)(i, b) = ¼ ∫_{η_i}^{η_b} G(i, η₁) dη₁.
        let quarter_h = T::lit(0.25) * h;
        let mut out = vec![T::zero(); grid.node_count()];
        let mut running = vec![T::zero(); grid.n + 1];
        for b in 0..=grid.n {
            let base = grid.index(0, b);
            for i in 0..=b {
                let gib = g[base + i];
                running[i] += gib;
                let gii = g[grid.index(i, i)];
                out[base + i] = quarter_h * (running[i] - half * (gii + gib));
            }
        }
        KernelField::from_values(grid, out)
    }
}

fn split_rows<T>(data: &mut [T], n: usize) -> Vec<&mut [T]> {
    let mut rows = Vec::with_capacity(n + 1);
    let mut rest = data;
    for j in 0..=n {
        let (row, tail) = rest.split_at_mut(j + 1);
        rows.push(row);
        rest = tail;
    }
    rows
}

pub fn apply_k<T: Real>(p: &Potential<T>, field: &KernelField<T>) -> KernelField<T> {
    KOperator::new(p, field.grid).apply(field)
}

/// Sum `Q − KQ + K²Q − …` until a term's max-norm drops to `tol`.
pub fn neumann_solve<T: Real>(
    p: &Potential<T>,
    grid: TriangleGrid<T>,
    tol: T,
    max_terms: usize,
) -> Result<KernelField<T>> {
    neumann_solve_observed(p, grid, tol, max_terms, |_, _| {})
}

/// As [`neumann_solve`], handing every unsigned term `KⁿQ` to `observe`
/// before it is added.
pub fn neumann_solve_observed<T, F>(
    p: &Potential<T>,
    grid: TriangleGrid<T>,
    tol: T,
    max_terms: usize,
    mut observe: F,
) -> Result<KernelField<T>>
where
    T: Real,
    F: FnMut(usize, &KernelField<T>),
{
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if max_terms == 0 {
        return Err(Error::InvalidParameter("max_terms must be at least 1".into()));
    }
    let op = KOperator::new(p, grid);
    let mut term = build_q(p, grid);
    observe(0, &term);
    let mut sum = term.v.clone();
    let mut last = term.max_abs();
    if last <= tol {
        return Ok(finish(grid, sum, 0, last));
    }
    for n in 1..=max_terms {
        term = op.apply(&term);
        observe(n, &term);
        let sign = if n % 2 == 1 { -T::one() } else { T::one() };
        sum.iter_mut().zip(&term.v).for_each(|(s, t)| *s += sign * *t);
        last = term.max_abs();
        if last <= tol {
            return Ok(finish(grid, sum, n, last));
        }
    }
    Err(Error::NoConvergence {
        terms: max_terms,
        last_term_max: last.as_f64(),
        tol: tol.as_f64(),
    })
}

fn finish<T: Real>(grid: TriangleGrid<T>, v: Vec<T>, terms_used: usize, last: T) -> KernelField<T> {
    KernelField {
        grid,
        v,
        terms_used,
        last_term_max: last,
    }
}

/// `w(x, t) = v(t − x, t + x)`, bilinear in `(ξ, η)`; exactly 0 for `x > t`.
pub fn eval_w<T: Real>(field: &KernelField<T>, x: T, t: T) -> Result<T> {
    if x > t {
        return Ok(T::zero());
    }
    if x < T::zero() {
        return Err(Error::InvalidParameter(format!("x must be non-negative, got {x}")));
    }
    let grid = field.grid;
    let slack = T::lit(1e-9) * grid.h;
    if t + x > grid.eta_max + slack {
        return Err(Error::OutOfDomain {
            x: x.as_f64(),
            t: t.as_f64(),
            eta_max: grid.eta_max.as_f64(),
        });
    }
    let fi = snap((t - x) / grid.h);
    let fj = snap(((t + x) / grid.h).min(T::from_index(grid.n)));
    let n = grid.n;
    let i0 = fi.floor().to_usize().unwrap_or(0).min(n.saturating_sub(1));
    let j0 = fj.floor().to_usize().unwrap_or(0).min(n.saturating_sub(1));
    let a = fi - T::from_index(i0);
    let b = fj - T::from_index(j0);
    // Nodes below the diagonal are outside the triangle; v vanishes on the
    // diagonal, so they are taken as 0.
    let node = |i: usize, j: usize| if i <= j { field.at(i, j) } else { T::zero() };
    let one = T::one();
    Ok((one - a) * (one - b) * node(i0, j0)
        + a * (one - b) * node(i0 + 1, j0)
        + (one - a) * b * node(i0, j0 + 1)
        + a * b * node(i0 + 1, j0 + 1))
}

fn snap<T: Real>(f: T) -> T {
    let r = f.round();
    if (f - r).abs() < T::lit(1e-9) {
        r
    } else {
        f
    }
}

/// Induction bound on a single Neumann term:
/// `|KⁿQ(ξ, η)| ≤ (‖q̃‖/4)^{n+1} ξⁿ/n! (η + n + 1)^{n+1}/(n + 1)!`,
/// evaluated in log space.
pub fn term_bound<T: Real>(n: usize, xi: T, eta: T, q_tilde_norm: T) -> T {
    if q_tilde_norm <= T::zero() || (n > 0 && xi <= T::zero()) {
        return T::zero();
    }
    let n1 = T::from_index(n + 1);
    let mut ln = n1 * (q_tilde_norm / T::lit(4.0)).ln()
        + n1 * (eta + n1).ln()
        - ln_factorial::<T>(n)
        - ln_factorial::<T>(n + 1);
    if n > 0 {
        ln += T::from_index(n) * xi.ln();
    }
    ln.exp()
}
