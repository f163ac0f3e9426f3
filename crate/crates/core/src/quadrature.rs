//! Gauss-Legendre rules and composite rules over subdivided reference squares.

use crate::error::{Error, Result};
use crate::polybasis::legendre_table;
use crate::scalar::Real;

/// Largest supported Gauss rule.
pub const MAX_POINTS: usize = 32;

/// A one-dimensional rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over [-1, 1].
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    /// The same rule mapped affinely onto `[lo, hi]`.
    pub fn mapped(&self, lo: T, hi: T) -> QuadRule<T> {
        let half = (hi - lo) / T::lit(2.0);
        let mid = (hi + lo) / T::lit(2.0);
        QuadRule {
            points: self.points.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| w * half).collect(),
        }
    }
}

/// The `n`-point Gauss-Legendre rule.
pub fn gauss_rule<T: Real>(n: usize) -> Result<QuadRule<T>> {
    if !(1..=MAX_POINTS).contains(&n) {
        return Err(Error::Argument(format!(
            "Gauss rule size {n} outside 1..={MAX_POINTS}"
        )));
    }
    let mut vals = vec![T::zero(); n + 1];
    let mut ders = vec![T::zero(); n + 1];
    let mut points = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..n {
        // Chebyshev-like initial guess, descending; stored ascending below
        let mut x = (T::PI() * (T::of(i) + T::lit(0.75)) / (T::of(n) + T::lit(0.5))).cos();
        let mut converged = false;
        for _ in 0..100 {
            legendre_table(x, &mut vals, &mut ders);
            let dx = vals[n] / ders[n];
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!("Gauss rule n={n}: Newton failed")));
        }
        legendre_table(x, &mut vals, &mut ders);
        points[n - 1 - i] = x;
        weights[n - 1 - i] = T::lit(2.0) / ((T::one() - x * x) * ders[n] * ders[n]);
    }
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let m = (points[j] - points[i]) / T::lit(2.0);
        points[i] = -m;
        points[j] = m;
        let w = (weights[i] + weights[j]) / T::lit(2.0);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = T::zero();
    }
    Ok(QuadRule { points, weights })
}

/// Breakpoints of a tensor subdivision of the reference square.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainGrid<T> {
    xi_breaks: Vec<T>,
    eta_breaks: Vec<T>,
}

impl<T: Real> SubdomainGrid<T> {
    pub fn new(xi_breaks: Vec<T>, eta_breaks: Vec<T>) -> Result<Self> {
        for b in [&xi_breaks, &eta_breaks] {
            if b.len() < 2 || b[0] != -T::one() || b[b.len() - 1] != T::one() {
                return Err(Error::Argument("breaks must start at -1 and end at +1".into()));
            }
            if b.windows(2).any(|w| w[1] - w[0] <= T::lit(1e-12)) {
                return Err(Error::Argument("breaks must be increasing and distinct".into()));
            }
        }
        Ok(Self { xi_breaks, eta_breaks })
    }

    /// The undivided square.
    pub fn trivial() -> Self {
        Self {
            xi_breaks: vec![-T::one(), T::one()],
            eta_breaks: vec![-T::one(), T::one()],
        }
    }

    /// Builds a grid from interior breakpoints, merging near-duplicates.
    pub fn from_interior(xi: &[T], eta: &[T]) -> Result<Self> {
        let full = |inner: &[T]| {
            let mut v: Vec<T> = inner
                .iter()
                .copied()
                .filter(|&t| t > -T::one() && t < T::one())
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
            let mut out = vec![-T::one()];
            for t in v {
                if t - *out.last().unwrap() > T::lit(1e-12) {
                    out.push(t);
                }
            }
            if T::one() - *out.last().unwrap() <= T::lit(1e-12) && out.len() > 1 {
                out.pop();
            }
            out.push(T::one());
            out
        };
        Self::new(full(xi), full(eta))
    }

    pub fn xi_breaks(&self) -> &[T] {
        &self.xi_breaks
    }

    pub fn eta_breaks(&self) -> &[T] {
        &self.eta_breaks
    }

    pub fn cell_count(&self) -> usize {
        (self.xi_breaks.len() - 1) * (self.eta_breaks.len() - 1)
    }
}

/// One integration point on the reference square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint<T> {
    pub xi: T,
    pub eta: T,
    pub w: T,
}

/// A composite rule on the reference square.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedRule2D<T> {
    pub points: Vec<QuadPoint<T>>,
}

impl<T: Real> MappedRule2D<T> {
    pub fn integrate(&self, mut f: impl FnMut(T, T) -> T) -> T {
        self.points
            .iter()
            .fold(T::zero(), |acc, q| acc + q.w * f(q.xi, q.eta))
    }

    pub fn total_weight(&self) -> T {
        self.points.iter().fold(T::zero(), |acc, q| acc + q.w)
    }
}

/// Tensor Gauss rule with `n` points per direction in every grid cell.
pub fn composite_rule_2d<T: Real>(grid: &SubdomainGrid<T>, n: usize) -> Result<MappedRule2D<T>> {
    let base = gauss_rule::<T>(n)?;
    let mut points = Vec::with_capacity(grid.cell_count() * n * n);
    for ey in grid.eta_breaks.windows(2) {
        let ry = base.mapped(ey[0], ey[1]);
        for ex in grid.xi_breaks.windows(2) {
            let rx = base.mapped(ex[0], ex[1]);
            for (&eta, &wy) in ry.points.iter().zip(&ry.weights) {
                for (&xi, &wx) in rx.points.iter().zip(&rx.weights) {
                    points.push(QuadPoint { xi, eta, w: wx * wy });
                }
            }
        }
    }
    Ok(MappedRule2D { points })
}
