//! One-dimensional shape-function families on the reference interval [-1, 1].
//!
//! Two families are provided: Lagrange interpolants on Gauss-Lobatto-Legendre
//! or Gauss-Lobatto-Chebyshev nodes (spectral elements) and integrated-Legendre
//! modes (hierarchic p-elements). Both use the index layout
//! `[left vertex, interior..., right vertex]`, zero-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Highest supported polynomial order.
pub const MAX_ORDER: usize = 12;

const NEWTON_MAX_ITER: usize = 100;

/// Lobatto-type node families for Lagrange bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeDistribution {
    Gll,
    Glc,
}

/// Shape-function family of a one-dimensional basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Lagrange(NodeDistribution),
    Hierarchic,
}

impl BasisFamily {
    pub fn is_lagrange(self) -> bool {
        matches!(self, BasisFamily::Lagrange(_))
    }
}

fn check_x<T: Real>(x: T) -> Result<()> {
    if x.abs() > T::one() + T::lit(1e-12) || x.is_nan() {
        return Err(Error::Argument(format!("abscissa {x} outside [-1, 1]")));
    }
    Ok(())
}

/// Fills `vals[k] = L_k(x)` and `ders[k] = L'_k(x)` for `k = 0..vals.len()`.
pub(crate) fn legendre_table<T: Real>(x: T, vals: &mut [T], ders: &mut [T]) {
    let n = vals.len();
    if n == 0 {
        return;
    }
    vals[0] = T::one();
    ders[0] = T::zero();
    if n == 1 {
        return;
    }
    vals[1] = x;
    ders[1] = T::one();
    for k in 1..n - 1 {
        let kf = T::of(k);
        let two_k1 = T::of(2 * k + 1);
        vals[k + 1] = (two_k1 * x * vals[k] - kf * vals[k - 1]) / (kf + T::one());
        ders[k + 1] = ders[k - 1] + two_k1 * vals[k];
    }
}

/// Legendre polynomial `L_n` and its derivative at `x`, by Bonnet's recursion.
pub fn legendre_eval<T: Real>(n: usize, x: T) -> Result<(T, T)> {
    check_x(x)?;
    Ok(legendre_unchecked(n, x))
}

fn legendre_unchecked<T: Real>(n: usize, x: T) -> (T, T) {
    let mut vals = vec![T::zero(); n + 1];
    let mut ders = vec![T::zero(); n + 1];
    legendre_table(x, &mut vals, &mut ders);
    (vals[n], ders[n])
}

fn check_order(p: usize) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&p) {
        return Err(Error::Argument(format!(
            "polynomial order {p} outside 1..={MAX_ORDER}"
        )));
    }
    Ok(())
}

fn symmetrize<T: Real>(pts: &mut [T]) {
    let n = pts.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let m = (pts[j] - pts[i]) / T::lit(2.0);
        pts[i] = -m;
        pts[j] = m;
    }
    if n % 2 == 1 {
        pts[n / 2] = T::zero();
    }
}

/// Gauss-Lobatto-Chebyshev points `-cos(i pi / p)`, `i = 0..=p`.
pub fn glc_points<T: Real>(p: usize) -> Result<Vec<T>> {
    if p == 0 {
        return Err(Error::Argument("GLC points need p >= 1".into()));
    }
    let mut pts: Vec<T> = (0..=p)
        .map(|i| -(T::of(i) * T::PI() / T::of(p)).cos())
        .collect();
    symmetrize(&mut pts);
    pts[0] = -T::one();
    pts[p] = T::one();
    Ok(pts)
}

/// Gauss-Lobatto-Legendre points: the endpoints plus the roots of `L'_p`.
pub fn gll_points<T: Real>(p: usize) -> Result<Vec<T>> {
    let mut pts = glc_points::<T>(p)?;
    let pp1 = T::of(p * (p + 1));
    for i in 1..p {
        let mut x = pts[i];
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (l, dl) = legendre_unchecked(p, x);
            let d2l = (T::lit(2.0) * x * dl - pp1 * l) / (T::one() - x * x);
            let dx = dl / d2l;
            x = x - dx;
            if dl.abs() < T::tol() || dx.abs() < T::epsilon() * T::lit(4.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "GLL Newton iteration did not converge for p={p}, node {i}"
            )));
        }
        pts[i] = x;
    }
    symmetrize(&mut pts);
    pts[0] = -T::one();
    pts[p] = T::one();
    Ok(pts)
}

/// A one-dimensional basis of order `p` with `p + 1` functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis1D<T> {
    family: BasisFamily,
    order: usize,
    nodes: Vec<T>,
    denom: Vec<T>,
}

/// Builds a validated basis.
pub fn make_basis<T: Real>(family: BasisFamily, p: usize) -> Result<Basis1D<T>> {
    Basis1D::new(family, p)
}

impl<T: Real> Basis1D<T> {
    pub fn new(family: BasisFamily, p: usize) -> Result<Self> {
        check_order(p)?;
        let nodes = match family {
            BasisFamily::Lagrange(NodeDistribution::Gll) => gll_points(p)?,
            BasisFamily::Lagrange(NodeDistribution::Glc) => glc_points(p)?,
            BasisFamily::Hierarchic => vec![-T::one(), T::one()],
        };
        let denom = if family.is_lagrange() {
            (0..=p)
                .map(|i| {
                    (0..=p)
                        .filter(|&j| j != i)
                        .fold(T::one(), |acc, j| acc * (nodes[i] - nodes[j]))
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self { family, order: p, nodes, denom })
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Interpolation nodes (spectral) or just the endpoints (hierarchic).
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Number of functions, `p + 1`.
    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sign picked up by function `i` when the parameter is reversed
    /// (`t -> -t`) together with the index map of [`Basis1D::reversed_index`].
    pub fn reversal_sign(&self, i: usize) -> T {
        match self.family {
            BasisFamily::Lagrange(_) => T::one(),
            // function i has polynomial degree i + 1
            BasisFamily::Hierarchic => {
                if i > 0 && i < self.order && (i + 1) % 2 == 1 {
                    -T::one()
                } else {
                    T::one()
                }
            }
        }
    }

    /// Index of the function that matches function `i` after reversing the
    /// parameter direction.
    pub fn reversed_index(&self, i: usize) -> usize {
        match self.family {
            BasisFamily::Lagrange(_) => self.order - i,
            BasisFamily::Hierarchic => {
                if i == 0 {
                    self.order
                } else if i == self.order {
                    0
                } else {
                    i
                }
            }
        }
    }

    /// Value and derivative of function `i` at `x`.
    pub fn eval(&self, i: usize, x: T) -> Result<(T, T)> {
        if i > self.order {
            return Err(Error::Argument(format!(
                "basis index {i} out of range for order {}",
                self.order
            )));
        }
        check_x(x)?;
        Ok(match self.family {
            BasisFamily::Lagrange(_) => self.lagrange_one(i, x),
            BasisFamily::Hierarchic => self.hierarchic_one(i, x),
        })
    }

    /// Evaluates all `p + 1` functions at once into `vals` and `ders`.
    pub fn eval_all(&self, x: T, vals: &mut [T], ders: &mut [T]) {
        debug_assert!(vals.len() > self.order && ders.len() > self.order);
        match self.family {
            BasisFamily::Lagrange(_) => {
                for i in 0..=self.order {
                    let (v, d) = self.lagrange_one(i, x);
                    vals[i] = v;
                    ders[i] = d;
                }
            }
            BasisFamily::Hierarchic => {
                let p = self.order;
                let mut l = [T::zero(); MAX_ORDER + 1];
                let mut dl = [T::zero(); MAX_ORDER + 1];
                legendre_table(x, &mut l[..=p], &mut dl[..=p]);
                let half = T::lit(0.5);
                vals[0] = half * (T::one() - x);
                ders[0] = -half;
                vals[p] = half * (T::one() + x);
                ders[p] = half;
                for i in 1..p {
                    let deg = i + 1;
                    let s = T::of(2 * (2 * deg - 1)).sqrt();
                    vals[i] = (l[deg] - l[deg - 2]) / s;
                    ders[i] = (T::of(2 * deg - 1) / T::lit(2.0)).sqrt() * l[deg - 1];
                }
            }
        }
    }

    fn lagrange_one(&self, i: usize, x: T) -> (T, T) {
        let n = &self.nodes;
        let mut value = T::one();
        let mut deriv = T::zero();
        for (j, &nj) in n.iter().enumerate() {
            if j == i {
                continue;
            }
            // product rule accumulated alongside the running product
            deriv = deriv * (x - nj) + value;
            value = value * (x - nj);
        }
        (value / self.denom[i], deriv / self.denom[i])
    }

    fn hierarchic_one(&self, i: usize, x: T) -> (T, T) {
        let half = T::lit(0.5);
        if i == 0 {
            return (half * (T::one() - x), -half);
        }
        if i == self.order {
            return (half * (T::one() + x), half);
        }
        let deg = i + 1;
        let mut l = [T::zero(); MAX_ORDER + 1];
        let mut dl = [T::zero(); MAX_ORDER + 1];
        legendre_table(x, &mut l[..=deg], &mut dl[..=deg]);
        let s = T::of(2 * (2 * deg - 1)).sqrt();
        (
            (l[deg] - l[deg - 2]) / s,
            (T::of(2 * deg - 1) / T::lit(2.0)).sqrt() * l[deg - 1],
        )
    }
}

/// Lagrange function `i` of a spectral basis at `x`.
pub fn lagrange_eval<T: Real>(basis: &Basis1D<T>, i: usize, x: T) -> Result<(T, T)> {
    if !basis.family.is_lagrange() {
        return Err(Error::Argument("lagrange_eval needs a Lagrange basis".into()));
    }
    basis.eval(i, x)
}

/// Hierarchic function `i` of an integrated-Legendre basis at `x`.
pub fn hierarchic_eval<T: Real>(basis: &Basis1D<T>, i: usize, x: T) -> Result<(T, T)> {
    if basis.family != BasisFamily::Hierarchic {
        return Err(Error::Argument("hierarchic_eval needs a hierarchic basis".into()));
    }
    basis.eval(i, x)
}
