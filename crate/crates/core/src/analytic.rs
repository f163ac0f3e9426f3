//! Exact solutions: equilibrated polynomial displacement fields of arbitrary
//! order, the constant and linear bending-moment beam fields, and the
//! infinite plate with a circular hole under uniaxial tension.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::elasticity::{material_matrix, Material};
use crate::error::{Error, Result};

/// Highest polynomial order accepted by [`admissible_poly_field`].
pub const MAX_FIELD_ORDER: usize = 8;

/// Scalar type for the coefficient closure: `f64` or exact rationals.
pub trait ClosureScalar: Clone + Num + Signed + FromPrimitive + PartialOrd + Debug {
    /// Whether a pivot counts as zero relative to the column scale.
    fn negligible(&self, scale: &Self) -> bool;
}

impl ClosureScalar for f64 {
    fn negligible(&self, scale: &Self) -> bool {
        self.abs() <= 1e-12 * scale.max(1.0)
    }
}

impl ClosureScalar for f32 {
    fn negligible(&self, scale: &Self) -> bool {
        self.abs() <= 1e-5 * scale.max(1.0)
    }
}

impl ClosureScalar for BigRational {
    fn negligible(&self, _scale: &Self) -> bool {
        self.is_zero()
    }
}

/// Number of monomials of a complete polynomial of order `p`.
pub fn monomial_count(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Zero-based position of `x^m y^n` in Pascal's triangle, read row by row
/// and left to right.
pub fn pascal_index(m: usize, n: usize) -> usize {
    let d = m + n;
    d * (d + 1) / 2 + n
}

/// Exponents of the monomial at zero-based position `k`.
pub fn pascal_exponents(k: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    let n = k - d * (d + 1) / 2;
    (d - n, n)
}

fn int<T: ClosureScalar>(v: usize) -> T {
    T::from_usize(v).expect("small integer representable")
}

/// Gaussian elimination with partial pivoting; `a` is row-major `n × n`.
fn solve_dense<T: ClosureScalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        let mut scale = T::zero();
        for r in col..n {
            let v = a[r][col].abs();
            if v > scale {
                scale = v;
                piv = r;
            }
        }
        let col_scale = (0..n).map(|r| a[r][col].abs()).fold(T::zero(), |m, v| if v > m { v } else { m });
        if a[piv][col].negligible(&col_scale) {
            return Err(Error::Numerical(format!("singular closure system at column {col}")));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                let v = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - v;
            }
            let v = f * b[col].clone();
            b[r] = b[r].clone() - v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for c in r + 1..n {
            s = s - a[r][c].clone() * x[c].clone();
        }
        x[r] = s / a[r][r].clone();
    }
    Ok(x)
}

/// Mixed coefficients of degree `d` that make the field equilibrated when all
/// pure-power coefficients are set to their one-based Pascal position.
///
/// Returns `(k, a_k, b_k)` with zero-based `k`, ordered by `k`. The block
/// only involves degree-`d` terms, so fields of every order share it.
pub fn closure_block<T: ClosureScalar>(d: usize, nu: &T) -> Result<Vec<(usize, T, T)>> {
    if d < 2 {
        return Ok(Vec::new());
    }
    // unknowns: a then b for x^m y^n, m = d-1 .. 1
    let mixed: Vec<usize> = (1..d).collect(); // n values
    let nm = mixed.len();
    let unknown = |n: usize| mixed.iter().position(|&v| v == n);
    let two = int::<T>(2);
    let c_shear = (T::one() - nu.clone()) / two.clone();
    let c_mix = (T::one() + nu.clone()) / two;

    let mut rows = Vec::with_capacity(2 * nm);
    let mut rhs = Vec::with_capacity(2 * nm);
    // coefficient of x^m y^n (m + n = d - 2) in both equilibrium equations
    for n in 0..d - 1 {
        let m = d - 2 - n;
        for comp in 0..2 {
            let mut row = vec![T::zero(); 2 * nm];
            let mut r = T::zero();
            // (term's own component, x-exponent, y-exponent, factor)
            let terms: [(usize, usize, usize, T); 3] = if comp == 0 {
                [
                    (0, m + 2, n, int::<T>((m + 2) * (m + 1))),
                    (0, m, n + 2, c_shear.clone() * int::<T>((n + 2) * (n + 1))),
                    (1, m + 1, n + 1, c_mix.clone() * int::<T>((m + 1) * (n + 1))),
                ]
            } else {
                [
                    (1, m, n + 2, int::<T>((n + 2) * (n + 1))),
                    (1, m + 2, n, c_shear.clone() * int::<T>((m + 2) * (m + 1))),
                    (0, m + 1, n + 1, c_mix.clone() * int::<T>((m + 1) * (n + 1))),
                ]
            };
            for (c, tm, tn, f) in terms {
                match unknown(tn).filter(|_| tm > 0) {
                    Some(j) => {
                        let col = c * nm + j;
                        row[col] = row[col].clone() + f;
                    }
                    None => {
                        let fixed = int::<T>(pascal_index(tm, tn) + 1);
                        r = r - f * fixed;
                    }
                }
            }
            rows.push(row);
            rhs.push(r);
        }
    }
    let x = solve_dense(rows, rhs)
        .map_err(|_| Error::Numerical(format!("equilibrium closure of degree {d} is singular for nu = {nu:?}")))?;
    let mut out: Vec<(usize, T, T)> = mixed
        .iter()
        .enumerate()
        .map(|(j, &n)| (pascal_index(d - n, n), x[j].clone(), x[nm + j].clone()))
        .collect();
    out.sort_by_key(|t| t.0);
    Ok(out)
}

/// Coefficients `(a, b)` of the admissible field of order `p`.
pub fn admissible_coefficients<T: ClosureScalar>(p: usize, nu: &T) -> Result<(Vec<T>, Vec<T>)> {
    if !(1..=MAX_FIELD_ORDER).contains(&p) {
        return Err(Error::Argument(format!("field order {p} outside 1..={MAX_FIELD_ORDER}")));
    }
    let np = monomial_count(p);
    let mut a: Vec<T> = (1..=np).map(int::<T>).collect();
    let mut b = a.clone();
    for d in 2..=p {
        for (k, ak, bk) in closure_block(d, nu)? {
            a[k] = ak;
            b[k] = bk;
        }
    }
    Ok((a, b))
}

/// Values of a displacement field and its strain and stress at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub u: [f64; 2],
    /// (εx, εy, γxy)
    pub strain: [f64; 3],
    /// (σx, σy, τxy)
    pub stress: [f64; 3],
}

/// Complete polynomial displacement field `u = Σ a_k P_k`, `v = Σ b_k P_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialField2D {
    pub order: usize,
    /// Poisson's ratio the coefficients were closed for.
    pub nu: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Equilibrated polynomial field of order `p` for Poisson's ratio `nu`.
pub fn admissible_poly_field(p: usize, nu: f64) -> Result<PolynomialField2D> {
    let (a, b) = admissible_coefficients(p, &nu)?;
    Ok(PolynomialField2D { order: p, nu, a, b })
}

fn powers(x: f64, p: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(p + 1);
    let mut t = 1.0;
    for _ in 0..=p {
        v.push(t);
        t *= x;
    }
    v
}

impl PolynomialField2D {
    pub fn new(order: usize, nu: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let np = monomial_count(order);
        if a.len() != np || b.len() != np {
            return Err(Error::Argument(format!(
                "order {order} needs {np} coefficients, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(Self { order, nu, a, b })
    }

    /// Displacement and exact derivatives `(u, ∂u/∂x, ∂u/∂y)` per component.
    fn derivatives(&self, x: f64, y: f64) -> [[f64; 3]; 2] {
        let p = self.order;
        let (px, py) = (powers(x, p), powers(y, p));
        let mut out = [[0.0; 3]; 2];
        for k in 0..self.a.len() {
            let (m, n) = pascal_exponents(k);
            let v = px[m] * py[n];
            let dx = if m > 0 { m as f64 * px[m - 1] * py[n] } else { 0.0 };
            let dy = if n > 0 { n as f64 * px[m] * py[n - 1] } else { 0.0 };
            for (c, coef) in [self.a[k], self.b[k]].into_iter().enumerate() {
                out[c][0] += coef * v;
                out[c][1] += coef * dx;
                out[c][2] += coef * dy;
            }
        }
        out
    }

    pub fn displacement(&self, x: f64, y: f64) -> [f64; 2] {
        let d = self.derivatives(x, y);
        [d[0][0], d[1][0]]
    }

    /// Displacement, strain and `σ = D ε` for material `m`.
    pub fn eval(&self, m: &Material, x: f64, y: f64) -> FieldSample {
        let d = self.derivatives(x, y);
        let strain = [d[0][1], d[1][2], d[0][2] + d[1][1]];
        FieldSample { u: [d[0][0], d[1][0]], strain, stress: apply_d(m, strain) }
    }
}

fn apply_d(m: &Material, e: [f64; 3]) -> [f64; 3] {
    let d = material_matrix(m);
    std::array::from_fn(|r| d[r][0] * e[0] + d[r][1] * e[1] + d[r][2] * e[2])
}

/// Exact displacement, and stress where known, of a benchmark problem.
pub trait AnalyticField: Sync {
    fn displacement(&self, p: [f64; 2]) -> [f64; 2];

    /// `None` when no closed-form stress is available.
    fn stress(&self, p: [f64; 2]) -> Option<[f64; 3]>;
}

/// A polynomial field together with the material that turns it into stresses.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyProblem {
    pub field: PolynomialField2D,
    pub material: Material,
}

impl AnalyticField for PolyProblem {
    fn displacement(&self, p: [f64; 2]) -> [f64; 2] {
        self.field.displacement(p[0], p[1])
    }

    fn stress(&self, p: [f64; 2]) -> Option<[f64; 3]> {
        Some(self.field.eval(&self.material, p[0], p[1]).stress)
    }
}

/// Which beam bending problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamVariant {
    /// Constant bending moment, quadratic displacements.
    QuadraticBending,
    /// Linearly varying bending moment, cubic displacements.
    CubicBending,
}

/// Beam of length `l` along x and depth `c` along y, `0 ≤ x ≤ l`, `0 ≤ y ≤ c`.
///
/// The cubic variant is in equilibrium only for ν = 0.3, the value its load
/// amplitudes were chosen for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamField {
    pub variant: BeamVariant,
    pub l: f64,
    pub c: f64,
    pub material: Material,
}

impl BeamField {
    pub fn new(variant: BeamVariant, l: f64, c: f64, material: Material) -> Self {
        Self { variant, l, c, material }
    }

    /// `L = 10`, `c = 2`.
    pub fn standard(variant: BeamVariant, material: Material) -> Self {
        Self::new(variant, 10.0, 2.0, material)
    }

    pub fn displacement(&self, x: f64, y: f64) -> [f64; 2] {
        let (l, c, e, nu) = (self.l, self.c, self.material.e, self.material.nu);
        match self.variant {
            BeamVariant::QuadraticBending => [
                (240.0 / c * x * y - 120.0 * x) / e,
                (-120.0 / c * x * x - 120.0 * nu / c * y * y + 120.0 * nu * y) / e,
            ],
            BeamVariant::CubicBending => {
                let cl = c * l;
                [
                    (120.0 / cl * x * x * y - 92.0 / cl * y.powi(3) - 60.0 / l * x * x - 240.0 / c * x * y
                        + 138.0 / l * y * y
                        + 120.0 * x
                        - 46.0 * c / l * y)
                        / e,
                    (-40.0 / cl * x.powi(3) - 120.0 * nu / cl * x * y * y + 120.0 / c * x * x + 120.0 * nu / l * x * y
                        + 120.0 * nu / c * y * y
                        + 46.0 * c / l * x
                        - 120.0 * nu * y)
                        / e,
                ]
            }
        }
    }

    /// Strain from the exact derivatives of [`Self::displacement`].
    pub fn strain(&self, x: f64, y: f64) -> [f64; 3] {
        let (l, c, e, nu) = (self.l, self.c, self.material.e, self.material.nu);
        match self.variant {
            BeamVariant::QuadraticBending => {
                let ex = (240.0 / c * y - 120.0) / e;
                [ex, -nu * ex, 0.0]
            }
            BeamVariant::CubicBending => {
                let cl = c * l;
                let ex = (240.0 / cl * x * y - 120.0 / l * x - 240.0 / c * y + 120.0) / e;
                let dudy = (120.0 / cl * x * x - 276.0 / cl * y * y - 240.0 / c * x + 276.0 / l * y - 46.0 * c / l) / e;
                let dvdx =
                    (-120.0 / cl * x * x - 120.0 * nu / cl * y * y + 240.0 / c * x + 120.0 * nu / l * y + 46.0 * c / l) / e;
                [ex, -nu * ex, dudy + dvdx]
            }
        }
    }

    /// The closed-form stresses.
    pub fn stress(&self, x: f64, y: f64) -> [f64; 3] {
        let (l, c, nu) = (self.l, self.c, self.material.nu);
        match self.variant {
            BeamVariant::QuadraticBending => [240.0 / c * y - 120.0, 0.0, 0.0],
            BeamVariant::CubicBending => {
                let k = 138.0 + 60.0 * nu;
                [
                    240.0 / (c * l) * x * y - 120.0 / l * x - 240.0 / c * y + 120.0,
                    0.0,
                    (-k / (c * l) * y * y + k / l * y) / (1.0 + nu),
                ]
            }
        }
    }
}

impl AnalyticField for BeamField {
    fn displacement(&self, p: [f64; 2]) -> [f64; 2] {
        BeamField::displacement(self, p[0], p[1])
    }

    fn stress(&self, p: [f64; 2]) -> Option<[f64; 3]> {
        Some(BeamField::stress(self, p[0], p[1]))
    }
}

/// Infinite plate with a circular hole of radius `a` centred at the origin,
/// remote stress `sigma0` along x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleProblem {
    pub sigma0: f64,
    pub a: f64,
    pub material: Material,
}

impl HoleProblem {
    pub fn new(sigma0: f64, a: f64, material: Material) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Argument(format!("hole radius must be positive, got {a}")));
        }
        material.validate()?;
        Ok(Self { sigma0, a, material })
    }

    /// Displacement at `(x, y)`; points inside the hole are rejected.
    pub fn displacement(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let r = x.hypot(y);
        let a = self.a;
        if r < a - 1e-12 {
            return Err(Error::Domain(format!("point ({x}, {y}) lies inside the hole of radius {a}")));
        }
        let th = y.atan2(x);
        let k = self.material.kolosov();
        let g = self.material.shear_modulus();
        let s = self.sigma0 * a / (8.0 * g);
        let (ra, ar, ar3) = (r / a, a / r, (a / r).powi(3));
        let (c1, c3, s1, s3) = (th.cos(), (3.0 * th).cos(), th.sin(), (3.0 * th).sin());
        Ok([
            s * (ra * (k + 1.0) * c1 + 2.0 * ar * ((1.0 + k) * c1 + c3) - 2.0 * ar3 * c3),
            s * (ra * (k - 3.0) * s1 + 2.0 * ar * ((1.0 - k) * s1 + s3) - 2.0 * ar3 * s3),
        ])
    }
}

impl AnalyticField for HoleProblem {
    fn displacement(&self, p: [f64; 2]) -> [f64; 2] {
        // callers keep meshes outside the hole; clamp onto the rim otherwise
        HoleProblem::displacement(self, p[0], p[1]).unwrap_or_else(|_| {
            let r = p[0].hypot(p[1]).max(f64::MIN_POSITIVE);
            HoleProblem::displacement(self, p[0] * self.a / r, p[1] * self.a / r).expect("point on rim")
        })
    }

    fn stress(&self, _p: [f64; 2]) -> Option<[f64; 3]> {
        None
    }
}

/// Finite-difference step for a model of bounding-box size `size`.
pub fn fd_step(size: f64) -> f64 {
    1e-5 * size
}

/// Largest `|div σ|` component over `points`, by central differences with step `h`.
pub fn divergence_residual(stress: &dyn Fn([f64; 2]) -> [f64; 3], points: &[[f64; 2]], h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for &[x, y] in points {
        let (sxp, sxm) = (stress([x + h, y]), stress([x - h, y]));
        let (syp, sym) = (stress([x, y + h]), stress([x, y - h]));
        let rx = (sxp[0] - sxm[0] + syp[2] - sym[2]) / (2.0 * h);
        let ry = (sxp[2] - sxm[2] + syp[1] - sym[1]) / (2.0 * h);
        worst = worst.max(rx.abs()).max(ry.abs());
    }
    worst
}

/// Residual of [`divergence_residual`] divided by the largest stress
/// component over the same points (0 for a stress-free field).
pub fn relative_divergence_residual(stress: &dyn Fn([f64; 2]) -> [f64; 3], points: &[[f64; 2]], h: f64) -> f64 {
    let smax = points
        .iter()
        .flat_map(|&p| stress(p))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let r = divergence_residual(stress, points, h);
    if smax == 0.0 {
        r
    } else {
        r / smax
    }
}

/// Admissibility threshold on [`relative_divergence_residual`].
pub const ADMISSIBILITY_LIMIT: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::PlaneState;

    #[test]
    fn pascal_numbering() {
        assert_eq!(pascal_index(0, 0), 0);
        assert_eq!(pascal_index(1, 1), 4);
        assert_eq!(pascal_index(6, 2) + 1, 39);
        for k in 0..45 {
            let (m, n) = pascal_exponents(k);
            assert_eq!(pascal_index(m, n), k);
        }
    }

    #[test]
    fn linear_field_untouched() {
        let f = admissible_poly_field(1, 0.3).unwrap();
        assert_eq!(f.a, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.b, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn degree_three_singular_without_contraction() {
        assert!(closure_block(3, &0.0f64).is_err());
        assert!(closure_block(4, &0.0f64).is_ok());
    }

    #[test]
    fn hole_rim_and_symmetry() {
        let m = Material::new(1.0, 0.3, PlaneState::PlaneStress).unwrap();
        let h = HoleProblem::new(1.0, 1.0, m).unwrap();
        let u = h.displacement(1.0, 0.0).unwrap();
        let want = 3.0 * (m.kolosov() + 1.0) / (8.0 * m.shear_modulus());
        assert!((u[0] - want).abs() < 1e-14 && u[1] == 0.0);
        assert!(h.displacement(0.5, 0.0).is_err());
    }
}
