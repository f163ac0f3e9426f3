//! Closed forms of the 12-function bi-quadratic transition element.
//!
//! Edges E1 and E2 are split at their midpoint into two quadratic segments,
//! E3 and E4 carry a single quadratic. The formulas below are written out by
//! hand and serve as an independent oracle for [`super::build_transition`].
//!
//! Numbering (zero-based): 0..4 corners, 4..7 on E1, 7..10 on E2, 10 on E3,
//! 11 on E4.

use serde::{Deserialize, Serialize};

use super::{EdgeSpec, TransitionShapeSet};
use crate::error::Result;
use crate::polybasis::{BasisFamily, NodeDistribution};
use crate::scalar::Real;

/// Family pairing of the two sides of the transition element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwelveNodeVariant {
    /// Lagrange element coupled to two Lagrange elements.
    LaLa,
    /// Lagrange element coupled to two hierarchic elements.
    LaLe,
    /// Hierarchic element coupled to two hierarchic elements.
    LeLe,
}

#[derive(Clone, Copy)]
enum Quad1D {
    La,
    Le,
}

impl Quad1D {
    fn eval(self, i: usize, x: f64) -> f64 {
        match (self, i) {
            (Quad1D::La, 1) => 0.5 * (x * x - x),
            (Quad1D::La, 2) => 1.0 - x * x,
            (Quad1D::La, 3) => 0.5 * (x * x + x),
            (Quad1D::Le, 1) => 0.5 * (1.0 - x),
            (Quad1D::Le, 2) => 0.25 * 6f64.sqrt() * (x * x - 1.0),
            (Quad1D::Le, 3) => 0.5 * (1.0 + x),
            _ => unreachable!("quadratic index 1..=3"),
        }
    }

    fn family(self) -> BasisFamily {
        match self {
            Quad1D::La => BasisFamily::Lagrange(NodeDistribution::Gll),
            Quad1D::Le => BasisFamily::Hierarchic,
        }
    }
}

/// Hand-written evaluator for the 12 boundary functions of one variant.
#[derive(Debug, Clone, Copy)]
pub struct TwelveNodeFixture {
    variant: TwelveNodeVariant,
}

/// The closed-form oracle for `variant`.
pub fn twelve_node_fixture(variant: TwelveNodeVariant) -> TwelveNodeFixture {
    TwelveNodeFixture { variant }
}

fn n1(x: f64) -> f64 {
    0.5 * (1.0 - x)
}

fn n2(x: f64) -> f64 {
    0.5 * (1.0 + x)
}

impl TwelveNodeFixture {
    fn split(&self) -> Quad1D {
        match self.variant {
            TwelveNodeVariant::LaLa => Quad1D::La,
            _ => Quad1D::Le,
        }
    }

    fn whole(&self) -> Quad1D {
        match self.variant {
            TwelveNodeVariant::LeLe => Quad1D::Le,
            _ => Quad1D::La,
        }
    }

    /// Piecewise function `i` (1..=5) on an edge halved at 0.
    fn piecewise(&self, i: usize, t: f64) -> f64 {
        let f = self.split();
        if t <= 0.0 {
            let s = 2.0 * t + 1.0;
            match i {
                1..=3 => f.eval(i, s),
                _ => 0.0,
            }
        } else {
            let s = 2.0 * t - 1.0;
            match i {
                3..=5 => f.eval(i - 2, s),
                _ => 0.0,
            }
        }
    }

    /// Function `k` (zero-based, 0..12) at `(xi, eta)`.
    pub fn eval(&self, k: usize, xi: f64, eta: f64) -> f64 {
        let w = self.whole();
        match k {
            0 => n1(xi) * w.eval(1, eta) + n1(eta) * self.piecewise(1, xi) - n1(xi) * n1(eta),
            1 => n2(xi) * self.piecewise(1, eta) + n1(eta) * self.piecewise(5, xi) - n2(xi) * n1(eta),
            2 => n2(xi) * self.piecewise(5, eta) + n2(eta) * w.eval(3, xi) - n2(xi) * n2(eta),
            3 => n1(xi) * w.eval(3, eta) + n2(eta) * w.eval(1, xi) - n1(xi) * n2(eta),
            4..=6 => n1(eta) * self.piecewise(k - 2, xi),
            7..=9 => n2(xi) * self.piecewise(k - 5, eta),
            10 => n2(eta) * w.eval(2, xi),
            11 => n1(xi) * w.eval(2, eta),
            _ => panic!("fixture has 12 functions, index {k}"),
        }
    }

    /// Edge specs and interior of the equivalent blended element.
    pub fn edge_specs<T: Real>(&self) -> Result<[EdgeSpec<T>; 4]> {
        let split = EdgeSpec::uniform(&[-T::one(), T::zero(), T::one()], self.split().family(), 2)?;
        let whole = EdgeSpec::uniform(&[-T::one(), T::one()], self.whole().family(), 2)?;
        Ok([split.clone(), split, whole.clone(), whole])
    }

    /// The blended element with a quadratic interior of the coarse side's family.
    pub fn build<T: Real>(&self) -> Result<TransitionShapeSet<T>> {
        TransitionShapeSet::new(self.edge_specs()?, self.whole().family(), 2)
    }
}

/// 8-node serendipity functions, indexed by the fixture's node labels 1, 2, 3, 4, 6, 9, 11, 12.
pub fn serendipity(node: usize, xi: f64, eta: f64) -> f64 {
    match node {
        1 => -0.25 * (1.0 - xi) * (1.0 - eta) * (1.0 + xi + eta),
        2 => -0.25 * (1.0 + xi) * (1.0 - eta) * (1.0 - xi + eta),
        3 => -0.25 * (1.0 + xi) * (1.0 + eta) * (1.0 - xi - eta),
        4 => -0.25 * (1.0 - xi) * (1.0 + eta) * (1.0 + xi - eta),
        6 => 0.5 * (1.0 - xi * xi) * (1.0 - eta),
        9 => 0.5 * (1.0 + xi) * (1.0 - eta * eta),
        11 => 0.5 * (1.0 - xi * xi) * (1.0 + eta),
        12 => 0.5 * (1.0 - xi) * (1.0 - eta * eta),
        _ => panic!("no serendipity node {node}"),
    }
}

/// Trunk-space p-element functions, same labels as [`serendipity`].
pub fn trunk(node: usize, xi: f64, eta: f64) -> f64 {
    let m = |x: f64| 0.25 * 6f64.sqrt() * (x * x - 1.0);
    match node {
        1 => n1(xi) * n1(eta),
        2 => n2(xi) * n1(eta),
        3 => n2(xi) * n2(eta),
        4 => n1(xi) * n2(eta),
        6 => m(xi) * n1(eta),
        9 => m(eta) * n2(xi),
        11 => m(xi) * n2(eta),
        12 => m(eta) * n1(xi),
        _ => panic!("no trunk node {node}"),
    }
}
