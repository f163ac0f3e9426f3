use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar accepted by the basis, quadrature and blending code.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count or index.
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable")
    }

    /// Iteration tolerance: 1e-14 in double precision, a few ulps otherwise.
    fn tol() -> Self {
        Self::lit(1e-14).max(Self::epsilon() * Self::lit(16.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
