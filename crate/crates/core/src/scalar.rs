//! Scalar abstraction shared by every numerical module.
//!
//! Math functions (`sqrt`, `abs`, `acos`, ...) come from [`RealField`];
//! conversions and constants come from `num-traits`. Tolerances in this
//! crate are tuned for `f64`; `f32` instantiations are supported but
//! callers should loosen thresholds accordingly.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + FloatConst + Sum + Display + Debug + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion back to `f64`, used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Smallest tolerance that makes sense at this precision.
    #[inline]
    fn tol_floor() -> Self {
        Self::default_epsilon() * Self::lit(64.0)
    }

    /// `max(requested, tol_floor())`.
    #[inline]
    fn tol(requested: f64) -> Self {
        let t = Self::lit(requested);
        let floor = Self::tol_floor();
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;
