//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating point scalar (`f32` or `f64`) usable by the system builders,
/// the observer design routines, the simulator and the NDPA synthesis.
///
/// Method calls such as `sqrt` or `abs` resolve through [`nalgebra::ComplexField`].
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for the supported float types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// `base`, floored at a small multiple of machine epsilon so that
    /// double-precision thresholds stay meaningful in single precision.
    fn tol(base: f64) -> Self {
        Self::lit(base).max(Self::default_epsilon() * Self::lit(64.0))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
