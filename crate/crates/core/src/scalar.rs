//! Floating-point abstraction the numeric core is generic over.
//!
//! Every simulator, environment, and trainer type in this crate takes a
//! [`Scalar`] type parameter so the whole stack can run in `f32` or `f64`.
//! Concrete `f64` aliases for the common instantiation live at the crate
//! root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::distributions::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar type: everything `f32` and `f64` have in common
/// that the simulator and trainers rely on.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Draws one standard normal variate from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Lowers an `f64` constant into the working scalar type.
///
/// Panics only if the value is not representable, which cannot happen for the
/// in-range literals this crate feeds it.
pub(crate) fn real<T: Scalar>(value: f64) -> T {
    T::from_f64(value).expect("f64 literal must be representable in the scalar type")
}
