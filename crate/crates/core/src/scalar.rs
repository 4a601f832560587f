//! Scalar abstraction shared by the numerical modules.
//!
//! Every dense and lowrank routine is written against [`Real`], which is
//! implemented for `f32` and `f64`. Compressed storage formats are defined on
//! the IEEE-754 double layout, so values cross that boundary through
//! [`Real::as_f64`] and [`Real::cast`].

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Size of one stored value in bytes.
    const BYTES: usize;

    /// Rounds an `f64` to this type.
    fn cast(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every Real")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("Real converts to f64")
    }
}

impl Real for f32 {
    const BYTES: usize = 4;
}

impl Real for f64 {
    const BYTES: usize = 8;
}
