//! Hierarchical matrices with adaptive-precision floating-point compression.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! compressed storage formats operate on `f64` values.

mod bytes;
pub mod arith;
pub mod codec;
pub mod error;
pub mod geometry;
pub mod hmatrix;
pub mod kernels;
pub mod lowrank;
pub mod mixed;
pub mod model;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type HMatrix64 = hmatrix::HMatrix<f64>;
pub type HMatrix32 = hmatrix::HMatrix<f32>;
pub type LowrankBlock64 = lowrank::LowrankBlock<f64>;
pub type LowrankBlock32 = lowrank::LowrankBlock<f32>;
