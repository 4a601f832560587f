//! H-matrix multiplication, triangular solves and LU factorization.

mod accumulate;
mod eager;
mod solve;
mod update;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::hmatrix::{HMatrix, StorageMode};
use crate::scalar::Real;

pub use accumulate::{hmul_accumulated, Accumulator};
pub use eager::hmul_eager;
pub use solve::{lu_residual_norm, LuFactors, Triangle};
pub use update::{add_update, product, truncate_compressed, Update};

/// How updates reach the stored blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Every product is applied to the target immediately.
    Eager,
    /// Products are collected per block and applied once at the leaves.
    Accumulate,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Eager => "eager",
            Strategy::Accumulate => "accu",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eager" => Ok(Strategy::Eager),
            "accumulator" | "accumulate" | "acc" => Ok(Strategy::Accumulate),
            _ => Err(invalid(format!("unknown strategy '{s}'"))),
        }
    }
}

/// Arithmetic settings: update strategy, storage of results, accuracy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArithmeticMode {
    pub strategy: Strategy,
    pub storage: StorageMode,
    pub eps: f64,
    /// Also compress dense leaves written by the arithmetic.
    pub dense_too: bool,
}

impl ArithmeticMode {
    pub fn new(strategy: Strategy, storage: StorageMode, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
        }
        Ok(ArithmeticMode { strategy, storage, eps, dense_too: true })
    }

    pub fn with_dense(mut self, dense_too: bool) -> Self {
        self.dense_too = dense_too;
        self
    }
}

/// Counters collected during an arithmetic operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArithStats {
    pub accumulators_alive: usize,
    pub accumulators_peak: usize,
    pub accumulators_created: usize,
    /// Number of times a leaf was encoded after being modified.
    pub leaf_writes: usize,
}

/// Mode plus running counters, threaded through the recursions.
#[derive(Debug)]
pub struct Ctx {
    pub mode: ArithmeticMode,
    pub stats: ArithStats,
}

impl Ctx {
    pub fn new(mode: ArithmeticMode) -> Self {
        Ctx { mode, stats: ArithStats::default() }
    }
}

/// `C := C + alpha A B` with the strategy of `mode`.
pub fn hmul<T: Real>(alpha: T, a: &HMatrix<T>, b: &HMatrix<T>, c: &mut HMatrix<T>, mode: ArithmeticMode) -> Result<ArithStats> {
    let mut ctx = Ctx::new(mode);
    match mode.strategy {
        Strategy::Eager => hmul_eager(alpha, a, b, c, &mut ctx)?,
        Strategy::Accumulate => hmul_accumulated(c, Accumulator::from_product(alpha, a, b), &mut ctx)?,
    }
    Ok(ctx.stats)
}

/// Overwrites `B` with `L^-1 B`, `L` the unit lower triangle of the
/// factored diagonal block `lu`.
pub fn trsm_lower<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, mode: ArithmeticMode) -> Result<ArithStats> {
    let mut ctx = Ctx::new(mode);
    match mode.strategy {
        Strategy::Eager => eager::trsm_lower(lu, b, &mut ctx)?,
        Strategy::Accumulate => accumulate::trsm_lower(lu, b, Accumulator::new(), &mut ctx)?,
    }
    Ok(ctx.stats)
}

/// Overwrites `B` with `B U^-1`, `U` the upper triangle of the factored
/// diagonal block `lu`.
pub fn trsm_upper<T: Real>(lu: &HMatrix<T>, b: &mut HMatrix<T>, mode: ArithmeticMode) -> Result<ArithStats> {
    let mut ctx = Ctx::new(mode);
    match mode.strategy {
        Strategy::Eager => eager::trsm_upper(lu, b, &mut ctx)?,
        Strategy::Accumulate => accumulate::trsm_upper(lu, b, Accumulator::new(), &mut ctx)?,
    }
    Ok(ctx.stats)
}

/// Factors `A = L U` in place without pivoting. `L` (unit lower) and `U`
/// share the storage of `A`.
pub fn hlu_in_place<T: Real>(a: &mut HMatrix<T>, mode: ArithmeticMode) -> Result<ArithStats> {
    if a.rows() != a.cols() {
        return Err(invalid("LU needs a block on the diagonal"));
    }
    let mut ctx = Ctx::new(mode);
    match mode.strategy {
        Strategy::Eager => eager::lu(a, &mut ctx)?,
        Strategy::Accumulate => accumulate::lu(a, Accumulator::new(), &mut ctx)?,
    }
    Ok(ctx.stats)
}

/// Factors a copy of `A`.
pub fn hlu<T: Real>(a: &HMatrix<T>, mode: ArithmeticMode) -> Result<(LuFactors<T>, ArithStats)> {
    let mut lu = a.clone();
    let stats = hlu_in_place(&mut lu, mode)?;
    Ok((LuFactors::new(lu), stats))
}
