use std::fmt;
use std::str::FromStr;

use hcompress::arith::Strategy;
use hcompress::geometry::{Admissibility, Problem};
use hcompress::hmatrix::StorageMode;
use hcompress::model::ModelConfig;

use crate::{BenchError, Result};

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($var:ident => $($s:literal)|+),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($var),+ }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$var => [$($s),+][0]),+ })
            }
        }

        impl FromStr for $name {
            type Err = BenchError;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($($s)|+ => Ok($name::$var),)+
                    _ => Err(BenchError::Config(format!("unknown {} '{s}'", stringify!($name).to_lowercase()))),
                }
            }
        }
    };
}

named_enum!(
    /// Model problem.
    App { Laplace => "laplace", Matern => "matern" }
);
named_enum!(
    /// Benchmark kind.
    Bench { Compress => "compress", Matvec => "matvec", Lu => "lu" }
);
named_enum!(
    /// LU arithmetic strategies to run.
    ArithChoice { Eager => "eager", Accu => "accu" | "accumulator", Both => "both" }
);
named_enum!(
    /// Report format.
    Format { Csv => "csv", Json => "json" }
);

impl ArithChoice {
    pub fn strategies(self) -> Vec<Strategy> {
        match self {
            ArithChoice::Eager => vec![Strategy::Eager],
            ArithChoice::Accu => vec![Strategy::Accumulate],
            ArithChoice::Both => vec![Strategy::Eager, Strategy::Accumulate],
        }
    }
}

/// One benchmark invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub app: App,
    pub bench: Bench,
    /// Requested size; Laplace meshes round up to `20 * 4^L` triangles.
    pub n: usize,
    pub eps: Vec<f64>,
    /// Storage modes besides the FP64 baseline.
    pub codecs: Vec<StorageMode>,
    pub arith: ArithChoice,
    /// Also compress dense leaves.
    pub dense_too: bool,
    pub seed: u64,
    pub reps: usize,
    pub n_min: usize,
    /// Standard admissibility parameter (Laplace).
    pub eta: f64,
    /// Diagonal shift (Matérn).
    pub jitter: f64,
}

impl BenchConfig {
    pub fn new(app: App, bench: Bench, n: usize) -> Self {
        BenchConfig {
            app,
            bench,
            n,
            eps: vec![1e-4],
            codecs: Vec::new(),
            arith: ArithChoice::Accu,
            dense_too: false,
            seed: 42,
            reps: 3,
            n_min: 64,
            eta: 2.0,
            jitter: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BenchError::Config(m));
        if self.n < 64 {
            return fail(format!("n must be at least 64, got {}", self.n));
        }
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if self.eps.is_empty() {
            return fail("at least one eps value is required".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return fail(format!("eps must lie in (0, 1), got {e}"));
        }
        if self.n_min == 0 {
            return fail("nmin must be positive".into());
        }
        if !(self.eta > 0.0) {
            return fail(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.jitter >= 0.0) {
            return fail(format!("jitter must be nonnegative, got {}", self.jitter));
        }
        Ok(())
    }

    /// FP64 baseline followed by the requested codecs, without repeats.
    pub fn modes(&self) -> Vec<StorageMode> {
        let mut out = vec![StorageMode::Raw];
        for m in &self.codecs {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        out
    }

    pub fn model_config(&self) -> ModelConfig {
        let mut cfg = match self.app {
            App::Laplace => ModelConfig::new(Problem::LaplaceSphere, self.n),
            App::Matern => ModelConfig::new(Problem::MaternRandomSphere, self.n),
        };
        cfg.seed = self.seed;
        cfg.n_min = self.n_min;
        match self.app {
            App::Laplace => cfg.admissibility = Admissibility::Standard { eta: self.eta },
            App::Matern => cfg.jitter = self.jitter,
        }
        cfg
    }
}
