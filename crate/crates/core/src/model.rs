//! End-to-end setup of the two model problems.

use crate::error::{invalid, Result};
use crate::geometry::{build_block_tree, build_cluster_tree, generate_points, Admissibility, BlockTree, ClusterTree, PointSet, Problem};
use crate::hmatrix::{assemble, AssemblyReport, HMatrix};
use crate::kernels::{Kernel, LaplaceSlp, MaternCovariance, MaternParams};
use crate::scalar::Real;

/// Parameters of a model problem instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub problem: Problem,
    /// Requested size; Laplace meshes round up to `20 * 4^L` triangles.
    pub n: usize,
    pub seed: u64,
    pub n_min: usize,
    pub admissibility: Admissibility,
    pub matern: MaternParams,
    /// Diagonal shift of the Matérn covariance.
    pub jitter: f64,
}

impl ModelConfig {
    /// Laplace SLP with standard admissibility, or Matérn with weak
    /// admissibility and `1e-12` jitter.
    pub fn new(problem: Problem, n: usize) -> Self {
        let (admissibility, jitter) = match problem {
            Problem::LaplaceSphere => (Admissibility::Standard { eta: 2.0 }, 0.0),
            Problem::MaternRandomSphere => (Admissibility::Weak, 1e-12),
        };
        Self {
            problem,
            n,
            seed: 42,
            n_min: 64,
            admissibility,
            matern: MaternParams::default(),
            jitter,
        }
    }

    pub fn laplace(n: usize) -> Self {
        Self::new(Problem::LaplaceSphere, n)
    }

    pub fn matern(n: usize) -> Self {
        Self::new(Problem::MaternRandomSphere, n)
    }
}

/// Points in cluster order, the cluster tree and the kernel on them.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub points: PointSet,
    pub tree: ClusterTree,
    pub kernel: Kernel,
}

impl Model {
    pub fn build(config: ModelConfig) -> Result<Self> {
        if config.n_min == 0 {
            return Err(invalid("n_min must be positive"));
        }
        let mut points = generate_points(config.problem, config.n, config.seed)?;
        let tree = build_cluster_tree(&mut points, config.n_min);
        let kernel = match config.problem {
            Problem::LaplaceSphere => Kernel::Laplace(LaplaceSlp::new(&points)?),
            Problem::MaternRandomSphere => {
                Kernel::Matern(MaternCovariance::new(&points, config.matern)?.with_jitter(config.jitter))
            }
        };
        Ok(Self {
            config,
            points,
            tree,
            kernel,
        })
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn block_tree(&self) -> BlockTree<'_> {
        let adm = self.config.admissibility;
        build_block_tree(&self.tree, &self.tree, |t, s| adm.admissible(t, s))
    }

    pub fn assemble<T: Real>(&self, eps: f64) -> Result<(HMatrix<T>, AssemblyReport)> {
        assemble(&self.block_tree(), &self.kernel, eps)
    }
}
