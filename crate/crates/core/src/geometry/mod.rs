//! Point sets, cluster trees and block trees.

mod block;
mod cluster;
mod points;

pub use block::{build_block_tree, standard_admissible, weak_admissible, Admissibility, Block, BlockTree};
pub use cluster::{build_cluster_tree, BBox, Cluster, ClusterId, ClusterTree};
pub use points::{generate_points, PointSet, Problem};
