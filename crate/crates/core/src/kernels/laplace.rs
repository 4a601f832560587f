use crate::error::{invalid, Result};
use crate::geometry::PointSet;

use super::EntrySource;

/// Laplace single layer potential `1/|x-y|` with piecewise constant basis
/// functions and one-point (centroid) quadrature.
///
/// Off-diagonal entries are `a_i a_j / |c_i - c_j|`. The singular diagonal is
/// regularised to `a_i^2 / rho_i` with the effective radius
/// `rho_i = sqrt(a_i / pi)`.
#[derive(Clone, Debug)]
pub struct LaplaceSlp {
    centroids: Vec<[f64; 3]>,
    areas: Vec<f64>,
}

impl LaplaceSlp {
    pub fn new(points: &PointSet) -> Result<Self> {
        let areas = points
            .areas()
            .ok_or_else(|| invalid("Laplace SLP needs triangle areas"))?
            .to_vec();
        Ok(Self {
            centroids: points.coords().to_vec(),
            areas,
        })
    }
}

impl EntrySource for LaplaceSlp {
    fn nrows(&self) -> usize {
        self.centroids.len()
    }

    fn ncols(&self) -> usize {
        self.centroids.len()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        let (ai, aj) = (self.areas[i], self.areas[j]);
        if i == j {
            let rho = (ai / std::f64::consts::PI).sqrt();
            return ai * ai / rho;
        }
        let (p, q) = (self.centroids[i], self.centroids[j]);
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        ai * aj / d
    }
}
