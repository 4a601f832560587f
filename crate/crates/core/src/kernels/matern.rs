use crate::error::{invalid, Result};
use crate::geometry::PointSet;

use super::bessel::{gamma, k_unchecked};
use super::EntrySource;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaternParams {
    /// Variance `sigma^2`.
    pub variance: f64,
    /// Spatial range `l`.
    pub range: f64,
    /// Smoothness `nu`.
    pub smoothness: f64,
}

impl Default for MaternParams {
    fn default() -> Self {
        Self {
            variance: 1.0,
            range: 1.0,
            smoothness: 1.0 / 3.0,
        }
    }
}

/// Matérn covariance `C(d) = s2 2^(1-nu)/Gamma(nu) (sqrt(2 nu) d/l)^nu K_nu(sqrt(2 nu) d/l)`
/// between points, with an optional diagonal jitter.
#[derive(Clone, Debug)]
pub struct MaternCovariance {
    points: Vec<[f64; 3]>,
    params: MaternParams,
    jitter: f64,
    prefactor: f64,
    scale: f64,
}

impl MaternCovariance {
    pub fn new(points: &PointSet, params: MaternParams) -> Result<Self> {
        let MaternParams {
            variance,
            range,
            smoothness,
        } = params;
        if !(variance > 0.0 && range > 0.0 && smoothness > 0.0) {
            return Err(invalid("Matérn parameters must be positive"));
        }
        Ok(Self {
            points: points.coords().to_vec(),
            params,
            jitter: 0.0,
            prefactor: variance * 2f64.powf(1.0 - smoothness) / gamma(smoothness),
            scale: (2.0 * smoothness).sqrt() / range,
        })
    }

    /// Adds `jitter` to every diagonal entry.
    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn params(&self) -> MaternParams {
        self.params
    }

    /// Covariance as a function of distance.
    pub fn covariance(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return self.params.variance;
        }
        let r = self.scale * d;
        let nu = self.params.smoothness;
        let value = self.prefactor * r.powf(nu) * k_unchecked(nu, r);
        // K underflows long before the product loses meaning
        if value.is_finite() {
            value
        } else {
            0.0
        }
    }
}

impl EntrySource for MaternCovariance {
    fn nrows(&self) -> usize {
        self.points.len()
    }

    fn ncols(&self) -> usize {
        self.points.len()
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.points[i], self.points[j]);
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        let c = self.covariance(d);
        if i == j {
            c + self.jitter
        } else {
            c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_points, Problem};

    fn unit(params: MaternParams) -> MaternCovariance {
        let pts = generate_points(Problem::MaternRandomSphere, 4, 1).unwrap();
        MaternCovariance::new(&pts, params).unwrap()
    }

    #[test]
    fn zero_lag_is_variance() {
        let k = unit(MaternParams::default());
        assert_eq!(k.covariance(0.0), 1.0);
        assert_eq!(k.entry(2, 2), 1.0);
        // continuous limit
        assert!((k.covariance(1e-12) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exponential_at_half_smoothness() {
        let k = unit(MaternParams {
            smoothness: 0.5,
            ..Default::default()
        });
        assert!((k.covariance(1.0) - (-1f64).exp()).abs() < 1e-14);
        assert!((k.covariance(1.0) - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn monotone_in_distance() {
        let k = unit(MaternParams::default());
        let mut prev = k.covariance(0.0);
        for i in 1..200 {
            let c = k.covariance(i as f64 * 0.01);
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn jitter_only_on_diagonal() {
        let k = unit(MaternParams::default()).with_jitter(1e-3);
        assert_eq!(k.entry(1, 1), 1.0 + 1e-3);
        assert_eq!(k.entry(0, 1), k.entry(1, 0));
        assert!(k.entry(0, 1) < 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let pts = generate_points(Problem::MaternRandomSphere, 4, 1).unwrap();
        let bad = MaternParams {
            range: 0.0,
            ..Default::default()
        };
        assert!(MaternCovariance::new(&pts, bad).is_err());
    }
}
