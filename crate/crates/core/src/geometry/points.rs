use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// Model problem selecting how points are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    /// Centroids of a triangulated unit sphere (piecewise constant BEM).
    LaplaceSphere,
    /// Uniformly distributed random points on the unit sphere.
    MaternRandomSphere,
}

/// Points in R^3 together with the ordering used by the cluster tree.
///
/// `coords[i]` is the point with *internal* index `i`. `to_internal[e]`
/// maps an external (generation order) index to its internal index.
#[derive(Clone, Debug)]
pub struct PointSet {
    coords: Vec<[f64; 3]>,
    areas: Option<Vec<f64>>,
    to_internal: Vec<usize>,
}

impl PointSet {
    pub fn new(coords: Vec<[f64; 3]>, areas: Option<Vec<f64>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("point set must not be empty"));
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        if let Some(a) = &areas {
            if a.len() != coords.len() {
                return Err(invalid("one area per point required"));
            }
        }
        let n = coords.len();
        Ok(Self {
            coords,
            areas,
            to_internal: (0..n).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    /// Triangle areas, present for surface discretisations.
    pub fn areas(&self) -> Option<&[f64]> {
        self.areas.as_deref()
    }

    pub fn to_internal(&self) -> &[usize] {
        &self.to_internal
    }

    /// Reorders the points so that internal index `i` holds the point that was
    /// previously at position `order[i]`.
    pub(crate) fn reorder(&mut self, order: &[usize]) {
        debug_assert_eq!(order.len(), self.len());
        self.coords = order.iter().map(|&o| self.coords[o]).collect();
        if let Some(a) = &self.areas {
            self.areas = Some(order.iter().map(|&o| a[o]).collect());
        }
        // position of every previous internal index
        let mut moved = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            moved[old] = new;
        }
        for idx in &mut self.to_internal {
            *idx = moved[*idx];
        }
    }

    /// Permutes a vector given in external ordering into internal ordering.
    pub fn permute_to_internal<T: Copy>(&self, external: &[T]) -> Vec<T> {
        let mut out = external.to_vec();
        for (e, &i) in self.to_internal.iter().enumerate() {
            out[i] = external[e];
        }
        out
    }

    /// Inverse of [`PointSet::permute_to_internal`].
    pub fn permute_to_external<T: Copy>(&self, internal: &[T]) -> Vec<T> {
        self.to_internal.iter().map(|&i| internal[i]).collect()
    }
}

/// Generates the point set of a model problem.
///
/// For [`Problem::LaplaceSphere`] the result has `20 * 4^L` points, with `L`
/// the smallest icosahedron refinement level giving at least `n` triangles.
pub fn generate_points(problem: Problem, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(invalid("number of points must be at least 1"));
    }
    match problem {
        Problem::LaplaceSphere => {
            let mut level = 0;
            while 20 * 4usize.pow(level) < n {
                level += 1;
            }
            let (centroids, areas) = icosphere_triangles(level);
            PointSet::new(centroids, Some(areas))
        }
        Problem::MaternRandomSphere => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coords = (0..n)
                .map(|_| loop {
                    let v: [f64; 3] = [
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ];
                    let norm = norm3(v);
                    if norm > 1e-8 {
                        break [v[0] / norm, v[1] / norm, v[2] / norm];
                    }
                })
                .collect();
            PointSet::new(coords, None)
        }
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Centroids and areas of the flat triangles of a refined icosahedron.
fn icosphere_triangles(level: u32) -> (Vec<[f64; 3]>, Vec<f64>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vertices.len() - 1
            })
        };
        let mut refined = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            refined.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = refined;
    }

    faces
        .iter()
        .map(|&[a, b, c]| {
            let (p, q, r) = (vertices[a], vertices[b], vertices[c]);
            let centroid = [
                (p[0] + q[0] + r[0]) / 3.0,
                (p[1] + q[1] + r[1]) / 3.0,
                (p[2] + q[2] + r[2]) / 3.0,
            ];
            let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
            let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
            let cross = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            (centroid, 0.5 * norm3(cross))
        })
        .unzip()
}
