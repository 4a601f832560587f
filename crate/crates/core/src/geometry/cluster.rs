use std::ops::Range;

use super::PointSet;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BBox {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a [f64; 3]>) -> Self {
        let mut bbox = BBox {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        };
        for p in points {
            for d in 0..3 {
                bbox.min[d] = bbox.min[d].min(p[d]);
                bbox.max[d] = bbox.max[d].max(p[d]);
            }
        }
        bbox
    }

    pub fn diameter(&self) -> f64 {
        (0..3)
            .map(|d| (self.max[d] - self.min[d]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, other: &BBox) -> f64 {
        (0..3)
            .map(|d| {
                let gap = (self.min[d] - other.max[d]).max(other.min[d] - self.max[d]);
                gap.max(0.0).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    fn longest_axis(&self) -> usize {
        let ext = |d: usize| self.max[d] - self.min[d];
        (1..3).fold(0, |best, d| if ext(d) > ext(best) { d } else { best })
    }
}

/// Index of a cluster inside its [`ClusterTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClusterId(pub usize);

#[derive(Clone, Debug)]
pub struct Cluster {
    pub range: Range<usize>,
    pub bbox: BBox,
    pub level: usize,
    pub children: Option<[ClusterId; 2]>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Binary cluster tree over the internal index set `0..n`.
#[derive(Clone, Debug)]
pub struct ClusterTree {
    nodes: Vec<Cluster>,
    n_min: usize,
}

impl ClusterTree {
    pub fn root(&self) -> ClusterId {
        ClusterId(0)
    }

    pub fn get(&self, id: ClusterId) -> &Cluster {
        &self.nodes[id.0]
    }

    pub fn n_min(&self) -> usize {
        self.n_min
    }

    pub fn size(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|c| c.level).max().unwrap_or(0) + 1
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Cluster> {
        self.nodes.iter().filter(|c| c.is_leaf())
    }
}

/// Builds a cluster tree by recursive median splits along the longest
/// bounding-box axis. The point set is reordered so that every cluster owns a
/// contiguous index range.
pub fn build_cluster_tree(points: &mut PointSet, n_min: usize) -> ClusterTree {
    let n_min = n_min.max(1);
    let coords = points.coords().to_vec();
    let mut order: Vec<usize> = (0..coords.len()).collect();
    let mut nodes = Vec::new();
    split(&coords, &mut order, 0, 0, n_min, &mut nodes);
    points.reorder(&order);
    ClusterTree { nodes, n_min }
}

fn split(
    coords: &[[f64; 3]],
    order: &mut [usize],
    offset: usize,
    level: usize,
    n_min: usize,
    nodes: &mut Vec<Cluster>,
) -> ClusterId {
    let bbox = BBox::of_points(order.iter().map(|&i| &coords[i]));
    let id = ClusterId(nodes.len());
    nodes.push(Cluster {
        range: offset..offset + order.len(),
        bbox,
        level,
        children: None,
    });
    if order.len() <= n_min || order.len() < 2 {
        return id;
    }
    let axis = bbox.longest_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    // keep the ordering inside each half deterministic
    left.sort_unstable_by(|&a, &b| coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b)));
    right.sort_unstable_by(|&a, &b| coords[a][axis].total_cmp(&coords[b][axis]).then(a.cmp(&b)));
    let l = split(coords, left, offset, level + 1, n_min, nodes);
    let r = split(coords, right, offset + mid, level + 1, n_min, nodes);
    nodes[id.0].children = Some([l, r]);
    id
}
