use std::ops::Range;

use super::{Cluster, ClusterId, ClusterTree};

/// `min(diam(t), diam(s)) <= eta * dist(t, s)` on bounding boxes.
pub fn standard_admissible(t: &Cluster, s: &Cluster, eta: f64) -> bool {
    t.bbox.diameter().min(s.bbox.diameter()) <= eta * t.bbox.distance(&s.bbox)
}

/// Every off-diagonal block is admissible.
pub fn weak_admissible(t: &Cluster, s: &Cluster) -> bool {
    t.range != s.range
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Admissibility {
    Standard { eta: f64 },
    Weak,
    /// Never admissible: the block tree refines down to leaf clusters.
    Dense,
}

impl Admissibility {
    pub fn admissible(&self, t: &Cluster, s: &Cluster) -> bool {
        match *self {
            Admissibility::Standard { eta } => standard_admissible(t, s, eta),
            Admissibility::Weak => weak_admissible(t, s),
            Admissibility::Dense => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Block {
    pub row: ClusterId,
    pub col: ClusterId,
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub admissible: bool,
    /// Row-major 2x2 sub-blocks `[(0,0), (0,1), (1,0), (1,1)]`.
    pub children: Option<Box<[Block; 4]>>,
}

impl Block {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn leaves(&self) -> Vec<&Block> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Block>) {
        match &self.children {
            None => out.push(self),
            Some(ch) => ch.iter().for_each(|c| c.collect_leaves(out)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockTree<'a> {
    pub root: Block,
    pub row_tree: &'a ClusterTree,
    pub col_tree: &'a ClusterTree,
}

impl BlockTree<'_> {
    pub fn leaves(&self) -> Vec<&Block> {
        self.root.leaves()
    }

    pub fn admissible_leaf_count(&self) -> usize {
        self.leaves().iter().filter(|b| b.admissible).count()
    }
}

/// Recursive block partition: a block becomes a leaf when it is admissible or
/// when either cluster has no sons.
pub fn build_block_tree<'a, F>(rows: &'a ClusterTree, cols: &'a ClusterTree, adm: F) -> BlockTree<'a>
where
    F: Fn(&Cluster, &Cluster) -> bool,
{
    let root = build(rows, cols, rows.root(), cols.root(), &adm);
    BlockTree {
        root,
        row_tree: rows,
        col_tree: cols,
    }
}

fn build<F>(rows: &ClusterTree, cols: &ClusterTree, t: ClusterId, s: ClusterId, adm: &F) -> Block
where
    F: Fn(&Cluster, &Cluster) -> bool,
{
    let (tc, sc) = (rows.get(t), cols.get(s));
    let admissible = adm(tc, sc);
    let children = match (admissible, tc.children, sc.children) {
        (false, Some([t0, t1]), Some([s0, s1])) => Some(Box::new([
            build(rows, cols, t0, s0, adm),
            build(rows, cols, t0, s1, adm),
            build(rows, cols, t1, s0, adm),
            build(rows, cols, t1, s1, adm),
        ])),
        _ => None,
    };
    Block {
        row: t,
        col: s,
        rows: tc.range.clone(),
        cols: sc.range.clone(),
        admissible,
        children,
    }
}
