use hcompress::geometry::{
    build_block_tree, build_cluster_tree, generate_points, standard_admissible, weak_admissible, Admissibility, ClusterTree,
    Problem,
};

fn matern_tree(n: usize, n_min: usize) -> ClusterTree {
    let mut pts = generate_points(Problem::MaternRandomSphere, n, 7).unwrap();
    build_cluster_tree(&mut pts, n_min)
}

#[test]
fn points_lie_on_the_sphere() {
    for problem in [Problem::LaplaceSphere, Problem::MaternRandomSphere] {
        let pts = generate_points(problem, 500, 1).unwrap();
        for p in pts.coords() {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            // triangle centroids sit slightly inside the sphere
            assert!(r <= 1.0 + 1e-12 && r > 0.95, "{r}");
        }
    }
    let a = generate_points(Problem::MaternRandomSphere, 100, 42).unwrap();
    let b = generate_points(Problem::MaternRandomSphere, 100, 42).unwrap();
    assert_eq!(a.coords(), b.coords());
}

#[test]
fn laplace_sizes_round_up_to_refinement_levels() {
    let mut prev = 0.0;
    for (n, expect) in [(1, 20), (21, 80), (321, 1280), (4096, 5120), (16384, 20480)] {
        let pts = generate_points(Problem::LaplaceSphere, n, 0).unwrap();
        assert_eq!(pts.len(), expect);
        // flat triangles: the area grows with refinement towards 4 pi
        let total: f64 = pts.areas().unwrap().iter().sum();
        assert!(total > prev && total < 4.0 * std::f64::consts::PI);
        prev = total;
    }
    assert!(prev > 0.99 * 4.0 * std::f64::consts::PI);
}

#[test]
fn cluster_tree_partitions_indices() {
    for (n, n_min) in [(1000, 16), (4096, 64), (777, 50)] {
        let tree = matern_tree(n, n_min);
        let mut covered = vec![0u8; n];
        for leaf in tree.leaves() {
            assert!(leaf.len() <= n_min && !leaf.is_empty());
            for i in leaf.range.clone() {
                covered[i] += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
        let depth_bound = (n as f64 / n_min as f64).log2().ceil() as usize + 1;
        assert!(tree.depth() <= depth_bound);
    }
}

#[test]
fn block_trees_tile_the_product() {
    let tree = matern_tree(1000, 32);
    let root = tree.get(tree.root()).range.clone();
    for adm in [Admissibility::Standard { eta: 2.0 }, Admissibility::Weak, Admissibility::Dense] {
        let bt = build_block_tree(&tree, &tree, |t, s| adm.admissible(t, s));
        let mut area = 0;
        for leaf in bt.leaves() {
            area += leaf.rows.len() * leaf.cols.len();
            let (t, s) = (tree.get(leaf.row), tree.get(leaf.col));
            if leaf.admissible {
                match adm {
                    Admissibility::Standard { eta } => assert!(standard_admissible(t, s, eta)),
                    Admissibility::Weak => assert!(weak_admissible(t, s)),
                    Admissibility::Dense => panic!("no admissible blocks expected"),
                }
            } else {
                assert!(t.is_leaf() || s.is_leaf());
            }
        }
        assert_eq!(area, root.len() * root.len());
    }
}
