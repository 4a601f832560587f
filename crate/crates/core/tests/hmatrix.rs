use hcompress::codec::Scheme;
use hcompress::geometry::{build_block_tree, build_cluster_tree, weak_admissible, Admissibility, PointSet, Problem};
use hcompress::hmatrix::{HMatrix, LowrankData, Node, Op, StorageMode, NODE_OVERHEAD_BYTES};
use hcompress::kernels::assemble_dense;
use hcompress::model::{Model, ModelConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn matern(n: usize) -> Model {
    Model::build(ModelConfig::matern(n)).unwrap()
}

fn laplace(n: usize) -> Model {
    Model::build(ModelConfig::laplace(n)).unwrap()
}

#[test]
fn matern_assembly_matches_dense() {
    let model = matern(256);
    let eps = 1e-6;
    let (h, report) = model.assemble::<f64>(eps).unwrap();
    let dense = assemble_dense::<f64, _>(&model.kernel);
    let err = (h.to_dense().unwrap() - &dense).norm();
    assert!(err <= 50.0 * eps * dense.norm(), "err {err}");
    assert!(report.lowrank_leaves > 0);
}

#[test]
fn laplace_assembly_matches_dense() {
    let model = laplace(1000);
    let eps = 1e-6;
    let (h, report) = model.assemble::<f64>(eps).unwrap();
    let dense = assemble_dense::<f64, _>(&model.kernel);
    let err = (h.to_dense().unwrap() - &dense).norm();
    assert!(err <= 50.0 * eps * dense.norm(), "err {err}");
    assert!(report.lowrank_leaves > 0 && report.max_rank < 64);
}

#[test]
fn never_admissible_is_exact() {
    let mut cfg = ModelConfig::matern(300);
    cfg.admissibility = Admissibility::Dense;
    let model = Model::build(cfg).unwrap();
    let (h, report) = model.assemble::<f64>(1e-4).unwrap();
    assert_eq!(report.lowrank_leaves, 0);
    assert_eq!(h.to_dense().unwrap(), assemble_dense::<f64, _>(&model.kernel));
}

struct Ones(usize);

impl hcompress::kernels::EntrySource for Ones {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn entry(&self, _: usize, _: usize) -> f64 {
        1.0
    }
}

#[test]
fn weak_structure_depth_two() {
    let coords: Vec<[f64; 3]> = (0..16).map(|i| [i as f64, 0.0, 0.0]).collect();
    let mut points = PointSet::new(coords, None).unwrap();
    let tree = build_cluster_tree(&mut points, 4);
    let bt = build_block_tree(&tree, &tree, weak_admissible);
    let (h, _) = hcompress::hmatrix::assemble::<f64, _>(&bt, &Ones(16), 1e-8).unwrap();
    let leaves = h.leaves();
    let dense: Vec<_> = leaves.iter().filter(|l| matches!(l.node(), Node::Dense(_))).collect();
    let lowrank: Vec<_> = leaves.iter().filter(|l| matches!(l.node(), Node::Lowrank(_))).collect();
    assert_eq!(dense.len(), 4);
    assert!(dense.iter().all(|l| l.rows() == l.cols() && l.nrows() == 4));
    assert_eq!(lowrank.len(), 6);
    assert_eq!(lowrank.iter().filter(|l| l.nrows() == 8).count(), 2);
    assert_eq!(lowrank.iter().filter(|l| l.nrows() == 4).count(), 4);
}

#[test]
fn matvec_matches_dense_product() {
    let model = laplace(512);
    let (h, _) = model.assemble::<f64>(1e-8).unwrap();
    let d = h.to_dense().unwrap();
    let x = random_vector(h.ncols(), 1);
    let mut y = random_vector(h.nrows(), 2);
    let expect = &d * &x * 0.5 + &y * 2.0;
    h.matvec(0.5, x.as_slice(), 2.0, y.as_mut_slice()).unwrap();
    assert!((&y - &expect).norm() <= 1e-13 * expect.norm());

    let mut yt = DVector::zeros(h.ncols());
    h.matvec_op(Op::Trans, 1.0, x.as_slice(), 0.0, yt.as_mut_slice()).unwrap();
    let expect_t = d.transpose() * &x;
    assert!((&yt - &expect_t).norm() <= 1e-13 * expect_t.norm());

    let xs = DMatrix::from_fn(h.ncols(), 3, |i, j| ((i * 7 + j) as f64).sin());
    let mut ys = DMatrix::zeros(h.nrows(), 3);
    h.apply(Op::NoTrans, 1.0, &xs, &mut ys).unwrap();
    assert!((&ys - &d * &xs).norm() <= 1e-13 * ys.norm());
}

#[test]
fn matvec_alpha_zero_and_dimension_check() {
    let model = matern(200);
    let (h, _) = model.assemble::<f64>(1e-6).unwrap();
    let x = vec![f64::NAN; h.ncols()];
    let mut y = vec![3.0; h.nrows()];
    h.matvec(0.0, &x, 2.0, &mut y).unwrap();
    assert!(y.iter().all(|&v| v == 6.0));
    assert!(h.matvec(1.0, &x[1..], 0.0, &mut y).is_err());
}

#[test]
fn compressed_matvec_error() {
    let model = laplace(1000);
    let eps = 1e-4;
    let (h, _) = model.assemble::<f64>(eps).unwrap();
    let norm = h.to_dense().unwrap().norm();
    let x = random_vector(h.ncols(), 3);
    let mut y = vec![0.0; h.nrows()];
    h.matvec(1.0, x.as_slice(), 0.0, &mut y).unwrap();
    for mode in StorageMode::ALL {
        let mut c = h.clone();
        c.compress_in_place(eps, mode, true).unwrap();
        let mut yc = vec![0.0; h.nrows()];
        c.matvec(1.0, x.as_slice(), 0.0, &mut yc).unwrap();
        let diff = DVector::from_vec(yc) - DVector::from_column_slice(&y);
        assert!(diff.norm() <= 10.0 * eps * norm * x.norm(), "{mode}: {}", diff.norm());
    }
}

#[test]
fn compression_keeps_structure_and_orders_sizes() {
    let model = laplace(2000);
    let eps = 1e-6;
    let (h, _) = model.assemble::<f64>(eps).unwrap();
    let base = h.memory_footprint();
    assert_eq!(base.uncompressed, base.total());
    let mut totals = Vec::new();
    for scheme in Scheme::ALL {
        let mut c = h.clone();
        let report = c.compress_in_place(eps, StorageMode::Codec(scheme), true).unwrap();
        assert!(c.same_structure(&h));
        assert_eq!(c.max_rank(), h.max_rank());
        assert_eq!(report.uncompressed, base.total());
        assert!(report.total() <= base.total());
        assert!(report.rate() >= 1.0);
        totals.push(report.total());
    }
    assert!(totals.windows(2).all(|w| w[0] <= w[1]), "{totals:?}");
    for mode in [StorageMode::Mixed, StorageMode::Adaptive(Scheme::Afl)] {
        let mut c = h.clone();
        let r = c.compress_in_place(eps, mode, true).unwrap();
        assert!(r.total() <= base.total());
    }
}

#[test]
fn lowrank_only_mode_leaves_dense_bytes() {
    let model = laplace(1000);
    let (h, _) = model.assemble::<f64>(1e-4).unwrap();
    let base = h.memory_footprint();
    let mut c = h.clone();
    let r = c.compress_in_place(1e-4, StorageMode::Codec(Scheme::Afl), false).unwrap();
    assert_eq!(r.dense_raw, base.dense_raw);
    assert_eq!(r.dense_compressed, 0);
    assert!(r.lowrank() < base.lowrank());
}

#[test]
fn elementwise_codec_bound_after_compression() {
    let model = matern(400);
    let eps = 1e-5;
    let (h, _) = model.assemble::<f64>(eps).unwrap();
    let mut c = h.clone();
    c.compress_in_place(eps, StorageMode::Codec(Scheme::Aflp), true).unwrap();
    let u = (-(hcompress::codec::mantissa_bits_for(eps).unwrap() as f64) - 1.0).exp2();
    for (a, b) in h.leaves().iter().zip(c.leaves()) {
        let (x, y): (Vec<f64>, Vec<f64>) = match (a.node(), b.node()) {
            (Node::Dense(_), Node::Dense(_)) => (
                a.dense_block().unwrap().unwrap().iter().copied().collect(),
                b.dense_block().unwrap().unwrap().iter().copied().collect(),
            ),
            (Node::Lowrank(_), Node::Lowrank(_)) => {
                let (fa, fb) = (a.lowrank_block().unwrap().unwrap(), b.lowrank_block().unwrap().unwrap());
                (fa.u.iter().chain(fa.v.iter()).copied().collect(), fb.u.iter().chain(fb.v.iter()).copied().collect())
            }
            _ => panic!("structure changed"),
        };
        let floor = x.iter().filter(|v| **v != 0.0).fold(f64::INFINITY, |m, v| m.min(v.abs()));
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() <= u * (p.abs() + floor) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn constant_dense_blocks_dfl() {
    let model = matern(300);
    let (h, _) = model.assemble::<f64>(1e-6).unwrap();
    let c = HMatrix::from_entries(&h, 1e-6, &|_, _| 0.75).unwrap();
    let mut d = c.clone();
    let r = d.compress_in_place(1e-6, StorageMode::Codec(Scheme::Dfl), true).unwrap();
    assert!(r.dense_compressed < c.memory_footprint().dense_raw);
    for leaf in d.leaves() {
        if let Some(block) = leaf.dense_block().unwrap() {
            assert!(block.iter().all(|&v| v == 0.75));
        }
    }
}

#[test]
fn footprint_of_dense_only_matrix() {
    let mut cfg = ModelConfig::matern(256);
    cfg.admissibility = Admissibility::Dense;
    let model = Model::build(cfg).unwrap();
    let (h, _) = model.assemble::<f64>(1e-4).unwrap();
    let r = h.memory_footprint();
    assert_eq!(r.total(), 8 * 256 * 256 + h.node_count() * NODE_OVERHEAD_BYTES);
    assert_eq!(r.total(), r.uncompressed);

    let z = h.zeros_like();
    let lr = HMatrix::lowrank(0..4, 4..8, hcompress::lowrank::LowrankBlock::<f64>::zeros(4, 4)).unwrap();
    assert_eq!(lr.memory_footprint().total(), NODE_OVERHEAD_BYTES);
    assert_eq!(z.memory_footprint().total(), r.total());
}

#[test]
fn file_roundtrip_all_modes() {
    let model = laplace(1000);
    let eps = 1e-5;
    let (h, _) = model.assemble::<f64>(eps).unwrap();
    for mode in StorageMode::ALL {
        let mut c = h.clone();
        c.compress_in_place(eps, mode, true).unwrap();
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..4], b"HCMX");
        let back = HMatrix::<f64>::from_bytes(&bytes).unwrap();
        assert_eq!(back, c, "{mode}");
        let mut sink = Vec::new();
        c.write_to(&mut sink).unwrap();
        assert_eq!(HMatrix::<f64>::read_from(sink.as_slice()).unwrap(), c);
        assert!(HMatrix::<f64>::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(HMatrix::<f32>::from_bytes(&bytes).is_err());
    }
}

#[test]
fn compressed_leaves_use_requested_mode() {
    let model = laplace(1000);
    let (mut h, _) = model.assemble::<f64>(1e-6).unwrap();
    h.compress_in_place(1e-6, StorageMode::Adaptive(Scheme::Bfl), false).unwrap();
    let kinds = h
        .leaves()
        .iter()
        .filter_map(|l| match l.node() {
            Node::Lowrank(LowrankData::Adaptive(a)) => Some(a.scheme),
            _ => None,
        })
        .count();
    assert!(kinds > 0);
    h.decompress_in_place().unwrap();
    assert!(!h.is_compressed());
}

#[test]
fn single_precision_matrix() {
    let model = laplace(512);
    let (h, _) = model.assemble::<f32>(1e-4).unwrap();
    let d64 = assemble_dense::<f64, _>(&model.kernel);
    let err = (h.to_dense().unwrap().map(|x| x as f64) - &d64).norm();
    assert!(err <= 1e-3 * d64.norm());
}

#[test]
fn laplace_dynamic_range_is_small() {
    let model = laplace(1000);
    let (h, _) = model.assemble::<f64>(1e-6).unwrap();
    let stats = h.dynamic_range_stats().unwrap();
    assert_eq!(stats.samples.len(), h.leaves().iter().map(|l| if matches!(l.node(), Node::Dense(_)) { 1 } else { 2 }).sum::<usize>());
    assert!(stats.fraction_within(20.0) >= 0.95);
    assert!(model.config.problem == Problem::LaplaceSphere);
}

#[test]
fn frobenius_norm_matches_dense() {
    let model = laplace(320);
    let (mut h, _) = model.assemble::<f64>(1e-6).unwrap();
    let expect = h.to_dense().unwrap().norm();
    assert!((h.norm_fro().unwrap() - expect).abs() <= 1e-10 * expect);
    h.compress_in_place(1e-6, StorageMode::Mixed, true).unwrap();
    let expect = h.to_dense().unwrap().norm();
    assert!((h.norm_fro().unwrap() - expect).abs() <= 1e-10 * expect);
}
