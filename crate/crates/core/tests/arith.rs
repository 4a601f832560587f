use hcompress::arith::{
    hlu, hlu_in_place, hmul, lu_residual_norm, trsm_lower, trsm_upper, truncate_compressed, ArithmeticMode, Strategy,
};
use hcompress::geometry::Admissibility;
use hcompress::hmatrix::{HMatrix, Node, StorageMode};
use hcompress::kernels::assemble_dense;
use hcompress::lowrank::LowrankBlock;
use hcompress::model::{Model, ModelConfig};
use hcompress::Error;
use nalgebra::DMatrix;

const STRATEGIES: [Strategy; 2] = [Strategy::Eager, Strategy::Accumulate];

fn model(mut cfg: ModelConfig, n_min: usize) -> Model {
    cfg.n_min = n_min;
    Model::build(cfg).unwrap()
}

fn matern(n: usize) -> Model {
    model(ModelConfig::matern(n), 32)
}

fn laplace_standard(n: usize) -> Model {
    model(ModelConfig::laplace(n), 20)
}

fn mode(strategy: Strategy, storage: StorageMode, eps: f64) -> ArithmeticMode {
    ArithmeticMode::new(strategy, storage, eps).unwrap()
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn multiplication_matches_dense() {
    for m in [matern(256), laplace_standard(320)] {
        let eps = 1e-8;
        let (a, _) = m.assemble::<f64>(eps).unwrap();
        let ad = a.to_dense().unwrap();
        for strategy in STRATEGIES {
            let mut c = a.clone();
            hmul(-0.5, &a, &a, &mut c, mode(strategy, StorageMode::Raw, eps)).unwrap();
            let expect = &ad - &ad * &ad * 0.5;
            let err = rel(&c.to_dense().unwrap(), &expect);
            assert!(err < 100.0 * eps, "{strategy}: {err}");
            assert!(c.same_structure(&a));
        }
    }
}

#[test]
fn triangular_solves_match_dense() {
    let m = matern(256);
    let eps = 1e-10;
    let (a, _) = m.assemble::<f64>(eps).unwrap();
    for strategy in STRATEGIES {
        let md = mode(strategy, StorageMode::Raw, eps);
        let (f, _) = hlu(&a, md).unwrap();
        let (l, u) = f.to_dense().unwrap();
        let bd = a.to_dense().unwrap();

        let mut b = a.clone();
        trsm_lower(f.matrix(), &mut b, md).unwrap();
        let x = b.to_dense().unwrap();
        assert!(rel(&(&l * &x), &bd) < 100.0 * eps, "{strategy} lower");

        let mut b = a.clone();
        trsm_upper(f.matrix(), &mut b, md).unwrap();
        let x = b.to_dense().unwrap();
        assert!(rel(&(&x * &u), &bd) < 100.0 * eps, "{strategy} upper");
    }
}

#[test]
fn lu_reproduces_matrix() {
    for m in [matern(512), laplace_standard(320)] {
        let eps = 1e-8;
        let (a, _) = m.assemble::<f64>(eps).unwrap();
        let ad = a.to_dense().unwrap();
        for strategy in STRATEGIES {
            let (f, stats) = hlu(&a, mode(strategy, StorageMode::Raw, eps)).unwrap();
            let (l, u) = f.to_dense().unwrap();
            let err = rel(&(&l * &u), &ad);
            assert!(err < 100.0 * eps, "{strategy}: {err}");
            assert!(l.upper_triangle() == DMatrix::identity(ad.nrows(), ad.ncols()));
            if strategy == Strategy::Accumulate {
                assert!(stats.accumulators_peak <= m.tree.depth() + 1, "{stats:?}");
                assert_eq!(stats.accumulators_alive, 0);
            } else {
                assert_eq!(stats.accumulators_created, 0);
            }
        }
    }
}

#[test]
fn lu_with_compressed_storage() {
    let m = matern(512);
    let eps = 1e-6;
    let (a, _) = m.assemble::<f64>(eps).unwrap();
    let ad = a.to_dense().unwrap();
    for storage in StorageMode::ALL {
        for strategy in STRATEGIES {
            let (f, _) = hlu(&a, mode(strategy, storage, eps)).unwrap();
            let (l, u) = f.to_dense().unwrap();
            let err = rel(&(&l * &u), &ad);
            assert!(err < 200.0 * eps, "{storage} {strategy}: {err}");
            if !storage.is_raw() {
                assert!(f.matrix().is_compressed(), "{storage}");
            }
        }
    }
}

#[test]
fn residual_estimate_matches_dense() {
    let m = matern(256);
    let eps = 1e-4;
    let (a, _) = m.assemble::<f64>(eps).unwrap();
    let (f, _) = hlu(&a, mode(Strategy::Accumulate, StorageMode::Raw, eps)).unwrap();
    let est = lu_residual_norm(&a, &f, 7).unwrap();
    let ad = a.to_dense().unwrap();
    let (l, u) = f.to_dense().unwrap();
    let lu_inv = (&l * &u).try_inverse().unwrap();
    let b = DMatrix::identity(256, 256) - &ad * lu_inv;
    let exact = b.singular_values()[0];
    assert!(est <= exact * 1.0001 && est >= 0.9 * exact, "est {est} exact {exact}");
    assert!(est > 0.0 && est < 1e-1);
}

#[test]
fn solve_inverts_matrix() {
    let m = laplace_standard(320);
    let eps = 1e-10;
    let (a, _) = m.assemble::<f64>(eps).unwrap();
    let (f, _) = hlu(&a, mode(Strategy::Accumulate, StorageMode::Raw, eps)).unwrap();
    let ad = a.to_dense().unwrap();
    let x0 = DMatrix::from_fn(320, 2, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
    let mut x = &ad * &x0;
    f.solve(&mut x).unwrap();
    assert!(rel(&x, &x0) < 1e-6);
    let mut y = ad.transpose() * &x0;
    f.solve_transposed(&mut y).unwrap();
    assert!(rel(&y, &x0) < 1e-6);
}

#[test]
fn eager_writes_leaves_more_often() {
    let m = matern(512);
    let eps = 1e-6;
    let (a, _) = m.assemble::<f64>(eps).unwrap();
    let (_, eager) = hlu(&a, mode(Strategy::Eager, StorageMode::Raw, eps)).unwrap();
    let (_, acc) = hlu(&a, mode(Strategy::Accumulate, StorageMode::Raw, eps)).unwrap();
    assert!(eager.leaf_writes > acc.leaf_writes, "{} vs {}", eager.leaf_writes, acc.leaf_writes);
    assert_eq!(acc.leaf_writes, a.leaves().len());
}

#[test]
fn singular_pivot_reports_block() {
    let m = matern(256);
    let (a, _) = m.assemble::<f64>(1e-6).unwrap();
    let zero = a.zeros_like();
    for strategy in STRATEGIES {
        let mut z = zero.clone();
        match hlu_in_place(&mut z, mode(strategy, StorageMode::Raw, 1e-6)) {
            Err(Error::Singular { rows, cols, pivot }) => {
                assert_eq!(rows, cols);
                assert_eq!(rows.start, 0);
                assert_eq!(pivot, 0);
            }
            other => panic!("expected a singular error, got {other:?}"),
        }
    }
}

#[test]
fn lowrank_diagonal_is_rejected() {
    let lr = LowrankBlock::new(DMatrix::from_element(8, 1, 1.0), DMatrix::from_element(8, 1, 1.0)).unwrap();
    let mut h = HMatrix::lowrank(0..8, 0..8, lr).unwrap();
    let md = mode(Strategy::Eager, StorageMode::Raw, 1e-6);
    assert!(matches!(hlu_in_place(&mut h, md), Err(Error::InvalidArgument(_))));
}

#[test]
fn single_precision_lu() {
    let m = matern(256);
    let eps = 1e-4;
    let (a, _) = m.assemble::<f32>(eps).unwrap();
    let ad = a.to_dense().unwrap();
    for strategy in STRATEGIES {
        let (f, _) = hlu(&a, mode(strategy, StorageMode::Raw, eps)).unwrap();
        let (l, u) = f.to_dense().unwrap();
        let err = (&l * &u - &ad).norm() / ad.norm();
        assert!(err < 100.0 * eps as f32, "{strategy}: {err}");
        assert!(lu_residual_norm(&a, &f, 1).unwrap() < 1.0);
    }
}

#[test]
fn dense_only_lu_is_exact() {
    let mut cfg = ModelConfig::laplace(320);
    cfg.admissibility = Admissibility::Dense;
    cfg.n_min = 40;
    let m = Model::build(cfg).unwrap();
    let (a, _) = m.assemble::<f64>(1e-4).unwrap();
    let ad = assemble_dense::<f64, _>(&m.kernel);
    let (f, _) = hlu(&a, mode(Strategy::Eager, StorageMode::Raw, 1e-4)).unwrap();
    let (l, u) = f.to_dense().unwrap();
    assert!(rel(&(&l * &u), &ad) < 1e-13);
}

#[test]
fn truncation_of_compressed_factors() {
    let m = matern(256);
    let eps = 1e-6;
    let (mut a, _) = m.assemble::<f64>(eps).unwrap();
    a.compress_in_place(eps, StorageMode::Codec(hcompress::codec::Scheme::Afl), false).unwrap();
    for leaf in a.leaves() {
        if let Node::Lowrank(data) = leaf.node() {
            let before = data.factors(leaf.nrows(), leaf.ncols()).unwrap().to_dense();
            let t = truncate_compressed(data, leaf.nrows(), leaf.ncols(), StorageMode::Raw, eps).unwrap();
            let after = t.factors(leaf.nrows(), leaf.ncols()).unwrap().to_dense();
            assert!(rel(&after, &before) < 10.0 * eps);
            assert!(t.rank() <= data.rank());
        }
    }
}
