use hcompress::geometry::{generate_points, Problem};
use hcompress::kernels::{assemble_dense, bessel_k, EntrySource, LaplaceSlp, MaternCovariance, MaternParams};
use nalgebra::DMatrix;

/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt` by the trapezoidal
/// rule, which converges geometrically for this integrand.
fn bessel_k_quadrature(nu: f64, x: f64) -> f64 {
    let h = 1.0 / 64.0;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    loop {
        let v = f(k as f64 * h);
        sum += v;
        if v < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    sum * h
}

#[test]
fn bessel_matches_quadrature_oracle() {
    let rel = |nu: f64, x: f64| {
        let expect = bessel_k_quadrature(nu, x);
        (bessel_k(nu, x).unwrap() - expect).abs() / expect
    };
    assert!(rel(1.0 / 3.0, 1.0) <= 1e-10);
    for nu in [0.1, 1.0 / 3.0, 0.5, 0.9, 1.0, 1.7, 2.0, 2.5, 4.0, 5.0] {
        for x in [1e-6, 1e-3, 0.1, 0.5, 1.0, 1.9, 2.1, 5.0, 10.0, 25.0, 50.0] {
            let e = rel(nu, x);
            assert!(e <= 1e-10, "nu {nu} x {x}: {e:e}");
        }
    }
}

#[test]
fn bessel_is_positive_and_decreasing() {
    let mut prev = f64::INFINITY;
    for k in 1..400 {
        let v = bessel_k(1.0 / 3.0, k as f64 * 0.1).unwrap();
        assert!(v > 0.0 && v < prev);
        prev = v;
    }
    assert!(bessel_k(1.0, 0.0).is_err());
    assert!(bessel_k(1.0, -2.0).is_err());
}

fn matern(points: usize, params: MaternParams) -> MaternCovariance {
    let pts = generate_points(Problem::MaternRandomSphere, points, 42).unwrap();
    MaternCovariance::new(&pts, params).unwrap()
}

#[test]
fn matern_matches_quadrature_oracle() {
    let m = matern(4, MaternParams::default());
    let nu: f64 = 1.0 / 3.0;
    let d = 0.5;
    let z = (2.0 * nu).sqrt() * d;
    let gamma_nu = 2.678_938_534_707_747_6; // Gamma(1/3)
    let expect = 2f64.powf(1.0 - nu) / gamma_nu * z.powf(nu) * bessel_k_quadrature(nu, z);
    assert!((m.covariance(d) - expect).abs() <= 1e-10 * expect);
}

#[test]
fn matern_closed_form_and_monotone() {
    let m = matern(4, MaternParams { variance: 1.0, range: 1.0, smoothness: 0.5 });
    assert!((m.covariance(1.0) - (-1.0f64).exp()).abs() < 1e-12);
    let m = matern(4, MaternParams::default());
    assert_eq!(m.covariance(0.0), 1.0);
    let mut prev = 1.0;
    for k in 1..200 {
        let c = m.covariance(k as f64 * 0.01);
        assert!(c < prev);
        prev = c;
    }
}

#[test]
fn matern_matrix_is_spd_with_jitter() {
    let m = matern(512, MaternParams::default()).with_jitter(1e-12);
    let d = assemble_dense::<f64, _>(&m);
    assert_eq!(d, d.transpose());
    assert!(d.cholesky().is_some());
}

#[test]
fn laplace_matrix_is_symmetric_positive() {
    let pts = generate_points(Problem::LaplaceSphere, 320, 0).unwrap();
    let k = LaplaceSlp::new(&pts).unwrap();
    let d: DMatrix<f64> = assemble_dense(&k);
    assert_eq!(d, d.transpose());
    let eig = d.symmetric_eigenvalues();
    assert!(eig.min() > 0.0, "min eigenvalue {}", eig.min());
    assert!((0..k.nrows()).all(|i| (0..k.ncols()).all(|j| k.entry(i, j).is_finite())));
}

#[test]
fn laplace_admissible_blocks_have_low_rank() {
    use hcompress::model::{Model, ModelConfig};
    let model = Model::build(ModelConfig::laplace(1280)).unwrap();
    let bt = model.block_tree();
    let d = assemble_dense::<f64, _>(&model.kernel);
    let mut checked = 0;
    for leaf in bt.leaves().into_iter().filter(|b| b.admissible) {
        let (r, c) = (leaf.rows.clone(), leaf.cols.clone());
        let block = d.view((r.start, c.start), (r.len(), c.len())).into_owned();
        let sv = block.singular_values();
        let k = sv.iter().filter(|s| **s > 1e-6 * sv[0]).count();
        let m = r.len().min(c.len());
        assert!(2 * k <= m, "rank {k} of {}x{}", r.len(), c.len());
        if m >= 80 {
            assert!(4 * k <= m, "rank {k} of {}x{}", r.len(), c.len());
            checked += 1;
        }
    }
    assert!(checked > 0);
}
