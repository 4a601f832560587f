use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::{LowrankBlock, OrthoLowrank};

/// Relative accuracy and optional rank cap for truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationCriterion {
    pub eps: f64,
    pub k_max: Option<usize>,
}

impl TruncationCriterion {
    pub fn new(eps: f64) -> Self {
        Self { eps, k_max: None }
    }

    pub fn with_max_rank(mut self, k_max: usize) -> Self {
        self.k_max = Some(k_max);
        self
    }

    fn rank<T: Real>(&self, sigma: &[T]) -> usize {
        let k = rank_from_singular_values(sigma, self.eps);
        self.k_max.map_or(k, |cap| k.min(cap))
    }
}

/// Number of singular values to keep: the index of the first `sigma_k` with
/// `sigma_k <= eps * sigma_0`, or 0 for a zero matrix.
pub fn rank_from_singular_values<T: Real>(sigma: &[T], eps: f64) -> usize {
    let Some(&s0) = sigma.first() else {
        return 0;
    };
    if s0 <= T::zero() {
        return 0;
    }
    let threshold = T::cast(eps) * s0;
    sigma.iter().position(|&s| s <= threshold).unwrap_or(sigma.len())
}

/// Recompresses `U V^T` to `W diag(sigma) X^T`: QR of both factors, SVD of
/// the small core `R_U R_V^T`, rank selection on its singular values.
pub fn svd_factorize<T: Real>(u: &DMatrix<T>, v: &DMatrix<T>, crit: TruncationCriterion) -> Result<OrthoLowrank<T>> {
    if u.ncols() != v.ncols() {
        return Err(invalid(format!(
            "non-conforming factors: {} vs {} columns",
            u.ncols(),
            v.ncols()
        )));
    }
    let (m, n) = (u.nrows(), v.nrows());
    if u.ncols() == 0 || m == 0 || n == 0 {
        return Ok(OrthoLowrank::empty(m, n));
    }
    let (q_u, r_u) = thin_qr(u);
    let (q_v, r_v) = thin_qr(v);
    let core = &r_u * r_v.transpose();
    let (u_s, sigma, v_s) = sorted_svd(core);
    let k = crit.rank(sigma.as_slice());
    Ok(OrthoLowrank {
        w: &q_u * u_s.columns(0, k),
        sigma: sigma.rows(0, k).into_owned(),
        x: &q_v * v_s.columns(0, k),
    })
}

/// Lowrank truncation `(U, V) -> (W, X)` with `W = Q_U U_s S_s`, `X = Q_V V_s`.
pub fn svd_truncate<T: Real>(u: &DMatrix<T>, v: &DMatrix<T>, crit: TruncationCriterion) -> Result<LowrankBlock<T>> {
    Ok(svd_factorize(u, v, crit)?.into_lowrank())
}

pub(crate) fn thin_qr<T: Real>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// SVD with singular values in descending order; returns `(U, sigma, V)`.
pub(crate) fn sorted_svd<T: Real>(a: DMatrix<T>) -> (DMatrix<T>, DVector<T>, DMatrix<T>) {
    let svd = a.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").transpose();
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return (u, s, v);
    }
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(v.nrows(), order.len(), |i, j| v[(i, order[j])]);
    let s = DVector::from_fn(order.len(), |j, _| s[order[j]]);
    (u, s, v)
}

/// Converts a dense block into truncated lowrank form.
pub(crate) fn dense_to_lowrank<T: Real>(d: &DMatrix<T>, crit: TruncationCriterion) -> OrthoLowrank<T> {
    if d.nrows() == 0 || d.ncols() == 0 {
        return OrthoLowrank::empty(d.nrows(), d.ncols());
    }
    let (u_s, sigma, v_s) = sorted_svd(d.clone());
    let k = crit.rank(sigma.as_slice());
    OrthoLowrank {
        w: u_s.columns(0, k).into_owned(),
        sigma: sigma.rows(0, k).into_owned(),
        x: v_s.columns(0, k).into_owned(),
    }
}
