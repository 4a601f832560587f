use nalgebra::{DMatrix, DVector};

use crate::kernels::EntrySource;
use crate::scalar::Real;

use super::LowrankBlock;

/// Result of a cross approximation.
#[derive(Clone, Debug)]
pub struct AcaApproximation<T: Real> {
    pub block: LowrankBlock<T>,
    /// Set when `k_max` crosses were taken without meeting the stopping rule.
    pub rank_capped: bool,
}

/// Adaptive cross approximation with partial pivoting.
///
/// Starts at row 0; each following row is the unused row with the largest
/// entry of the previous cross column. Stops once `|u_k| |v_k| <= eps |S_k|_F`
/// where `S_k` is the running approximation.
pub fn aca_approximate<T: Real, K: EntrySource + ?Sized>(src: &K, eps: f64, k_max: usize) -> AcaApproximation<T> {
    let (m, n) = (src.nrows(), src.ncols());
    let mut us: Vec<DVector<T>> = Vec::new();
    let mut vs: Vec<DVector<T>> = Vec::new();
    let mut row_used = vec![false; m];
    let mut norm2 = 0.0f64;
    let mut next_row = if m > 0 { Some(0) } else { None };
    let mut converged = m == 0 || n == 0;

    while !converged && us.len() < k_max {
        let Some(i) = next_row else {
            // every row has been visited and was zero in the residual
            converged = true;
            break;
        };
        row_used[i] = true;

        let mut row = DVector::from_fn(n, |j, _| T::cast(src.entry(i, j)));
        for (u, v) in us.iter().zip(&vs) {
            row.axpy(-u[i], v, T::one());
        }
        let (j, pivot) = argmax_abs(&row);
        if pivot == T::zero() {
            next_row = row_used.iter().position(|&used| !used);
            continue;
        }
        let v = row / pivot;

        let mut col = DVector::from_fn(m, |r, _| T::cast(src.entry(r, j)));
        for (u, vl) in us.iter().zip(&vs) {
            col.axpy(-vl[j], u, T::one());
        }
        let u = col;

        let (nu, nv) = (u.norm().as_f64(), v.norm().as_f64());
        let mut cross = 0.0;
        for (ul, vl) in us.iter().zip(&vs) {
            cross += (ul.dot(&u) * vl.dot(&v)).as_f64();
        }
        norm2 += 2.0 * cross + nu * nu * nv * nv;

        next_row = u
            .iter()
            .enumerate()
            .filter(|(r, _)| !row_used[*r])
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(r, _)| r);
        us.push(u);
        vs.push(v);
        if nu * nv <= eps * norm2.max(0.0).sqrt() {
            converged = true;
        }
    }

    let k = us.len();
    let mut u = DMatrix::zeros(m, k);
    let mut v = DMatrix::zeros(n, k);
    for (l, (ul, vl)) in us.iter().zip(&vs).enumerate() {
        u.set_column(l, ul);
        v.set_column(l, vl);
    }
    AcaApproximation {
        block: LowrankBlock { u, v },
        rank_capped: !converged,
    }
}

fn argmax_abs<T: Real>(x: &DVector<T>) -> (usize, T) {
    let mut best = (0, T::zero());
    for (j, &val) in x.iter().enumerate() {
        if val.abs() > best.1.abs() {
            best = (j, val);
        }
    }
    best
}
