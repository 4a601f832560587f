use nalgebra::DMatrix;

use crate::bytes::Cursor;
use crate::error::{corrupt, Result};
use crate::lowrank::{LowrankBlock, OrthoLowrank};
use crate::scalar::Real;

use super::{factorize, ortho_to_lowrank, read_sigma, write_sigma, Precision, Stored, MP_D_S_H};

/// Group sizes for descending `sigma` and ascending unit roundoffs.
///
/// `sigma_j` joins the first group `i < p-1` with `sigma_j > delta/u_{i+1}`;
/// the last group takes the rest above `delta`, values `<= delta` are dropped.
pub fn mp_partition(sigma: &[f64], delta: f64, roundoffs: &[f64]) -> Vec<usize> {
    let p = roundoffs.len();
    let mut ranks = vec![0; p];
    if p == 0 {
        return ranks;
    }
    for &s in sigma.iter().take_while(|&&s| s > delta) {
        let group = (0..p - 1).find(|&i| s > delta / roundoffs[i + 1]).unwrap_or(p - 1);
        ranks[group] += 1;
    }
    ranks
}

/// `(2p - 1 + sum_{i>=1} sqrt(k_i) u_i) delta` with `p = roundoffs.len()`.
pub fn mp_error_bound(group_ranks: &[usize], roundoffs: &[f64], delta: f64) -> f64 {
    let p = roundoffs.len();
    if p == 0 {
        return delta;
    }
    let tail: f64 = group_ranks
        .iter()
        .zip(roundoffs)
        .skip(1)
        .map(|(&k, &u)| (k as f64).sqrt() * u)
        .sum();
    (2.0 * p as f64 - 1.0 + tail) * delta
}

/// Column slices of `W` and `X` stored in one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct MpGroup {
    pub rank: usize,
    pub w: Stored,
    pub x: Stored,
}

impl MpGroup {
    pub fn precision(&self) -> Precision {
        self.w.precision()
    }
}

/// Mixed-precision lowrank block `sum_i W_i Sigma_i X_i^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct MpLowrank {
    rows: usize,
    cols: usize,
    pub sigma: Vec<f64>,
    pub groups: Vec<MpGroup>,
}

impl MpLowrank {
    /// Partitions an orthonormal factorization into `precisions` by `delta`.
    pub fn from_factors(f: &OrthoLowrank<f64>, delta: f64, precisions: &[Precision]) -> Self {
        let (rows, cols) = (f.w.nrows(), f.x.nrows());
        let roundoffs: Vec<f64> = precisions.iter().map(|p| p.unit_roundoff()).collect();
        let ranks = mp_partition(f.sigma.as_slice(), delta, &roundoffs);
        let mut start = 0;
        let groups = precisions
            .iter()
            .zip(&ranks)
            .map(|(&prec, &k)| {
                let w = f.w.columns(start, k).into_owned();
                let x = f.x.columns(start, k).into_owned();
                start += k;
                MpGroup {
                    rank: k,
                    w: Stored::from_f64(w.as_slice(), prec),
                    x: Stored::from_f64(x.as_slice(), prec),
                }
            })
            .collect();
        Self {
            rows,
            cols,
            sigma: f.sigma.as_slice()[..start].to_vec(),
            groups,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn group_ranks(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.rank).collect()
    }

    /// Decoded `(W, sigma, X)`.
    pub fn factors(&self) -> OrthoLowrank<f64> {
        let k = self.rank();
        let mut w = DMatrix::zeros(self.rows, k);
        let mut x = DMatrix::zeros(self.cols, k);
        let mut start = 0;
        for g in &self.groups {
            w.columns_mut(start, g.rank).copy_from_slice(&g.w.to_f64());
            x.columns_mut(start, g.rank).copy_from_slice(&g.x.to_f64());
            start += g.rank;
        }
        OrthoLowrank {
            w,
            sigma: self.sigma.clone().into(),
            x,
        }
    }

    pub fn byte_size(&self) -> usize {
        4 + 8 * self.rank() + 1 + self.groups.iter().map(|g| 5 + g.w.byte_size() + g.x.byte_size()).sum::<usize>()
    }

    /// `[u32 rank][f64 sigma..][u8 groups]` then per group
    /// `[u8 precision][u32 k_i][W_i][X_i]`.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        write_sigma(&self.sigma, out);
        out.push(self.groups.len() as u8);
        for g in &self.groups {
            out.push(g.precision().tag());
            out.extend_from_slice(&(g.rank as u32).to_le_bytes());
            g.w.write_to(out);
            g.x.write_to(out);
        }
    }

    pub fn from_bytes(data: &[u8], rows: usize, cols: usize) -> Result<(Self, usize)> {
        let mut r = Cursor::new(data);
        let sigma = read_sigma(&mut r)?;
        let ngroups = r.u8()? as usize;
        let mut groups = Vec::with_capacity(ngroups);
        for _ in 0..ngroups {
            let prec = Precision::from_tag(r.u8()?)?;
            let rank = r.u32()? as usize;
            let w = Stored::read_from(&mut r, prec, rows.saturating_mul(rank))?;
            let x = Stored::read_from(&mut r, prec, cols.saturating_mul(rank))?;
            groups.push(MpGroup { rank, w, x });
        }
        if groups.iter().map(|g| g.rank).sum::<usize>() != sigma.len() {
            return Err(corrupt("group ranks do not sum to the rank"));
        }
        Ok((
            Self {
                rows,
                cols,
                sigma,
                groups,
            },
            r.position(),
        ))
    }
}

/// MP-D-S-H compression with `delta = eps * sigma_0`.
pub fn mp_compress<T: Real>(lr: &LowrankBlock<T>, eps: f64) -> Result<MpLowrank> {
    mp_compress_with(lr, eps, &MP_D_S_H)
}

pub fn mp_compress_with<T: Real>(lr: &LowrankBlock<T>, eps: f64, precisions: &[Precision]) -> Result<MpLowrank> {
    let f = factorize(lr, eps)?;
    let delta = f.sigma.iter().next().map_or(0.0, |&s0| eps * s0);
    Ok(MpLowrank::from_factors(&f, delta, precisions))
}

/// Factors `U = W Sigma`, `V = X`.
pub fn mp_decompress(rep: &MpLowrank) -> LowrankBlock<f64> {
    let f = rep.factors();
    ortho_to_lowrank(f.w, &rep.sigma, f.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const U: [f64; 3] = [1.1e-16, 6.0e-8, 4.9e-4];

    #[test]
    fn partition_example() {
        assert_eq!(mp_partition(&[1.0, 1e-1, 1e-3, 1e-6], 1e-8, &U), vec![1, 2, 1]);
        assert_eq!(mp_partition(&[1e-9, 1e-10], 1e-8, &U), vec![0, 0, 0]);
        assert_eq!(mp_partition(&[1.0, 1e-3, 1e-8, 1e-9], 1e-8, &[1.1e-16]), vec![2]);
    }

    #[test]
    fn error_bound_formula() {
        assert_eq!(mp_error_bound(&[3], &[1.1e-16], 2.0), 2.0);
        let b = mp_error_bound(&[1, 2, 1], &U, 1e-8);
        let expect = (5.0 + 2f64.sqrt() * 6.0e-8 + 4.9e-4) * 1e-8;
        assert!((b - expect).abs() <= 1e-15 * expect);
        assert!(mp_error_bound(&[1, 3, 1], &U, 1e-8) >= b);
        assert!(mp_error_bound(&[1, 2, 2], &U, 1e-8) >= b);
    }

    #[test]
    fn rank_zero_and_rank_one() {
        let lr = LowrankBlock::<f64>::zeros(5, 4);
        let mp = mp_compress(&lr, 1e-6).unwrap();
        assert_eq!(mp.rank(), 0);
        assert_eq!(mp_decompress(&mp).rank(), 0);

        let u = DMatrix::from_fn(6, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let v = DMatrix::from_fn(5, 1, |i, _| if i == 2 { 1.0 } else { 0.0 });
        let mp = mp_compress(&LowrankBlock::new(u, v).unwrap(), 1e-10).unwrap();
        assert_eq!(mp.group_ranks(), vec![1, 0, 0]);
        assert_eq!(mp.groups[0].precision(), Precision::Fp64);
    }

    #[test]
    fn serialization_roundtrip() {
        let u = DMatrix::from_fn(7, 3, |i, j| ((i + 2 * j) as f64).sin() * 10f64.powi(-(2 * j as i32)));
        let v = DMatrix::from_fn(5, 3, |i, j| ((3 * i + j) as f64).cos());
        let mp = mp_compress(&LowrankBlock::new(u, v).unwrap(), 1e-9).unwrap();
        let mut bytes = Vec::new();
        mp.write_to(&mut bytes);
        assert_eq!(bytes.len(), mp.byte_size());
        let (back, used) = MpLowrank::from_bytes(&bytes, 7, 5).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back, mp);
        assert!(MpLowrank::from_bytes(&bytes[..bytes.len() - 1], 7, 5).is_err());
    }
}
