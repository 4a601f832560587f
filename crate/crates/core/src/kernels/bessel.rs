//! Modified Bessel function of the second kind.
//!
//! `K_nu(x)` is computed for the reduced order `mu = nu - round(nu)` with
//! Temme's series (`x < 2`) or Steed's continued fraction (`x >= 2`), then
//! raised to `nu` by forward recurrence, which is stable for `K`.
//! The Gamma-function ratios needed by the series are evaluated from the
//! Taylor expansion of `ln Gamma(1 + z)` with zeta-function coefficients.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;

/// `K_nu(x)` for `nu >= 0` and `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("bessel_k requires x > 0, got {x}")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(invalid(format!("bessel_k requires nu >= 0, got {nu}")));
    }
    Ok(k_unchecked(nu, x))
}

pub(crate) fn k_unchecked(nu: f64, x: f64) -> f64 {
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let (mut k_mu, mut k_mu1) = if x < 2.0 { temme(mu, x) } else { steed(mu, x) };
    let xi2 = 2.0 / x;
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    k_mu
}

/// `(K_mu(x), K_{mu+1}(x))` for `|mu| <= 1/2`, `x < 2`.
fn temme(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let g = GammaRatios::new(mu);
    let mut ff = fact * (g.gam1 * e.cosh() + g.gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = 0.5 * e / g.gampl;
    let mut q = 0.5 / (e * g.gammi);
    let mut c = 1.0;
    let d = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= d / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// `(K_mu(x), K_{mu+1}(x))` for `|mu| <= 1/2`, `x >= 2`.
fn steed(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_mu1)
}

/// `1/Gamma(1 -+ mu)` and the symmetric combinations used by Temme's series.
struct GammaRatios {
    gam1: f64,
    gam2: f64,
    gampl: f64,
    gammi: f64,
}

impl GammaRatios {
    fn new(mu: f64) -> Self {
        // ln Gamma(1 + z) = even(z) + odd(z)
        let (even, odd_over_z) = ln_gamma_1p_parts(mu);
        let odd = odd_over_z * mu;
        let scale = (-even).exp();
        let sinhc = if odd.abs() < 1e-8 { 1.0 + odd * odd / 6.0 } else { odd.sinh() / odd };
        // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) = e^{-E} sinh(O) / mu
        let gam1 = scale * sinhc * odd_over_z;
        let gam2 = scale * odd.cosh();
        Self {
            gam1,
            gam2,
            gampl: scale * (-odd).exp(),
            gammi: scale * odd.exp(),
        }
    }
}

/// Coefficients `g_k` of `ln Gamma(1+z) = sum_k g_k z^k`, `|z| < 1`.
fn ln_gamma_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut g = vec![0.0, -EULER_GAMMA];
        for k in 2..=64u32 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            g.push(sign * zeta(k as f64) / k as f64);
        }
        g
    })
}

/// Riemann zeta for `s >= 2` by Euler-Maclaurin summation.
fn zeta(s: f64) -> f64 {
    const N: usize = 20;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // B_{2j} / (2j)! for j = 1..6
    let bernoulli = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (j, b) in bernoulli.iter().enumerate() {
        sum += b * rising * power;
        let k = 2 * j as i32 + 1;
        rising *= (s + k as f64) * (s + k as f64 + 1.0);
        power /= n * n;
    }
    sum
}

/// Splits `ln Gamma(1+z)` into its even part and its odd part divided by `z`.
fn ln_gamma_1p_parts(z: f64) -> (f64, f64) {
    let g = ln_gamma_coefficients();
    let z2 = z * z;
    let mut even = 0.0;
    let mut odd = 0.0;
    // Horner in z^2
    for k in (1..g.len()).rev() {
        if k % 2 == 0 {
            even = even * z2 + g[k];
        } else {
            odd = odd * z2 + g[k];
        }
    }
    (even * z2, odd)
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    assert!(x > 0.0, "gamma requires a positive argument");
    // shift into [1/2, 3/2) where Gamma(1+z), |z| <= 1/2, has a fast series
    let mut y = x;
    let mut factor = 1.0;
    while y >= 1.5 {
        y -= 1.0;
        factor *= y;
    }
    while y < 0.5 {
        factor /= y;
        y += 1.0;
    }
    let (even, odd_over_z) = ln_gamma_1p_parts(y - 1.0);
    factor * (even + odd_over_z * (y - 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-15);
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-15);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-15);
        // Gamma(1/3) Gamma(2/3) = 2 pi / sqrt(3)
        let refl = gamma(1.0 / 3.0) * gamma(2.0 / 3.0);
        assert!((refl - 2.0 * PI / 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn half_order_closed_form() {
        for &x in &[1e-6, 1e-3, 0.1, 1.0, 1.9999, 2.0, 5.0, 20.0, 50.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            let k = bessel_k(0.5, x).unwrap();
            assert!(((k - exact) / exact).abs() < 1e-13, "x={x}: {k} vs {exact}");
            // K_{3/2}(x) = K_{1/2}(x) (1 + 1/x)
            let k32 = bessel_k(1.5, x).unwrap();
            assert!(((k32 - exact * (1.0 + 1.0 / x)) / k32).abs() < 1e-13);
        }
        assert!((bessel_k(0.5, 1.0).unwrap() - 0.461_068_504_447_894_4).abs() < 1e-15);
    }

    #[test]
    fn positive_and_decreasing() {
        for &nu in &[1.0 / 3.0, 0.5, 1.0, 2.7, 5.0] {
            let mut prev = f64::INFINITY;
            let mut x = 1e-6;
            while x < 50.0 {
                let k = bessel_k(nu, x).unwrap();
                assert!(k > 0.0 && k < prev, "nu={nu} x={x}");
                prev = k;
                x *= 1.3;
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(bessel_k(0.5, 0.0).is_err());
        assert!(bessel_k(0.5, -1.0).is_err());
        assert!(bessel_k(-0.5, 1.0).is_err());
    }

    #[test]
    fn series_and_fraction_agree_at_switch() {
        for &nu in &[0.1, 1.0 / 3.0, 0.5, 2.2] {
            let below = bessel_k(nu, 2.0 - 1e-12).unwrap();
            let above = bessel_k(nu, 2.0).unwrap();
            assert!(((below - above) / above).abs() < 1e-11);
        }
    }
}
