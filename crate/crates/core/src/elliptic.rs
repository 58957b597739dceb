//! Jacobi elliptic functions for real parameter `m = k²` in `[0, 1)`.
//!
//! Real arguments use the arithmetic–geometric mean (descending Landen)
//! scheme; complex arguments are assembled from real-argument values at the
//! parameters `m` and `1 - m` through the standard addition formulas.

use num_complex::Complex64;

const AGM_TOL: f64 = 1e-16;

/// Complete elliptic integral of the first kind `K(m)`.
pub fn complete_k(m: f64) -> f64 {
    assert!((0.0..1.0).contains(&m), "parameter m must lie in [0, 1)");
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// `(sn, cn, dn)` of a real argument.
pub fn sn_cn_dn(u: f64, m: f64) -> (f64, f64, f64) {
    assert!((0.0..1.0).contains(&m), "parameter m must lie in [0, 1)");
    if m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mut a = vec![1.0];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > AGM_TOL && a.len() < 64 {
        let an = *a.last().unwrap();
        let cn = 0.5 * (an - b);
        let next_a = 0.5 * (an + b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(cn);
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Quotients `sd = sn/dn`, `cd = cn/dn` and `nd = 1/dn` at a complex argument.
///
/// The shared denominator of the addition formulas cancels in the quotients,
/// which keeps them well conditioned near the poles of `sn`, `cn` and `dn`.
pub fn sd_cd_nd(u: Complex64, m: f64) -> (Complex64, Complex64, Complex64) {
    let (s, c, d) = sn_cn_dn(u.re, m);
    let (s1, c1, d1) = sn_cn_dn(u.im, 1.0 - m);
    let denom = Complex64::new(d * c1 * d1, -m * s * c * s1);
    let sn_num = Complex64::new(s * d1, c * d * s1 * c1);
    let cn_num = Complex64::new(c * c1, -s * d * s1 * d1);
    let common = Complex64::new(c1 * c1 + m * s * s * s1 * s1, 0.0);
    (sn_num / denom, cn_num / denom, common / denom)
}
