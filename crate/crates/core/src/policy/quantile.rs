//! Standard normal CDF and quantile.
//!
//! The quantile starts from Acklam's rational approximation (relative error
//! about 1e-9) and polishes it with two Newton steps against the erfc-based
//! CDF. Work is done in the lower tail and mirrored, so `1 - p` is never
//! formed for small upper-tail masses.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// `Φ(z)`.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `P(Z ≥ w) = 1 - Φ(w)`, accurate for large `w`.
pub fn norm_sf(w: f64) -> f64 {
    0.5 * libm::erfc(w * FRAC_1_SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `Φ⁻¹(p)` for `p` in the open unit interval.
pub fn inv_norm_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(p));
    }
    Ok(if p <= 0.5 {
        lower_quantile(p)
    } else {
        -lower_quantile(1.0 - p)
    })
}

/// `Φ⁻¹(1 - alpha)` computed without cancellation for small `alpha`.
pub fn upper_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(alpha));
    }
    Ok(if alpha <= 0.5 {
        -lower_quantile(alpha)
    } else {
        lower_quantile(1.0 - alpha)
    })
}

/// Quantile for `0 < p <= 0.5`.
fn lower_quantile(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let mut z = acklam(p);
    for _ in 0..2 {
        let pdf = norm_pdf(z);
        if pdf == 0.0 {
            break;
        }
        z -= (norm_cdf(z) - p) / pdf;
    }
    z
}

#[allow(clippy::excessive_precision)]
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Quantile by bisection on the CDF, independent of the Newton path.
    fn bisect(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn median_is_zero() {
        assert_eq!(inv_norm_cdf(0.5).unwrap(), 0.0);
        assert_eq!(upper_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn known_points() {
        let z = inv_norm_cdf(0.975).unwrap();
        assert!((z - bisect(0.975)).abs() < 1e-9);
        assert!((z - 1.959964).abs() < 1e-5);
        let z = inv_norm_cdf(0.8413447).unwrap();
        assert!((z - 1.0).abs() < 1e-4);
        assert!((upper_quantile(0.05).unwrap() - 1.6448536).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(inv_norm_cdf(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn tails_are_symmetric() {
        for &p in &[1e-300, 1e-12, 1e-5, 0.01, 0.3] {
            let lo = inv_norm_cdf(p).unwrap();
            assert_eq!(upper_quantile(p).unwrap(), -lo);
            assert!((norm_cdf(lo) / p - 1.0).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn agrees_with_bisection() {
        for k in 1..200 {
            let p = k as f64 / 200.0;
            assert!((inv_norm_cdf(p).unwrap() - bisect(p)).abs() < 1e-10, "p = {p}");
        }
    }
}
