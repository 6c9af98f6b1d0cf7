//! Bessel functions of the first kind `J_nu` and modified `I_nu` for real
//! order `nu > -1` and nonnegative argument.

use super::dd::Dd;
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Arguments up to this value use the power series; beyond it the Hankel
/// asymptotic expansion is used.
pub const SERIES_LIMIT: f64 = 25.0;

/// `I_nu` overflows f64 a little beyond this argument.
pub const I_OVERFLOW_LIMIT: f64 = 700.0;

/// `J_nu(x)`; assumes `nu > -1` and `x >= 0`.
pub(crate) fn jv(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x <= SERIES_LIMIT {
        jv_series(nu, x)
    } else {
        jv_hankel(nu, x)
    }
}

pub(crate) fn jv_series(nu: f64, x: f64) -> f64 {
    // sum_k (-x^2/4)^k / (k! (nu+1)_k), then scaled by (x/2)^nu / Gamma(nu+1)
    let q = Dd::from_f64(x).mul(Dd::from_f64(x)).mul_f64(0.25).neg();
    let mut term = Dd::from_f64(1.0);
    let mut sum = term;
    let mut k = 0.0_f64;
    loop {
        let d = Dd::from_f64(nu).add(Dd::from_f64(k + 1.0)).mul_f64(k + 1.0);
        term = term.mul(q).div(d);
        sum = sum.add(term);
        k += 1.0;
        if term.abs_f64() <= 1e-34 * sum.abs_f64().max(1e-300) && k > 0.5 * x {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum.to_f64() * (0.5 * x).powf(nu) / libm::tgamma(nu + 1.0)
}

pub(crate) fn jv_hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        let mag = a.abs();
        if mag > prev {
            break;
        }
        prev = mag;
        // signs: P gets (-1)^{k/2} a_k for even k, Q gets (-1)^{(k-1)/2} a_k for odd k
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let c = nu * FRAC_PI_2 + FRAC_PI_4;
    let (sx, cx) = x.sin_cos();
    let (sc, cc) = c.sin_cos();
    let cos_w = cx * cc + sx * sc;
    let sin_w = sx * cc - cx * sc;
    (2.0 / (PI * x)).sqrt() * (p * cos_w - q * sin_w)
}

#[cfg(test)]
/// `J_nu'(x)` via `(nu/x) J_nu - J_{nu+1}`.
pub(crate) fn jv_prime(nu: f64, x: f64) -> f64 {
    nu / x * jv(nu, x) - jv(nu + 1.0, x)
}

/// `I_nu(x)`; assumes `nu > -1`.
pub(crate) fn iv(nu: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    if x > I_OVERFLOW_LIMIT {
        return Err(Error::Overflow(format!("I_nu({x}) exceeds the f64 range")));
    }
    let q = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0.0_f64;
    loop {
        term *= q / ((k + 1.0) * (nu + k + 1.0));
        sum += term;
        k += 1.0;
        if term <= 1e-17 * sum && k > 0.5 * x {
            break;
        }
    }
    // keep the prefactor in log space so large x stays finite as long as possible
    let log_pref = nu * (0.5 * x).ln() - libm::lgamma(nu + 1.0);
    let v = sum * log_pref.exp();
    if !v.is_finite() {
        let lv = sum.ln() + log_pref;
        if lv > 709.0 {
            return Err(Error::Overflow(format!("I_nu({x}) exceeds the f64 range")));
        }
        return Ok(lv.exp());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn half_order_is_elementary() {
        for i in 1..=1000 {
            let x = 0.1 * i as f64;
            let exact = (2.0 / (PI * x)).sqrt() * x.sin();
            let got = jv(0.5, x);
            let tol = 1e-12 * exact.abs() + 1e-15;
            assert!((got - exact).abs() <= tol, "x={x} got={got} exact={exact}");
        }
    }

    #[test]
    fn minus_half_order_is_cosine() {
        for i in 1..=400 {
            let x = 0.25 * i as f64;
            let exact = (2.0 / (PI * x)).sqrt() * x.cos();
            assert!((jv(-0.5, x) - exact).abs() <= 1e-12 * exact.abs() + 1e-15);
        }
    }

    #[test]
    fn branches_agree_in_overlap_window() {
        for &nu in &[-0.75, -0.5, 0.0, 0.3, 1.0, 2.5, 5.0, 6.0] {
            let mut x = 20.0;
            while x <= 30.0 {
                let s = jv_series(nu, x);
                let h = jv_hankel(nu, x);
                assert!((s - h).abs() < 2e-14, "nu={nu} x={x} series={s} hankel={h}");
                x += 0.37;
            }
        }
    }

    #[test]
    fn high_precision_reference_values() {
        // frozen from mpmath.besselj at 30 digits
        let cases = [
            (0.0, 1.0, 0.7651976865579666),
            (0.0, 10.0, -0.24593576445134835),
            (1.0, 3.0, 0.3390589585259365),
            (0.25, 7.5, 0.2910090167953139),
            (-0.75, 0.3, 1.0422621958764426),
            (2.5, 40.0, -0.08751431140932354),
            (5.0, 100.0, -0.07419573696451393),
            (0.2, 999.0, 0.010858935888166221),
        ];
        for (nu, x, v) in cases {
            assert!(rel(jv(nu, x), v) < 1e-12, "nu={nu} x={x} got {} want {v}", jv(nu, x));
        }
    }

    #[test]
    fn modified_half_orders() {
        let x = 1.0;
        assert!(rel(iv(0.5, x).unwrap(), (2.0 / PI).sqrt() * x.sinh()) < 1e-14);
        let x = 2.0;
        assert!(rel(iv(-0.5, x).unwrap(), (1.0 / PI).sqrt() * x.cosh()) < 1e-14);
        assert_eq!(iv(0.0, 0.0).unwrap(), 1.0);
        for &x in &[0.3_f64, 5.0, 20.0, 50.0] {
            let exact = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!(rel(iv(0.5, x).unwrap(), exact) < 1e-13);
        }
    }

    #[test]
    fn modified_overflow_is_signalled() {
        assert!(matches!(iv(0.0, 800.0), Err(Error::Overflow(_))));
    }
}
