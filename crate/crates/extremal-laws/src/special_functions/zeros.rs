//! Positive zeros `j_{nu,n}` of `J_nu` and the spectral coefficients
//! `g_{nu,n} = (-1)^{n-1} j^{nu+1} / J_{nu+1}(j)`.

use super::bessel::{jv, jv_hankel, jv_series, SERIES_LIMIT};
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

const MAX_NEWTON: usize = 60;

/// `(J_nu(x), J_{nu+1}(x))`.
fn j_pair(nu: f64, x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        (jv_series(nu, x), jv_series(nu + 1.0, x))
    } else {
        (jv_hankel(nu, x), jv_hankel(nu + 1.0, x))
    }
}

/// McMahon's large-n expansion of the n-th zero.
pub(crate) fn mcmahon(nu: f64, n: usize) -> f64 {
    mcmahon_at(nu, n as f64)
}

/// McMahon's expansion with a continuous index.
pub(crate) fn mcmahon_at(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let b = (x + 0.5 * nu - 0.25) * PI;
    let e = 1.0 / (8.0 * b);
    let e2 = e * e;
    let m1 = mu - 1.0;
    b - m1 * e
        - 4.0 * m1 * (7.0 * mu - 31.0) * e * e2 / 3.0
        - 32.0 * m1 * (83.0 * mu * mu - 982.0 * mu + 3779.0) * e * e2 * e2 / 15.0
}

/// n-th positive zero of `J_nu`, `n >= 1`, `nu > -1`.
pub(crate) fn find_zero(nu: f64, n: usize) -> Result<f64> {
    let guess = mcmahon(nu, n).max(1e-3);
    let lo0 = (guess - FRAC_PI_2).max(1e-12);
    let hi0 = guess + FRAC_PI_2;
    let mut x = guess;
    for _ in 0..MAX_NEWTON {
        let (j0, j1) = j_pair(nu, x);
        let d = nu / x * j0 - j1;
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = j0 / d;
        let nx = x - step;
        if !(nx > lo0 && nx < hi0) {
            break;
        }
        x = nx;
        if step.abs() <= 4e-16 * x {
            // one more step to settle the last bit
            let (j0, j1) = j_pair(nu, x);
            let d = nu / x * j0 - j1;
            let nx = x - j0 / d;
            if nx > lo0 && nx < hi0 {
                x = nx;
            }
            return Ok(x);
        }
    }
    bisect_zero(nu, n, lo0, hi0)
}

fn bisect_zero(nu: f64, n: usize, lo0: f64, hi0: f64) -> Result<f64> {
    // scan the bracket for a sign change nearest the middle
    let steps = 64;
    let h = (hi0 - lo0) / steps as f64;
    let mid = 0.5 * (lo0 + hi0);
    let mut best: Option<(f64, f64)> = None;
    let mut prev_x = lo0;
    let mut prev_f = jv(nu, lo0);
    for i in 1..=steps {
        let x = lo0 + h * i as f64;
        let f = jv(nu, x);
        if prev_f.signum() != f.signum() {
            let c = 0.5 * (prev_x + x);
            if best.map_or(true, |(a, b)| (c - mid).abs() < (0.5 * (a + b) - mid).abs()) {
                best = Some((prev_x, x));
            }
        }
        prev_x = x;
        prev_f = f;
    }
    let (mut a, mut b) = best.ok_or_else(|| {
        Error::NonConvergence(format!("no sign change bracketing zero {n} of J_{nu}"))
    })?;
    let mut fa = jv(nu, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = jv(nu, m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// `g_{nu,n}` given the zero `j = j_{nu,n}`.
pub(crate) fn coeff_at(nu: f64, n: usize, j: f64) -> f64 {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let j1 = if j <= SERIES_LIMIT {
        jv_series(nu + 1.0, j)
    } else {
        jv_hankel(nu + 1.0, j)
    };
    sign * j.powf(nu + 1.0) / j1
}
