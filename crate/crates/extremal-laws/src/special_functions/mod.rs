//! Bessel functions, their zeros and the spectral coefficients of the
//! first-hitting-time densities.

mod bessel;
mod dd;
mod zeros;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub(crate) use bessel::{iv, jv};
#[cfg(test)]
use bessel::jv_prime;

/// Largest supported order.
pub const NU_MAX: f64 = 5.0;

/// Bessel order `nu` with dimension `delta = 2(nu+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselOrder {
    nu: f64,
}

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= -1.0 {
            return Err(Error::Domain(format!("order nu = {nu} must exceed -1")));
        }
        if nu > NU_MAX {
            return Err(Error::Domain(format!("order nu = {nu} exceeds the supported maximum {NU_MAX}")));
        }
        Ok(BesselOrder { nu })
    }

    pub fn from_delta(delta: f64) -> Result<Self> {
        Self::new(0.5 * delta - 1.0)
    }

    #[inline]
    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        2.0 * (self.nu + 1.0)
    }

    /// `C_nu = 2^nu Gamma(nu+1)`.
    pub fn c(&self) -> f64 {
        c_nu(self.nu)
    }
}

/// `C_a = 2^a Gamma(a+1)` for any real `a` off the poles.
pub fn c_nu(a: f64) -> f64 {
    (a * std::f64::consts::LN_2).exp() * gamma(a + 1.0)
}

/// `1/C_a`, zero at the poles of `Gamma(a+1)`.
pub fn recip_c_nu(a: f64) -> f64 {
    (-a * std::f64::consts::LN_2).exp() * rgamma(a + 1.0)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `1/Gamma(x)`, exactly zero at nonpositive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / libm::tgamma(x)
    }
}

/// `J_nu(x)` for `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("J_nu requires x >= 0, got {x}")));
    }
    Ok(jv(order.nu, x))
}

/// `I_nu(x)` for `x >= 0`; overflow is an error.
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("I_nu requires x >= 0, got {x}")));
    }
    iv(order.nu, x)
}

/// n-th positive zero `j_{nu,n}` of `J_nu`.
pub fn bessel_zero(order: BesselOrder, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("zeros are indexed from n = 1".into()));
    }
    zeros::find_zero(order.nu, n)
}

/// Positive coefficient `g_{nu,n} = (-1)^{n-1} j^{nu+1} / J_{nu+1}(j)`.
pub fn series_coeff(order: BesselOrder, n: usize) -> Result<f64> {
    let j = bessel_zero(order, n)?;
    Ok(zeros::coeff_at(order.nu, n, j))
}

/// Zeros and coefficients for one order, indexed from `n = 1`.
///
/// Entries beyond `capacity` are computed on demand.
#[derive(Debug, Clone)]
pub struct ZeroTable {
    order: BesselOrder,
    zeros: Vec<f64>,
    coeffs: Vec<f64>,
}

/// McMahon's large-index expansion of `j_{nu,x}` at a real index `x`;
/// relative error below 1e-15 for `x >= 100`.
pub fn asymptotic_zero(nu: f64, x: f64) -> f64 {
    zeros::mcmahon_at(nu, x)
}

pub fn build_zero_table(order: BesselOrder, capacity: usize) -> Result<ZeroTable> {
    ZeroTable::new(order, capacity)
}

impl ZeroTable {
    pub fn new(order: BesselOrder, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Domain("zero table capacity must be at least 1".into()));
        }
        let nu = order.nu;
        let mut zs = Vec::with_capacity(capacity);
        let mut gs = Vec::with_capacity(capacity);
        for n in 1..=capacity {
            let j = zeros::find_zero(nu, n)?;
            if let Some(&prev) = zs.last() {
                if j <= prev {
                    return Err(Error::NonConvergence(format!(
                        "zero {n} of J_{nu} ({j}) not above zero {} ({prev})",
                        n - 1
                    )));
                }
            }
            gs.push(zeros::coeff_at(nu, n, j));
            zs.push(j);
        }
        Ok(ZeroTable { order, zeros: zs, coeffs: gs })
    }

    /// Builds a table from supplied values without checking them.
    pub fn from_parts(order: BesselOrder, zeros: Vec<f64>, coeffs: Vec<f64>) -> Self {
        assert_eq!(zeros.len(), coeffs.len());
        assert!(!zeros.is_empty());
        ZeroTable { order, zeros, coeffs }
    }

    #[inline]
    pub fn order(&self) -> BesselOrder {
        self.order
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.zeros.len()
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `j_{nu,n}`, `n >= 1`.
    pub fn zero(&self, n: usize) -> f64 {
        match self.zeros.get(n - 1) {
            Some(&j) => j,
            None => zeros::find_zero(self.order.nu, n).expect("zero finding beyond table capacity"),
        }
    }

    /// `g_{nu,n} > 0`.
    pub fn coeff(&self, n: usize) -> f64 {
        match self.coeffs.get(n - 1) {
            Some(&g) => g,
            None => zeros::coeff_at(self.order.nu, n, self.zero(n)),
        }
    }

    /// Signed coefficient `a_n = j^{nu+1}/J_{nu+1}(j) = (-1)^{n-1} g_n`.
    pub fn signed_coeff(&self, n: usize) -> f64 {
        let g = self.coeff(n);
        if n % 2 == 1 {
            g
        } else {
            -g
        }
    }

    /// `(j_n, a_n)`, computing both once when `n` is beyond the capacity.
    pub fn entry(&self, n: usize) -> (f64, f64) {
        let (j, g) = match (self.zeros.get(n - 1), self.coeffs.get(n - 1)) {
            (Some(&j), Some(&g)) => (j, g),
            _ => {
                let j = zeros::find_zero(self.order.nu, n).expect("zero finding beyond table capacity");
                (j, zeros::coeff_at(self.order.nu, n, j))
            }
        };
        (j, if n % 2 == 1 { g } else { -g })
    }

    /// A table with at least `n` entries: `self` if large enough, else a rebuilt one.
    pub fn with_capacity_at_least(&self, n: usize) -> Result<std::borrow::Cow<'_, ZeroTable>> {
        if self.capacity() >= n {
            Ok(std::borrow::Cow::Borrowed(self))
        } else {
            let mut t = self.clone();
            t.extend_to(n)?;
            Ok(std::borrow::Cow::Owned(t))
        }
    }

    fn extend_to(&mut self, n: usize) -> Result<()> {
        let nu = self.order.nu;
        for k in self.zeros.len() + 1..=n {
            let j = zeros::find_zero(nu, k)?;
            self.coeffs.push(zeros::coeff_at(nu, k, j));
            self.zeros.push(j);
        }
        Ok(())
    }

    /// Checks the documented invariants; returns the list of violations.
    pub fn check_invariants(&self) -> Vec<String> {
        let nu = self.order.nu;
        let mut bad = Vec::new();
        for (i, w) in self.zeros.windows(2).enumerate() {
            if w[1] <= w[0] {
                bad.push(format!("zeros not increasing at n = {}", i + 2));
            }
        }
        for (i, &j) in self.zeros.iter().enumerate() {
            let n = i + 1;
            let r = jv(nu, j);
            if !(r.abs() <= 1e-11) {
                bad.push(format!("|J_nu(j_{n})| = {:.3e} exceeds 1e-11", r.abs()));
            }
            let g = self.coeffs[i];
            if !(g > 0.0) {
                bad.push(format!("g_{n} = {g} is not positive"));
            }
            if n >= 50 {
                // leading corrections are (nu/2 - 1/4)/n and (nu+3/2)(nu/2 - 1/4)/n
                let shift = (0.5 * nu - 0.25).abs();
                let (band_z, band_g) = (1f64.max(2.0 * shift), 5f64.max(2.0 * (nu + 1.5) * shift));
                let nf = n as f64;
                let rz = j / (PI * nf) - 1.0;
                if rz.abs() > band_z / nf {
                    bad.push(format!("j_{n}/(pi n) - 1 = {rz:.3e} outside band"));
                }
                let rg = g / ((PI / 2.0).sqrt() * (PI * nf).powf(nu + 1.5)) - 1.0;
                if rg.abs() > band_g / nf {
                    bad.push(format!("g_{n} asymptotic ratio - 1 = {rg:.3e} outside band"));
                }
            }
        }
        bad
    }
}
