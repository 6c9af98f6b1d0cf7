//! Integrals of the joint density: marginal checks, expectations and
//! normalizations, with explicit bounds for the pieces left out.

use super::{ExtremeLaws, TAU0};
use crate::hitting_densities::{MeanderTerminal, ProcessFamily};
use crate::quadrature::{gauss_legendre, integrate_to_infinity, integrate_with_breaks, NeumaierSum, QuadResult};
use crate::special_functions::c_nu;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// `P(S_k <= TAU0) = 1 - int_{TAU0}^inf phi_k`.
pub(super) fn terminal_head_mass(phi: &MeanderTerminal) -> Result<f64> {
    let s0 = TAU0.sqrt();
    let mut failure = None;
    let mut g = |s: f64| {
        let t = s * s;
        match phi.value(t) {
            Ok(v) => 2.0 * s * v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let head = integrate_with_breaks(&mut g, &[s0, 0.01, 0.05, 0.2, 0.5, 1.0, 2.0], 1e-16, 1e-13, 4000);
    let tail = integrate_to_infinity(&mut g, 2.0, 1e-16, 1e-13, 1000);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((1.0 - head.value - tail.value).max(0.0))
}

/// Result of a two-dimensional integral of the joint density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub value: f64,
    /// Quadrature error estimate.
    pub abs_error: f64,
    /// Bound on the mass beyond the outer `z` limit, times the integrand bound.
    pub tail_bound: f64,
}

/// Mass of the `rho` density split into the Abel-series interior and the
/// two boundary strips integrated from the joint density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoNormalization {
    pub interior: f64,
    pub lower_strip: f64,
    pub upper_strip: f64,
    pub total: f64,
    /// Combined quadrature, series and tail error bound.
    pub error_bound: f64,
}

impl ExtremeLaws {
    /// `P(M > z)` bound from the sub-Gaussian tail of the coordinates.
    pub fn max_tail_bound(&self, z: f64) -> f64 {
        let d = self.tail_dimension();
        (2.0 * d * (-2.0 * z * z / d).exp()).min(1.0)
    }

    fn tail_dimension(&self) -> f64 {
        match self.family() {
            ProcessFamily::SkewBridge { .. } => 1.0,
            ProcessFamily::BesselBridge { order } => order.delta().max(1.0),
            ProcessFamily::GeneralizedMeander { k, order } => order.delta().max(1.0) + k,
        }
    }

    /// Outer `z` limit for integrals: the tail bound is below 1e-12 beyond it.
    pub fn z_limit(&self) -> f64 {
        let d = self.tail_dimension();
        (0.5 * d * (2.0 * d * 1e12).ln()).sqrt()
    }

    /// Joint density split as `prefactor(z) * left(u/z^2) * right((1-u)/z^2)`.
    fn prefactor(&self, z: f64) -> f64 {
        match self.family() {
            ProcessFamily::BesselBridge { order } => 2.0 * order.c() / z.powf(3.0 + order.delta()),
            ProcessFamily::SkewBridge { beta } => (2.0 * PI).sqrt() / (beta * z.powi(4)),
            ProcessFamily::GeneralizedMeander { k, order } => {
                2.0 * order.c() / (k * c_nu(0.5 * k - 1.0)) * z.powf(-(3.0 + order.delta() - k))
            }
        }
    }

    fn right_factor(&self, t: f64) -> Result<f64> {
        match self.family() {
            ProcessFamily::GeneralizedMeander { .. } => self.phi_value(t),
            _ => Ok(self.f_value(t)),
        }
    }

    /// `int_{lo}^{hi} joint(z, u) g(z, u) du`; for meanders the stretch where
    /// `(1-u)/z^2 < TAU0` uses the mass of `S_k` there.
    pub fn u_integral<G: Fn(f64, f64) -> f64>(&self, z: f64, lo: f64, hi: f64, g: &G, rel_tol: f64) -> Result<QuadResult> {
        let z2 = z * z;
        let pre = self.prefactor(z);
        let meander = matches!(self.family(), ProcessFamily::GeneralizedMeander { .. });
        let w = if meander { TAU0 * z2 } else { 0.0 };
        let top = if meander { hi.min(1.0 - w) } else { hi };
        let mut failure = None;
        let mut h = |u: f64| {
            if u <= 0.0 || u >= 1.0 {
                return 0.0;
            }
            let l = self.f_value(u / z2);
            if l == 0.0 {
                return 0.0;
            }
            match self.right_factor((1.0 - u) / z2) {
                Ok(r) => pre * l * r * g(z, u),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        let mut breaks = vec![lo];
        for b in [0.01, 0.1, 0.5, 0.9, 0.99] {
            if b > lo && b < top {
                breaks.push(b);
            }
        }
        breaks.push(top.max(lo));
        let mut r = integrate_with_breaks(&mut h, &breaks, 1e-14 * pre.min(1.0), rel_tol, 2000);
        if let Some(e) = failure {
            return Err(e);
        }
        if meander && hi > 1.0 - w {
            // phi_k carries a (1-u)^{-1/2} singularity; its mean position
            // over the strip sits at a third of the width
            let uc = 1.0 - w / 3.0;
            let head = pre * self.f_value(uc / z2) * g(z, uc) * z2 * self.terminal_head;
            r.value += head;
            r.abs_error += head.abs() * 1e-3;
        }
        Ok(r)
    }

    /// `E[g(M, rho)]` for `|g| <= bound` by two-dimensional quadrature of the
    /// joint density.
    pub fn expectation_of_bounded<G: Fn(f64, f64) -> f64 + Sync>(&self, g: G, bound: f64) -> Result<Expectation> {
        self.joint_mass(0.0, 1.0, &g, bound)
    }

    fn joint_mass<G: Fn(f64, f64) -> f64>(&self, lo: f64, hi: f64, g: &G, bound: f64) -> Result<Expectation> {
        let zl = self.z_limit();
        let mut failure = None;
        let mut inner_err = 0.0;
        let mut outer = |z: f64| {
            if z <= 0.0 {
                return 0.0;
            }
            match self.u_integral(z, lo, hi, g, 1e-10) {
                Ok(r) => {
                    inner_err += r.abs_error * 1e-3;
                    r.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        let mut breaks: Vec<f64> = vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.3, 1.7, 2.2, 3.0, 4.0];
        breaks.retain(|&b| b < zl);
        breaks.push(zl);
        let r = integrate_with_breaks(&mut outer, &breaks, 1e-12, 1e-10, 2000);
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Expectation { value: r.value, abs_error: r.abs_error + inner_err, tail_bound: bound.abs() * self.max_tail_bound(zl) })
    }

    /// `int_0^inf` of the series `M` density.
    pub fn max_normalization(&self) -> Result<Expectation> {
        let zl = self.z_limit();
        let mut failure = None;
        let mut f = |z: f64| {
            if z <= 0.0 {
                return 0.0;
            }
            match self.max_density(z) {
                Ok(e) => e.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        let breaks = [0.0, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 4.5, zl.max(4.6)];
        let r = integrate_with_breaks(&mut f, &breaks, 1e-12, 1e-11, 2000);
        if let Some(e) = failure {
            return Err(e);
        }
        // series error: bounded by the largest per-point estimate times the range
        let worst = (1..=40)
            .map(|i| self.max_density(0.1 * i as f64).map(|e| e.error_estimate).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        Ok(Expectation { value: r.value, abs_error: r.abs_error + worst * zl, tail_bound: self.max_tail_bound(zl) })
    }

    /// Masses of `rho` on `[0, margin]` and `[1 - margin, 1]` from the joint density.
    pub fn strip_masses(&self) -> Result<(Expectation, Expectation)> {
        let eta = self.config().margin;
        let one = |_: f64, _: f64| 1.0;
        Ok((self.joint_mass(0.0, eta, &one, 1.0)?, self.joint_mass(1.0 - eta, 1.0, &one, 1.0)?))
    }

    /// Interior integral of the series `rho` density with Gauss-Legendre
    /// panels, plus both boundary strips from the joint density.
    pub fn argmax_normalization(&self, nodes_per_panel: usize) -> Result<RhoNormalization> {
        let eta = match self.family() {
            ProcessFamily::SkewBridge { .. } => 0.0,
            _ => self.config().margin,
        };
        let (x, wts) = gauss_legendre(nodes_per_panel);
        let mut interior = NeumaierSum::default();
        let mut err = 0.0;
        let meander = matches!(self.family(), ProcessFamily::GeneralizedMeander { .. });
        let left = [eta, 0.05, 0.2, 0.5];
        let mut add_panel = |a: f64, b: f64, map: &dyn Fn(f64) -> (f64, f64)| -> Result<()> {
            for (xi, wi) in x.iter().zip(&wts) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let (u, jac) = map(s);
                let e = self.argmax_density(u)?;
                if !e.converged {
                    return Err(Error::NonConvergence(format!("argmax series at u = {u} did not converge")));
                }
                interior.add(0.5 * (b - a) * wi * jac * e.value);
                err += 0.5 * (b - a) * wi * jac * e.error_estimate;
            }
            Ok(())
        };
        let ident = |s: f64| (s, 1.0);
        for w in left.windows(2) {
            add_panel(w[0], w[1], &ident)?;
        }
        if meander {
            // u = 1 - s^2 absorbs the (1-u)^{-1/2} growth
            let sq = |s: f64| (1.0 - s * s, 2.0 * s);
            let edges = [eta.sqrt(), 0.05, 0.2, 0.5f64.sqrt()];
            for w in edges.windows(2) {
                add_panel(w[0], w[1], &sq)?;
            }
        } else {
            let right = [0.5, 0.8, 0.95, 1.0 - eta];
            for w in right.windows(2) {
                add_panel(w[0], w[1], &ident)?;
            }
        }
        let (lower, upper) = if eta > 0.0 {
            self.strip_masses()?
        } else {
            let z = Expectation { value: 0.0, abs_error: 0.0, tail_bound: 0.0 };
            (z, z)
        };
        let total = interior.value() + lower.value + upper.value;
        Ok(RhoNormalization {
            interior: interior.value(),
            lower_strip: lower.value,
            upper_strip: upper.value,
            total,
            error_bound: err + lower.abs_error + upper.abs_error + lower.tail_bound + upper.tail_bound,
        })
    }
}
