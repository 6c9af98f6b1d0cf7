//! First-hitting-time densities of level 1 and their Laplace transforms:
//! `f_nu` for Bessel processes started at 0, `f_beta` for skew Brownian
//! motion, and `phi_k` for the terminal piece of generalized meanders.

use crate::quadrature::{integrate, integrate_to_infinity, integrate_with_breaks, NeumaierSum, QuadResult};
use crate::special_functions::{asymptotic_zero, c_nu, gamma, jv, recip_c_nu, rgamma, BesselOrder, ZeroTable};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this time the public evaluators flag a precision warning.
pub const SMALL_T_WARN: f64 = 1e-4;
/// Below this time the public evaluators refuse.
pub const SMALL_T_FLOOR: f64 = 1e-6;
/// `f_nu(t) < 1e-90` for `t` below this value and every supported order;
/// integrators treat it as zero there.
pub const F_NEGLIGIBLE_T: f64 = 2e-3;

/// Target process of an extreme-value law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessFamily {
    BesselBridge { order: BesselOrder },
    SkewBridge { beta: f64 },
    GeneralizedMeander { k: f64, order: BesselOrder },
}

impl ProcessFamily {
    pub fn bessel_bridge(nu: f64) -> Result<Self> {
        Ok(ProcessFamily::BesselBridge { order: BesselOrder::new(nu)? })
    }

    /// Skew bridge; `beta = 1` is accepted (reflected case).
    pub fn skew_bridge(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Domain(format!("skew parameter beta = {beta} must lie in (0, 1]")));
        }
        Ok(ProcessFamily::SkewBridge { beta })
    }

    pub fn meander(k: f64, nu: f64) -> Result<Self> {
        let order = BesselOrder::new(nu)?;
        if !(k > 0.0 && k < 1.0 + order.delta()) {
            return Err(Error::Domain(format!(
                "meander index k = {k} must lie in (0, 1 + delta) = (0, {})",
                1.0 + order.delta()
            )));
        }
        Ok(ProcessFamily::GeneralizedMeander { k, order })
    }

    pub fn order(&self) -> Option<BesselOrder> {
        match *self {
            ProcessFamily::BesselBridge { order } | ProcessFamily::GeneralizedMeander { order, .. } => Some(order),
            ProcessFamily::SkewBridge { .. } => None,
        }
    }

    pub fn is_bridge(&self) -> bool {
        !matches!(self, ProcessFamily::GeneralizedMeander { .. })
    }
}

/// A density value with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
    /// A small negative partial sum was clipped to zero.
    pub clipped: bool,
    /// `t` is below the documented precision floor.
    pub precision_warning: bool,
}

/// `sum_n coef_n exp(-rate_n t)` with `|coef_n| = O(n^growth)` and increasing rates.
#[derive(Debug, Clone)]
pub struct SpectralSeries {
    coef: Vec<f64>,
    rate: Vec<f64>,
    growth: f64,
}

impl SpectralSeries {
    pub fn new(coef: Vec<f64>, rate: Vec<f64>, growth: f64) -> Self {
        assert_eq!(coef.len(), rate.len());
        SpectralSeries { coef, rate, growth: growth.max(0.0) }
    }

    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    /// Smallest `t` the stored terms can certify.
    pub fn min_t(&self) -> f64 {
        let n = self.rate.len();
        let lr = self.rate[n - 1];
        (45.0 + self.growth * (n as f64).ln()) / lr
    }

    /// Sum with a certified tail bound; `Err` if the stored terms run out.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, usize)> {
        let mut s = NeumaierSum::default();
        let n_all = self.coef.len();
        // envelope of |coef_n| / n^growth seen so far bounds the unseen terms
        let mut env = 0f64;
        for i in 0..n_all {
            let term = self.coef[i] * (-self.rate[i] * t).exp();
            s.add(term);
            env = env.max(self.coef[i].abs() / ((i + 1) as f64).powf(self.growth));
            if i + 1 < n_all {
                let nf = (i + 2) as f64;
                let next = env * nf.powf(self.growth) * (-self.rate[i + 1] * t).exp();
                let dr = self.rate[i + 1] - self.rate[i];
                let q = (1.0 + 1.0 / nf).powf(self.growth) * (-dr * t).exp();
                if q < 1.0 {
                    let bound = 2.0 * next / (1.0 - q);
                    if bound <= 1e-17 * s.value().abs().max(1.0) {
                        return Ok((s.value(), bound, i + 1));
                    }
                }
            }
        }
        Err(Error::Range(format!(
            "spectral series needs more than {n_all} terms at t = {t:e}"
        )))
    }
}

fn check_t(t: f64) -> Result<bool> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time t = {t} must be positive")));
    }
    if t < SMALL_T_FLOOR {
        return Err(Error::Range(format!("t = {t:e} is below the series floor {SMALL_T_FLOOR:e}")));
    }
    Ok(t < SMALL_T_WARN)
}

fn finish_value(v: f64, tail: f64, terms: usize, warn: bool) -> SpectralValue {
    let clipped = v < 0.0;
    SpectralValue { value: v.max(0.0), tail_bound: tail, terms, clipped, precision_warning: warn }
}

/// Number of spectral terms needed down to time `t_min`.
pub fn terms_for(t_min: f64) -> usize {
    ((2.0 * 60.0 / t_min).sqrt() / PI) as usize + 40
}

/// `f_nu`, the density of the hitting time of 1 by BES(delta) from 0.
#[derive(Debug, Clone)]
pub struct BesselHitting {
    order: BesselOrder,
    series: SpectralSeries,
}

impl BesselHitting {
    /// Uses every zero of `table`.
    pub fn new(table: &ZeroTable) -> Self {
        let order = table.order();
        let c = order.c();
        let n = table.capacity();
        let coef = (1..=n).map(|i| table.signed_coeff(i) / c).collect();
        let rate = table.zeros().iter().map(|j| 0.5 * j * j).collect();
        BesselHitting { order, series: SpectralSeries::new(coef, rate, order.nu() + 1.5) }
    }

    pub fn order(&self) -> BesselOrder {
        self.order
    }

    pub fn density(&self, t: f64) -> Result<SpectralValue> {
        let warn = check_t(t)?;
        let (v, tail, terms) = self.series.eval(t)?;
        Ok(finish_value(v, tail, terms, warn))
    }

    /// Fast evaluation for integrators; zero below [`F_NEGLIGIBLE_T`].
    pub fn value(&self, t: f64) -> f64 {
        if t < F_NEGLIGIBLE_T {
            return 0.0;
        }
        match self.series.eval(t) {
            Ok((v, _, _)) => v.max(0.0),
            Err(_) => 0.0,
        }
    }
}

/// `f_nu(t)` from the spectral expansion; entries beyond the table capacity
/// are computed on demand.
pub fn bessel_hitting_density(order: BesselOrder, t: f64, table: &ZeroTable) -> Result<SpectralValue> {
    if table.order() != order {
        return Err(Error::Domain("zero table order does not match".into()));
    }
    check_t(t)?;
    let need = terms_for(t.max(SMALL_T_FLOOR));
    let tab = table.with_capacity_at_least(need)?;
    BesselHitting::new(&tab).density(t)
}

/// `E exp(-lambda T) = (2 lambda)^{nu/2} / (C_nu I_nu(sqrt(2 lambda)))`.
pub fn bessel_hitting_laplace(order: BesselOrder, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be nonnegative")));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let x = (2.0 * lambda).sqrt();
    let nu = order.nu();
    // (x/2)^nu / (Gamma(nu+1) I_nu(x)) written to stay finite as x -> 0
    let i = crate::special_functions::iv(nu, x)?;
    Ok(x.powf(nu) / (order.c() * i))
}

/// Skew Brownian motion hitting density
/// `f_beta(t) = 2 beta / sqrt(2 pi t^3) sum (1-2beta)^{n-1} (2n-1) exp(-(2n-1)^2/(2t))`.
pub fn skew_hitting_density(beta: f64, t: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta = {beta} must lie in (0, 1]")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be positive")));
    }
    Ok(skew_density_unchecked(beta, t))
}

pub(crate) fn skew_density_unchecked(beta: f64, t: f64) -> f64 {
    let r = 1.0 - 2.0 * beta;
    let pref = 2.0 * beta / (2.0 * PI * t * t * t).sqrt();
    let mut s = NeumaierSum::default();
    let mut w = 1.0;
    let mut n = 1u64;
    loop {
        let m = (2 * n - 1) as f64;
        let term = w * m * (-m * m / (2.0 * t)).exp();
        s.add(term);
        // ratio of successive magnitudes is below |r| (m+2)/m exp(-2(m+1)/t)
        let q = r.abs() * (m + 2.0) / m * (-2.0 * (m + 1.0) / t).exp();
        if term.abs() * q / (1.0 - q).max(1e-300) <= 1e-17 * s.value().abs() && q < 0.9 || w == 0.0 {
            break;
        }
        if n > 1_000_000 {
            break;
        }
        w *= r;
        n += 1;
    }
    (pref * s.value()).max(0.0)
}

/// `beta / (cosh sqrt(2 lambda) - (1-beta) exp(-sqrt(2 lambda)))`.
pub fn skew_hitting_laplace(beta: f64, lambda: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("beta = {beta} must lie in (0, 1]")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be nonnegative")));
    }
    let x = (2.0 * lambda).sqrt();
    Ok(beta / (x.cosh() - (1.0 - beta) * (-x).exp()))
}

/// Hyperbolic sine integral `Shi(x) = int_0^x sinh(t)/t dt`.
pub fn shi(x: f64) -> f64 {
    if x < 0.0 {
        return -shi(-x);
    }
    if x <= 10.0 {
        let x2 = x * x;
        let mut term = x; // x^{2k+1}/(2k+1)!
        let mut s = x;
        let mut k = 0.0;
        loop {
            term *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            let add = term / (2.0 * k + 3.0);
            s += add;
            k += 1.0;
            if add <= 1e-17 * s {
                break;
            }
        }
        s
    } else {
        // exp-scaled integrand on [10, x]
        let r = integrate(|t: f64| 0.5 * ((t - x).exp() - (-t - x).exp()) / t, 10.0, x, 1e-300, 1e-15, 500);
        shi(10.0) + r.value * x.exp()
    }
}

/// Closed-form `E exp(-lambda S_k)` for delta = 3 and `k in {1, 2, 3}`.
pub fn meander_terminal_laplace(k: u32, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be nonnegative")));
    }
    let th = (2.0 * lambda).sqrt();
    if th < 1e-4 {
        // series about 0 of each closed form
        let t2 = th * th;
        return match k {
            1 => Ok(1.0 - t2 / 9.0),
            2 => Ok(1.0 - t2 / 12.0),
            3 => Ok(1.0 - t2 / 10.0),
            _ => Err(Error::Unsupported(format!("closed form only for k in {{1,2,3}}, got {k}"))),
        };
    }
    match k {
        1 => Ok(shi(th) / th.sinh()),
        2 => Ok(2.0 / th * (0.5 * th).tanh()),
        3 => Ok(3.0 / (th * th * th.sinh()) * (th * th.cosh() - th.sinh())),
        _ => Err(Error::Unsupported(format!("closed form only for k in {{1,2,3}}, got {k}"))),
    }
}

/// Weights `W_n = int_0^1 k x^{k-1} J_nu(x j_n)/(x j_n)^nu dx` of a
/// generalized meander, stored as `X_n = a_n W_n = A_n + B_n` where
/// `A_n = k I a_n / j_n^k` alternates and `B_n` does not.
#[derive(Debug, Clone)]
pub struct MeanderWeights {
    k: f64,
    order: BesselOrder,
    /// `int_0^inf x^{k-1} J_nu(x)/x^nu dx` (Abel-regularized).
    i_reg: f64,
    zeros: Vec<f64>,
    a_part: Vec<f64>,
    b_part: Vec<f64>,
    /// `B_n = k` exactly (k = 2 or k = delta).
    b_constant: bool,
}

/// Indices below this use quadrature for the remainder `B_n`.
pub const WEIGHT_QUADRATURE_LIMIT: usize = 24;

impl MeanderWeights {
    pub fn new(k: f64, table: &ZeroTable) -> Result<Self> {
        let order = table.order();
        let nu = order.nu();
        if !(k > 0.0 && k < 1.0 + order.delta()) {
            return Err(Error::Domain(format!("meander index k = {k} outside (0, 1 + delta)")));
        }
        let i_reg = (k - 1.0 - nu).exp2() * gamma(0.5 * k) * rgamma(nu + 1.0 - 0.5 * k);
        let n = table.capacity();
        let mut a_part = Vec::with_capacity(n);
        let mut b_part = Vec::with_capacity(n);
        let closed_k2 = (k - 2.0).abs() < 1e-15;
        let closed_kd = (k - order.delta()).abs() < 1e-15;
        for i in 1..=n {
            let j = table.zero(i);
            let a = table.signed_coeff(i);
            let ap = k * i_reg * a / j.powf(k);
            let bp = if closed_k2 || closed_kd {
                // X_n = 2 + 2 a_n/(C_{nu-1} j^2) and X_n = delta respectively
                k
            } else if i < WEIGHT_QUADRATURE_LIMIT {
                let w = weight_quadrature(k, nu, j)?;
                a * w - ap
            } else {
                b_asymptotic(k, nu, j)
            };
            a_part.push(ap);
            b_part.push(bp);
        }
        if closed_kd {
            a_part.iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(MeanderWeights { k, order, i_reg, zeros: table.zeros().to_vec(), a_part, b_part, b_constant: closed_k2 || closed_kd })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn order(&self) -> BesselOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.a_part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_part.is_empty()
    }

    pub fn regularized_integral(&self) -> f64 {
        self.i_reg
    }

    /// `A_n`, `n >= 1`.
    pub fn a_part(&self, n: usize) -> f64 {
        self.a_part[n - 1]
    }

    /// `B_n`, `n >= 1`.
    pub fn b_part(&self, n: usize) -> f64 {
        self.b_part[n - 1]
    }

    /// `X_n = a_n W_n`.
    pub fn x(&self, n: usize) -> f64 {
        self.a_part[n - 1] + self.b_part[n - 1]
    }

    /// `W_n` itself.
    pub fn weight(&self, n: usize, table: &ZeroTable) -> f64 {
        self.x(n) / table.signed_coeff(n)
    }

    /// `B` at a real index `x` beyond the table, through McMahon's zeros.
    pub fn b_at(&self, x: f64) -> f64 {
        if self.b_constant {
            self.k
        } else {
            b_asymptotic(self.k, self.order.nu(), asymptotic_zero(self.order.nu(), x))
        }
    }

    /// `A_n` for any index, from the zero and signed coefficient.
    pub fn a_from(&self, j: f64, a: f64) -> f64 {
        self.k * self.i_reg * a / j.powf(self.k)
    }

    pub fn a_parts(&self) -> &[f64] {
        &self.a_part
    }

    pub fn b_parts(&self) -> &[f64] {
        &self.b_part
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }
}

/// `W = int_0^1 k x^{k-1} J_nu(x j)/(x j)^nu dx` by adaptive quadrature.
pub fn weight_quadrature(k: f64, nu: f64, j: f64) -> Result<f64> {
    let g = |x: f64| -> f64 {
        let y = x * j;
        if y == 0.0 {
            recip_c_nu(nu)
        } else if y < 1e-4 {
            // series J_nu(y)/y^nu = (1 - y^2/(4(nu+1))) / C_nu
            recip_c_nu(nu) * (1.0 - y * y / (4.0 * (nu + 1.0)))
        } else {
            jv(nu, y) / y.powf(nu)
        }
    };
    let panels = ((j / PI).ceil() as usize + 1).max(2);
    let r: QuadResult = if k < 1.0 {
        // y = x^k removes the endpoint singularity
        let mut h = |y: f64| g(y.powf(1.0 / k));
        let breaks: Vec<f64> = (0..=panels).map(|i| (i as f64 / panels as f64).powf(k)).collect();
        integrate_with_breaks(&mut h, &breaks, 1e-15, 1e-14, 20_000)
    } else {
        let mut h = |x: f64| k * x.powf(k - 1.0) * g(x);
        let breaks: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        integrate_with_breaks(&mut h, &breaks, 1e-15, 1e-14, 20_000)
    };
    if !r.converged {
        return Err(Error::NonConvergence(format!(
            "meander weight quadrature (k = {k}, j = {j}) error {:.2e}",
            r.abs_error
        )));
    }
    Ok(r.value)
}

/// Asymptotic remainder `B = -k sum_i c_i j^{1-i} P_i` with
/// `c_1 = 1, c_{i+1} = c_i (k - 2i)` and `P_i = J_{nu-i}(j)/J_{nu+1}(j)`
/// generated by the three-term recurrence from `J_nu(j) = 0`.
pub fn b_asymptotic(k: f64, nu: f64, j: f64) -> f64 {
    let (mut p_prev, mut p) = (1.0, 0.0); // P_{-1}, P_0
    let mut c = 1.0;
    let mut jpow = 1.0; // j^{1-i}
    let mut s = 0.0;
    // odd and even indices form two interleaved sequences of different size
    let mut back = [f64::INFINITY; 2];
    let mut small = 0;
    for i in 1..400 {
        // P_i = (2(nu - i + 1)/j) P_{i-1} - P_{i-2}
        let p_next = 2.0 * (nu - i as f64 + 1.0) / j * p - p_prev;
        p_prev = p;
        p = p_next;
        let term = c * jpow * p;
        if i > 4 && term.abs() > back[i % 2] {
            break;
        }
        s += term;
        if c == 0.0 {
            break;
        }
        small = if term.abs() < 1e-18 * s.abs() { small + 1 } else { 0 };
        if small == 2 {
            break;
        }
        back[i % 2] = term.abs();
        c *= k - 2.0 * i as f64;
        jpow /= j;
    }
    -k * s
}

/// `phi_k`, the density of the terminal time `S_k`.
#[derive(Debug, Clone)]
pub struct MeanderTerminal {
    series: SpectralSeries,
}

impl MeanderTerminal {
    pub fn new(w: &MeanderWeights) -> Self {
        let coef: Vec<f64> = (1..=w.len()).map(|n| w.x(n)).collect();
        let rate = w.zeros().iter().take(w.len()).map(|j| 0.5 * j * j).collect();
        let growth = (w.order().nu() + 1.5 - w.k()).max(0.0);
        MeanderTerminal { series: SpectralSeries::new(coef, rate, growth) }
    }

    pub fn min_t(&self) -> f64 {
        self.series.min_t()
    }

    pub fn density(&self, t: f64) -> Result<SpectralValue> {
        let warn = check_t(t)?;
        let (v, tail, terms) = self.series.eval(t)?;
        Ok(finish_value(v, tail, terms, warn))
    }

    /// Fast evaluation for integrators (no small-t floor beyond the table's own).
    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.series.eval(t)?.0.max(0.0))
    }
}

/// `phi_k(t) = sum_n a_n W_n exp(-j_n^2 t/2)` for `family` a generalized meander.
pub fn meander_terminal_density(family: ProcessFamily, t: f64, table: &ZeroTable) -> Result<SpectralValue> {
    let (k, order) = match family {
        ProcessFamily::GeneralizedMeander { k, order } => (k, order),
        _ => return Err(Error::Domain("meander terminal density needs a generalized meander".into())),
    };
    if table.order() != order {
        return Err(Error::Domain("zero table order does not match".into()));
    }
    check_t(t)?;
    let tab = table.with_capacity_at_least(terms_for(t))?;
    MeanderTerminal::new(&MeanderWeights::new(k, &tab)?).density(t)
}

/// `W_n` for one index.
pub fn meander_weight(family: ProcessFamily, n: usize, table: &ZeroTable) -> Result<f64> {
    let (k, order) = match family {
        ProcessFamily::GeneralizedMeander { k, order } => (k, order),
        _ => return Err(Error::Domain("meander weight needs a generalized meander".into())),
    };
    if n == 0 {
        return Err(Error::Domain("weights are indexed from n = 1".into()));
    }
    let nu = order.nu();
    let j = table.zero(n);
    let a = table.signed_coeff(n);
    if (k - order.delta()).abs() < 1e-15 {
        return Ok(order.delta() / a);
    }
    if (k - 2.0).abs() < 1e-15 {
        return Ok((2.0 + 2.0 * recip_c_nu(nu - 1.0) * a / (j * j)) / a);
    }
    weight_quadrature(k, nu, j)
}

/// `int_0^inf exp(-lambda t) density(t) dt` through `t = s^2`.
pub fn laplace_numeric<F: FnMut(f64) -> f64>(mut density: F, lambda: f64, rel_tol: f64) -> QuadResult {
    let mut g = |s: f64| {
        let t = s * s;
        let d = density(t);
        if d == 0.0 {
            0.0
        } else {
            2.0 * s * (-lambda * t).exp() * d
        }
    };
    let head = integrate_with_breaks(&mut g, &[0.0, 0.05, 0.15, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0], 1e-16, rel_tol, 4000);
    let tail = integrate_to_infinity(&mut g, 3.0, 1e-16, rel_tol, 2000);
    QuadResult {
        value: head.value + tail.value,
        abs_error: head.abs_error + tail.abs_error,
        evaluations: head.evaluations + tail.evaluations,
        converged: head.converged && tail.converged,
    }
}

/// `||f^alpha||` in `L^2(t^{q-1} dt)` for the damped density
/// `f^alpha(t) = (1/C_nu) sum alpha^{n-1} a_n exp(-j_n^2 t/2)`.
pub fn damped_density_l2_norm(table: &ZeroTable, alpha: f64, q: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(q > 0.0) {
        return Err(Error::Domain("need 0 < alpha < 1 and q > 0".into()));
    }
    let order = table.order();
    let c = c_nu(order.nu());
    // alpha^{n-1} n^{nu+3/2} below 1e-18 beyond this index
    let s = order.nu() + 1.5;
    let mut nmax = 10usize;
    while (nmax as f64 - 1.0) * alpha.ln() + s * (nmax as f64).ln() + 1.0 > -42.0 || (nmax as f64) < s / -alpha.ln() {
        nmax = nmax * 5 / 4 + 1;
    }
    let tab = table.with_capacity_at_least(nmax)?;
    let coef: Vec<f64> = (1..=nmax).map(|n| alpha.powi(n as i32 - 1) * tab.signed_coeff(n) / c).collect();
    let rate: Vec<f64> = tab.zeros()[..nmax].iter().map(|j| 0.5 * j * j).collect();
    let f = |t: f64| -> f64 {
        let mut acc = NeumaierSum::default();
        for i in 0..nmax {
            let e = (-rate[i] * t).exp();
            acc.add(coef[i] * e);
            if e < 1e-30 {
                break;
            }
        }
        acc.value()
    };
    // t = s^2: int f(s^2)^2 s^{2q-1} 2 ds
    let mut g = |x: f64| {
        let v = f(x * x);
        2.0 * v * v * x.powf(2.0 * q - 1.0)
    };
    let head = integrate_with_breaks(&mut g, &[0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 2.0, 4.0], 1e-15, 1e-11, 4000);
    let tail = integrate_to_infinity(&mut g, 4.0, 1e-15, 1e-11, 1000);
    Ok((head.value + tail.value).sqrt())
}
