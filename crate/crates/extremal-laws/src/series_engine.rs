//! Abel summation of single and double series: evaluate the damped sums on a
//! schedule of `alpha -> 1` and extrapolate in `eps = 1 - alpha`.

use crate::quadrature::NeumaierSum;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Hard cap on the number of terms of a single damped series.
pub const MAX_TERMS: u64 = 60_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelSchedule {
    /// Strictly increasing, inside (0, 1).
    pub alphas: Vec<f64>,
    /// Degree of the polynomial in `eps` fitted by Richardson extrapolation.
    pub extrapolation_order: usize,
    /// A damped series is truncated once its tail bound falls below this.
    pub per_alpha_tail_tol: f64,
    /// `converged` requires the last two extrapolants to differ by at most
    /// `converge_rtol * |value| + converge_atol`.
    pub converge_rtol: f64,
    pub converge_atol: f64,
}

impl Default for AbelSchedule {
    fn default() -> Self {
        Self::single_default()
    }
}

impl AbelSchedule {
    /// `alpha_j = 1 - 2^-j` for `j = jmin..=jmax`.
    pub fn dyadic(jmin: u32, jmax: u32, order: usize) -> Result<Self> {
        let alphas = (jmin..=jmax).map(|j| 1.0 - (-(j as f64)).exp2()).collect();
        let s = AbelSchedule {
            alphas,
            extrapolation_order: order,
            per_alpha_tail_tol: 1e-17,
            converge_rtol: 1e-9,
            converge_atol: 1e-14,
        };
        s.validate()?;
        Ok(s)
    }

    /// Default for single series: `j = 3..14`, order 4.
    pub fn single_default() -> Self {
        Self::dyadic(3, 14, 4).expect("valid default schedule")
    }

    /// Default for double series: `j = 1..7`, order 5, looser convergence test.
    pub fn double_default() -> Self {
        let mut s = Self::dyadic(1, 7, 5).expect("valid default schedule");
        s.per_alpha_tail_tol = 1e-15;
        s.converge_rtol = 1e-7;
        s.converge_atol = 1e-7;
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.extrapolation_order < 1 {
            return Err(Error::Config("extrapolation order must be at least 1".into()));
        }
        if self.alphas.len() < self.extrapolation_order + 2 {
            return Err(Error::Config(format!(
                "schedule has {} alphas; extrapolation order {} needs at least {}",
                self.alphas.len(),
                self.extrapolation_order,
                self.extrapolation_order + 2
            )));
        }
        for w in self.alphas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Config("alphas must be strictly increasing".into()));
            }
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::Config("alphas must lie in (0, 1)".into()));
        }
        if !(self.per_alpha_tail_tol > 0.0) || !(self.converge_rtol >= 0.0) || !(self.converge_atol >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn eps(&self) -> Vec<f64> {
        self.alphas.iter().map(|a| 1.0 - a).collect()
    }

    pub fn max_alpha(&self) -> f64 {
        *self.alphas.last().expect("nonempty schedule")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub terms_used: u64,
    pub absolutely_convergent: bool,
    /// Gap between the diagonal limit and the `(alpha^2, alpha)` path, when computed.
    pub path_gap: Option<f64>,
}

impl SeriesEvaluation {
    pub fn exact(value: f64, terms_used: u64) -> Self {
        SeriesEvaluation {
            value,
            error_estimate: 0.0,
            converged: true,
            terms_used,
            absolutely_convergent: true,
            path_gap: None,
        }
    }

    /// Multiplies value and error estimate by `c`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.value *= c;
        self.error_estimate *= c.abs();
        self
    }
}

/// Neville evaluation at `x = 0` of the interpolating polynomial through `(x_i, y_i)`.
pub fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut p = y.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
        }
    }
    p[0]
}

/// Richardson extrapolation to `eps = 0` with the last `order + 1` points;
/// the error estimate compares against the window shifted one point back.
pub fn extrapolate(eps: &[f64], values: &[f64], order: usize) -> (f64, f64) {
    let n = eps.len();
    let w = order + 1;
    let t1 = neville_at_zero(&eps[n - w..], &values[n - w..]);
    let t2 = neville_at_zero(&eps[n - w - 1..n - 1], &values[n - w - 1..n - 1]);
    (t1, (t1 - t2).abs())
}

fn looks_divergent(values: &[f64]) -> bool {
    let n = values.len();
    if n < 4 {
        return false;
    }
    let last = &values[n - 4..];
    let grows = last.windows(2).all(|w| w[0].abs() > 0.0 && w[1].abs() > 1.25 * w[0].abs());
    grows && last[3].abs() > 1e3
}

/// Builds a `SeriesEvaluation` from damped sums `values[i]` at `schedule.alphas[i]`.
pub fn finish(schedule: &AbelSchedule, values: &[f64], truncation: f64, terms_used: u64) -> Result<SeriesEvaluation> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence("damped sum is not finite".into()));
    }
    if looks_divergent(values) {
        return Err(Error::Divergence(format!(
            "damped sums grow without bound (last {:.3e})",
            values[values.len() - 1]
        )));
    }
    let eps = schedule.eps();
    let (v, e) = extrapolate(&eps, values, schedule.extrapolation_order);
    let err = e + truncation;
    Ok(SeriesEvaluation {
        value: v,
        error_estimate: err,
        converged: e <= schedule.converge_rtol * v.abs() + schedule.converge_atol,
        terms_used,
        absolutely_convergent: false,
        path_gap: None,
    })
}

/// Damped partial sums of several series at once.
#[derive(Debug, Clone)]
pub struct DampedSums {
    /// `sums[i][k]`: series `k` damped by `alphas[i]^n`.
    pub sums: Vec<Vec<f64>>,
    /// Undamped partial sums over the same index range.
    pub plain: Vec<f64>,
    /// Sum of `|u_n|` over the last one or two dyadic blocks of indices, per series.
    pub late_abs: Vec<f64>,
    /// Sum of the per-alpha tail bounds.
    pub truncation: f64,
    pub terms_used: u64,
}

/// Evaluates `sum_n alpha^n u_n^{(k)}` for `k < dim` and every alpha of the
/// schedule in one pass over `n >= n0`.
///
/// `term(n, out)` writes the `dim` terms of index `n`. Truncation for each
/// alpha uses a growth envelope fitted to the observed term magnitudes.
pub fn damped_sums<F: FnMut(u64, &mut [f64])>(dim: usize, mut term: F, n0: u64, schedule: &AbelSchedule) -> Result<DampedSums> {
    schedule.validate()?;
    let na = schedule.alphas.len();
    let mut acc = vec![vec![NeumaierSum::default(); dim]; na];
    let mut pow: Vec<f64> = schedule.alphas.iter().map(|a| a.powf(n0 as f64)).collect();
    let mut active = vec![true; na];
    let mut tail = vec![0.0; na];
    let mut buf = vec![0.0; dim];
    let mut plain = vec![NeumaierSum::default(); dim];
    let mut abs_cur = vec![0.0_f64; dim];
    let mut abs_prev = vec![0.0_f64; dim];
    // growth envelope: block maxima over dyadic index ranges
    let mut block_max = 0.0_f64;
    let mut prev_block_max = 0.0_f64;
    let mut block_end = (n0 + 16).max(32);
    let mut growth_p = 0.0_f64;
    let mut n = n0;
    let mut remaining = na;
    while remaining > 0 {
        if n - n0 > MAX_TERMS {
            return Err(Error::NonConvergence(format!(
                "damped series not truncated after {MAX_TERMS} terms"
            )));
        }
        term(n, &mut buf);
        for k in 0..dim {
            plain[k].add(buf[k]);
            abs_cur[k] += buf[k].abs();
        }
        let mag = buf.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        block_max = block_max.max(mag);
        for i in 0..na {
            if !active[i] {
                continue;
            }
            let w = pow[i];
            for k in 0..dim {
                acc[i][k].add(w * buf[k]);
            }
            pow[i] = if (n + 1) % 64 == 0 {
                // refresh to stop rounding drift of the running product
                schedule.alphas[i].powf((n + 1) as f64)
            } else {
                w * schedule.alphas[i]
            };
        }
        if n + 1 == block_end {
            if prev_block_max > 0.0 && block_max > 0.0 {
                growth_p = (block_max / prev_block_max).log2().max(0.0);
            }
            prev_block_max = block_max;
            block_max = 0.0;
            abs_prev.copy_from_slice(&abs_cur);
            abs_cur.iter_mut().for_each(|v| *v = 0.0);
            block_end = 2 * block_end;
            // tail check at the end of each block and for each alpha
        }
        if (n + 1) % 64 == 0 || n + 1 == block_end / 2 {
            let envelope = prev_block_max.max(block_max).max(mag);
            let nf = (n + 1) as f64;
            for i in 0..na {
                if !active[i] {
                    continue;
                }
                let a = schedule.alphas[i];
                let la = -a.ln();
                // past the peak of n^p alpha^n, with a geometric bound on the rest
                if nf * la > 2.0 * growth_p + 1.0 {
                    let r = a * (growth_p / nf).exp();
                    if r < 1.0 {
                        let bound = pow[i] * envelope * 2.0 / (1.0 - r);
                        let scale = acc[i].iter().fold(1.0_f64, |m, s| m.max(s.value().abs()));
                        if bound <= schedule.per_alpha_tail_tol * scale || envelope == 0.0 && nf * la > 40.0 {
                            active[i] = false;
                            tail[i] = bound;
                            remaining -= 1;
                        }
                    }
                }
            }
        }
        n += 1;
    }
    Ok(DampedSums {
        sums: acc.iter().map(|row| row.iter().map(|s| s.value()).collect()).collect(),
        plain: plain.iter().map(|s| s.value()).collect(),
        late_abs: abs_prev.iter().zip(&abs_cur).map(|(a, b)| a + b).collect(),
        truncation: tail.iter().sum(),
        terms_used: n - n0,
    })
}

/// Abel sum of `sum_{n >= n0} u_n`.
pub fn abel_sum_1d<F: FnMut(u64) -> f64>(mut term: F, n0: u64, schedule: &AbelSchedule) -> Result<SeriesEvaluation> {
    let mut v = abel_sum_many(1, |n, out| out[0] = term(n), n0, schedule)?;
    Ok(v.remove(0))
}

/// Abel sums of `dim` series sharing one pass over `n >= n0`.
pub fn abel_sum_many<F: FnMut(u64, &mut [f64])>(dim: usize, term: F, n0: u64, schedule: &AbelSchedule) -> Result<Vec<SeriesEvaluation>> {
    let d = damped_sums(dim, term, n0, schedule)?;
    (0..dim)
        .map(|k| {
            if d.late_abs[k] <= schedule.per_alpha_tail_tol * d.plain[k].abs().max(1.0) {
                // the terms are absolutely summable to working precision; by
                // regularity the Abel value is the plain sum
                let mut e = SeriesEvaluation::exact(d.plain[k], d.terms_used);
                e.error_estimate = d.late_abs[k];
                return Ok(e);
            }
            let vals: Vec<f64> = d.sums.iter().map(|r| r[k]).collect();
            finish(schedule, &vals, d.truncation, d.terms_used)
        })
        .collect()
}

/// Envelope `|u_{m,n}| <= a (m n)^p` used to truncate double series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub a: f64,
    pub p: f64,
}

/// Smallest anti-diagonal index `K` such that the damped tail beyond `K`
/// is below `tol` for damping `alpha`.
pub fn antidiagonal_cutoff(env: Envelope, alpha: f64, tol: f64) -> usize {
    let la = -alpha.ln();
    // tail over k > K: sum alpha^k (k-1) a (k^2/4)^p
    let q = 2.0 * env.p.max(0.0) + 1.0;
    let mut k = ((q + 1.0) / la).ceil().max(4.0);
    loop {
        let r = alpha * ((q / k).exp());
        if r < 1.0 {
            let bound = env.a * (k.ln() * q - k * la).exp() * 4f64.powf(-env.p.max(0.0)) / (1.0 - r);
            if bound <= tol {
                return k as usize;
            }
        }
        k *= 1.1;
        if k > 1e8 {
            return k as usize;
        }
    }
}

/// Abel sum of a double series from its anti-diagonal sums `c[k] = sum_{m+n=k} u_{m,n}`
/// (diagonal path), with an optional off-diagonal diagnostic `d[k] = sum_{2m+n=k} u_{m,n}`.
pub fn abel_from_antidiagonals(c: &[f64], d: Option<&[f64]>, truncation: f64, schedule: &AbelSchedule) -> Result<SeriesEvaluation> {
    schedule.validate()?;
    let eval = |coef: &[f64]| -> Vec<f64> {
        schedule
            .alphas
            .iter()
            .map(|&a| {
                // Horner from the top keeps the damping exact
                let mut s = 0.0;
                for &ck in coef.iter().rev() {
                    s = s * a + ck;
                }
                s
            })
            .collect()
    };
    let vals = eval(c);
    let mut out = finish(schedule, &vals, truncation, (c.len() * c.len() / 2) as u64)?;
    if let Some(d) = d {
        let off = eval(d);
        if let Ok(o) = finish(schedule, &off, truncation, 0) {
            out.path_gap = Some((o.value - out.value).abs());
        }
    }
    Ok(out)
}

/// Abel sum of `sum_{m,n >= 1} u_{m,n}` along the diagonal `alpha_1 = alpha_2`.
pub fn abel_sum_2d<F: FnMut(u64, u64) -> f64>(mut term: F, env: Envelope, schedule: &AbelSchedule) -> Result<SeriesEvaluation> {
    schedule.validate()?;
    let kmax = antidiagonal_cutoff(env, schedule.max_alpha(), schedule.per_alpha_tail_tol);
    // index k holds sum over m+n = k (diagonal) and 2m+n = k (off-diagonal)
    let mut c = vec![0.0; kmax + 1];
    let mut d = vec![0.0; 2 * kmax + 1];
    let mut late_abs = 0.0;
    for k in 2..=kmax {
        let mut s = NeumaierSum::default();
        for m in 1..k {
            let n = k - m;
            let u = term(m as u64, n as u64);
            s.add(u);
            d[2 * m + n] += u;
            if 2 * k > kmax {
                late_abs += u.abs();
            }
        }
        c[k] = s.value();
    }
    let mut plain = NeumaierSum::default();
    for &ck in &c {
        plain.add(ck);
    }
    if late_abs <= schedule.per_alpha_tail_tol * plain.value().abs().max(1.0) {
        let mut e = SeriesEvaluation::exact(plain.value(), (kmax * (kmax - 1) / 2) as u64);
        e.error_estimate = late_abs;
        return Ok(e);
    }
    // the damping is alpha^(m+n); shift so that coefficient index == exponent
    let mut out = abel_from_antidiagonals(&c, Some(&d), schedule.per_alpha_tail_tol, schedule)?;
    out.terms_used = (kmax * (kmax - 1) / 2) as u64;
    Ok(out)
}

/// Dirichlet eta `sum_{n>=1} (-1)^{n-1} n^{-s}`, Abel-summed for every real `s`.
pub fn eta(s: f64) -> Result<SeriesEvaluation> {
    let sched = AbelSchedule::single_default();
    abel_sum_1d(|n| if n % 2 == 1 { (n as f64).powf(-s) } else { -(n as f64).powf(-s) }, 1, &sched)
}
