//! Series evaluations of the `M` and `rho` densities.

use super::ExtremeLaws;
use crate::hitting_densities::MeanderWeights;
use crate::quadrature::{integrate_to_infinity, integrate_with_breaks, NeumaierSum};
use crate::series_engine::{abel_sum_1d, abel_sum_2d, abel_sum_many, antidiagonal_cutoff, AbelSchedule, Envelope, SeriesEvaluation};
use crate::special_functions::{c_nu, BesselOrder, ZeroTable};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Terms of the non-alternating meander remainder summed directly in the
/// `rho` density before the integral tail.
const B_DIRECT: usize = 256;

/// Abel row sums feeding the `M` densities, for rows `n <= len`:
/// `h[n] = sum_{m != n} a_m / (j_m^2 - j_n^2)` and, for meanders,
/// `k[m] = sum_{n != m} X_n / (j_m^2 - j_n^2)`.
#[derive(Debug, Clone)]
pub struct RowSums {
    pub zeros: Vec<f64>,
    pub coefs: Vec<f64>,
    pub h: Vec<SeriesEvaluation>,
    pub k: Vec<SeriesEvaluation>,
}

impl RowSums {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

/// `sum_{n >= N+1} h(n)` for smooth `h`, as `int_{N+1/2}^inf h - h'(N+1/2)/24`.
pub(crate) fn smooth_tail<F: Fn(f64) -> f64>(h: F, n: usize) -> Result<f64> {
    let start = n as f64 + 0.5;
    let r = integrate_to_infinity(&h, start, 1e-300, 1e-12, 400);
    if !r.converged && r.abs_error > 1e-14 * r.value.abs().max(1e-300) * 1e3 {
        return Err(Error::NonConvergence(format!("tail integral from {start} did not converge ({:e})", r.abs_error)));
    }
    let d = 0.25;
    let hp = (h(start + d) - h(start - d)) / (2.0 * d);
    Ok(r.value - hp / 24.0)
}

fn table_of(laws: &ExtremeLaws) -> &ZeroTable {
    laws.table().expect("order-based family")
}

pub(super) fn row_sums(laws: &ExtremeLaws) -> Result<RowSums> {
    let table = table_of(laws);
    let reach = 10.0 * laws.config().z_cap;
    let mut rows = 1;
    while table.zero(rows + 1) < reach {
        rows += 1;
    }
    let zeros: Vec<f64> = (1..=rows).map(|n| table.zero(n)).collect();
    let coefs: Vec<f64> = (1..=rows).map(|n| table.signed_coeff(n)).collect();
    let sq: Vec<f64> = zeros.iter().map(|j| j * j).collect();
    let weights = laws.weights();
    let dim = if weights.is_some() { 2 * rows } else { rows };
    let mut evals = abel_sum_many(
        dim,
        |i, out| {
            let (j, a) = table.entry(i as usize);
            let j2 = j * j;
            let ap = weights.map(|w| w.a_from(j, a));
            for r in 0..rows {
                if i as usize == r + 1 {
                    out[r] = 0.0;
                    if weights.is_some() {
                        out[rows + r] = 0.0;
                    }
                    continue;
                }
                let d = j2 - sq[r];
                out[r] = a / d;
                if let Some(ap) = ap {
                    out[rows + r] = -ap / d;
                }
            }
        },
        1,
        &laws.config().single,
    )?;
    let k = if let Some(w) = weights {
        let ka = evals.split_off(rows);
        let mut k = Vec::with_capacity(rows);
        for (r, mut e) in ka.into_iter().enumerate() {
            let kb = remainder_row(w, sq[r], r + 1)?;
            e.value += kb;
            k.push(e);
        }
        k
    } else {
        Vec::new()
    };
    Ok(RowSums { zeros, coefs, h: evals, k })
}

/// `sum_{n != m} B_n / (j_m^2 - j_n^2)`, absolutely convergent.
fn remainder_row(w: &MeanderWeights, jm2: f64, m: usize) -> Result<f64> {
    let zs = w.zeros();
    let n_direct = w.len();
    let mut s = NeumaierSum::default();
    for n in 1..=n_direct {
        if n != m {
            s.add(w.b_part(n) / (jm2 - zs[n - 1] * zs[n - 1]));
        }
    }
    let nu = w.order().nu();
    let tail = smooth_tail(
        |x| {
            let j = crate::special_functions::asymptotic_zero(nu, x);
            w.b_at(x) / (jm2 - j * j)
        },
        n_direct,
    )?;
    Ok(s.value() + tail)
}

fn combine_rows<'a>(parts: impl Iterator<Item = (f64, &'a SeriesEvaluation)>) -> (f64, f64, bool) {
    let mut s = NeumaierSum::default();
    let mut err = 0.0;
    let mut conv = true;
    for (c, e) in parts {
        if c == 0.0 {
            continue;
        }
        s.add(c * e.value);
        err += (c * e.error_estimate).abs();
        conv &= e.converged;
    }
    (s.value(), err, conv)
}

fn e_factor(j: f64, z: f64) -> f64 {
    (-j * j / (2.0 * z * z)).exp()
}

pub(super) fn bessel_max_density(rows: &RowSums, order: BesselOrder, z: f64) -> Result<SeriesEvaluation> {
    let c = order.c();
    let delta = order.delta();
    let mut diag = NeumaierSum::default();
    let e: Vec<f64> = rows.zeros.iter().map(|&j| e_factor(j, z)).collect();
    for n in 0..rows.len() {
        diag.add(rows.coefs[n] * rows.coefs[n] * e[n]);
    }
    let (off, off_err, conv) = combine_rows((0..rows.len()).map(|n| (rows.coefs[n] * e[n], &rows.h[n])));
    let p_diag = 2.0 / (c * z.powf(3.0 + delta));
    let p_off = 8.0 / (c * z.powf(1.0 + delta));
    let value = p_diag * diag.value() + p_off * off;
    Ok(SeriesEvaluation {
        value,
        error_estimate: p_off * off_err + 1e-15 * value.abs(),
        converged: conv,
        terms_used: rows.h.iter().map(|h| h.terms_used).max().unwrap_or(0),
        absolutely_convergent: rows.h.iter().all(|h| h.absolutely_convergent),
        path_gap: None,
    })
}

pub(super) fn meander_max_density(laws: &ExtremeLaws, rows: &RowSums, k: f64, order: BesselOrder, z: f64) -> Result<SeriesEvaluation> {
    let w = laws.weights().expect("meander");
    let cm = c_nu(0.5 * k - 1.0);
    let delta = order.delta();
    let e: Vec<f64> = rows.zeros.iter().map(|&j| e_factor(j, z)).collect();
    let mut diag = NeumaierSum::default();
    for n in 0..rows.len() {
        diag.add(rows.coefs[n] * w.x(n + 1) * e[n]);
    }
    let (o1, e1, c1) = combine_rows((0..rows.len()).map(|n| (w.x(n + 1) * e[n], &rows.h[n])));
    let (o2, e2, c2) = combine_rows((0..rows.len()).map(|m| (rows.coefs[m] * e[m], &rows.k[m])));
    let p_diag = 2.0 / (k * cm * z.powf(3.0 + delta - k));
    let p_off = 4.0 / (k * cm * z.powf(1.0 + delta - k));
    let value = p_diag * diag.value() + p_off * (o1 - o2);
    Ok(SeriesEvaluation {
        value,
        error_estimate: p_off * (e1 + e2) + 1e-15 * value.abs(),
        converged: c1 && c2,
        terms_used: rows.h.iter().map(|h| h.terms_used).max().unwrap_or(0),
        absolutely_convergent: false,
        path_gap: None,
    })
}

pub(super) fn skew_max_density(beta: f64, z: f64) -> SeriesEvaluation {
    // 8 beta z sum (1-2beta)^{k-1} k^2 exp(-2 k^2 z^2)
    let r = 1.0 - 2.0 * beta;
    let mut s = NeumaierSum::default();
    let mut abs = 0.0;
    let mut w = 1.0;
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let t = w * kf * kf * (-2.0 * kf * kf * z * z).exp();
        s.add(t);
        abs += t.abs();
        if (t.abs() <= 1e-18 * s.value().abs() && kf * z > 1.0) || w == 0.0 || t == 0.0 && kf * z > 1.0 || k > 10_000_000 {
            break;
        }
        w *= r;
        k += 1;
    }
    let pref = 8.0 * beta * z;
    let v = pref * s.value();
    SeriesEvaluation {
        value: v,
        error_estimate: pref * abs * 4e-16,
        converged: true,
        terms_used: k,
        absolutely_convergent: true,
        path_gap: None,
    }
}

/// `L^{-p}` with fast paths for integer and half-integer `p`.
#[derive(Debug, Clone, Copy)]
enum NegPow {
    Int(i32),
    Half(i32),
    Real(f64),
}

impl NegPow {
    fn new(p: f64) -> Self {
        let twice = 2.0 * p;
        if (twice - twice.round()).abs() < 1e-14 && twice.abs() < 40.0 {
            let t = twice.round() as i32;
            if t % 2 == 0 {
                NegPow::Int(t / 2)
            } else {
                NegPow::Half((t - 1) / 2)
            }
        } else {
            NegPow::Real(p)
        }
    }

    #[inline]
    fn eval(self, l: f64) -> f64 {
        match self {
            NegPow::Int(i) => 1.0 / l.powi(i),
            NegPow::Half(i) => 1.0 / (l.powi(i) * l.sqrt()),
            NegPow::Real(p) => (-p * l.ln()).exp(),
        }
    }
}

/// Abel sum (diagonal path) of `sum_{m,n} cl_m cr_n / [j_m^2 u + j_n^2 (1-u)]^p`
/// where `cl`/`cr` are given at any index by closures.
fn rho_double_series<L, R>(table: &ZeroTable, left: L, right: R, u: f64, p: f64, schedule: &AbelSchedule) -> Result<SeriesEvaluation>
where
    L: Fn(usize, f64, f64) -> f64,
    R: Fn(usize, f64, f64) -> f64,
{
    let pw = NegPow::new(p);
    // envelope |u_mn| <= a (mn)^P from a sampled block
    let sample = 48;
    let ent: Vec<(f64, f64)> = (1..=sample).map(|n| table.entry(n)).collect();
    let lv: Vec<f64> = (1..=sample).map(|n| left(n, ent[n - 1].0, ent[n - 1].1)).collect();
    let rv: Vec<f64> = (1..=sample).map(|n| right(n, ent[n - 1].0, ent[n - 1].1)).collect();
    let grow = |v: &[f64]| -> f64 {
        let a = v[sample / 2 - 1].abs().max(1e-300);
        let b = v[sample - 1].abs().max(1e-300);
        (b / a).ln() / 2f64.ln()
    };
    let big_p = grow(&lv).max(grow(&rv)) - p;
    let mut a_env = 0f64;
    for m in 1..=sample {
        for n in 1..=sample {
            let l = ent[m - 1].0.powi(2) * u + ent[n - 1].0.powi(2) * (1.0 - u);
            let t = (lv[m - 1] * rv[n - 1] * pw.eval(l)).abs();
            a_env = a_env.max(t / ((m * n) as f64).powf(big_p));
        }
    }
    let env = Envelope { a: 2.0 * a_env, p: big_p };
    let kmax = antidiagonal_cutoff(env, schedule.max_alpha(), schedule.per_alpha_tail_tol);
    let mut ju = Vec::with_capacity(kmax + 1);
    let mut jv = Vec::with_capacity(kmax + 1);
    let mut cl = Vec::with_capacity(kmax + 1);
    let mut cr = Vec::with_capacity(kmax + 1);
    ju.push(0.0);
    jv.push(0.0);
    cl.push(0.0);
    cr.push(0.0);
    for n in 1..=kmax {
        let (j, a) = table.entry(n);
        ju.push(j * j * u);
        jv.push(j * j * (1.0 - u));
        cl.push(left(n, j, a));
        cr.push(right(n, j, a));
    }
    abel_sum_2d(
        |m, n| {
            let (m, n) = (m as usize, n as usize);
            cl[m] * cr[n] * pw.eval(ju[m] + jv[n])
        },
        env,
        schedule,
    )
}

pub(super) fn bessel_argmax_density(laws: &ExtremeLaws, order: BesselOrder, u: f64) -> Result<SeriesEvaluation> {
    let table = table_of(laws);
    let s = rho_double_series(table, |_, _, a| a, |_, _, a| a, u, order.nu() + 2.0, &laws.config().double)?;
    Ok(s.scaled(2.0 * order.delta()))
}

pub(super) fn meander_argmax_density(laws: &ExtremeLaws, k: f64, order: BesselOrder, u: f64) -> Result<SeriesEvaluation> {
    let table = table_of(laws);
    let w = laws.weights().expect("meander");
    let nu = order.nu();
    let mu = 0.5 * k - 1.0;
    let p = nu - mu + 1.0;
    let pref = 2.0 * c_nu(nu - mu) / (k * c_nu(mu));
    let sched = &laws.config().double;
    // alternating part A_n through the double series
    let sa = if w.regularized_integral() == 0.0 {
        SeriesEvaluation::exact(0.0, 0)
    } else {
        rho_double_series(table, |_, _, a| a, |_, j, a| w.a_from(j, a), u, p, sched)?
    };
    // remainder part: outer Abel sum over the f index of a_m beta_m
    let pw = NegPow::new(p);
    let zs = w.zeros();
    let v = 1.0 - u;
    let nb = B_DIRECT.min(w.len());
    let mut failure = None;
    let sb = abel_sum_1d(
        |m| {
            let (jm, am) = table.entry(m as usize);
            let c = jm * jm * u;
            let mut s = NeumaierSum::default();
            for n in 1..=nb {
                let jn = zs[n - 1];
                s.add(w.b_part(n) * pw.eval(c + jn * jn * v));
            }
            let tail = smooth_tail(
                |x| {
                    let j = crate::special_functions::asymptotic_zero(nu, x);
                    w.b_at(x) * pw.eval(c + j * j * v)
                },
                nb,
            );
            match tail {
                Ok(t) => am * (s.value() + t),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        1,
        sched,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let sb = sb?;
    Ok(SeriesEvaluation {
        value: pref * (sa.value + sb.value),
        error_estimate: pref * (sa.error_estimate + sb.error_estimate),
        converged: sa.converged && sb.converged,
        terms_used: sa.terms_used + sb.terms_used * (nb as u64 + 1),
        absolutely_convergent: sa.absolutely_convergent && sb.absolutely_convergent,
        path_gap: sa.path_gap,
    })
}

/// `sum_n r^{n-1} (2n-1) exp(-(2n-1)^2 t)`.
fn skew_theta(r: f64, t: f64) -> f64 {
    let mut s = NeumaierSum::default();
    let mut w = 1.0;
    let mut peak = 0f64;
    let mut n = 1u64;
    loop {
        let m = (2 * n - 1) as f64;
        let term = w * m * (-m * m * t).exp();
        s.add(term);
        peak = peak.max(term.abs());
        // past the maximum of m exp(-m^2 t) the magnitudes decrease
        if (m * m * t > 0.5 && term.abs() <= 1e-18 * peak) || w == 0.0 || n > 50_000_000 {
            break;
        }
        w *= r;
        if w.abs() < 1e-300 {
            break;
        }
        n += 1;
    }
    s.value()
}

/// Skew-bridge argmax density; a direct double sum for `|1-2beta| <= 0.9`,
/// otherwise through `L^{-3/2} = (2/sqrt(pi)) int_0^inf sqrt(x) e^{-Lx} dx`.
pub(super) fn skew_argmax_density(beta: f64, u: f64) -> Result<SeriesEvaluation> {
    let r = 1.0 - 2.0 * beta;
    let v = 1.0 - u;
    if r.abs() <= 0.9 {
        if r == 0.0 {
            return Ok(SeriesEvaluation::exact(1.0, 1));
        }
        // |r|^{K-2} K^3 below 1e-18
        let mut kmax = 4usize;
        while (kmax as f64 - 2.0) * r.abs().ln() + 3.0 * (kmax as f64).ln() > -41.0 {
            kmax += 1;
        }
        let mut s = NeumaierSum::default();
        let mut terms = 0u64;
        for m in 1..kmax {
            let a = (2 * m - 1) as f64;
            for n in 1..(kmax - m + 1) {
                let b = (2 * n - 1) as f64;
                let l = b * b * u + a * a * v;
                s.add(r.powi((m + n - 2) as i32) * a * b / (l * l.sqrt()));
                terms += 1;
            }
        }
        let mut e = SeriesEvaluation::exact(2.0 * beta * s.value(), terms);
        e.error_estimate = 1e-15 * e.value.abs();
        return Ok(e);
    }
    let mut g = |y: f64| {
        let y2 = y * y;
        y2 * skew_theta(r, u * y2) * skew_theta(r, v * y2)
    };
    let head = integrate_with_breaks(&mut g, &[0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0], 1e-16, 1e-12, 4000);
    let tail = integrate_to_infinity(&mut g, 4.0, 1e-16, 1e-12, 1000);
    let c = 4.0 / PI.sqrt() * 2.0 * beta;
    Ok(SeriesEvaluation {
        value: c * (head.value + tail.value),
        error_estimate: c * (head.abs_error + tail.abs_error),
        converged: head.converged && tail.converged,
        terms_used: (head.evaluations + tail.evaluations) as u64,
        absolutely_convergent: true,
        path_gap: None,
    })
}

pub(super) fn conjecture_residual(laws: &ExtremeLaws, order: BesselOrder, n: usize) -> Result<SeriesEvaluation> {
    if n == 0 {
        return Err(Error::Domain("rows are indexed from n = 1".into()));
    }
    let table = table_of(laws);
    let (jn, an) = table.entry(n);
    let lhs = 0.25 * order.delta() * an / (jn * jn);
    let rows = laws.rows()?;
    let h = if n <= rows.len() {
        rows.h[n - 1].clone()
    } else {
        let jn2 = jn * jn;
        abel_sum_1d(
            |m| {
                if m as usize == n {
                    0.0
                } else {
                    let (j, a) = table.entry(m as usize);
                    a / (j * j - jn2)
                }
            },
            1,
            &laws.config().single,
        )?
    };
    let mut out = h;
    out.value += lhs;
    Ok(out)
}

