//! Monte Carlo samplers of `(M, rho)` used as ground truth for the series.
//!
//! Every sample index draws from its own ChaCha stream derived from
//! `(seed, index)`, so results do not depend on the number of worker threads.

use crate::extreme_laws::ExtremeLaws;
use crate::hitting_densities::ProcessFamily;
use crate::quadrature::{gauss_legendre, NeumaierSum};
use crate::special_functions::BesselOrder;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Steps after which a hitting-time walk gives up.
pub const STEP_BUDGET: u64 = 10_000_000;
/// Default time step of the hitting-time sampler.
pub const DEFAULT_DT: f64 = 1e-3;
/// A grid step whose maximum exceeds the running maximum with probability
/// below `e^{-SKIP_EXPONENT}` is not refined.
const SKIP_EXPONENT: f64 = 40.0;

/// Independent generator for sample `index`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub m: f64,
    pub rho: f64,
}

/// Coordinate of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    M,
    Rho,
}

impl Sample {
    pub fn get(&self, c: Coordinate) -> f64 {
        match c {
            Coordinate::M => self.m,
            Coordinate::Rho => self.rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSampleSet {
    pub family: ProcessFamily,
    pub samples: Vec<Sample>,
    pub weights: Vec<f64>,
    pub seed: u64,
    /// Grid resolution of path samplers; 0 for hitting-time samplers.
    pub path_steps: usize,
    /// Time step of hitting-time samplers; 0 for path samplers.
    pub dt: f64,
    /// Mean weight.
    pub estimator_normalizer: f64,
}

impl WeightedSampleSet {
    fn new(family: ProcessFamily, samples: Vec<Sample>, weights: Vec<f64>, seed: u64, path_steps: usize, dt: f64) -> Self {
        let mean = pairwise_sum(&weights) / weights.len().max(1) as f64;
        WeightedSampleSet { family, samples, weights, seed, path_steps, dt, estimator_normalizer: mean }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Effective sample size `(sum w)^2 / sum w^2`.
    pub fn effective_sample_size(&self) -> f64 {
        let s = pairwise_sum(&self.weights);
        let sq: Vec<f64> = self.weights.iter().map(|w| w * w).collect();
        s * s / pairwise_sum(&sq)
    }

    /// True when the effective sample size is below 10% of the nominal size.
    pub fn low_ess(&self) -> bool {
        self.effective_sample_size() < 0.1 * self.len() as f64
    }

    /// Self-normalized estimate of `E[g]` and its delta-method standard error.
    pub fn mean_of<G: Fn(&Sample) -> f64>(&self, g: G) -> (f64, f64) {
        let wsum = pairwise_sum(&self.weights);
        let wg: Vec<f64> = self.samples.iter().zip(&self.weights).map(|(s, w)| w * g(s)).collect();
        let mean = pairwise_sum(&wg) / wsum;
        let dev: Vec<f64> = self
            .samples
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| {
                let d = w * (g(s) - mean);
                d * d
            })
            .collect();
        (mean, pairwise_sum(&dev).sqrt() / wsum)
    }

    /// Weighted empirical CDF of coordinate `c` at `x`.
    pub fn cdf(&self, c: Coordinate, x: f64) -> f64 {
        self.mean_of(|s| if s.get(c) <= x { 1.0 } else { 0.0 }).0
    }

    /// Writes `m,rho,weight` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "m,rho,weight")?;
        for (s, w) in self.samples.iter().zip(&self.weights) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", s.m, s.rho, w)?;
        }
        Ok(())
    }
}

/// Fixed-order pairwise sum.
fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 64 {
        let mut s = NeumaierSum::default();
        for &v in x {
            s.add(v);
        }
        return s.value();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// One exact transition of the squared Bessel process over `dt`:
/// `Y' = 2 dt Gamma(delta/2 + N)` with `N ~ Poisson(Y/(2 dt))`.
fn bessel_square_step<R: Rng>(y: f64, delta: f64, dt: f64, rng: &mut R) -> f64 {
    let lam = y / (2.0 * dt);
    let n = if lam > 0.0 { Poisson::new(lam).expect("positive rate").sample(rng) } else { 0.0 };
    let g: f64 = Gamma::new(0.5 * delta + n, 1.0).expect("positive shape").sample(rng);
    2.0 * dt * g
}

/// First time a Bessel process of the given order started at `x0 < 1`
/// reaches 1. Between grid points a Brownian-bridge crossing test is applied;
/// crossings are timed at mid-step.
pub fn sample_hitting_time_from<R: Rng>(order: BesselOrder, x0: f64, rng: &mut R, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::Domain(format!("dt = {dt} must lie in (0, 0.1]")));
    }
    if !(0.0..1.0).contains(&x0) {
        return Err(Error::Domain(format!("start {x0} must lie in [0, 1)")));
    }
    let delta = order.delta();
    let mut y = x0 * x0;
    let mut r = x0;
    for step in 0..STEP_BUDGET {
        let y1 = bessel_square_step(y, delta, dt, rng);
        let r1 = y1.sqrt();
        let t = step as f64 * dt;
        if r1 >= 1.0 {
            return Ok(t + 0.5 * dt);
        }
        let p = (-2.0 * (1.0 - r) * (1.0 - r1) / dt).exp();
        if p > 1e-300 && rng.random::<f64>() < p {
            return Ok(t + 0.5 * dt);
        }
        y = y1;
        r = r1;
    }
    Err(Error::StepBudget(STEP_BUDGET))
}

/// First time a Bessel process started at 0 reaches 1.
pub fn sample_hitting_time<R: Rng>(order: BesselOrder, rng: &mut R, dt: f64) -> Result<f64> {
    sample_hitting_time_from(order, 0.0, rng, dt)
}

fn collect<F>(n: usize, seed: u64, f: F) -> Result<(Vec<Sample>, Vec<f64>)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(Sample, f64)> + Sync,
{
    if n == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let out: Vec<Result<(Sample, f64)>> = (0..n as u64).into_par_iter().map(|i| f(&mut stream(seed, i))).collect();
    let mut s = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for r in out {
        let (a, b) = r?;
        s.push(a);
        w.push(b);
    }
    Ok((s, w))
}

/// Bessel-bridge `(M, rho)` from two independent hitting times glued back to
/// back, weighted by `(T + T')^nu`.
pub fn sample_back_to_back(order: BesselOrder, n_samples: usize, seed: u64, dt: f64) -> Result<WeightedSampleSet> {
    let nu = order.nu();
    let (s, w) = collect(n_samples, seed, |rng| {
        let t1 = sample_hitting_time(order, rng, dt)?;
        let t2 = sample_hitting_time(order, rng, dt)?;
        let tot = t1 + t2;
        Ok((Sample { m: 1.0 / tot.sqrt(), rho: t1 / tot }, tot.powf(nu)))
    })?;
    Ok(WeightedSampleSet::new(ProcessFamily::BesselBridge { order }, s, w, seed, 0, dt))
}

/// Draw of the terminal time `S_k` for `delta = 3`: the hitting time of 1
/// from a start with density `k x^{k-1}` on `(0, 1)`.
pub fn sample_meander_terminal<R: Rng>(k: f64, rng: &mut R, dt: f64) -> Result<f64> {
    let x = rng.random::<f64>().powf(1.0 / k);
    sample_hitting_time_from(BesselOrder::new(0.5)?, x, rng, dt)
}

/// Generalized meander (`delta = 3`) `(M, rho)` from `T` and `S_k`, weighted by
/// `(T + S_k)^{-(k-1)/2}`.
pub fn sample_meander_back_to_back(family: ProcessFamily, n_samples: usize, seed: u64, dt: f64) -> Result<WeightedSampleSet> {
    let k = match family {
        ProcessFamily::GeneralizedMeander { k, order } if (order.delta() - 3.0).abs() < 1e-12 => k,
        ProcessFamily::GeneralizedMeander { .. } => {
            return Err(Error::Unsupported("meander sampler needs delta = 3".into()));
        }
        _ => return Err(Error::Domain("not a meander family".into())),
    };
    let order = BesselOrder::new(0.5)?;
    let (s, w) = collect(n_samples, seed, |rng| {
        let t = sample_hitting_time(order, rng, dt)?;
        let sk = sample_meander_terminal(k, rng, dt)?;
        let tot = t + sk;
        Ok((Sample { m: 1.0 / tot.sqrt(), rho: t / tot }, tot.powf(-0.5 * (k - 1.0))))
    })?;
    Ok(WeightedSampleSet::new(family, s, w, seed, 0, dt))
}

/// Discrete Brownian bridge on `steps` equal intervals of `[0, 1]`.
fn bridge_path<R: Rng>(rng: &mut R, steps: usize, path: &mut Vec<f64>) {
    path.clear();
    let sd = (1.0 / steps as f64).sqrt();
    let mut w = 0.0;
    path.push(0.0);
    for _ in 0..steps {
        let g: f64 = rng.sample(StandardNormal);
        w += sd * g;
        path.push(w);
    }
    let end = w;
    for (i, p) in path.iter_mut().enumerate() {
        *p -= end * i as f64 / steps as f64;
    }
    path[steps] = 0.0;
}

/// Maximum of `x` over `[0, 1]` with the maximum on each step drawn from the
/// Brownian-bridge law given its endpoints; only points with `keep(i)` and
/// steps with `keep_step(i)` take part. Returns `(max, time)`.
fn refined_max<R: Rng, K: Fn(usize) -> bool, S: Fn(usize) -> bool>(x: &[f64], keep: K, keep_step: S, rng: &mut R) -> (f64, f64) {
    let steps = x.len() - 1;
    let h = 1.0 / steps as f64;
    let mut best = f64::NEG_INFINITY;
    let mut at = 0.5;
    for (i, &v) in x.iter().enumerate() {
        if keep(i) && v > best {
            best = v;
            at = i as f64 * h;
        }
    }
    let grid_best = if best.is_finite() { best } else { 0.0 };
    for i in 0..steps {
        if !keep_step(i) {
            continue;
        }
        let (a, b) = (x[i], x[i + 1]);
        let g = grid_best.max(a).max(b);
        // P(step max > g) = exp(-2 (g-a)(g-b)/h)
        if 2.0 * (g - a) * (g - b) / h > SKIP_EXPONENT {
            continue;
        }
        let e = -(1.0 - rng.random::<f64>()).ln();
        let d = a - b;
        let m = 0.5 * (a + b + (d * d + 2.0 * h * e).sqrt());
        if m > best {
            best = m;
            at = (i as f64 + 0.5) * h;
        }
    }
    (best.max(0.0), at)
}

fn check_steps(path_steps: usize) -> Result<()> {
    if path_steps < 1000 {
        return Err(Error::Domain(format!("path_steps = {path_steps} must be at least 1000")));
    }
    Ok(())
}

/// Reflected Brownian bridge (`|B|`).
pub fn sample_reflected_bridge(n_samples: usize, path_steps: usize, seed: u64) -> Result<WeightedSampleSet> {
    check_steps(path_steps)?;
    let (s, w) = collect_paths(n_samples, seed, path_steps, |path, rng| {
        let (hi, t_hi) = refined_max(path, |_| true, |_| true, rng);
        let neg: Vec<f64> = path.iter().map(|v| -v).collect();
        let (lo, t_lo) = refined_max(&neg, |_| true, |_| true, rng);
        if hi >= lo {
            Sample { m: hi, rho: t_hi }
        } else {
            Sample { m: lo, rho: t_lo }
        }
    })?;
    let fam = ProcessFamily::BesselBridge { order: BesselOrder::new(-0.5)? };
    Ok(WeightedSampleSet::new(fam, s, w, seed, path_steps, 0.0))
}

/// Normalized Brownian excursion by the Vervaat transform: `M = max B - min B`
/// and `rho = (tau_max - tau_min) mod 1`.
pub fn sample_excursion(n_samples: usize, path_steps: usize, seed: u64) -> Result<WeightedSampleSet> {
    check_steps(path_steps)?;
    let (s, w) = collect_paths(n_samples, seed, path_steps, |path, rng| {
        let (hi, t_hi) = refined_max(path, |_| true, |_| true, rng);
        let neg: Vec<f64> = path.iter().map(|v| -v).collect();
        let (lo, t_lo) = refined_max(&neg, |_| true, |_| true, rng);
        let rho = (t_hi - t_lo).rem_euclid(1.0);
        Sample { m: hi + lo, rho }
    })?;
    let fam = ProcessFamily::BesselBridge { order: BesselOrder::new(0.5)? };
    Ok(WeightedSampleSet::new(fam, s, w, seed, path_steps, 0.0))
}

/// Skew Brownian bridge: the excursions of a Brownian bridge between sign
/// changes are made positive with probability `beta`.
pub fn sample_skew_bridge(beta: f64, n_samples: usize, path_steps: usize, seed: u64) -> Result<WeightedSampleSet> {
    let fam = ProcessFamily::skew_bridge(beta)?;
    check_steps(path_steps)?;
    let (s, w) = collect_paths(n_samples, seed, path_steps, |path, rng| {
        // excursion index of every grid point; zeros join the preceding one
        let mut ids = Vec::with_capacity(path.len());
        let mut id = 0usize;
        let mut sign = 0.0f64;
        for &v in path.iter() {
            let sg = if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { sign };
            if sign != 0.0 && sg != sign {
                id += 1;
            }
            if sg != 0.0 {
                sign = sg;
            }
            ids.push(id);
        }
        let up: Vec<bool> = (0..=id).map(|_| rng.random::<f64>() < beta).collect();
        let pos_point = |i: usize| up[ids[i]];
        // the upper side of a step belongs to its positive endpoint's excursion
        let side = |i: usize, positive: bool| -> Option<usize> {
            let (a, b) = (path[i], path[i + 1]);
            let pick = if positive { a.max(b) } else { a.min(b) };
            if positive && pick <= 0.0 || !positive && pick >= 0.0 {
                return None;
            }
            Some(if a == pick { ids[i] } else { ids[i + 1] })
        };
        let (hi, t_hi) = refined_max(path, |i| pos_point(i) && path[i] >= 0.0, |i| side(i, true).is_some_and(|e| up[e]), rng);
        let minus: Vec<f64> = path.iter().map(|v| -v).collect();
        let (lo, t_lo) = refined_max(&minus, |i| pos_point(i) && path[i] <= 0.0, |i| side(i, false).is_some_and(|e| up[e]), rng);
        if hi >= lo {
            Sample { m: hi, rho: t_hi }
        } else {
            Sample { m: lo, rho: t_lo }
        }
    })?;
    Ok(WeightedSampleSet::new(fam, s, w, seed, path_steps, 0.0))
}

fn collect_paths<F>(n: usize, seed: u64, steps: usize, f: F) -> Result<(Vec<Sample>, Vec<f64>)>
where
    F: Fn(&[f64], &mut ChaCha8Rng) -> Sample + Sync,
{
    if n == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let s: Vec<Sample> = (0..n as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(steps + 1),
            |buf, i| {
                let mut rng = stream(seed, i);
                bridge_path(&mut rng, steps, buf);
                f(buf, &mut rng)
            },
        )
        .collect();
    Ok((s, vec![1.0; n]))
}

/// `sup_x |F_n(x) - cdf(x)|` for the weighted empirical CDF of `values`.
pub fn weighted_ks<C: Fn(f64) -> f64>(values: &[f64], weights: &[f64], cdf: C) -> Result<f64> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(Error::Domain("ks_distance needs a nonempty, consistent sample".into()));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total = pairwise_sum(weights);
    let mut acc = NeumaierSum::default();
    let mut d = 0f64;
    let mut i = 0;
    while i < idx.len() {
        let x = values[idx[i]];
        let before = acc.value() / total;
        while i < idx.len() && values[idx[i]] == x {
            acc.add(weights[idx[i]]);
            i += 1;
        }
        let after = acc.value() / total;
        let f = cdf(x);
        d = d.max((f - before).abs()).max((after - f).abs());
    }
    Ok(d)
}

/// Kolmogorov distance between coordinate `c` of the set and `cdf`.
pub fn ks_distance<C: Fn(f64) -> f64>(set: &WeightedSampleSet, c: Coordinate, cdf: C) -> Result<f64> {
    let v: Vec<f64> = set.samples.iter().map(|s| s.get(c)).collect();
    weighted_ks(&v, &set.weights, cdf)
}

/// Piecewise-polynomial CDF built from density values at Gauss-Legendre
/// nodes on a set of panels.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    edges: Vec<f64>,
    nodes: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    start: Vec<f64>,
    /// Mass left of the first edge.
    lower_mass: f64,
    /// Mass right of the last edge (spread uniformly up to 1).
    upper_mass: f64,
    /// Integral over all panels plus `lower_mass` before normalization.
    pub total: f64,
    /// `cdf(u) = 1 - cdf(mirror - u)` beyond `edges.last()`.
    mirror: Option<f64>,
}

impl TabulatedCdf {
    /// `density` at `n` nodes per panel, with the masses beyond the first and
    /// last edges given. With `mirror = Some(c)` the panels cover
    /// `[edges[0], c/2]` and the law is taken symmetric about `c/2`.
    pub fn build<F: Fn(f64) -> Result<f64> + Sync>(
        density: F,
        edges: &[f64],
        n: usize,
        (lower_mass, upper_mass): (f64, f64),
        mirror: Option<f64>,
    ) -> Result<Self> {
        let (x, w) = gauss_legendre(n);
        let pts: Vec<(usize, f64)> = edges
            .windows(2)
            .enumerate()
            .flat_map(|(p, e)| x.iter().map(move |xi| (p, 0.5 * (e[0] + e[1]) + 0.5 * (e[1] - e[0]) * xi)))
            .collect();
        let vals: Vec<Result<f64>> = pts.par_iter().map(|&(_, u)| density(u)).collect();
        let mut nodes = vec![Vec::with_capacity(n); edges.len() - 1];
        let mut values = vec![Vec::with_capacity(n); edges.len() - 1];
        for (&(p, u), v) in pts.iter().zip(vals) {
            nodes[p].push(u);
            values[p].push(v?);
        }
        let mut start = Vec::with_capacity(edges.len());
        let mut acc = lower_mass;
        for (p, e) in edges.windows(2).enumerate() {
            start.push(acc);
            let h = 0.5 * (e[1] - e[0]);
            acc += h * values[p].iter().zip(&w).map(|(v, wi)| v * wi).sum::<f64>();
        }
        start.push(acc);
        let total = if mirror.is_some() { 2.0 * acc } else { acc + upper_mass };
        Ok(TabulatedCdf { edges: edges.to_vec(), nodes, values, start, lower_mass, upper_mass, total, mirror })
    }

    fn interp(&self, p: usize, u: f64) -> f64 {
        let xs = &self.nodes[p];
        let ys = &self.values[p];
        let mut s = 0.0;
        for i in 0..xs.len() {
            let mut l = 1.0;
            for j in 0..xs.len() {
                if j != i {
                    l *= (u - xs[j]) / (xs[i] - xs[j]);
                }
            }
            s += l * ys[i];
        }
        s
    }

    fn raw(&self, u: f64) -> f64 {
        let last = *self.edges.last().expect("nonempty");
        if u <= self.edges[0] {
            return self.lower_mass * (u / self.edges[0]).clamp(0.0, 1.0);
        }
        if u >= last {
            let frac = if last < 1.0 { ((u - last) / (1.0 - last)).clamp(0.0, 1.0) } else { 1.0 };
            return self.start[self.edges.len() - 1] + self.upper_mass * frac;
        }
        let p = self.edges.partition_point(|&e| e <= u) - 1;
        let a = self.edges[p];
        let (x, w) = gauss_legendre(self.nodes[p].len());
        let h = 0.5 * (u - a);
        let part: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * self.interp(p, a + h * (1.0 + xi))).sum();
        self.start[p] + h * part
    }

    /// Normalized CDF at `u`.
    pub fn cdf(&self, u: f64) -> f64 {
        let v = match self.mirror {
            Some(c) if u > 0.5 * c => self.total - self.raw(c - u),
            _ => self.raw(u),
        };
        (v / self.total).clamp(0.0, 1.0)
    }

    /// Density interpolant at `u` (unnormalized).
    pub fn density(&self, u: f64) -> f64 {
        let u = match self.mirror {
            Some(c) if u > 0.5 * c => c - u,
            _ => u,
        };
        if u <= self.edges[0] || u >= *self.edges.last().expect("nonempty") {
            return 0.0;
        }
        let p = self.edges.partition_point(|&e| e <= u) - 1;
        self.interp(p, u)
    }
}

/// CDF of `M` from the series density.
pub fn max_cdf(laws: &ExtremeLaws) -> Result<TabulatedCdf> {
    let zl = laws.z_limit();
    let mut edges = vec![0.02, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.15, 1.3, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0];
    edges.retain(|&e| e < zl);
    edges.push(zl);
    TabulatedCdf::build(|z| Ok(laws.max_density(z)?.value), &edges, 12, (0.0, 0.0), None)
}

/// CDF of `rho` from the series density; bridge families use their symmetry.
pub fn argmax_cdf(laws: &ExtremeLaws) -> Result<TabulatedCdf> {
    let eta = match laws.family() {
        ProcessFamily::SkewBridge { .. } => 1e-6,
        _ => laws.config().margin,
    };
    let f = |u: f64| Ok(laws.argmax_density(u)?.value);
    if laws.family().is_bridge() {
        let edges = [eta, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
        TabulatedCdf::build(f, &edges, 10, (0.0, 0.0), Some(1.0))
    } else {
        let (lo, hi) = laws.strip_masses()?;
        let edges = [eta, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.995, 1.0 - eta];
        TabulatedCdf::build(f, &edges, 10, (lo.value, hi.value), None)
    }
}

/// Outcome of one Monte Carlo comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCheck {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl McCheck {
    pub fn below(name: &str, statistic: f64, threshold: f64) -> Self {
        McCheck { name: name.into(), statistic, threshold, passed: statistic < threshold }
    }

    /// `|estimate - target| < k * se`, reported as the number of standard errors.
    pub fn within_se(name: &str, estimate: f64, se: f64, target: f64, k: f64) -> Self {
        let z = (estimate - target).abs() / se;
        McCheck { name: name.into(), statistic: z, threshold: k, passed: z < k }
    }
}
