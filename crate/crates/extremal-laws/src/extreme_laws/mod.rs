//! Joint and marginal laws of the maximum `M` and its location `rho`.
//!
//! [`ExtremeLaws`] holds everything that depends only on the family (zero
//! table, hitting densities, meander weights, Abel row sums) so that grids
//! of densities cost one finite sum per point for `M` and one double series
//! per point for `rho`.

mod integrals;
mod series;

pub use integrals::{Expectation, RhoNormalization};
pub use series::RowSums;

use crate::hitting_densities::{
    skew_density_unchecked, terms_for, BesselHitting, MeanderTerminal, MeanderWeights, ProcessFamily, SMALL_T_WARN,
};
use crate::series_engine::{AbelSchedule, SeriesEvaluation};
use crate::special_functions::{c_nu, BesselOrder, ZeroTable};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Default distance kept from `u = 0` and `u = 1` by the Abel argmax series.
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// Zero-table size used when the caller does not supply one.
pub const DEFAULT_CAPACITY: usize = 8192;
/// Smallest terminal time at which `phi_k` is evaluated inside integrals;
/// the last stretch `(1-u)/z^2 < TAU0` is integrated through the law of `S_k`.
pub const TAU0: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Max,
    Argmax,
    Joint,
    Hitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AbelSeries,
    ClosedForm,
    GikhmanKiefer,
    DirectSeries,
}

/// Tunables of an [`ExtremeLaws`] instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawConfig {
    /// Schedule for single series (row sums of the `M` density).
    pub single: AbelSchedule,
    /// Schedule for double series (the `rho` density).
    pub double: AbelSchedule,
    pub margin: f64,
    /// Largest `z` for which the `M` density keeps every non-negligible row.
    pub z_cap: f64,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            single: AbelSchedule::single_default(),
            double: AbelSchedule::double_default(),
            margin: DEFAULT_MARGIN,
            z_cap: 8.0,
        }
    }
}

impl LawConfig {
    pub fn validate(&self) -> Result<()> {
        self.single.validate()?;
        self.double.validate()?;
        if !(self.margin > 0.0 && self.margin < 0.5) {
            return Err(Error::Config(format!("margin {} must lie in (0, 1/2)", self.margin)));
        }
        if !(self.z_cap > 0.0) {
            return Err(Error::Config("z_cap must be positive".into()));
        }
        Ok(())
    }
}

/// Family-level state shared by every density evaluation.
#[derive(Debug)]
pub struct ExtremeLaws {
    family: ProcessFamily,
    config: LawConfig,
    table: Option<ZeroTable>,
    hitting: Option<BesselHitting>,
    weights: Option<MeanderWeights>,
    terminal: Option<MeanderTerminal>,
    /// `P(S_k <= TAU0)` for meanders.
    terminal_head: f64,
    rows: OnceLock<std::result::Result<RowSums, Error>>,
}

impl ExtremeLaws {
    pub fn new(family: ProcessFamily) -> Result<Self> {
        Self::with_config(family, LawConfig::default(), None)
    }

    /// `table` must match the family's order; it is extended when too short.
    pub fn with_config(family: ProcessFamily, config: LawConfig, table: Option<&ZeroTable>) -> Result<Self> {
        config.validate()?;
        let order = family.order();
        let table = match order {
            None => None,
            Some(o) => {
                let need = DEFAULT_CAPACITY.max(terms_for(TAU0 / 2.0));
                Some(match table {
                    Some(t) if t.order() != o => return Err(Error::Domain("zero table order does not match family".into())),
                    Some(t) => t.with_capacity_at_least(need)?.into_owned(),
                    None => ZeroTable::new(o, need)?,
                })
            }
        };
        let hitting = table.as_ref().map(BesselHitting::new);
        let (weights, terminal) = match family {
            ProcessFamily::GeneralizedMeander { k, .. } => {
                let w = MeanderWeights::new(k, table.as_ref().expect("meander has an order"))?;
                let t = MeanderTerminal::new(&w);
                (Some(w), Some(t))
            }
            _ => (None, None),
        };
        let mut laws = ExtremeLaws {
            family,
            config,
            table,
            hitting,
            weights,
            terminal,
            terminal_head: 0.0,
            rows: OnceLock::new(),
        };
        if laws.terminal.is_some() {
            laws.terminal_head = integrals::terminal_head_mass(laws.terminal.as_ref().expect("set above"))?;
        }
        Ok(laws)
    }

    pub fn family(&self) -> ProcessFamily {
        self.family
    }

    pub fn config(&self) -> &LawConfig {
        &self.config
    }

    pub fn table(&self) -> Option<&ZeroTable> {
        self.table.as_ref()
    }

    pub fn weights(&self) -> Option<&MeanderWeights> {
        self.weights.as_ref()
    }

    pub(crate) fn order(&self) -> Option<BesselOrder> {
        self.family.order()
    }

    pub(crate) fn f_value(&self, t: f64) -> f64 {
        match self.family {
            ProcessFamily::SkewBridge { beta } => {
                if t <= 0.0 {
                    0.0
                } else {
                    skew_density_unchecked(beta, t)
                }
            }
            _ => self.hitting.as_ref().expect("order-based family").value(t),
        }
    }

    pub(crate) fn phi_value(&self, t: f64) -> Result<f64> {
        self.terminal.as_ref().expect("meander").value(t)
    }

    /// Joint density of `(M, rho)` at `(z, u)` from the agreement formula.
    pub fn joint_density(&self, z: f64, u: f64) -> Result<f64> {
        Ok(self.joint_density_flagged(z, u)?.0)
    }

    /// As [`Self::joint_density`], with a flag raised when a hitting-time
    /// argument falls below the documented precision floor.
    pub fn joint_density_flagged(&self, z: f64, u: f64) -> Result<(f64, bool)> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("z = {z} must be positive")));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("u = {u} must lie in (0, 1)")));
        }
        let z2 = z * z;
        let (t1, t2) = (u / z2, (1.0 - u) / z2);
        match self.family {
            ProcessFamily::BesselBridge { order } => {
                let v = 2.0 * order.c() / z.powf(3.0 + order.delta()) * self.f_value(t1) * self.f_value(t2);
                Ok((v, false))
            }
            ProcessFamily::SkewBridge { beta } => {
                let v = (2.0 * PI).sqrt() / (beta * z2 * z2) * self.f_value(t1) * self.f_value(t2);
                Ok((v, false))
            }
            ProcessFamily::GeneralizedMeander { k, order } => {
                let mu = 0.5 * k - 1.0;
                let f = self.f_value(t1);
                let phi = if f == 0.0 { 0.0 } else { self.phi_value(t2)? };
                let v = 2.0 * order.c() / (k * c_nu(mu)) * z.powf(-(3.0 + order.delta() - k)) * f * phi;
                Ok((v, t2 < SMALL_T_WARN))
            }
        }
    }

    pub(crate) fn rows(&self) -> Result<&RowSums> {
        self.rows
            .get_or_init(|| series::row_sums(self))
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Density of `M` at `z`.
    pub fn max_density(&self, z: f64) -> Result<SeriesEvaluation> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("z = {z} must be positive")));
        }
        match self.family {
            ProcessFamily::SkewBridge { beta } => Ok(series::skew_max_density(beta, z)),
            ProcessFamily::BesselBridge { order } => series::bessel_max_density(self.rows()?, order, z),
            ProcessFamily::GeneralizedMeander { k, order } => series::meander_max_density(self, self.rows()?, k, order, z),
        }
    }

    /// Density of `rho` at `u`.
    pub fn argmax_density(&self, u: f64) -> Result<SeriesEvaluation> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("u = {u} must lie in (0, 1)")));
        }
        match self.family {
            ProcessFamily::SkewBridge { beta } => series::skew_argmax_density(beta, u),
            _ => {
                let m = self.config.margin;
                if u < m || u > 1.0 - m {
                    return Err(Error::Range(format!("u = {u} is within the margin {m} of the boundary")));
                }
                match self.family {
                    ProcessFamily::BesselBridge { order } => series::bessel_argmax_density(self, order, u),
                    ProcessFamily::GeneralizedMeander { k, order } => series::meander_argmax_density(self, k, order, u),
                    ProcessFamily::SkewBridge { .. } => unreachable!(),
                }
            }
        }
    }

    /// Residual of the conjectured identity for the row sums at index `n`.
    pub fn conjecture_residual(&self, n: usize) -> Result<SeriesEvaluation> {
        let order = self.order().ok_or_else(|| Error::Domain("conjecture concerns Bessel orders".into()))?;
        series::conjecture_residual(self, order, n)
    }

    pub fn method_for(&self, variable: Variable) -> Method {
        match (self.family, variable) {
            (_, Variable::Joint) => Method::DirectSeries,
            (ProcessFamily::SkewBridge { .. }, _) => Method::ClosedForm,
            _ => Method::AbelSeries,
        }
    }

    /// Density table of `M` over `grid`; points are evaluated in parallel
    /// and returned in grid order.
    pub fn max_table(&self, grid: &[f64]) -> Result<DensityTable> {
        if self.order().is_some() {
            self.rows()?;
        }
        let evals: Vec<Result<SeriesEvaluation>> = grid.par_iter().map(|&z| self.max_density(z)).collect();
        DensityTable::from_evals(self.family, Variable::Max, self.method_for(Variable::Max), grid.iter().map(|&z| vec![z]).collect(), evals)
    }

    /// Density table of `rho` over `grid`.
    pub fn argmax_table(&self, grid: &[f64]) -> Result<DensityTable> {
        let evals: Vec<Result<SeriesEvaluation>> = grid.par_iter().map(|&u| self.argmax_density(u)).collect();
        DensityTable::from_evals(self.family, Variable::Argmax, self.method_for(Variable::Argmax), grid.iter().map(|&u| vec![u]).collect(), evals)
    }

    /// Joint density over the product grid `zs x us`.
    pub fn joint_table(&self, zs: &[f64], us: &[f64]) -> Result<DensityTable> {
        let pts: Vec<(f64, f64)> = zs.iter().flat_map(|&z| us.iter().map(move |&u| (z, u))).collect();
        let evals: Vec<Result<SeriesEvaluation>> = pts
            .par_iter()
            .map(|&(z, u)| self.joint_density(z, u).map(|v| SeriesEvaluation::exact(v, 0)))
            .collect();
        DensityTable::from_evals(self.family, Variable::Joint, Method::DirectSeries, pts.iter().map(|&(z, u)| vec![z, u]).collect(), evals)
    }
}

/// Gikhman-Kiefer single series for the maximum of a Bessel bridge:
/// `(2/(C_nu z^delta)) sum_n j^{2nu}/J_{nu+1}(j)^2 (j^2/z^3 - delta/z) exp(-j^2/(2z^2))`.
pub fn gikhman_max_density(order: BesselOrder, z: f64, table: &ZeroTable) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("z = {z} must be positive")));
    }
    let delta = order.delta();
    let mut s = crate::quadrature::NeumaierSum::default();
    let mut n = 1;
    loop {
        let j = table.zero(n);
        let e = (-j * j / (2.0 * z * z)).exp();
        if e == 0.0 {
            break;
        }
        let g = table.coeff(n);
        // j^{2nu}/J_{nu+1}^2 = g^2 / j^2
        let term = g * g / (j * j) * (j * j / (z * z * z) - delta / z) * e;
        s.add(term);
        if n > 3 && term.abs() < 1e-18 * s.value().abs() {
            break;
        }
        n += 1;
    }
    Ok((2.0 / (order.c() * z.powf(delta)) * s.value()).max(0.0))
}

/// Density of the maximum of a Bessel process on `[0, 1]`: `(2/z^3) f_nu(1/z^2)`.
pub fn bessel_process_max_density(order: BesselOrder, z: f64, table: &ZeroTable) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("z = {z} must be positive")));
    }
    let t = 1.0 / (z * z);
    if t < crate::hitting_densities::F_NEGLIGIBLE_T {
        return Ok(0.0);
    }
    let v = crate::hitting_densities::bessel_hitting_density(order, t, table)?;
    Ok(2.0 / (z * z * z) * v.value)
}

/// Agreement-formula joint density (one-shot form of [`ExtremeLaws::joint_density`]).
pub fn joint_density(family: ProcessFamily, z: f64, u: f64, table: Option<&ZeroTable>) -> Result<f64> {
    ExtremeLaws::with_config(family, LawConfig::default(), table)?.joint_density(z, u)
}

/// One-shot density of `M`.
pub fn max_density(family: ProcessFamily, z: f64, table: Option<&ZeroTable>, schedule: &AbelSchedule) -> Result<SeriesEvaluation> {
    let cfg = LawConfig { single: schedule.clone(), ..LawConfig::default() };
    ExtremeLaws::with_config(family, cfg, table)?.max_density(z)
}

/// One-shot density of `rho`.
pub fn argmax_density(family: ProcessFamily, u: f64, table: Option<&ZeroTable>, schedule: &AbelSchedule) -> Result<SeriesEvaluation> {
    let cfg = LawConfig { double: schedule.clone(), ..LawConfig::default() };
    ExtremeLaws::with_config(family, cfg, table)?.argmax_density(u)
}

/// One-shot conjecture residual.
pub fn conjecture_residual(order: BesselOrder, n: usize, table: Option<&ZeroTable>, schedule: &AbelSchedule) -> Result<SeriesEvaluation> {
    let cfg = LawConfig { single: schedule.clone(), ..LawConfig::default() };
    ExtremeLaws::with_config(ProcessFamily::BesselBridge { order }, cfg, table)?.conjecture_residual(n)
}

/// Tabulated density values.
#[derive(Debug, Clone, Serialize)]
pub struct DensityTable {
    pub family: ProcessFamily,
    pub variable: Variable,
    /// One entry per point: `[z]`, `[u]` or `[z, u]`.
    pub grid: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub converged: Vec<bool>,
    pub method: Method,
    /// Points whose slightly negative value was clipped to zero.
    pub clipped: Vec<usize>,
}

impl DensityTable {
    /// Collects evaluations, clipping negatives that lie within their error.
    pub fn from_evals(
        family: ProcessFamily,
        variable: Variable,
        method: Method,
        grid: Vec<Vec<f64>>,
        evals: Vec<Result<SeriesEvaluation>>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(evals.len());
        let mut errs = Vec::with_capacity(evals.len());
        let mut conv = Vec::with_capacity(evals.len());
        let mut clipped = Vec::new();
        for (i, e) in evals.into_iter().enumerate() {
            let e = e?;
            let mut v = e.value;
            if v < 0.0 {
                if -v <= e.error_estimate.max(1e-12) {
                    clipped.push(i);
                    v = 0.0;
                } else {
                    return Err(Error::NonConvergence(format!(
                        "negative density {v:e} beyond its error estimate {:e} at {:?}",
                        e.error_estimate, grid[i]
                    )));
                }
            }
            values.push(v);
            errs.push(e.error_estimate);
            conv.push(e.converged);
        }
        Ok(DensityTable { family, variable, grid, values, error_estimates: errs, converged: conv, method, clipped })
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Trapezoid integral over a one-dimensional grid.
    pub fn trapezoid(&self) -> f64 {
        let mut s = 0.0;
        for i in 1..self.values.len() {
            let h = self.grid[i][0] - self.grid[i - 1][0];
            s += 0.5 * h * (self.values[i] + self.values[i - 1]);
        }
        s
    }
}

/// `count` points from `lo` to `hi`, linearly or logarithmically spaced.
pub fn grid(lo: f64, hi: f64, count: usize, log: bool) -> Result<Vec<f64>> {
    if count == 0 || !(hi >= lo) || (log && !(lo > 0.0)) {
        return Err(Error::Domain(format!("invalid grid [{lo}, {hi}] with {count} points")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let s = i as f64 / step;
            if log {
                (lo.ln() + s * (hi.ln() - lo.ln())).exp()
            } else {
                lo + s * (hi - lo)
            }
        })
        .collect())
}

/// Default `M` grid: 512 log-spaced points on `(0.05, 6]`.
pub fn default_max_grid() -> Vec<f64> {
    grid(0.05, 6.0, 512, true).expect("valid constants")
}

/// Default `rho` grid: 499 points on `[1e-3, 1 - 1e-3]`.
pub fn default_argmax_grid() -> Vec<f64> {
    grid(1e-3, 1.0 - 1e-3, 499, false).expect("valid constants")
}

#[cfg(test)]
mod tests;
