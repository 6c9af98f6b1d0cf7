use crate::extreme_laws::{gikhman_max_density, ExtremeLaws, LawConfig, DEFAULT_CAPACITY};
use crate::hitting_densities::{
    bessel_hitting_laplace, laplace_numeric, meander_terminal_laplace, skew_hitting_density, skew_hitting_laplace, BesselHitting,
    MeanderTerminal, MeanderWeights, ProcessFamily,
};
use crate::series_engine::{eta, AbelSchedule};
use crate::simulation_oracle::{ks_distance, sample_hitting_time, sample_skew_bridge, stream, Coordinate};
use crate::special_functions::{bessel_zero, BesselOrder, ZeroTable};
use crate::Result;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct SelfTestOptions {
    /// Schedule for the single series of the battery.
    pub single: AbelSchedule,
    /// Perturb one zero of the table used by the conjecture check.
    pub corrupt_zero_table: bool,
}

impl Default for SelfTestOptions {
    fn default() -> Self {
        SelfTestOptions { single: AbelSchedule::single_default(), corrupt_zero_table: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: String,
    pub property: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One `PASS`/`FAIL` line per property.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag} {}::{} measured={:.6e} threshold={:.6e}", c.module, c.property, c.measured, c.threshold);
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(s, "{} properties, {failed} failed", self.checks.len());
        s
    }
}

struct Battery(Vec<Check>);

impl Battery {
    /// Records `measured < threshold`; errors count as failures.
    fn below(&mut self, module: &str, property: &str, measured: Result<f64>, threshold: f64) {
        let m = measured.unwrap_or(f64::INFINITY);
        self.0.push(Check { module: module.into(), property: property.into(), measured: m, threshold, passed: m < threshold });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Reduced-size invariant battery across all modules.
pub fn self_test(opts: &SelfTestOptions) -> Result<SelfTestReport> {
    opts.single.validate()?;
    let mut b = Battery(Vec::new());
    let half = BesselOrder::new(0.5)?;

    // special functions
    b.below("special_functions", "j_0_1", bessel_zero(BesselOrder::new(0.0)?, 1).map(|j| (j - 2.404_825_557_695_773).abs()), 1e-13);
    b.below("special_functions", "zero_table_violations", ZeroTable::new(BesselOrder::new(-0.3)?, 2000).map(|t| t.check_invariants().len() as f64), 0.5);

    // series engine
    for (s, want, name) in [(0.0, 0.5, "eta_0"), (1.0, LN_2, "eta_1"), (-1.0, 0.25, "eta_minus_1"), (2.0, PI * PI / 12.0, "eta_2")] {
        b.below("series_engine", name, eta(s).map(|e| (e.value - want).abs()), 1e-8);
    }

    // hitting densities
    let tab = ZeroTable::new(half, 4000)?;
    let f = BesselHitting::new(&tab);
    let lap = laplace_numeric(|t| f.value(t), 1.0, 1e-12).value;
    b.below("hitting_densities", "bessel_laplace_rel", bessel_hitting_laplace(half, 1.0).map(|w| rel(lap, w)), 1e-8);
    let lap = laplace_numeric(|t| skew_hitting_density(0.3, t).unwrap_or(0.0), 1.0, 1e-12).value;
    b.below("hitting_densities", "skew_laplace_rel", skew_hitting_laplace(0.3, 1.0).map(|w| rel(lap, w)), 1e-8);
    let w = MeanderWeights::new(2.0, &tab)?;
    let phi = MeanderTerminal::new(&w);
    // the mass below the series floor enters with weight exp(-lambda t) ~ 1
    let cut = |t: f64| if t < phi.min_t() { 0.0 } else { phi.value(t).unwrap_or(0.0) };
    let lap = laplace_numeric(cut, 0.5, 1e-12).value + 1.0 - laplace_numeric(cut, 0.0, 1e-12).value;
    b.below("hitting_densities", "meander_terminal_laplace_rel", meander_terminal_laplace(2, 0.5).map(|w| rel(lap, w)), 1e-6);

    // extreme laws
    let skew = ExtremeLaws::new(ProcessFamily::skew_bridge(0.5)?)?;
    let dev = (1..=10).map(|i| skew.argmax_density(i as f64 / 11.0).map(|e| (e.value - 1.0).abs())).try_fold(0f64, |a, v| v.map(|v| a.max(v)));
    b.below("extreme_laws", "skew_half_uniform_argmax", dev, 1e-12);
    let dev = (1..=10)
        .map(|i| {
            let z = 0.25 * i as f64;
            skew.max_density(z).map(|e| rel(e.value, 4.0 * z * (-2.0 * z * z).exp()))
        })
        .try_fold(0f64, |a, v| v.map(|v| a.max(v)));
    b.below("extreme_laws", "skew_half_rayleigh_max", dev, 1e-12);
    let cfg = LawConfig { single: opts.single.clone(), ..LawConfig::default() };
    let exc = ExtremeLaws::with_config(ProcessFamily::BesselBridge { order: half }, cfg.clone(), None)?;
    let t = exc.table().expect("bessel family");
    b.below(
        "extreme_laws",
        "gikhman_kiefer_rel",
        exc.max_density(1.0).and_then(|a| Ok(rel(a.value, gikhman_max_density(half, 1.0, t)?))),
        1e-6,
    );
    b.below("extreme_laws", "max_normalization", exc.max_normalization().map(|e| (e.value - 1.0).abs()), 1e-5);
    b.below(
        "extreme_laws",
        "argmax_symmetry",
        exc.argmax_density(0.3).and_then(|a| Ok((a.value - exc.argmax_density(0.7)?.value).abs())),
        1e-8,
    );
    let order = BesselOrder::new(-0.6)?;
    let mut ctab = ZeroTable::new(order, DEFAULT_CAPACITY)?;
    if opts.corrupt_zero_table {
        let mut z = ctab.zeros().to_vec();
        z[2] *= 1.0 + 1e-6;
        ctab = ZeroTable::from_parts(order, z, ctab.coeffs().to_vec());
    }
    let conj = ExtremeLaws::with_config(ProcessFamily::BesselBridge { order }, cfg, Some(&ctab))?;
    let worst = (1..=3).map(|n| conj.conjecture_residual(n).map(|r| r.value.abs())).try_fold(0f64, |a, v| v.map(|v| a.max(v)));
    b.below("extreme_laws", "conjecture_residual", worst, 1e-8);

    // simulation oracle
    let n = 20_000;
    let set = sample_skew_bridge(0.5, n, 1000, 17)?;
    b.below("simulation_oracle", "uniform_argmax_ks", ks_distance(&set, Coordinate::Rho, |u| u.clamp(0.0, 1.0)), 3.8 / (n as f64).sqrt());
    let again = sample_skew_bridge(0.5, 200, 1000, 17)?;
    b.below("simulation_oracle", "determinism_mismatches", Ok(again.samples.iter().zip(&set.samples).filter(|(a, b)| a != b).count() as f64), 0.5);
    let draws: Vec<f64> = (0..n as u64).map(|i| sample_hitting_time(half, &mut stream(23, i), 2e-3).map(|t| (-t).exp())).collect::<Result<_>>()?;
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
    b.below("simulation_oracle", "hitting_laplace_se", bessel_hitting_laplace(half, 1.0).map(|w| (mean - w).abs() / sd), 4.0);

    // output formatting
    let x = 0.1f64 + 0.2;
    let back: f64 = format!("{x:.16e}").parse().unwrap_or(f64::NAN);
    b.below("cli_io", "csv_round_trip", Ok(if back == x { 0.0 } else { 1.0 }), 0.5);

    Ok(SelfTestReport { checks: b.0 })
}
