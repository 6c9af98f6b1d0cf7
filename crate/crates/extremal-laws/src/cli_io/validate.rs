use crate::extreme_laws::ExtremeLaws;
use crate::hitting_densities::{meander_terminal_laplace, ProcessFamily};
use crate::simulation_oracle::{
    argmax_cdf, ks_distance, max_cdf, sample_back_to_back, sample_excursion, sample_meander_back_to_back, sample_meander_terminal,
    sample_reflected_bridge, sample_skew_bridge, stream, Coordinate, McCheck, WeightedSampleSet,
};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Kolmogorov thresholds are `c / sqrt(N)`; 0.012 at `N = 1e5` unweighted.
const KS_SCALE: f64 = 3.8;
const KS_SCALE_WEIGHTED: f64 = 6.32;
/// Seed offset of the independent terminal-time draws.
const TERMINAL_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSpec {
    pub n_samples: usize,
    pub path_steps: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub sampler: String,
    pub effective_sample_size: f64,
    pub low_effective_sample_size: bool,
    pub checks: Vec<McCheck>,
}

impl McReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn ks_checks(laws: &ExtremeLaws, set: &WeightedSampleSet, scale: f64) -> Result<Vec<McCheck>> {
    let thr = scale / (set.len() as f64).sqrt();
    let mc = max_cdf(laws)?;
    let rc = argmax_cdf(laws)?;
    Ok(vec![
        McCheck::below("ks_max", ks_distance(set, Coordinate::M, |z| mc.cdf(z))?, thr),
        McCheck::below("ks_argmax", ks_distance(set, Coordinate::Rho, |u| rc.cdf(u))?, thr),
    ])
}

/// Samples `family` and compares the empirical laws with the series laws.
pub fn mc_validate(family: ProcessFamily, spec: &McSpec) -> Result<(McReport, WeightedSampleSet)> {
    let n = spec.n_samples;
    if n < 100 {
        return Err(Error::Domain("mc-validate needs at least 100 samples".into()));
    }
    let laws = ExtremeLaws::new(family)?;
    let (sampler, set, checks) = match family {
        ProcessFamily::SkewBridge { beta } => {
            let set = if beta == 1.0 {
                sample_reflected_bridge(n, spec.path_steps, spec.seed)?
            } else {
                sample_skew_bridge(beta, n, spec.path_steps, spec.seed)?
            };
            let c = ks_checks(&laws, &set, KS_SCALE)?;
            ("skew_bridge_paths", set, c)
        }
        ProcessFamily::BesselBridge { order } => {
            let nu = order.nu();
            if nu == -0.5 || nu == 0.5 {
                let (name, set) = if nu < 0.0 {
                    ("reflected_bridge_paths", sample_reflected_bridge(n, spec.path_steps, spec.seed)?)
                } else {
                    ("excursion_paths", sample_excursion(n, spec.path_steps, spec.seed)?)
                };
                let c = ks_checks(&laws, &set, KS_SCALE)?;
                (name, set, c)
            } else {
                let set = sample_back_to_back(order, n, spec.seed, spec.dt)?;
                let mut c = ks_checks(&laws, &set, KS_SCALE_WEIGHTED)?;
                let (p, se) = set.mean_of(|s| if s.rho <= 0.5 { 1.0 } else { 0.0 });
                c.push(McCheck::within_se("argmax_symmetry_se", p, se, 0.5, 4.0));
                ("back_to_back_hitting_times", set, c)
            }
        }
        ProcessFamily::GeneralizedMeander { k, .. } => {
            let set = sample_meander_back_to_back(family, n, spec.seed, spec.dt)?;
            let mut c = ks_checks(&laws, &set, KS_SCALE_WEIGHTED)?;
            if k == k.round() && (1.0..=3.0).contains(&k) {
                let draws: Vec<Result<f64>> = (0..n as u64)
                    .into_par_iter()
                    .map(|i| {
                        let mut r = stream(spec.seed, TERMINAL_STREAM_OFFSET + i);
                        Ok((-0.5 * sample_meander_terminal(k, &mut r, spec.dt)?).exp())
                    })
                    .collect();
                let draws = draws.into_iter().collect::<Result<Vec<f64>>>()?;
                let mean = draws.iter().sum::<f64>() / n as f64;
                let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
                let target = meander_terminal_laplace(k as u32, 0.5)?;
                c.push(McCheck::within_se("terminal_laplace_se", mean, (var / n as f64).sqrt(), target, 4.0));
            }
            ("meander_back_to_back", set, c)
        }
    };
    let report = McReport {
        sampler: sampler.into(),
        effective_sample_size: set.effective_sample_size(),
        low_effective_sample_size: set.low_ess(),
        checks,
    };
    Ok((report, set))
}
