//! Command-line front end: density tables, zero tables, conjecture checks,
//! Monte Carlo validation and the self-test battery.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical non-convergence,
//! 3 validation failure.

mod self_test;
mod validate;

pub use self_test::{self_test, SelfTestOptions, SelfTestReport};
pub use validate::{mc_validate, McReport, McSpec};

use crate::extreme_laws::{grid, DensityTable, ExtremeLaws, LawConfig, Method, Variable};
use crate::hitting_densities::{bessel_hitting_density, meander_terminal_density, skew_hitting_density, terms_for, ProcessFamily};
use crate::series_engine::{AbelSchedule, SeriesEvaluation};
use crate::special_functions::{BesselOrder, ZeroTable};
use crate::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable capping the worker count (0 = automatic).
pub const THREADS_ENV: &str = "EXTREMAL_LAWS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "extremal-laws", version, about = "Laws of the maximum and its location for Bessel bridges, skew bridges and Bessel meanders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density of the maximum M over a z-grid.
    DensityMax {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0.05)]
        zmin: f64,
        #[arg(long, default_value_t = 6.0)]
        zmax: f64,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Log)]
        spacing: Spacing,
        #[command(flatten)]
        abel: AbelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Density of the location rho of the maximum over a u-grid.
    DensityArgmax {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1e-3)]
        umin: f64,
        #[arg(long, default_value_t = 0.999)]
        umax: f64,
        #[arg(long, default_value_t = 499)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Linear)]
        spacing: Spacing,
        #[command(flatten)]
        abel: AbelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Joint density of (M, rho) over a product grid.
    JointDensity {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0.2)]
        zmin: f64,
        #[arg(long, default_value_t = 3.0)]
        zmax: f64,
        #[arg(long, default_value_t = 40)]
        nz: usize,
        #[arg(long, default_value_t = 0.01)]
        umin: f64,
        #[arg(long, default_value_t = 0.99)]
        umax: f64,
        #[arg(long = "nu-points", default_value_t = 49)]
        nu_points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// First-hitting-time density (or the meander terminal density).
    HittingDensity {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0.01)]
        tmin: f64,
        #[arg(long, default_value_t = 3.0)]
        tmax: f64,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Spacing::Log)]
        spacing: Spacing,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Positive zeros of J_nu and the spectral coefficients.
    BesselZeros {
        #[arg(long, allow_hyphen_values = true)]
        nu: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Residuals of the conjectured row-sum identity.
    CheckConjecture {
        #[arg(long, allow_hyphen_values = true)]
        nu: f64,
        #[arg(long, num_args = 1.., default_values_t = vec![1usize, 2, 3])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        abel: AbelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare Monte Carlo samples with the series laws.
    McValidate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 10_000)]
        path_steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the sample set as `m,rho,weight` CSV.
        #[arg(long)]
        samples_csv: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reduced-size invariant battery of every module.
    SelfTest {
        #[command(flatten)]
        abel: AbelArgs,
        /// Perturb one zero of the table used by the conjecture check.
        #[arg(long, hide = true)]
        corrupt_zero_table: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Bessel,
    Skew,
    Meander,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyTag,
    /// Bessel order (delta = 2 nu + 2).
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Dimension, as an alternative to --nu.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Meander terminal exponent.
    #[arg(long)]
    k: Option<f64>,
}

impl FamilyArgs {
    fn resolve(&self) -> Result<ProcessFamily, Error> {
        let order = || -> Result<f64, Error> {
            match (self.nu, self.delta) {
                (Some(_), Some(_)) => Err(Error::Config("give either --nu or --delta".into())),
                (Some(nu), None) => Ok(nu),
                (None, Some(d)) => Ok(0.5 * d - 1.0),
                (None, None) => Err(Error::Config("--nu or --delta is required".into())),
            }
        };
        match self.family {
            FamilyTag::Bessel => ProcessFamily::bessel_bridge(order()?),
            FamilyTag::Skew => ProcessFamily::skew_bridge(self.beta.ok_or_else(|| Error::Config("--beta is required".into()))?),
            FamilyTag::Meander => {
                let k = self.k.ok_or_else(|| Error::Config("--k is required".into()))?;
                let nu = if self.nu.is_none() && self.delta.is_none() { 0.5 } else { order()? };
                ProcessFamily::meander(k, nu)
            }
        }
    }
}

#[derive(Debug, Args)]
struct AbelArgs {
    /// Number of damping values alpha = 1 - 2^-j.
    #[arg(long)]
    alpha_count: Option<u32>,
    /// Smallest j of the schedule.
    #[arg(long)]
    alpha_jmin: Option<u32>,
    #[arg(long)]
    extrapolation_order: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
}

impl AbelArgs {
    fn resolve(&self, base: AbelSchedule) -> Result<AbelSchedule, Error> {
        let jmin0 = (-(1.0 - base.alphas[0]).log2()).round() as u32;
        let jmin = self.alpha_jmin.unwrap_or(jmin0);
        let count = self.alpha_count.unwrap_or(base.alphas.len() as u32);
        if count == 0 {
            return Err(Error::Config("alpha count must be positive".into()));
        }
        let order = self.extrapolation_order.unwrap_or(base.extrapolation_order);
        let mut s = AbelSchedule {
            alphas: (jmin..jmin + count).map(|j| 1.0 - (-(j as f64)).exp2()).collect(),
            extrapolation_order: order,
            ..base
        };
        if let Some(r) = self.rtol {
            s.converge_rtol = r;
        }
        if let Some(a) = self.atol {
            s.converge_atol = a;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    /// Defaults to json for `.json` paths and csv otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutputArgs {
    fn resolve(&self, default: Format) -> OutputSpec {
        let format = self.format.unwrap_or(match &self.out {
            Some(p) if p.ends_with(".json") => Format::Json,
            Some(p) if p.ends_with(".csv") => Format::Csv,
            _ => default,
        });
        OutputSpec { path: self.out.clone(), format }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    fn points(&self) -> Result<Vec<f64>, Error> {
        grid(self.min, self.max, self.count, self.spacing == Spacing::Log)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: Format,
}

/// Fully resolved configuration of one run, embedded in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<ProcessFamily>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abel: Option<AbelSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    pub output: OutputSpec,
}

/// Outcome of a command before it is mapped to an exit status.
enum Outcome {
    Ok,
    NonConvergence,
    ValidationFailure,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Range(_) | Error::Config(_) | Error::Unsupported(_) => EXIT_USAGE,
        _ => EXIT_NONCONVERGENCE,
    }
}

/// Runs the command line `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = e.print();
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                eprintln!("error: {THREADS_ENV} must be a non-negative integer, got {s:?}");
                return EXIT_USAGE;
            }
        },
        Err(_) => 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_NONCONVERGENCE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::NonConvergence) => {
            eprintln!("warning: some series did not converge");
            EXIT_NONCONVERGENCE
        }
        Ok(Outcome::ValidationFailure) => {
            eprintln!("validation failed");
            EXIT_VALIDATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(output: &OutputSpec, body: &str) -> Result<(), Error> {
    match &output.path {
        Some(p) => std::fs::write(p, body).map_err(|e| Error::Config(format!("cannot write {p}: {e}"))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(|e| Error::Config(format!("cannot write output: {e}")))
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn table_csv(names: &[&str], t: &DensityTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{},density,error_estimate,converged", names.join(","));
    for i in 0..t.values.len() {
        for x in &t.grid[i] {
            let _ = write!(s, "{x:.16e},");
        }
        let _ = writeln!(s, "{:.16e},{:.16e},{}", t.values[i], t.error_estimates[i], t.converged[i]);
    }
    s
}

#[derive(Serialize)]
struct TableDoc<'a> {
    config: &'a RunConfig,
    table: &'a DensityTable,
}

fn write_table(config: &RunConfig, names: &[&str], t: &DensityTable) -> Result<Outcome, Error> {
    let body = match config.output.format {
        Format::Csv => table_csv(names, t),
        Format::Json => json(&TableDoc { config, table: t }),
    };
    emit(&config.output, &body)?;
    Ok(if t.all_converged() { Outcome::Ok } else { Outcome::NonConvergence })
}

fn dispatch(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::DensityMax { family, zmin, zmax, n, spacing, abel, output } => {
            let fam = family.resolve()?;
            let single = abel.resolve(AbelSchedule::single_default())?;
            let g = GridSpec { min: zmin, max: zmax, count: n, spacing };
            let cfg = RunConfig {
                command: "density-max".into(),
                family: Some(fam),
                grids: vec![g.clone()],
                abel: Some(single.clone()),
                mc: None,
                output: output.resolve(Format::Csv),
            };
            let pts = g.points()?;
            let laws = ExtremeLaws::with_config(fam, LawConfig { single, ..LawConfig::default() }, None)?;
            let t = laws.max_table(&pts)?;
            write_table(&cfg, &["z"], &t)
        }
        Command::DensityArgmax { family, umin, umax, n, spacing, abel, output } => {
            let fam = family.resolve()?;
            let double = abel.resolve(AbelSchedule::double_default())?;
            let g = GridSpec { min: umin, max: umax, count: n, spacing };
            let cfg = RunConfig {
                command: "density-argmax".into(),
                family: Some(fam),
                grids: vec![g.clone()],
                abel: Some(double.clone()),
                mc: None,
                output: output.resolve(Format::Csv),
            };
            let pts = g.points()?;
            let laws = ExtremeLaws::with_config(fam, LawConfig { double, ..LawConfig::default() }, None)?;
            let t = laws.argmax_table(&pts)?;
            write_table(&cfg, &["u"], &t)
        }
        Command::JointDensity { family, zmin, zmax, nz, umin, umax, nu_points, output } => {
            let fam = family.resolve()?;
            let gz = GridSpec { min: zmin, max: zmax, count: nz, spacing: Spacing::Linear };
            let gu = GridSpec { min: umin, max: umax, count: nu_points, spacing: Spacing::Linear };
            let cfg = RunConfig {
                command: "joint-density".into(),
                family: Some(fam),
                grids: vec![gz.clone(), gu.clone()],
                abel: None,
                mc: None,
                output: output.resolve(Format::Csv),
            };
            let laws = ExtremeLaws::new(fam)?;
            let t = laws.joint_table(&gz.points()?, &gu.points()?)?;
            write_table(&cfg, &["z", "u"], &t)
        }
        Command::HittingDensity { family, tmin, tmax, n, spacing, output } => {
            let fam = family.resolve()?;
            let g = GridSpec { min: tmin, max: tmax, count: n, spacing };
            let cfg = RunConfig {
                command: "hitting-density".into(),
                family: Some(fam),
                grids: vec![g.clone()],
                abel: None,
                mc: None,
                output: output.resolve(Format::Csv),
            };
            let pts = g.points()?;
            if !(tmin > 0.0) {
                return Err(Error::Domain("tmin must be positive".into()));
            }
            let table = match fam.order() {
                Some(o) => Some(ZeroTable::new(o, terms_for(tmin))?),
                None => None,
            };
            let evals: Vec<crate::Result<SeriesEvaluation>> = pts
                .iter()
                .map(|&t| {
                    let (v, tail) = match fam {
                        ProcessFamily::SkewBridge { beta } => (skew_hitting_density(beta, t)?, 0.0),
                        ProcessFamily::BesselBridge { order } => {
                            let s = bessel_hitting_density(order, t, table.as_ref().expect("order-based"))?;
                            (s.value, s.tail_bound)
                        }
                        ProcessFamily::GeneralizedMeander { .. } => {
                            let s = meander_terminal_density(fam, t, table.as_ref().expect("order-based"))?;
                            (s.value, s.tail_bound)
                        }
                    };
                    let mut e = SeriesEvaluation::exact(v, 0);
                    e.error_estimate = tail;
                    Ok(e)
                })
                .collect();
            let t = DensityTable::from_evals(fam, Variable::Hitting, Method::DirectSeries, pts.iter().map(|&t| vec![t]).collect(), evals)?;
            write_table(&cfg, &["t"], &t)
        }
        Command::BesselZeros { nu, count, output } => {
            let order = BesselOrder::new(nu)?;
            if count == 0 {
                return Err(Error::Domain("count must be positive".into()));
            }
            let cfg = RunConfig {
                command: "bessel-zeros".into(),
                family: None,
                grids: vec![],
                abel: None,
                mc: None,
                output: output.resolve(Format::Csv),
            };
            let t = ZeroTable::new(order, count)?;
            let body = match cfg.output.format {
                Format::Csv => {
                    let mut s = String::from("n,zero,coefficient\n");
                    for n in 1..=count {
                        let _ = writeln!(s, "{n},{:.16e},{:.16e}", t.zero(n), t.coeff(n));
                    }
                    s
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        config: &'a RunConfig,
                        nu: f64,
                        zeros: &'a [f64],
                        coefficients: &'a [f64],
                    }
                    json(&Doc { config: &cfg, nu, zeros: &t.zeros()[..count], coefficients: &t.coeffs()[..count] })
                }
            };
            emit(&cfg.output, &body)?;
            Ok(Outcome::Ok)
        }
        Command::CheckConjecture { nu, n, tol, abel, output } => {
            let order = BesselOrder::new(nu)?;
            let single = abel.resolve(AbelSchedule::single_default())?;
            let fam = ProcessFamily::BesselBridge { order };
            let cfg = RunConfig {
                command: "check-conjecture".into(),
                family: Some(fam),
                grids: vec![],
                abel: Some(single.clone()),
                mc: None,
                output: output.resolve(Format::Json),
            };
            let laws = ExtremeLaws::with_config(fam, LawConfig { single, ..LawConfig::default() }, None)?;
            #[derive(Serialize)]
            struct Row {
                n: usize,
                residual: f64,
                error_estimate: f64,
                converged: bool,
            }
            let mut rows = Vec::new();
            for &i in &n {
                let r = laws.conjecture_residual(i)?;
                rows.push(Row { n: i, residual: r.value, error_estimate: r.error_estimate, converged: r.converged });
            }
            let body = match cfg.output.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        config: &'a RunConfig,
                        tolerance: f64,
                        residuals: &'a [Row],
                    }
                    json(&Doc { config: &cfg, tolerance: tol, residuals: &rows })
                }
                Format::Csv => {
                    let mut s = String::from("n,residual,error_estimate,converged\n");
                    for r in &rows {
                        let _ = writeln!(s, "{},{:.16e},{:.16e},{}", r.n, r.residual, r.error_estimate, r.converged);
                    }
                    s
                }
            };
            emit(&cfg.output, &body)?;
            if rows.iter().any(|r| !r.converged) {
                Ok(Outcome::NonConvergence)
            } else if rows.iter().any(|r| !(r.residual.abs() < tol)) {
                Ok(Outcome::ValidationFailure)
            } else {
                Ok(Outcome::Ok)
            }
        }
        Command::McValidate { family, n_samples, path_steps, dt, seed, samples_csv, output } => {
            let fam = family.resolve()?;
            let spec = McSpec { n_samples, path_steps, dt, seed };
            let cfg = RunConfig {
                command: "mc-validate".into(),
                family: Some(fam),
                grids: vec![],
                abel: None,
                mc: Some(spec.clone()),
                output: output.resolve(Format::Json),
            };
            let (report, set) = mc_validate(fam, &spec)?;
            if report.low_effective_sample_size {
                eprintln!("warning: effective sample size {:.0} is below 10% of {n_samples}", report.effective_sample_size);
            }
            if let Some(p) = samples_csv {
                let f = std::fs::File::create(&p).map_err(|e| Error::Config(format!("cannot write {p}: {e}")))?;
                set.write_csv(std::io::BufWriter::new(f)).map_err(|e| Error::Config(format!("cannot write {p}: {e}")))?;
            }
            let body = match cfg.output.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        config: &'a RunConfig,
                        report: &'a McReport,
                    }
                    json(&Doc { config: &cfg, report: &report })
                }
                Format::Csv => {
                    let mut s = String::from("check,statistic,threshold,passed\n");
                    for c in &report.checks {
                        let _ = writeln!(s, "{},{:.16e},{:.16e},{}", c.name, c.statistic, c.threshold, c.passed);
                    }
                    s
                }
            };
            emit(&cfg.output, &body)?;
            Ok(if report.passed() { Outcome::Ok } else { Outcome::ValidationFailure })
        }
        Command::SelfTest { abel, corrupt_zero_table, output } => {
            let single = abel.resolve(AbelSchedule::single_default())?;
            let cfg = RunConfig {
                command: "self-test".into(),
                family: None,
                grids: vec![],
                abel: Some(single.clone()),
                mc: None,
                output: output.resolve(Format::Csv),
            };
            let report = self_test(&SelfTestOptions { single, corrupt_zero_table })?;
            let body = match cfg.output.format {
                Format::Csv => report.to_text(),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        config: &'a RunConfig,
                        report: &'a SelfTestReport,
                    }
                    json(&Doc { config: &cfg, report: &report })
                }
            };
            emit(&cfg.output, &body)?;
            Ok(if report.passed() { Outcome::Ok } else { Outcome::ValidationFailure })
        }
    }
}
