//! Command-line front end: flags or a JSON spec file in, JSON/CSV tables out.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::domain::{Configuration, FractionalParams};
use crate::energy::config::{energy_config_tol, DEFAULT_TOL as CONFIG_TOL};
use crate::energy::mollified::{mollified_energy, DEFAULT_TOL as MOLLIFIED_TOL};
use crate::energy::smooth::Sine;
use crate::energy::zero::energy_zero;
use crate::energy::{sandwich_config, sandwich_smooth, SandwichReport};
use crate::error::GagliardoError;
use crate::limits::{
    critical_scan, limit_constant_s0, limit_constant_s1, sweep_s0, sweep_s1, SweepTable,
};
use crate::optimizer::{
    gradient_descent, minimize_zero, DescentMode, DescentOptions, DescentTrace,
};
use crate::quadrature::EnergyReport;
use crate::variations::{
    cusp_scan, default_cusp_offsets, gradient, hessian, mollified_gradient, mollified_hessian,
    VariationReport,
};

/// Tolerance on the circular gaps when a descent summary reports equispacing.
pub const SUMMARY_GAP_TOL: f64 = 1e-6;
pub const DEFAULT_S0_SCHEDULE: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const DEFAULT_S1_SCHEDULE: [f64; 4] = [0.8, 0.9, 0.95, 0.975];
pub const DEFAULT_EPS_SCHEDULE: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const DEFAULT_SWEEP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Energy,
    Energy0,
    Mollified,
    Gradient,
    Hessian,
    Optimize,
    SweepS0,
    SweepS1,
    CriticalScan,
    CuspScan,
    Estimates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags; a `--spec` file holds the same fields as a JSON object and the flags override it.
#[derive(Debug, Clone, Default, PartialEq, Parser, Serialize, Deserialize)]
#[command(
    name = "gagliardo",
    version,
    about = "Periodic fractional Gagliardo energies of jump configurations"
)]
#[serde(default, deny_unknown_fields)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// period, also the number of jumps
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub period: Option<u32>,
    /// dimension; only the limit constants are available for d >= 2
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub equispaced: bool,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Option<Vec<f64>>,
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(alias = "min-gap")]
    pub min_gap: Option<f64>,
    /// s values, eps values, cusp offsets or radii, depending on the command
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// jump index for cusp-scan (default: the first multiple jump)
    #[arg(long)]
    pub index: Option<usize>,
    /// Newton steps on the translation complement during optimize
    #[arg(long)]
    pub newton: bool,
    #[arg(long)]
    #[serde(alias = "max-iters")]
    pub max_iters: Option<usize>,
    /// JSON file with any of the fields above
    #[arg(long)]
    #[serde(skip)]
    pub spec: Option<PathBuf>,
}

impl Args {
    /// Flag values win over the file's.
    pub fn merged_over(self, file: Args) -> Args {
        Args {
            command: self.command.or(file.command),
            s: self.s.or(file.s),
            p: self.p.or(file.p),
            period: self.period.or(file.period),
            d: self.d.or(file.d),
            eps: self.eps.or(file.eps),
            equispaced: self.equispaced || file.equispaced,
            points: self.points.or(file.points),
            random: self.random || file.random,
            seed: self.seed.or(file.seed),
            min_gap: self.min_gap.or(file.min_gap),
            schedule: self.schedule.or(file.schedule),
            tol: self.tol.or(file.tol),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            index: self.index.or(file.index),
            newton: self.newton || file.newton,
            max_iters: self.max_iters.or(file.max_iters),
            spec: self.spec,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] GagliardoError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(GagliardoError::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e @ (GagliardoError::Io(_) | GagliardoError::Json(_))) => {
                let _ = e;
                4
            }
            CliError::Lib(e) if e.is_numerical() => 3,
            CliError::Lib(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Lib(e) => e.kind(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "kind": self.kind(), "message": self.to_string() }).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses the arguments, runs the command and returns the exit status.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{}", e.to_json());
        return e.exit_code();
    }
    match run(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// GAGLIARDO_THREADS caps the global pool.
fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("GAGLIARDO_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "GAGLIARDO_THREADS = {v:?} is not a positive integer"
        ))
    })?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Loads the spec file if any and merges the flags over it.
pub fn resolve(args: Args) -> CliResult<Args> {
    match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let file: Args =
                serde_json::from_str(&text).map_err(|e| usage(format!("spec file: {e}")))?;
            Ok(args.merged_over(file))
        }
        None => Ok(args),
    }
}

pub fn run(args: Args) -> CliResult<()> {
    let a = resolve(args)?;
    let command = a.command.ok_or_else(|| usage("missing command"))?;
    let text = match command {
        Command::Energy => cmd_energy(&a)?,
        Command::Energy0 => cmd_energy0(&a)?,
        Command::Mollified => cmd_mollified(&a)?,
        Command::Gradient => cmd_variation(&a, false)?,
        Command::Hessian => cmd_variation(&a, true)?,
        Command::Optimize => return cmd_optimize(&a),
        Command::SweepS0 | Command::SweepS1 => cmd_sweep(&a, command)?,
        Command::CriticalScan => cmd_critical(&a)?,
        Command::CuspScan => cmd_cusp(&a)?,
        Command::Estimates => cmd_estimates(&a)?,
    };
    emit(&text, a.out.as_deref())
}

/// Writes to the path, or to standard output.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text.as_bytes())?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string(v).map_err(GagliardoError::from)? + "\n")
}

fn need<T: Copy>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

fn check_positive(v: f64, name: &str) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

fn has_config_source(a: &Args) -> bool {
    a.equispaced || a.points.is_some() || a.random
}

fn period_of(a: &Args) -> CliResult<u32> {
    match (a.period, &a.points) {
        (Some(t), _) => Ok(t),
        (None, Some(pts)) => u32::try_from(pts.len()).map_err(|_| usage("too many points")),
        (None, None) => Err(usage("--T is required")),
    }
}

/// The configuration from exactly one of --equispaced, --points, --random.
pub fn configuration(a: &Args) -> CliResult<Configuration> {
    let sources = [a.equispaced, a.points.is_some(), a.random]
        .iter()
        .filter(|&&b| b)
        .count();
    if sources > 1 {
        return Err(usage(
            "--equispaced, --points and --random are mutually exclusive",
        ));
    }
    if !a.random && (a.seed.is_some() || a.min_gap.is_some()) {
        return Err(usage("--seed and --min-gap need --random"));
    }
    let t = period_of(a)?;
    if a.equispaced {
        Ok(Configuration::equispaced(t)?)
    } else if let Some(pts) = &a.points {
        Ok(Configuration::new(pts, t)?)
    } else if a.random {
        Ok(Configuration::random(
            t,
            a.min_gap.unwrap_or(0.0),
            a.seed.unwrap_or(0),
        )?)
    } else {
        Err(usage(
            "a configuration is required: --equispaced, --points or --random",
        ))
    }
}

fn params(a: &Args, period: u32) -> CliResult<FractionalParams> {
    let prm = FractionalParams::new(need(a.s, "s")?, need(a.p, "p")?, period, a.d.unwrap_or(1))?;
    prm.require_1d()?;
    Ok(prm)
}

fn tol(a: &Args, default: f64) -> CliResult<f64> {
    a.tol
        .map(|t| check_positive(t, "tol"))
        .unwrap_or(Ok(default))
}

fn report_text(r: &EnergyReport, format: Format) -> CliResult<String> {
    match format {
        Format::Json => json_line(r),
        Format::Csv => Ok(format!(
            "value,tail_lower,tail_upper,abs_err_est\n{:?},{:?},{:?},{:?}\n",
            r.value, r.tail_lower, r.tail_upper, r.abs_err_est
        )),
    }
}

fn cmd_energy(a: &Args) -> CliResult<String> {
    let c = configuration(a)?;
    let prm = params(a, c.period())?;
    let r = energy_config_tol(&c, &prm, tol(a, CONFIG_TOL)?)?;
    report_text(&r, a.format.unwrap_or(Format::Json))
}

fn cmd_energy0(a: &Args) -> CliResult<String> {
    let c = configuration(a)?;
    let p = need(a.p, "p")?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(GagliardoError::InvalidParams(format!("p = {p} must be >= 1")).into());
    }
    // closed form: no quadrature error and no tail
    let r = EnergyReport {
        value: energy_zero(&c, p),
        ..EnergyReport::zero()
    };
    report_text(&r, a.format.unwrap_or(Format::Json))
}

fn cmd_mollified(a: &Args) -> CliResult<String> {
    let c = configuration(a)?;
    let prm = params(a, c.period())?;
    let eps = check_positive(need(a.eps, "eps")?, "eps")?;
    let r = mollified_energy(&c, &prm, eps, tol(a, MOLLIFIED_TOL)?)?;
    report_text(&r, a.format.unwrap_or(Format::Json))
}

fn cmd_variation(a: &Args, second: bool) -> CliResult<String> {
    let c = configuration(a)?;
    let prm = params(a, c.period())?;
    let rep = match (a.eps, second) {
        (Some(eps), true) => mollified_hessian(&c, &prm, check_positive(eps, "eps")?)?,
        (None, true) => hessian(&c, &prm)?,
        (Some(eps), false) => VariationReport {
            gradient: mollified_gradient(&c, &prm, check_positive(eps, "eps")?)?,
            hessian: None,
            row_sum_residual: 0.0,
        },
        (None, false) => VariationReport {
            gradient: gradient(&c, &prm)?,
            hessian: None,
            row_sum_residual: 0.0,
        },
    };
    match a.format.unwrap_or(Format::Json) {
        Format::Json => json_line(&rep),
        Format::Csv => {
            let mut s = String::new();
            match &rep.hessian {
                Some(h) => {
                    s.push_str("row,col,value\n");
                    for (i, row) in h.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            s.push_str(&format!("{i},{j},{v:?}\n"));
                        }
                    }
                }
                None => {
                    s.push_str("index,gradient\n");
                    for (i, g) in rep.gradient.iter().enumerate() {
                        s.push_str(&format!("{i},{g:?}\n"));
                    }
                }
            }
            Ok(s)
        }
    }
}

/// Trace as CSV: iter, energy, grad_inf, then one column per point.
pub fn trace_csv(trace: &DescentTrace) -> String {
    let n = trace.iterates.first().map_or(0, |c| c.len());
    let mut s = String::from("iter,energy,grad_inf");
    for k in 0..n {
        s.push_str(&format!(",x{k}"));
    }
    s.push('\n');
    for (k, ((c, e), g)) in trace
        .iterates
        .iter()
        .zip(&trace.energies)
        .zip(&trace.grad_norms)
        .enumerate()
    {
        s.push_str(&format!("{k},{e:?},{g:?}"));
        for x in c.points() {
            s.push_str(&format!(",{x:?}"));
        }
        s.push('\n');
    }
    s
}

fn cmd_optimize(a: &Args) -> CliResult<()> {
    let c = configuration(a)?;
    let mut opts = DescentOptions::default();
    if let Some(eps) = a.eps {
        opts = DescentOptions::mollified(check_positive(eps, "eps")?);
    }
    opts.grad_tol = tol(a, opts.grad_tol)?;
    opts.newton = a.newton;
    if let Some(m) = a.max_iters {
        opts.max_iters = m;
    }
    let s = need(a.s, "s")?;
    let trace = if s == 0.0 {
        if opts.mode != DescentMode::Exact {
            return Err(usage("--s 0 descends the limit energy and takes no --eps"));
        }
        minimize_zero(&c, need(a.p, "p")?, &opts)?
    } else {
        gradient_descent(&c, &params(a, c.period())?, &opts)?
    };
    if let Some(path) = &a.out {
        let body = match a.format.unwrap_or(Format::Json) {
            Format::Json => trace.to_jsonl(),
            Format::Csv => trace_csv(&trace),
        };
        emit(&body, Some(path))?;
    }
    emit(&json_line(&trace.summary(SUMMARY_GAP_TOL))?, None)
}

fn table_text(t: &SweepTable, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(t.to_csv()),
        Format::Json => json_line(t),
    }
}

fn cmd_sweep(a: &Args, which: Command) -> CliResult<String> {
    if has_config_source(a) {
        return Err(usage(
            "sweeps run on sin(2 pi x / T) and take no configuration",
        ));
    }
    let period = a.period.unwrap_or(1);
    if period < 1 {
        return Err(usage("--T must be at least 1"));
    }
    let u = Sine::new(period as f64, 1);
    let p = need(a.p, "p")?;
    let tol = tol(a, DEFAULT_SWEEP_TOL)?;
    let table = if which == Command::SweepS0 {
        sweep_s0(
            &u,
            p,
            a.schedule.as_deref().unwrap_or(&DEFAULT_S0_SCHEDULE),
            tol,
        )?
    } else {
        sweep_s1(
            &u,
            p,
            a.schedule.as_deref().unwrap_or(&DEFAULT_S1_SCHEDULE),
            tol,
        )?
    };
    table_text(&table, a.format.unwrap_or(Format::Csv))
}

fn cmd_critical(a: &Args) -> CliResult<String> {
    let c = configuration(a)?;
    let p = need(a.p, "p")?;
    let schedule = a.schedule.as_deref().unwrap_or(&DEFAULT_EPS_SCHEDULE);
    let table = critical_scan(&c, p, schedule, tol(a, MOLLIFIED_TOL)?)?;
    table_text(&table, a.format.unwrap_or(Format::Csv))
}

fn cmd_cusp(a: &Args) -> CliResult<String> {
    let c = configuration(a)?;
    let prm = params(a, c.period())?;
    let i = match a.index {
        Some(i) => i,
        None => (0..c.len())
            .find(|&i| c.multiplicity(i) > 1)
            .ok_or_else(|| usage("the configuration has no multiple jump"))?,
    };
    if c.multiplicity(i) < 2 {
        return Err(GagliardoError::NotOverlapping { index: i }.into());
    }
    let offsets = a
        .schedule
        .clone()
        .unwrap_or_else(|| default_cusp_offsets(9));
    let scan = cusp_scan(&c, i, &prm, &offsets, tol(a, 1e-12)?)?;
    match a.format.unwrap_or(Format::Json) {
        Format::Json => json_line(&scan),
        Format::Csv => Ok(scan.to_csv()),
    }
}

#[derive(Serialize)]
struct Constants {
    d: u32,
    p: f64,
    #[serde(rename = "T")]
    period: u32,
    /// d omega_d / (p T^d)
    s0_constant: f64,
    /// K_{d,p}
    s1_constant: f64,
}

#[derive(Serialize)]
struct Estimates {
    constants: Constants,
    sandwich: Vec<SandwichRow>,
}

#[derive(Serialize)]
struct SandwichRow {
    #[serde(flatten)]
    report: SandwichReport,
    contains: bool,
    width: f64,
}

fn cmd_estimates(a: &Args) -> CliResult<String> {
    let d = a.d.unwrap_or(1);
    let p = need(a.p, "p")?;
    let period = period_of(a).unwrap_or(1);
    if d < 1 || !(p >= 1.0 && p.is_finite()) {
        return Err(GagliardoError::InvalidParams(format!(
            "need d >= 1 and p >= 1, got d = {d}, p = {p}"
        ))
        .into());
    }
    let constants = Constants {
        d,
        p,
        period,
        s0_constant: limit_constant_s0(d, p, period),
        s1_constant: limit_constant_s1(d, p),
    };
    let mut sandwich = Vec::new();
    if d == 1 && a.s.is_some() {
        let radii: Vec<f64> = match &a.schedule {
            Some(r) => r.clone(),
            None => [3.0, 5.0, 10.0].iter().map(|k| k * period as f64).collect(),
        };
        let prm = params(a, period)?;
        let config = if has_config_source(a) {
            Some(configuration(a)?)
        } else {
            None
        };
        for r in radii {
            let report = match &config {
                Some(c) => sandwich_config(c, &prm, r)?,
                None => sandwich_smooth(&Sine::new(period as f64, 1), &prm, r)?,
            };
            sandwich.push(SandwichRow {
                contains: report.contains(),
                width: report.width(),
                report,
            });
        }
    } else if has_config_source(a) || a.schedule.is_some() {
        return Err(usage("the sandwich needs --s and d = 1"));
    }
    match a.format.unwrap_or(Format::Json) {
        Format::Json => json_line(&Estimates {
            constants,
            sandwich,
        }),
        Format::Csv => {
            let mut s = String::from("r,full,core,lower,upper,err,contains\n");
            for row in &sandwich {
                let r = &row.report;
                s.push_str(&format!(
                    "{:?},{:?},{:?},{:?},{:?},{:?},{}\n",
                    r.r, r.full, r.core, r.lower, r.upper, r.err, row.contains
                ));
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(v: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("gagliardo").chain(v.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_spec_file() {
        let file: Args = serde_json::from_str(
            r#"{"command":"energy","s":0.25,"p":2.0,"T":3,"equispaced":true}"#,
        )
        .unwrap();
        let a = parse(&["--s", "0.3"]).merged_over(file);
        assert_eq!(a.command, Some(Command::Energy));
        assert_eq!(a.s, Some(0.3));
        assert_eq!(a.period, Some(3));
        assert!(a.equispaced);
    }

    #[test]
    fn spec_round_trip() {
        let a = parse(&[
            "optimize", "--T", "5", "--s", "0.3", "--p", "2", "--random", "--seed", "7",
        ]);
        let back: Args = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn conflicting_sources() {
        let a = parse(&["energy", "--T", "2", "--equispaced", "--random"]);
        assert_eq!(configuration(&a).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn points_fix_the_period() {
        let a = parse(&["energy", "--points", "0.5,-0.25"]);
        let c = configuration(&a).unwrap();
        assert_eq!(c.period(), 2);
        assert_eq!(c.points(), &[0.5, 1.75]);
    }
}
