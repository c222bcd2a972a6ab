//! Argument parsing and subcommand drivers for the `fairgini` binary.
//!
//! [`dispatch`] takes the full argv and writes to caller-supplied streams so
//! the whole command line can be exercised in-process.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use fairgini_core::maxent::{self, EnumerationOptions, IncomeConstraint, NewtonOptions};
use fairgini_core::models::{self, IncomeDensity, LorenzSource};
use fairgini_core::output::{fixed6, format_fixed};
use fairgini_core::panel::{self, ReportOptions, SyntheticLaw, YearReport, DEFAULT_BINS};
use fairgini_core::sim::{self, Regime, SimConfig, SnapshotRow};
use fairgini_core::stats::DEFAULT_SIGNIFICANCE;
use fairgini_core::{AllocationError, MaxentError, ModelError, PanelError, SimError, StatsError};
use serde::Serialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Maxent(#[from] MaxentError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("write failed: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "fairgini", version, about = "Income-distribution fairness toolkit")]
pub struct Cli {
    /// Seed for every random stream (simulations, sampling, fixtures).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Units of Gini values in panel files.
    #[arg(long, global = true, value_enum, default_value_t = UnitsArg::Percent)]
    pub units: UnitsArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Percent,
    Fraction,
}

impl From<UnitsArg> for panel::Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Percent => panel::Units::Percent,
            UnitsArg::Fraction => panel::Units::Fraction,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-year summary, normality test, alarm level and histogram of a panel.
    Report(ReportArgs),
    /// Closed-form and quadrature Gini coefficient of a model density.
    Gini(GiniArgs),
    /// Maximum-multiplicity distributions over a level grid.
    Maxent(MaxentArgs),
    /// Run an exchange simulation.
    Simulate(SimulateArgs),
    /// Export a Lorenz curve.
    Lorenz(LorenzArgs),
    /// Write a seeded synthetic panel in `country,year,gini` layout.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// Single year; all years when omitted.
    #[arg(long)]
    pub year: Option<i32>,
    /// Print the alarm level even when normality is rejected.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    pub significance: f64,
    /// Compare against the published alarm levels for 1990-2005.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Exponential,
    Pareto,
    Uniform,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Pareto scale `a`.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0.0)]
    pub low: f64,
    #[arg(long, default_value_t = 1.0)]
    pub high: f64,
}

#[derive(Debug, Args)]
pub struct GiniArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Upper truncation for the quadrature; model default when omitted.
    #[arg(long)]
    pub upper: Option<f64>,
    /// Also report the empirical Gini of this many seeded draws.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaxentMode {
    Enumerate,
    Argmax,
    Solve,
}

#[derive(Debug, Args)]
pub struct MaxentArgs {
    /// Strictly increasing income levels, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub levels: Vec<f64>,
    /// Number of agents.
    #[arg(long)]
    pub n: u64,
    /// Total income.
    #[arg(long)]
    pub total: f64,
    #[arg(long, value_enum, default_value_t = MaxentMode::Enumerate)]
    pub mode: MaxentMode,
    /// Absolute tolerance on the income sum.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Drop the income constraint.
    #[arg(long)]
    pub unconstrained: bool,
    #[arg(long, default_value_t = maxent::DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `key=value` configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub regime: Option<Regime>,
    #[arg(long)]
    pub agents: Option<usize>,
    #[arg(long)]
    pub total: Option<f64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub base_weight: Option<f64>,
    #[arg(long)]
    pub snapshot_every: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Write the final incomes as `agent,income` CSV.
    #[arg(long)]
    pub incomes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LorenzArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Panel file; the curve is built from one year's values.
    #[arg(long, conflicts_with = "model")]
    pub file: Option<PathBuf>,
    #[arg(long, requires = "file")]
    pub year: Option<i32>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawKind {
    Normal,
    Exponential,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1990, 1995, 2000, 2005])]
    pub years: Vec<i32>,
    #[arg(long, default_value_t = 140)]
    pub countries: usize,
    #[arg(long, value_enum, default_value_t = LawKind::Normal)]
    pub law: LawKind,
    #[arg(long, default_value_t = 0.40)]
    pub mean: f64,
    /// Standard deviation of the normal law.
    #[arg(long, default_value_t = 0.08)]
    pub std: f64,
    /// Location of the shifted exponential law.
    #[arg(long, default_value_t = 0.25)]
    pub offset: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    if !text.contains("Usage:") {
                        let _ = writeln!(err, "\n{}", Cli::command().render_usage());
                    }
                    EXIT_USAGE
                }
            };
        }
    };
    match run(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(CliError::Output(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::Usage(_) = e {
                let _ = writeln!(err, "{}", Cli::command().render_usage());
            }
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Report(a) => report(a, cli.units.into(), cli.format.unwrap_or(Format::Text), out, err),
        Command::Gini(a) => gini(a, seed, cli.format.unwrap_or(Format::Text), out),
        Command::Maxent(a) => maxent_cmd(a, cli.format.unwrap_or(Format::Text), out),
        Command::Simulate(a) => simulate(a, cli.seed, cli.format.unwrap_or(Format::Text), out),
        Command::Lorenz(a) => lorenz(a, cli.units.into(), cli.format.unwrap_or(Format::Csv), out),
        Command::Fixture(a) => fixture(a, seed, cli.units, out),
    }
}

/// A float serialized with six decimals.
#[derive(Debug, Clone, Copy, Serialize)]
struct F6(#[serde(serialize_with = "fixed6")] f64);

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Serialize)]
struct ReportOut<'a> {
    #[serde(flatten)]
    report: &'a YearReport,
    /// Present only when normality holds.
    headline_alarm: Option<F6>,
    /// The alarm level printed under `--force` despite a rejected test.
    #[serde(skip_serializing_if = "Option::is_none")]
    informal_alarm: Option<F6>,
}

impl<'a> ReportOut<'a> {
    fn new(report: &'a YearReport, force: bool) -> Self {
        let headline_alarm = report.headline_alarm().map(F6);
        let informal_alarm = (force && headline_alarm.is_none()).then_some(F6(report.alarm.alarm_level));
        Self {
            report,
            headline_alarm,
            informal_alarm,
        }
    }
}

fn report(
    a: &ReportArgs,
    units: panel::Units,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    if a.bins == 0 {
        return Err(usage("--bins must be positive"));
    }
    if !(a.significance > 0.0 && a.significance < 1.0) {
        return Err(usage("--significance must lie in (0, 1)"));
    }
    let panel = panel::ingest_csv(&a.file, units)?;
    let opts = ReportOptions {
        bins: a.bins,
        significance: a.significance,
    };
    let finish = |r: YearReport| if a.compare { panel::with_reference(r) } else { r };
    let reports: Vec<YearReport> = match a.year {
        Some(y) => vec![finish(panel::year_report(&panel, y, opts)?)],
        None => {
            let mut v = Vec::new();
            for (year, r) in panel::all_year_reports(&panel, opts) {
                match r {
                    Ok(r) => v.push(finish(r)),
                    Err(e) => writeln!(err, "skipping {year}: {e}")?,
                }
            }
            v
        }
    };
    match format {
        Format::Text => {
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{}", r.render_text(a.force))?;
            }
        }
        Format::Json => {
            let rows: Vec<ReportOut> = reports.iter().map(|r| ReportOut::new(r, a.force)).collect();
            match (a.year, rows.as_slice()) {
                (Some(_), [one]) => write_json(one, out)?,
                _ => write_json(&rows, out)?,
            }
        }
        Format::Csv => {
            writeln!(out, "year,bin_start,bin_end,count")?;
            for r in &reports {
                for b in &r.histogram {
                    writeln!(out, "{},{:.6},{:.6},{}", r.year, b.start, b.end, b.count)?;
                }
            }
        }
    }
    Ok(())
}

fn build_model(m: &ModelArgs) -> Result<(ModelKind, Box<dyn IncomeDensity>, Vec<(&'static str, f64)>), CliError> {
    let kind = m.model.ok_or_else(|| usage("--model is required"))?;
    Ok(match kind {
        ModelKind::Exponential => {
            let alpha = m.alpha.ok_or_else(|| usage("--alpha is required for the exponential model"))?;
            let model = models::ExponentialModel::new(alpha, m.beta)?;
            (kind, Box::new(model), vec![("alpha", alpha), ("beta", m.beta)])
        }
        ModelKind::Pareto => {
            let gamma = m.gamma.ok_or_else(|| usage("--gamma is required for the Pareto model"))?;
            let model = models::ParetoModel::new(gamma, m.scale)?;
            (kind, Box::new(model), vec![("gamma", gamma), ("scale", m.scale)])
        }
        ModelKind::Uniform => {
            let model = models::UniformModel::new(m.low, m.high)?;
            (kind, Box::new(model), vec![("low", m.low), ("high", m.high)])
        }
    })
}

fn kind_name(k: ModelKind) -> &'static str {
    match k {
        ModelKind::Exponential => "exponential",
        ModelKind::Pareto => "pareto",
        ModelKind::Uniform => "uniform",
    }
}

#[derive(Serialize)]
struct GiniOut {
    model: &'static str,
    params: BTreeMap<&'static str, F6>,
    mean: F6,
    gini: F6,
    numeric: Option<NumericOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    numeric_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    empirical: Option<EmpiricalOut>,
}

#[derive(Serialize)]
struct NumericOut {
    value: F6,
    abs_error: F6,
    difference: F6,
}

#[derive(Serialize)]
struct EmpiricalOut {
    samples: usize,
    seed: u64,
    gini: F6,
}

fn gini(a: &GiniArgs, seed: u64, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let (kind, model, params) = build_model(&a.model)?;
    let closed = model.gini();
    let (numeric, numeric_error) = match models::gini_numeric_model(&*model, a.upper) {
        Ok(est) => (
            Some(NumericOut {
                value: F6(est.value),
                abs_error: F6(est.abs_error),
                difference: F6((est.value - closed).abs()),
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let empirical = match a.samples {
        Some(n) => Some(EmpiricalOut {
            samples: n,
            seed,
            gini: F6(models::empirical_gini(&model.sample(seed, n))?),
        }),
        None => None,
    };
    let report = GiniOut {
        model: kind_name(kind),
        params: params.iter().map(|&(k, v)| (k, F6(v))).collect(),
        mean: F6(model.mean()),
        gini: F6(closed),
        numeric,
        numeric_error,
        empirical,
    };
    match format {
        Format::Json => write_json(&report, out)?,
        Format::Csv => {
            writeln!(out, "model,gini,gini_numeric,abs_error")?;
            let (v, e) = report
                .numeric
                .as_ref()
                .map(|n| (format_fixed(n.value.0), format_fixed(n.abs_error.0)))
                .unwrap_or_default();
            writeln!(out, "{},{},{v},{e}", report.model, format_fixed(closed))?;
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "gini {}", format_fixed(closed));
            let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={}", format_fixed(*v))).collect();
            let _ = writeln!(s, "model {} {}", report.model, p.join(" "));
            let mean = model.mean();
            let _ = writeln!(s, "mean {}", if mean.is_finite() { format_fixed(mean) } else { "infinite".into() });
            match (&report.numeric, &report.numeric_error) {
                (Some(n), _) => {
                    let _ = writeln!(
                        s,
                        "quadrature {} (error bound {:.1e}, difference {:.1e})",
                        format_fixed(n.value.0),
                        n.abs_error.0,
                        n.difference.0
                    );
                }
                (None, Some(e)) => {
                    let _ = writeln!(s, "quadrature unavailable: {e}");
                }
                (None, None) => {}
            }
            if let Some(e) = &report.empirical {
                let _ = writeln!(s, "empirical {} ({} draws, seed {})", format_fixed(e.gini.0), e.samples, e.seed);
            }
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CandidateOut {
    counts: Vec<u64>,
    multiplicity: String,
    log_multiplicity: F6,
}

#[derive(Serialize)]
struct EnumerateOut {
    levels: Vec<F6>,
    agents: u64,
    total: F6,
    candidates: Vec<CandidateOut>,
    argmax: Vec<u64>,
    max_multiplicity: String,
    ties: Vec<Vec<u64>>,
    total_allocations: String,
    argmax_probability: F6,
}

#[derive(Serialize)]
struct SolveOut {
    levels: Vec<F6>,
    agents: u64,
    total: F6,
    alpha: F6,
    beta: F6,
    counts: Vec<F6>,
    iterations: usize,
    population_residual: F6,
    income_residual: F6,
    sign_violation: bool,
}

fn maxent_cmd(a: &MaxentArgs, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let levels_out = || a.levels.iter().map(|&x| F6(x)).collect::<Vec<_>>();
    if a.mode == MaxentMode::Solve {
        let sol = maxent::solve_boltzmann(&a.levels, a.n, a.total, NewtonOptions::default())?;
        let body = SolveOut {
            levels: levels_out(),
            agents: a.n,
            total: F6(a.total),
            alpha: F6(sol.params.alpha),
            beta: F6(sol.params.beta),
            counts: sol.counts.iter().map(|&c| F6(c)).collect(),
            iterations: sol.iterations,
            population_residual: F6(sol.population_residual),
            income_residual: F6(sol.income_residual),
            sign_violation: sol.sign_violation(),
        };
        match format {
            Format::Json => write_json(&body, out)?,
            Format::Csv => {
                writeln!(out, "level,count")?;
                for (e, c) in a.levels.iter().zip(&sol.counts) {
                    writeln!(out, "{},{}", format_fixed(*e), format_fixed(*c))?;
                }
            }
            Format::Text => {
                writeln!(out, "alpha {}", format_fixed(sol.params.alpha))?;
                writeln!(out, "beta  {}", format_fixed(sol.params.beta))?;
                for (e, c) in a.levels.iter().zip(&sol.counts) {
                    writeln!(out, "  level {:>12}  count {}", format_fixed(*e), format_fixed(*c))?;
                }
                writeln!(
                    out,
                    "converged in {} iterations (residuals {:.1e}, {:.1e})",
                    sol.iterations, sol.population_residual, sol.income_residual
                )?;
                if sol.sign_violation() {
                    writeln!(out, "warning: multipliers violate alpha <= 0, beta >= 0")?;
                }
            }
        }
        return Ok(());
    }

    let income = match (a.unconstrained, a.tolerance) {
        (true, Some(_)) => return Err(usage("--unconstrained and --tolerance are exclusive")),
        (true, None) => IncomeConstraint::Unconstrained,
        (false, Some(t)) => IncomeConstraint::Tolerance(t),
        (false, None) => IncomeConstraint::Default,
    };
    let result = maxent::enumerate_distributions(&a.levels, a.n, a.total, EnumerationOptions { income, cap: a.cap })?;
    let counts_of = |i: usize| result.candidates[i].0.counts().to_vec();
    let body = EnumerateOut {
        levels: levels_out(),
        agents: a.n,
        total: F6(a.total),
        candidates: if a.mode == MaxentMode::Enumerate {
            result
                .candidates
                .iter()
                .map(|(d, m)| CandidateOut {
                    counts: d.counts().to_vec(),
                    multiplicity: m.exact.as_ref().map(|x| x.to_string()).unwrap_or_default(),
                    log_multiplicity: F6(m.log_value),
                })
                .collect()
        } else {
            Vec::new()
        },
        argmax: result.argmax().counts().to_vec(),
        max_multiplicity: result.max_multiplicity().to_string(),
        ties: result.ties.iter().map(|&i| counts_of(i)).collect(),
        total_allocations: result.total_allocations().to_string(),
        argmax_probability: F6(result.argmax_probability()),
    };
    let join = |c: &[u64]| c.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    match format {
        Format::Json => write_json(&body, out)?,
        Format::Csv => {
            writeln!(out, "counts,multiplicity,log_multiplicity,argmax")?;
            for (i, (d, m)) in result.candidates.iter().enumerate() {
                if a.mode == MaxentMode::Argmax && i != result.argmax_index {
                    continue;
                }
                writeln!(
                    out,
                    "\"{}\",{},{},{}",
                    join(d.counts()),
                    m.exact.as_ref().map(|x| x.to_string()).unwrap_or_default(),
                    format_fixed(m.log_value),
                    i == result.argmax_index
                )?;
            }
        }
        Format::Text => {
            if a.mode == MaxentMode::Enumerate {
                writeln!(out, "{} candidates", result.candidates.len())?;
                for (i, (d, m)) in result.candidates.iter().enumerate() {
                    let mark = if i == result.argmax_index { "  <- argmax" } else { "" };
                    writeln!(
                        out,
                        "  ({})  omega {}{mark}",
                        join(d.counts()),
                        m.exact.as_ref().map(|x| x.to_string()).unwrap_or_default()
                    )?;
                }
            }
            writeln!(out, "argmax ({}) omega {}", join(&body.argmax), body.max_multiplicity)?;
            if body.ties.len() > 1 {
                writeln!(out, "tied with {} other sequences", body.ties.len() - 1)?;
            }
            writeln!(
                out,
                "probability {} of {} allocations",
                format_fixed(result.argmax_probability()),
                body.total_allocations
            )?;
        }
    }
    Ok(())
}

fn sim_config(a: &SimulateArgs, seed: Option<u64>) -> Result<SimConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => SimConfig::from_kv_str(&read_file(path)?)?,
        None => {
            let agents = a.agents.ok_or_else(|| usage("--agents is required without --config"))?;
            let steps = a.steps.ok_or_else(|| usage("--steps is required without --config"))?;
            SimConfig::new(
                a.regime.unwrap_or(Regime::FairExchange),
                agents,
                a.total.unwrap_or(agents as f64),
                steps,
                0,
            )
        }
    };
    if let Some(r) = a.regime {
        cfg.regime = r;
    }
    if let Some(n) = a.agents {
        cfg.agents = n;
    }
    if let Some(t) = a.total {
        cfg.total_income = t;
    }
    if let Some(s) = a.steps {
        cfg.steps = s;
    }
    if let Some(w) = a.base_weight {
        cfg = cfg.with_param("base_weight", w);
    }
    if let Some(e) = a.snapshot_every {
        cfg.snapshot_every = e;
    }
    if let Some(b) = a.burn_in {
        cfg.burn_in = b;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct SimOut {
    regime: Regime,
    agents: usize,
    /// Conserved total; absent for the growing rich-get-richer economy.
    #[serde(skip_serializing_if = "Option::is_none")]
    total_income: Option<F6>,
    steps: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_weight: Option<F6>,
    snapshot_every: u64,
    final_total: F6,
    final_gini: F6,
    stationary_gini: F6,
    snapshots: Vec<SnapshotRow>,
}

fn simulate(a: &SimulateArgs, seed: Option<u64>, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = sim_config(a, seed)?;
    let run = sim::run(&cfg)?;
    let last = run.final_snapshot();
    if let Some(path) = &a.incomes {
        let mut buf = Vec::new();
        sim::write_incomes_csv(last.incomes.incomes(), &mut buf)?;
        fs::write(path, buf).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let body = SimOut {
        regime: cfg.regime,
        agents: cfg.agents,
        total_income: (cfg.regime == Regime::FairExchange).then_some(F6(cfg.total_income)),
        steps: cfg.steps,
        seed: cfg.seed,
        base_weight: (cfg.regime == Regime::RichGetRicher).then_some(F6(cfg.base_weight())),
        snapshot_every: cfg.cadence(),
        final_total: F6(last.incomes.total()),
        final_gini: F6(last.gini),
        stationary_gini: F6(run.stationary_gini()),
        snapshots: sim::snapshot_rows(&run),
    };
    match format {
        Format::Json => write_json(&body, out)?,
        Format::Csv => sim::write_snapshots_csv(&run, &mut *out)?,
        Format::Text => {
            writeln!(
                out,
                "{} regime, {} agents, {} steps, seed {}",
                cfg.regime, cfg.agents, cfg.steps, cfg.seed
            )?;
            writeln!(out, "final total     {}", format_fixed(last.incomes.total()))?;
            writeln!(out, "final gini      {}", format_fixed(last.gini))?;
            writeln!(out, "stationary gini {}", format_fixed(run.stationary_gini()))?;
            match last.fitted {
                Some(sim::FittedParams::Boltzmann(p)) => writeln!(
                    out,
                    "exponential fit alpha {} beta {}",
                    format_fixed(p.alpha),
                    format_fixed(p.beta)
                )?,
                Some(sim::FittedParams::TailExponent(g)) => {
                    writeln!(out, "hill tail exponent {}", format_fixed(g))?
                }
                None => {}
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct LorenzOut {
    source: String,
    gini: F6,
    points: Vec<[F6; 2]>,
}

fn lorenz(a: &LorenzArgs, units: panel::Units, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let (source, curve) = match &a.file {
        Some(path) => {
            let year = a.year.ok_or_else(|| usage("--year is required with --file"))?;
            let panel = panel::ingest_csv(path, units)?;
            let values = panel.year_values(year);
            if values.is_empty() {
                return Err(PanelError::UnknownYear(year).into());
            }
            (
                format!("panel {year}"),
                models::lorenz_curve(LorenzSource::Samples(&values), a.points)?,
            )
        }
        None => {
            let (kind, model, _) = build_model(&a.model)?;
            (
                kind_name(kind).to_string(),
                models::lorenz_curve(LorenzSource::Model(&*model), a.points)?,
            )
        }
    };
    let g = models::gini_from_lorenz(&curve);
    match format {
        Format::Csv => models::write_lorenz_csv(&curve, &mut *out)?,
        Format::Json => write_json(
            &LorenzOut {
                source,
                gini: F6(g),
                points: curve.iter().map(|&(p, l)| [F6(p), F6(l)]).collect(),
            },
            out,
        )?,
        Format::Text => {
            writeln!(out, "lorenz curve of {source}, gini {}", format_fixed(g))?;
            for (p, l) in &curve {
                writeln!(out, "  {}  {}", format_fixed(*p), format_fixed(*l))?;
            }
        }
    }
    Ok(())
}

fn fixture(a: &FixtureArgs, seed: u64, units: UnitsArg, out: &mut dyn Write) -> Result<(), CliError> {
    let law = match a.law {
        LawKind::Normal if a.std > 0.0 => SyntheticLaw::Normal {
            mean: a.mean,
            std_dev: a.std,
        },
        LawKind::Exponential if a.mean > 0.0 => SyntheticLaw::ShiftedExponential {
            offset: a.offset,
            mean: a.mean,
        },
        _ => return Err(usage("--std and --mean must be positive")),
    };
    if a.countries == 0 || a.years.is_empty() {
        return Err(usage("need at least one year and one country"));
    }
    let panel = panel::synthetic_panel(&a.years, a.countries, law, seed);
    let mut buf = Vec::new();
    panel.write_csv_as(&mut buf, units.into())?;
    match &a.out {
        Some(path) => fs::write(path, buf).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}
