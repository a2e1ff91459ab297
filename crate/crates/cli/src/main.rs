mod input;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gwchart::charts::{self, ChartConfig, ChartKind, ControlChart, MonitorRecord, QuantileMethod};
use gwchart::estimation::{self, ks_statistic};
use gwchart::simulation::{self, Phase1Mode, Scale, Shift, SimGrid};
use gwchart::{censor, CensoringScheme, Estimator, Execution, FitConfig, HybridCensoredSample};

use output::sig6;

/// `println!` that ignores a closed stdout.
macro_rules! emit {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_SIGNAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl From<gwchart::Error> for CliError {
    fn from(e: gwchart::Error) -> Self {
        use gwchart::Error::*;
        match e {
            InvalidParameter { .. } | InvalidSample(_) | Domain { .. } => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(name = "gwchart", version, about = "Quantile control charts for hybrid-censored generalized Weibull lifetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit (θ, α) to a censored sample and print the result as JSON.
    Fit(FitCmd),
    /// Build a chart or monitor phase-II subgroups against one.
    #[command(subcommand)]
    Chart(ChartCmd),
    /// Run-length simulation study; writes a CSV report.
    Simulate(SimulateCmd),
    /// Rerun the bladder-cancer worked example.
    Reproduce(ReproduceCmd),
}

#[derive(Subcommand)]
enum ChartCmd {
    Build(BuildCmd),
    Monitor(MonitorCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Censoring {
    Hybrid,
    Type1,
    Type2,
    None,
}

#[derive(Args)]
struct DataArgs {
    /// One-column CSV of lifetimes, optional header.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Bundled data set: bladder (125 rows) or bladder128.
    #[arg(long, conflicts_with = "data")]
    dataset: Option<String>,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum, default_value = "hybrid")]
    censoring: Censoring,
    /// Units on test; defaults to the sample (or subgroup) size.
    #[arg(long)]
    n: Option<usize>,
    /// Failure quota.
    #[arg(long)]
    r: Option<usize>,
    /// Time bound.
    #[arg(long)]
    x0: Option<f64>,
}

impl SchemeArgs {
    fn scheme(&self, default_n: usize) -> Result<CensoringScheme, CliError> {
        let n = self.n.unwrap_or(default_n);
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Input(format!("--{flag} is required for this censoring")));
        let r = || need(self.r.map(|r| r as f64), "r").map(|r| r as usize);
        Ok(match self.censoring {
            Censoring::Hybrid => CensoringScheme::hybrid(n, r()?, need(self.x0, "x0")?)?,
            Censoring::Type1 => CensoringScheme::type_i(n, need(self.x0, "x0")?)?,
            Censoring::Type2 => CensoringScheme::type_ii(n, r()?)?,
            Censoring::None => CensoringScheme::complete(n)?,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Em,
    Pseudo,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Em => Estimator::Em,
            EstimatorArg::Pseudo => Estimator::PseudoLikelihood,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// em: maximum likelihood by EM. pseudo: the pseudo-likelihood
    /// estimator behind the published worked example.
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    #[arg(long, default_value_t = 1e-8)]
    em_tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    quad_tol: f64,
}

impl FitArgs {
    fn config(&self, default: Estimator) -> FitConfig {
        FitConfig {
            em_tol: self.em_tol,
            em_max_iter: self.max_iter,
            quad_tol: self.quad_tol,
            estimator: self.estimator.map(Into::into).unwrap_or(default),
            ..FitConfig::default()
        }
    }
}

#[derive(Args)]
struct FitCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// Include the per-iteration trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Bhc,
    Shc,
}

impl From<KindArg> for ChartKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Bhc => ChartKind::Bhc,
            KindArg::Shc => ChartKind::Shc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantileArg {
    Hf4,
    Hf5,
    Hf6,
    Hf7,
    Hf8,
    Hf9,
}

impl From<QuantileArg> for QuantileMethod {
    fn from(q: QuantileArg) -> Self {
        match q {
            QuantileArg::Hf4 => QuantileMethod::Hf4,
            QuantileArg::Hf5 => QuantileMethod::Hf5,
            QuantileArg::Hf6 => QuantileMethod::Hf6,
            QuantileArg::Hf7 => QuantileMethod::Hf7,
            QuantileArg::Hf8 => QuantileMethod::Hf8,
            QuantileArg::Hf9 => QuantileMethod::Hf9,
        }
    }
}

#[derive(Args)]
struct BuildCmd {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "bhc")]
    kind: KindArg,
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    #[arg(long, default_value_t = 0.0027)]
    nu: f64,
    /// Phase-I subgroups; defaults to as many whole subgroups as the data hold.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 25)]
    m: usize,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long = "B", default_value_t = 1000)]
    b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "hf8")]
    quantile_method: QuantileArg,
    #[command(flatten)]
    fit: FitArgs,
    /// Chart JSON destination; without it the JSON goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct MonitorCmd {
    /// Chart JSON written by `chart build`.
    #[arg(long)]
    chart: PathBuf,
    /// Phase-II subgroup files, one complete subgroup per file.
    #[arg(required = true)]
    subgroups: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table1,
    Shifts,
    Schemes,
}

#[derive(Args)]
struct SimulateCmd {
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Study JSON; flags override its fields.
    #[arg(long)]
    design: Option<PathBuf>,
    /// Catalog scheme number, 1 to 8.
    #[arg(long)]
    scheme: Option<usize>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    /// Phase-II shift in θ as a fraction of θ (e.g. -0.04).
    #[arg(long, allow_hyphen_values = true)]
    delta_theta: Option<f64>,
    /// Phase-II shift in α as a fraction of α.
    #[arg(long, allow_hyphen_values = true)]
    delta_alpha: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// B = 5000 bootstraps and 5000 replications.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    /// Reuse one phase-I chart across replications.
    #[arg(long)]
    fixed_chart: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Writes the resolved study as JSON.
    #[arg(long)]
    design_out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct ReproduceCmd {
    #[arg(long = "B", default_value_t = 5000)]
    b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "pseudo")]
    estimator: EstimatorArg,
    #[arg(long)]
    sequential: bool,
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    theta: f64,
    alpha: f64,
    loglik: f64,
    iterations: usize,
    converged: bool,
    estimator: Estimator,
    ks_statistic: f64,
    n: usize,
    d: usize,
    c: f64,
    scheme: &'a CensoringScheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [estimation::TracePoint]>,
}

fn cmd_fit(cmd: &FitCmd) -> Result<u8, CliError> {
    let data = input::sorted(input::load(cmd.data.data.as_deref(), cmd.data.dataset.as_deref())?);
    let scheme = cmd.scheme.scheme(data.len())?;
    let sample = censor(&data, &scheme)?;
    let fit = estimation::fit(&sample, &cmd.fit.config(Estimator::Em))?;
    let report = FitReport {
        theta: fit.params.theta(),
        alpha: fit.params.alpha(),
        loglik: fit.loglik,
        iterations: fit.iterations,
        converged: fit.converged,
        estimator: fit.estimator,
        ks_statistic: ks_statistic(&data, &fit.params)?,
        n: sample.n(),
        d: sample.d(),
        c: sample.c(),
        scheme: &scheme,
        trace: cmd.trace.then_some(fit.trace.as_slice()),
    };
    emit!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    if fit.converged {
        Ok(0)
    } else {
        eprintln!("error: no convergence after {} iterations", fit.iterations);
        Ok(EXIT_NUMERIC)
    }
}

fn subgroups(data: &[f64], k: usize, m: usize, scheme: &CensoringScheme) -> Result<Vec<HybridCensoredSample>, CliError> {
    if k * m > data.len() {
        return Err(CliError::Input(format!("{k} subgroups of {m} need {} values, data have {}", k * m, data.len())));
    }
    data.chunks(m)
        .take(k)
        .map(|c| Ok(censor(&input::sorted(c.to_vec()), scheme)?))
        .collect()
}

fn limits_line(chart: &ControlChart) -> String {
    let kind = match chart.kind {
        ChartKind::Bhc => "BHC",
        ChartKind::Shc => "SHC",
    };
    format!(
        "{kind} p={} nu={}: LCL={} CL={} UCL={}  (theta_hat={}, alpha_hat={})",
        chart.config.p,
        chart.config.nu,
        sig6(chart.lcl),
        sig6(chart.cl),
        sig6(chart.ucl),
        sig6(chart.phase1_fit.params.theta()),
        sig6(chart.phase1_fit.params.alpha())
    )
}

fn cmd_chart_build(cmd: &BuildCmd) -> Result<u8, CliError> {
    let data = input::load(cmd.data.data.as_deref(), cmd.data.dataset.as_deref())?;
    let scheme = cmd.scheme.scheme(cmd.m)?;
    if scheme.n != cmd.m {
        return Err(CliError::Input(format!("--n {} must equal the subgroup size --m {}", scheme.n, cmd.m)));
    }
    let k = cmd.k.unwrap_or(data.len() / cmd.m);
    let phase1 = subgroups(&data, k, cmd.m, &scheme)?;
    let mut config = ChartConfig::new(cmd.p, cmd.nu, k, scheme, cmd.b, cmd.seed)?.with_execution(execution(cmd.sequential));
    config.quantile_method = cmd.quantile_method.into();
    let fit_config = cmd.fit.config(Estimator::Em);
    let chart = match cmd.kind {
        KindArg::Bhc => charts::build_bhc(&phase1, &config, &fit_config)?,
        KindArg::Shc => charts::build_shc(&phase1, &config, &fit_config)?,
    };
    let json = serde_json::to_string_pretty(&chart).expect("serializable");
    match &cmd.out {
        Some(path) => {
            fs::write(path, json + "\n").map_err(|e| io_err(path, e))?;
            emit!("{}", limits_line(&chart));
        }
        None => {
            eprintln!("{}", limits_line(&chart));
            emit!("{json}");
        }
    }
    if chart.failed_refits > 0 {
        eprintln!("note: {} bootstrap refits failed and were redrawn", chart.failed_refits);
    }
    Ok(0)
}

fn cmd_chart_monitor(cmd: &MonitorCmd) -> Result<u8, CliError> {
    let text = fs::read_to_string(&cmd.chart).map_err(|e| io_err(&cmd.chart, e))?;
    let chart: ControlChart = serde_json::from_str(&text).map_err(|e| io_err(&cmd.chart, e))?;
    let scheme = chart.config.scheme;
    let samples = cmd
        .subgroups
        .iter()
        .map(|path| {
            let values = input::read_lifetimes(path)?;
            if values.len() != scheme.n {
                return Err(io_err(path, format!("subgroup has {} values, the chart expects {}", values.len(), scheme.n)));
            }
            Ok(censor(&input::sorted(values), &scheme)?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let fit_config = FitConfig::default();
    let records: Vec<MonitorRecord> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let v = charts::monitor(&chart, s, &fit_config);
            MonitorRecord {
                index: i + 1,
                statistic: v.statistic,
                lcl: chart.lcl,
                cl: chart.cl,
                ucl: chart.ucl,
                signal: v.signal,
            }
        })
        .collect();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &records {
            w.serialize(r).map_err(|e| CliError::Numeric(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    match &cmd.out {
        Some(path) => fs::write(path, &buf).map_err(|e| io_err(path, e))?,
        None => {
            let _ = std::io::stdout().lock().write_all(&buf);
        }
    }
    let alarms = records.iter().filter(|r| r.signal.is_alarm()).count();
    if alarms > 0 {
        eprintln!("{alarms} of {} subgroups signaled", records.len());
        Ok(EXIT_SIGNAL)
    } else {
        Ok(0)
    }
}

fn resolve_grid(cmd: &SimulateCmd) -> Result<SimGrid, CliError> {
    let catalog = simulation::scheme_catalog();
    let scale = if cmd.paper_scale { Scale::Paper } else { Scale::Desk };
    let mut grid = match &cmd.design {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            serde_json::from_str::<SimGrid>(&text).map_err(|e| io_err(path, e))?
        }
        None => SimGrid::in_control(catalog[0], scale, 1),
    };
    if cmd.paper_scale || cmd.design.is_none() {
        grid.b = scale.bootstraps();
        grid.replications = scale.replications();
    }
    if let Some(id) = cmd.scheme {
        let scheme = *catalog
            .get(id.wrapping_sub(1))
            .ok_or_else(|| CliError::Input(format!("--scheme must be 1 to 8, got {id}")))?;
        grid.scheme = scheme;
        grid.scheme_id = Some(id);
    }
    if matches!(cmd.preset, Some(Preset::Shifts)) {
        grid.shifts = std::iter::once(Shift::NONE)
            .chain(simulation::shift_preset(&grid.true_params))
            .collect();
    }
    if cmd.delta_theta.is_some() || cmd.delta_alpha.is_some() {
        let shift = Shift::relative(&grid.true_params, cmd.delta_theta.unwrap_or(0.0), cmd.delta_alpha.unwrap_or(0.0));
        grid.shifts = if shift.is_none() { vec![Shift::NONE] } else { vec![Shift::NONE, shift] };
    }
    if let Some(kind) = cmd.kind {
        grid.kind = kind.into();
    }
    if let Some(p) = &cmd.p {
        grid.ps = p.clone();
    }
    if let Some(nu) = &cmd.nu {
        grid.nus = nu.clone();
    }
    if let Some(r) = cmd.reps {
        grid.replications = r;
    }
    if let Some(b) = cmd.b {
        grid.b = b;
    }
    if let Some(k) = cmd.k {
        grid.k = k;
    }
    if let Some(s) = cmd.seed {
        grid.seed = s;
    }
    if let Some(e) = cmd.estimator {
        grid.fit_config.estimator = e.into();
    }
    if cmd.fixed_chart {
        grid.phase1 = Phase1Mode::Fixed;
    }
    grid.execution = execution(cmd.sequential);
    grid.validate()?;
    Ok(grid)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn cmd_simulate(cmd: &SimulateCmd) -> Result<u8, CliError> {
    if matches!(cmd.preset, Some(Preset::Schemes)) {
        let mut text = String::from("scheme_id,m,r,x0\n");
        for (i, s) in simulation::scheme_catalog().iter().enumerate() {
            text.push_str(&format!("{},{},{},{}\n", i + 1, s.n, s.r, s.x0));
        }
        write_output(cmd.out.as_deref(), &text)?;
        return Ok(0);
    }
    let grid = resolve_grid(cmd)?;
    if let Some(path) = &cmd.design_out {
        let json = serde_json::to_string_pretty(&grid).expect("serializable");
        fs::write(path, json + "\n").map_err(|e| io_err(path, e))?;
    }
    let summaries = simulation::simulate_grid(&grid)?;
    let text = if grid.shifts.iter().all(Shift::is_none) {
        simulation::table1_report(&summaries)?
    } else {
        simulation::report_csv(&summaries)
    };
    write_output(cmd.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_reproduce(cmd: &ReproduceCmd) -> Result<u8, CliError> {
    let data = gwchart::datasets::bladder_cancer_125();
    let all = input::sorted(data.clone());
    let estimator: Estimator = cmd.estimator.into();
    let fit_config = FitConfig::default().with_estimator(estimator);
    emit!("bladder-cancer remission times, n = {}, estimator = {:?}", all.len(), estimator);
    let n = all.len();
    let fits = [
        ("complete", CensoringScheme::complete(n)?),
        ("hybrid r=75 x0=7.6", CensoringScheme::hybrid(n, 75, 7.6)?),
        ("type-II r=75", CensoringScheme::type_ii(n, 75)?),
    ];
    for (label, scheme) in fits {
        let fit = estimation::fit(&censor(&all, &scheme)?, &fit_config)?.require_converged()?;
        emit!(
            "fit {label:<20} theta={} alpha={} K-S D={}",
            sig6(fit.params.theta()),
            sig6(fit.params.alpha()),
            sig6(ks_statistic(&all, &fit.params)?)
        );
    }
    let charts_to_build = [
        ("hybrid", ChartKind::Bhc, CensoringScheme::hybrid(25, 15, 7.6)?),
        ("hybrid", ChartKind::Shc, CensoringScheme::hybrid(25, 15, 7.6)?),
        ("type-I", ChartKind::Bhc, CensoringScheme::type_i(25, 7.6)?),
        ("type-II", ChartKind::Bhc, CensoringScheme::type_ii(25, 15)?),
    ];
    for (label, kind, scheme) in charts_to_build {
        let phase1 = subgroups(&data, 5, 25, &scheme)?;
        let config = ChartConfig::new(0.9, 0.0027, 5, scheme, cmd.b, cmd.seed)?.with_execution(execution(cmd.sequential));
        let chart = match kind {
            ChartKind::Bhc => charts::build_bhc(&phase1, &config, &fit_config)?,
            ChartKind::Shc => charts::build_shc(&phase1, &config, &fit_config)?,
        };
        emit!("{label:<8} {}", limits_line(&chart));
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Fit(c) => cmd_fit(c),
        Command::Chart(ChartCmd::Build(c)) => cmd_chart_build(c),
        Command::Chart(ChartCmd::Monitor(c)) => cmd_chart_monitor(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Reproduce(c) => cmd_reproduce(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
