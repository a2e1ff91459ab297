//! Monte-Carlo run-length study of the charts: in-control ARL/SDRL and
//! out-of-control ARL under parameter shifts.
//!
//! One replication draws `k` phase-I subgroups, fits and builds the limits
//! for every `(p, ν)` of the grid from a single bootstrap set, then follows
//! one phase-II stream per shift, refitting each subgroup once and scoring
//! it against every design still running. The streams of different shifts
//! are driven by the same uniforms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::censoring::{censor, CensoringScheme, HybridCensoredSample};
use crate::charts::{self, bootstrap_limits, shc_limits, try_quantiles, ChartKind, ControlChart, QuantileMethod, BOOTSTRAP_STREAM};
use crate::distribution::{self, GwParams};
use crate::error::{Error, Result};
use crate::estimation::{self, FitConfig};
use crate::exec::{substream, Execution};
use crate::information;

const PHASE1_STREAM: u64 = 0x9A1;
const PHASE2_STREAM: u64 = 0x9A2;
const MAX_PHASE1_ATTEMPTS: u64 = 100;

/// The eight `(m, r, x0)` hybrid plans of the simulation study, in order.
pub fn scheme_catalog() -> Vec<CensoringScheme> {
    [
        (25, 15, 55.0),
        (25, 20, 55.0),
        (40, 30, 55.0),
        (40, 35, 55.0),
        (25, 15, 70.0),
        (25, 20, 70.0),
        (40, 30, 70.0),
        (40, 35, 70.0),
    ]
    .into_iter()
    .map(|(m, r, x0)| CensoringScheme::hybrid(m, r, x0).expect("catalog schemes are valid"))
    .collect()
}

/// In-control parameters of the simulation study.
pub fn study_params() -> GwParams {
    GwParams::new(0.51, 11.1).expect("valid parameters")
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Shift {
    pub delta_theta: f64,
    pub delta_alpha: f64,
}

impl Shift {
    pub const NONE: Shift = Shift {
        delta_theta: 0.0,
        delta_alpha: 0.0,
    };

    /// Shift by fractions of the in-control parameters.
    pub fn relative(params: &GwParams, frac_theta: f64, frac_alpha: f64) -> Self {
        Self {
            delta_theta: frac_theta * params.theta(),
            delta_alpha: frac_alpha * params.alpha(),
        }
    }

    pub fn is_none(&self) -> bool {
        self.delta_theta == 0.0 && self.delta_alpha == 0.0
    }
}

/// Single-parameter shifts of ±4% and ±8%.
pub fn shift_preset(params: &GwParams) -> Vec<Shift> {
    let mut out = Vec::new();
    for f in [-0.08, -0.04, 0.04, 0.08] {
        out.push(Shift::relative(params, f, 0.0));
    }
    for f in [-0.08, -0.04, 0.04, 0.08] {
        out.push(Shift::relative(params, 0.0, f));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase1Mode {
    /// Fresh phase-I data and limits in every replication.
    #[default]
    Regenerate,
    /// One chart, built from replication 0's phase-I data, reused throughout.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnassessablePolicy {
    /// The subgroup uses up an index without signaling.
    #[default]
    ConsumeIndex,
    /// The subgroup is discarded and a replacement drawn.
    Redraw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// `B = 1000` bootstraps and 1000 replications.
    #[default]
    Desk,
    /// `B = 5000` bootstraps and 5000 replications.
    Paper,
}

impl Scale {
    pub fn bootstraps(self) -> usize {
        match self {
            Scale::Desk => 1000,
            Scale::Paper => 5000,
        }
    }

    pub fn replications(self) -> usize {
        self.bootstraps()
    }
}

/// A full factorial study: every `(shift, p, ν)` combination is a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub true_params: GwParams,
    pub kind: ChartKind,
    pub scheme: CensoringScheme,
    /// Catalog number of `scheme`, if any.
    pub scheme_id: Option<usize>,
    pub k: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub ps: Vec<f64>,
    pub nus: Vec<f64>,
    pub shifts: Vec<Shift>,
    pub replications: usize,
    /// Run lengths are capped at `cap_factor / ν`.
    pub cap_factor: f64,
    pub seed: u64,
    pub phase1: Phase1Mode,
    pub unassessable: UnassessablePolicy,
    pub quantile_method: QuantileMethod,
    pub fit_config: FitConfig,
    #[serde(skip)]
    pub execution: Execution,
}

impl SimGrid {
    /// In-control grid over the study's `p` and `ν` levels for one scheme.
    pub fn in_control(scheme: CensoringScheme, scale: Scale, seed: u64) -> Self {
        Self {
            true_params: study_params(),
            kind: ChartKind::Bhc,
            scheme,
            scheme_id: scheme_catalog().iter().position(|s| *s == scheme).map(|i| i + 1),
            k: 20,
            b: scale.bootstraps(),
            ps: vec![0.1, 0.5, 0.9],
            nus: vec![0.005, 0.0027, 0.002],
            shifts: vec![Shift::NONE],
            replications: scale.replications(),
            cap_factor: 100.0,
            seed,
            phase1: Phase1Mode::default(),
            unassessable: UnassessablePolicy::default(),
            quantile_method: QuantileMethod::default(),
            fit_config: FitConfig::default(),
            execution: Execution::default(),
        }
    }

    pub fn cap(&self, nu: f64) -> usize {
        (self.cap_factor / nu).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        let bad = |name: &'static str, value: f64, reason: &'static str| {
            Err(Error::InvalidParameter { name, value, reason })
        };
        if self.k == 0 || self.b == 0 || self.replications == 0 {
            return bad("k/B/replications", 0.0, "must be at least 1");
        }
        if self.ps.is_empty() || self.nus.is_empty() || self.shifts.is_empty() {
            return bad("grid", 0.0, "p, nu and shift lists must be non-empty");
        }
        if let Some(&p) = self.ps.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return bad("p", p, "must lie in (0, 1)");
        }
        if let Some(&nu) = self.nus.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return bad("nu", nu, "must lie in (0, 1)");
        }
        if !(self.cap_factor >= 10.0) {
            return bad("cap_factor", self.cap_factor, "run-length cap must be at least 10/nu");
        }
        for s in &self.shifts {
            self.true_params.shifted(s.delta_theta, s.delta_alpha)?;
        }
        self.fit_config.validate()
    }

    /// One [`SimDesign`] per `(shift, p, ν)`, shift-major.
    pub fn designs(&self) -> Vec<SimDesign> {
        let mut out = Vec::new();
        for &shift in &self.shifts {
            for &p in &self.ps {
                for &nu in &self.nus {
                    out.push(SimDesign {
                        true_params: self.true_params,
                        shift,
                        chart_kind: self.kind,
                        p,
                        nu,
                        k: self.k,
                        scheme: self.scheme,
                        scheme_id: self.scheme_id,
                        b: self.b,
                        seed: self.seed,
                        replications: self.replications,
                        run_length_cap: self.cap(nu),
                    });
                }
            }
        }
        out
    }
}

/// One cell of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub true_params: GwParams,
    pub shift: Shift,
    pub chart_kind: ChartKind,
    pub p: f64,
    pub nu: f64,
    pub k: usize,
    pub scheme: CensoringScheme,
    pub scheme_id: Option<usize>,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub replications: usize,
    pub run_length_cap: usize,
}

impl SimDesign {
    pub fn grid(&self) -> SimGrid {
        SimGrid {
            true_params: self.true_params,
            kind: self.chart_kind,
            scheme: self.scheme,
            scheme_id: self.scheme_id,
            k: self.k,
            b: self.b,
            ps: vec![self.p],
            nus: vec![self.nu],
            shifts: vec![self.shift],
            replications: self.replications,
            cap_factor: self.run_length_cap as f64 * self.nu,
            seed: self.seed,
            phase1: Phase1Mode::default(),
            unassessable: UnassessablePolicy::default(),
            quantile_method: QuantileMethod::default(),
            fit_config: FitConfig::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLengthSummary {
    pub design: SimDesign,
    pub arl: f64,
    pub sdrl: f64,
    /// Standard error of `arl`.
    pub arl_se: f64,
    pub replications: usize,
    /// Runs stopped at the cap; they enter `arl` at the cap value.
    pub censored_runs: usize,
    /// Phase-II subgroups that could not be fitted.
    pub unassessable: usize,
    pub mean_lcl: f64,
    pub mean_ucl: f64,
    pub mean_theta_hat: f64,
    pub mean_alpha_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLength {
    pub length: usize,
    pub capped: bool,
    pub unassessable: usize,
}

/// Draws phase-II subgroups from `ooc_params` until `chart` signals.
pub fn run_length<R: rand::Rng + ?Sized>(
    chart: &ControlChart,
    ooc_params: &GwParams,
    rng: &mut R,
    cap: usize,
    fit_config: &FitConfig,
) -> Result<RunLength> {
    let scheme = chart.config.scheme;
    let mut unassessable = 0;
    for index in 1..=cap {
        let x = distribution::sample(ooc_params, scheme.n, rng)?;
        let s = censor(&x, &scheme)?;
        let verdict = charts::monitor(chart, &s, fit_config);
        if verdict.signal.is_alarm() {
            return Ok(RunLength {
                length: index,
                capped: false,
                unassessable,
            });
        }
        if verdict.statistic.is_none() {
            unassessable += 1;
        }
    }
    Ok(RunLength {
        length: cap,
        capped: true,
        unassessable,
    })
}

/// Limits and phase-I fit of one replication; `limits[i][j]` is for
/// `(ps[i], nus[j])`.
#[derive(Debug, Clone)]
struct RepChart {
    params: GwParams,
    limits: Vec<Vec<(f64, f64)>>,
}

/// `runs[s][i][j]` for shift `s`, `ps[i]`, `nus[j]`.
#[derive(Debug, Clone)]
struct RepOutcome {
    chart: RepChart,
    runs: Vec<Vec<Vec<RunLength>>>,
}

fn phase1_data(grid: &SimGrid, rep: u64) -> Result<(Vec<HybridCensoredSample>, GwParams)> {
    for attempt in 0..MAX_PHASE1_ATTEMPTS {
        let mut subgroups = Vec::with_capacity(grid.k);
        for j in 0..grid.k {
            let mut rng = substream(grid.seed, &[PHASE1_STREAM, rep, attempt, j as u64]);
            let x = distribution::sample(&grid.true_params, grid.scheme.n, &mut rng)?;
            subgroups.push(censor(&x, &grid.scheme)?);
        }
        let fit = estimation::fit_pooled(&subgroups, &grid.fit_config);
        if let Ok(f) = fit {
            if f.converged {
                return Ok((subgroups, f.params));
            }
        }
    }
    Err(Error::NoConvergence {
        method: "phase-I fit",
        iterations: MAX_PHASE1_ATTEMPTS as usize,
    })
}

fn build_rep_chart(grid: &SimGrid, rep: u64) -> Result<RepChart> {
    let (phase1, params) = phase1_data(grid, rep)?;
    let mut limits = Vec::with_capacity(grid.ps.len());
    match grid.kind {
        ChartKind::Bhc => {
            let (estimates, _) = charts::bootstrap_quantiles(
                &params,
                &grid.scheme,
                &grid.ps,
                grid.b,
                &[grid.seed, BOOTSTRAP_STREAM, rep],
                &grid.fit_config,
                Execution::Sequential,
            )?;
            for col in &estimates {
                let row = grid
                    .nus
                    .iter()
                    .map(|&nu| bootstrap_limits(col, nu, grid.quantile_method).map(|(l, _, u)| (l, u)))
                    .collect::<Result<Vec<_>>>()?;
                limits.push(row);
            }
        }
        ChartKind::Shc => {
            let cfg = grid.fit_config.with_init(params);
            let mut cl = vec![0.0; grid.ps.len()];
            for s in &phase1 {
                let q = try_quantiles(s, &grid.ps, &cfg).ok_or(Error::NoConvergence {
                    method: "phase-I subgroup fit",
                    iterations: cfg.em_max_iter,
                })?;
                for (c, v) in cl.iter_mut().zip(q) {
                    *c += v / grid.k as f64;
                }
            }
            let info = information::scheme_info(&grid.scheme, &params, grid.fit_config.quad_tol)?;
            for (i, &p) in grid.ps.iter().enumerate() {
                let se = information::quantile_se(&params, p, grid.scheme.n, &info)?;
                let row = grid
                    .nus
                    .iter()
                    .map(|&nu| shc_limits(cl[i], se, nu))
                    .collect::<Result<Vec<_>>>()?;
                limits.push(row);
            }
        }
    }
    Ok(RepChart { params, limits })
}

/// Follows one phase-II stream, scoring each subgroup against every design.
fn follow_stream(grid: &SimGrid, chart: &RepChart, shift_index: usize, rep: u64) -> Result<Vec<Vec<RunLength>>> {
    let shift = grid.shifts[shift_index];
    let ooc = grid.true_params.shifted(shift.delta_theta, shift.delta_alpha)?;
    let cfg = grid.fit_config.with_init(chart.params);
    // every shift reuses the same uniforms, so designs are compared on common random numbers
    let mut rng = substream(grid.seed, &[PHASE2_STREAM, rep]);
    let (np, nn) = (grid.ps.len(), grid.nus.len());
    let mut out = vec![vec![None::<RunLength>; nn]; np];
    let caps: Vec<usize> = grid.nus.iter().map(|&nu| grid.cap(nu)).collect();
    let max_cap = caps.iter().copied().max().unwrap_or(0);
    let mut open = np * nn;
    let mut index = 0usize;
    let mut unassessable = 0usize;
    let mut draws = 0usize;
    while open > 0 {
        draws += 1;
        if draws > 10 * max_cap {
            return Err(Error::Numerical("phase-II stream produced no assessable subgroups".into()));
        }
        let x = distribution::sample(&ooc, grid.scheme.n, &mut rng)?;
        let s = censor(&x, &grid.scheme)?;
        let q = try_quantiles(&s, &grid.ps, &cfg);
        if q.is_none() {
            unassessable += 1;
            if grid.unassessable == UnassessablePolicy::Redraw {
                continue;
            }
        }
        index += 1;
        for i in 0..np {
            for j in 0..nn {
                if out[i][j].is_some() {
                    continue;
                }
                let (lcl, ucl) = chart.limits[i][j];
                let alarm = q.as_ref().is_some_and(|q| charts::classify(lcl, ucl, q[i]).is_alarm());
                if alarm || index >= caps[j] {
                    out[i][j] = Some(RunLength {
                        length: index,
                        capped: !alarm,
                        unassessable,
                    });
                    open -= 1;
                }
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.expect("all designs closed")).collect())
        .collect())
}

fn replicate(grid: &SimGrid, rep: u64, fixed: Option<&RepChart>) -> Result<RepOutcome> {
    let chart = match fixed {
        Some(c) => c.clone(),
        None => build_rep_chart(grid, rep)?,
    };
    let runs = (0..grid.shifts.len())
        .map(|s| follow_stream(grid, &chart, s, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepOutcome { chart, runs })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every design of `grid`; summaries come back in [`SimGrid::designs`] order.
pub fn simulate_grid(grid: &SimGrid) -> Result<Vec<RunLengthSummary>> {
    grid.validate()?;
    let fixed = match grid.phase1 {
        Phase1Mode::Fixed => Some(build_rep_chart(grid, 0)?),
        Phase1Mode::Regenerate => None,
    };
    let outcomes = grid
        .execution
        .map(grid.replications, |rep| replicate(grid, rep as u64, fixed.as_ref()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (theta_bar, _) = mean_sd(&outcomes.iter().map(|o| o.chart.params.theta()).collect::<Vec<_>>());
    let (alpha_bar, _) = mean_sd(&outcomes.iter().map(|o| o.chart.params.alpha()).collect::<Vec<_>>());
    let designs = grid.designs();
    let mut summaries = Vec::with_capacity(designs.len());
    let mut d = 0;
    for s in 0..grid.shifts.len() {
        for i in 0..grid.ps.len() {
            for j in 0..grid.nus.len() {
                let runs: Vec<RunLength> = outcomes.iter().map(|o| o.runs[s][i][j]).collect();
                let lengths: Vec<f64> = runs.iter().map(|r| r.length as f64).collect();
                let (arl, sdrl) = mean_sd(&lengths);
                let (mean_lcl, _) = mean_sd(&outcomes.iter().map(|o| o.chart.limits[i][j].0).collect::<Vec<_>>());
                let (mean_ucl, _) = mean_sd(&outcomes.iter().map(|o| o.chart.limits[i][j].1).collect::<Vec<_>>());
                summaries.push(RunLengthSummary {
                    design: designs[d],
                    arl,
                    sdrl,
                    arl_se: sdrl / (runs.len() as f64).sqrt(),
                    replications: runs.len(),
                    censored_runs: runs.iter().filter(|r| r.capped).count(),
                    unassessable: runs.iter().map(|r| r.unassessable).sum(),
                    mean_lcl,
                    mean_ucl,
                    mean_theta_hat: theta_bar,
                    mean_alpha_hat: alpha_bar,
                });
                d += 1;
            }
        }
    }
    Ok(summaries)
}

/// ARL and SDRL of a single design.
pub fn estimate_arl(design: &SimDesign) -> Result<RunLengthSummary> {
    estimate_arl_with(design, &FitConfig::default(), Execution::default())
}

pub fn estimate_arl_with(design: &SimDesign, fit_config: &FitConfig, execution: Execution) -> Result<RunLengthSummary> {
    let grid = SimGrid {
        fit_config: *fit_config,
        execution,
        ..design.grid()
    };
    Ok(simulate_grid(&grid)?.remove(0))
}

pub const REPORT_HEADER: &str = "scheme_id,m,r,x0,p,nu,delta_theta,delta_alpha,lcl,ucl,arl,sdrl,reps,capped";

fn report_row(out: &mut String, s: &RunLengthSummary) {
    let d = &s.design;
    let _ = write!(
        out,
        "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}",
        d.scheme_id.map(|i| i.to_string()).unwrap_or_default(),
        d.scheme.n,
        d.scheme.r,
        if d.scheme.x0.is_finite() { d.scheme.x0.to_string() } else { String::new() },
        d.p,
        d.nu,
        d.shift.delta_theta,
        d.shift.delta_alpha,
        s.mean_lcl,
        s.mean_ucl,
        s.arl,
        s.sdrl,
        s.replications,
        s.censored_runs
    );
}

/// One CSV row per design.
pub fn report_csv(summaries: &[RunLengthSummary]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for s in summaries {
        report_row(&mut out, s);
        out.push('\n');
    }
    out
}

/// In-control report in the layout of the published table: the standard
/// report columns followed by the mean phase-I estimates.
pub fn table1_report(summaries: &[RunLengthSummary]) -> Result<String> {
    if let Some(s) = summaries.iter().find(|s| !s.design.shift.is_none()) {
        return Err(Error::InvalidParameter {
            name: "shift",
            value: s.design.shift.delta_theta + s.design.shift.delta_alpha,
            reason: "the in-control report takes in-control designs only",
        });
    }
    let mut out = format!("{REPORT_HEADER},theta_hat,alpha_hat\n");
    for s in summaries {
        report_row(&mut out, s);
        let _ = writeln!(out, ",{:.6},{:.6}", s.mean_theta_hat, s.mean_alpha_hat);
    }
    Ok(out)
}
