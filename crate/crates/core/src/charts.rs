//! Bootstrap (BHC) and Shewhart-type (SHC) control charts for a quantile
//! `ξ_p` of hybrid-censored lifetimes.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::censoring::{censor, CensoringScheme, HybridCensoredSample};
use crate::distribution::{self, GwParams};
use crate::error::{Error, Result};
use crate::estimation::{self, Estimator, FitConfig, FitResult};
use crate::exec::{substream, Execution};
use crate::information;

/// Substream tag of bootstrap replicates.
pub(crate) const BOOTSTRAP_STREAM: u64 = 0xB007;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartKind {
    #[serde(rename = "BHC")]
    Bhc,
    #[serde(rename = "SHC")]
    Shc,
}

/// Hyndman-Fan sample quantile definitions 4 to 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileMethod {
    Hf4,
    Hf5,
    Hf6,
    Hf7,
    #[default]
    Hf8,
    Hf9,
}

impl QuantileMethod {
    fn plotting_constants(self) -> (f64, f64) {
        match self {
            QuantileMethod::Hf4 => (0.0, 1.0),
            QuantileMethod::Hf5 => (0.5, 0.5),
            QuantileMethod::Hf6 => (0.0, 0.0),
            QuantileMethod::Hf7 => (1.0, 1.0),
            QuantileMethod::Hf8 => (1.0 / 3.0, 1.0 / 3.0),
            QuantileMethod::Hf9 => (0.375, 0.375),
        }
    }
}

/// Sample quantile by the median-unbiased Hyndman-Fan definition 8.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    empirical_quantile_with(values, q, QuantileMethod::Hf8)
}

pub fn empirical_quantile_with(values: &[f64], q: f64, method: QuantileMethod) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidSample("sample quantile of an empty set".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain {
            op: "empirical_quantile",
            value: q,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&sorted, q, method))
}

fn sorted_quantile(sorted: &[f64], q: f64, method: QuantileMethod) -> f64 {
    let n = sorted.len();
    let (a, b) = method.plotting_constants();
    let h = ((n as f64 + 1.0 - a - b) * q + a).clamp(1.0, n as f64);
    let j = h.floor() as usize;
    if j >= n {
        return sorted[n - 1];
    }
    let frac = h - j as f64;
    sorted[j - 1] + frac * (sorted[j] - sorted[j - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    /// Monitored quantile level.
    pub p: f64,
    /// False alarm rate.
    pub nu: f64,
    /// Number of phase-I subgroups.
    pub k: usize,
    /// Subgroup size; equals `scheme.n`.
    pub m: usize,
    pub scheme: CensoringScheme,
    /// Bootstrap replications (BHC only).
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    #[serde(default)]
    pub quantile_method: QuantileMethod,
    #[serde(skip)]
    pub execution: Execution,
}

impl ChartConfig {
    pub fn new(p: f64, nu: f64, k: usize, scheme: CensoringScheme, b: usize, seed: u64) -> Result<Self> {
        let c = Self {
            p,
            nu,
            k,
            m: scheme.n,
            scheme,
            b,
            seed,
            quantile_method: QuantileMethod::default(),
            execution: Execution::default(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                value: self.p,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: self.nu,
                reason: "must lie in (0, 1)",
            });
        }
        if self.k == 0 || self.b == 0 {
            return Err(Error::InvalidParameter {
                name: if self.k == 0 { "k" } else { "B" },
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.m != self.scheme.n {
            return Err(Error::InvalidParameter {
                name: "m",
                value: self.m as f64,
                reason: "must equal the scheme's sample size",
            });
        }
        self.scheme.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlChart {
    pub kind: ChartKind,
    pub lcl: f64,
    pub cl: f64,
    pub ucl: f64,
    pub phase1_fit: FitResult,
    pub config: ChartConfig,
    /// Bootstrap refits that failed and were redrawn (BHC).
    pub failed_refits: usize,
    /// Standard error behind the SHC limits.
    pub standard_error: Option<f64>,
}

impl ControlChart {
    pub fn estimator(&self) -> Estimator {
        self.phase1_fit.estimator
    }

    pub fn classify(&self, statistic: f64) -> Signal {
        classify(self.lcl, self.ucl, statistic)
    }
}

/// Flat JSON form of a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub kind: ChartKind,
    pub p: f64,
    pub nu: f64,
    pub scheme: CensoringScheme,
    pub lcl: f64,
    pub cl: f64,
    pub ucl: f64,
    pub theta_hat: f64,
    pub alpha_hat: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub k: usize,
    pub estimator: Estimator,
    #[serde(default)]
    pub quantile_method: QuantileMethod,
    #[serde(default)]
    pub failed_refits: usize,
    #[serde(default)]
    pub standard_error: Option<f64>,
    #[serde(default)]
    pub phase1_loglik: Option<f64>,
}

impl From<&ControlChart> for ChartRecord {
    fn from(c: &ControlChart) -> Self {
        Self {
            kind: c.kind,
            p: c.config.p,
            nu: c.config.nu,
            scheme: c.config.scheme,
            lcl: c.lcl,
            cl: c.cl,
            ucl: c.ucl,
            theta_hat: c.phase1_fit.params.theta(),
            alpha_hat: c.phase1_fit.params.alpha(),
            b: c.config.b,
            seed: c.config.seed,
            k: c.config.k,
            estimator: c.phase1_fit.estimator,
            quantile_method: c.config.quantile_method,
            failed_refits: c.failed_refits,
            standard_error: c.standard_error,
            phase1_loglik: Some(c.phase1_fit.loglik).filter(|v| v.is_finite()),
        }
    }
}

impl TryFrom<ChartRecord> for ControlChart {
    type Error = Error;

    fn try_from(r: ChartRecord) -> Result<Self> {
        let params = GwParams::new(r.theta_hat, r.alpha_hat)?;
        let config = ChartConfig {
            p: r.p,
            nu: r.nu,
            k: r.k,
            m: r.scheme.n,
            scheme: r.scheme,
            b: r.b,
            seed: r.seed,
            quantile_method: r.quantile_method,
            execution: Execution::default(),
        };
        config.validate()?;
        if !(r.lcl <= r.cl && r.cl <= r.ucl) {
            return Err(Error::InvalidSample("chart limits must satisfy lcl <= cl <= ucl".into()));
        }
        Ok(Self {
            kind: r.kind,
            lcl: r.lcl,
            cl: r.cl,
            ucl: r.ucl,
            phase1_fit: FitResult {
                params,
                loglik: r.phase1_loglik.unwrap_or(f64::NAN),
                iterations: 0,
                converged: true,
                trace: Vec::new(),
                estimator: r.estimator,
            },
            config,
            failed_refits: r.failed_refits,
            standard_error: r.standard_error,
        })
    }
}

impl Serialize for ControlChart {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChartRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ControlChart {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ChartRecord::deserialize(d)?;
        ControlChart::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signal {
    InControl,
    OutOfControlLow,
    OutOfControlHigh,
    /// The subgroup could not be fitted; not a signal.
    Unassessable,
}

impl Signal {
    pub fn is_alarm(self) -> bool {
        matches!(self, Signal::OutOfControlLow | Signal::OutOfControlHigh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorVerdict {
    pub statistic: Option<f64>,
    pub signal: Signal,
}

/// One row of a monitoring report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub index: usize,
    pub statistic: Option<f64>,
    pub lcl: f64,
    pub cl: f64,
    pub ucl: f64,
    pub signal: Signal,
}

pub fn classify(lcl: f64, ucl: f64, statistic: f64) -> Signal {
    if statistic > ucl {
        Signal::OutOfControlHigh
    } else if statistic < lcl {
        Signal::OutOfControlLow
    } else {
        Signal::InControl
    }
}

fn check_phase1(phase1: &[HybridCensoredSample], config: &ChartConfig) -> Result<()> {
    config.validate()?;
    if phase1.len() != config.k {
        return Err(Error::InvalidSample(format!(
            "expected k = {} phase-I subgroups, got {}",
            config.k,
            phase1.len()
        )));
    }
    if let Some(s) = phase1.iter().find(|s| s.scheme() != &config.scheme) {
        return Err(Error::InvalidSample(format!(
            "phase-I subgroup scheme {:?} differs from the chart scheme",
            s.scheme()
        )));
    }
    Ok(())
}

fn pooled_fit(phase1: &[HybridCensoredSample], fit_config: &FitConfig) -> Result<FitResult> {
    estimation::fit_pooled(phase1, fit_config)?.require_converged()
}

/// Converged refit of one simulated subgroup, or `None`.
pub(crate) fn try_quantiles(
    sample: &HybridCensoredSample,
    ps: &[f64],
    fit_config: &FitConfig,
) -> Option<Vec<f64>> {
    let fit = estimation::fit(sample, fit_config).ok().filter(|f| f.converged)?;
    ps.iter()
        .map(|&p| distribution::quantile(p, &fit.params).ok())
        .collect()
}

/// Parametric bootstrap of `ξ_p` for each level in `ps`: replicate `b`
/// draws a subgroup from `params` on substream `key ++ [b]`, censors it and
/// refits, redrawing on failure. Returns one vector of `reps` estimates per
/// level, plus the number of redraws.
pub fn bootstrap_quantiles(
    params: &GwParams,
    scheme: &CensoringScheme,
    ps: &[f64],
    reps: usize,
    key: &[u64],
    fit_config: &FitConfig,
    execution: Execution,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let fit_config = FitConfig {
        init: fit_config.init.or(Some(*params)),
        ..*fit_config
    };
    let one = |b: usize| -> Result<(Vec<f64>, usize)> {
        let mut path = key.to_vec();
        path.push(b as u64);
        let mut rng = substream(path[0], &path[1..]);
        for failures in 0..MAX_REDRAWS {
            let x = distribution::sample(params, scheme.n, &mut rng)?;
            let s = censor(&x, scheme)?;
            if let Some(q) = try_quantiles(&s, ps, &fit_config) {
                return Ok((q, failures));
            }
        }
        Err(Error::NoConvergence {
            method: "bootstrap refit",
            iterations: MAX_REDRAWS,
        })
    };
    let results = execution.map(reps, one);
    let mut columns = vec![Vec::with_capacity(reps); ps.len()];
    let mut failed = 0;
    for r in results {
        let (q, f) = r?;
        failed += f;
        for (col, v) in columns.iter_mut().zip(q) {
            col.push(v);
        }
    }
    Ok((columns, failed))
}

/// `(LCL, CL, UCL)` as the `ν/2`, median and `1 - ν/2` sample quantiles.
pub fn bootstrap_limits(estimates: &[f64], nu: f64, method: QuantileMethod) -> Result<(f64, f64, f64)> {
    if estimates.is_empty() {
        return Err(Error::InvalidSample("no bootstrap estimates".into()));
    }
    let mut sorted = estimates.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((
        sorted_quantile(&sorted, nu / 2.0, method),
        sorted_quantile(&sorted, 0.5, method),
        sorted_quantile(&sorted, 1.0 - nu / 2.0, method),
    ))
}

/// Standard normal quantile `z_{1 - ν/2}`.
pub fn two_sided_z(nu: f64) -> Result<f64> {
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(normal.inverse_cdf(1.0 - nu / 2.0))
}

pub fn build_bhc(phase1: &[HybridCensoredSample], config: &ChartConfig, fit_config: &FitConfig) -> Result<ControlChart> {
    check_phase1(phase1, config)?;
    let fit = pooled_fit(phase1, fit_config)?;
    build_bhc_with_fit(fit, config, fit_config)
}

/// BHC limits around an already fitted phase-I model.
pub fn build_bhc_with_fit(fit: FitResult, config: &ChartConfig, fit_config: &FitConfig) -> Result<ControlChart> {
    config.validate()?;
    let fit_config = fit_config.with_estimator(fit.estimator);
    let (estimates, failed) = bootstrap_quantiles(
        &fit.params,
        &config.scheme,
        &[config.p],
        config.b,
        &[config.seed, BOOTSTRAP_STREAM],
        &fit_config,
        config.execution,
    )?;
    let (lcl, cl, ucl) = bootstrap_limits(&estimates[0], config.nu, config.quantile_method)?;
    Ok(ControlChart {
        kind: ChartKind::Bhc,
        lcl,
        cl,
        ucl,
        phase1_fit: fit,
        config: *config,
        failed_refits: failed,
        standard_error: None,
    })
}

pub fn build_shc(phase1: &[HybridCensoredSample], config: &ChartConfig, fit_config: &FitConfig) -> Result<ControlChart> {
    check_phase1(phase1, config)?;
    let fit = pooled_fit(phase1, fit_config)?;
    let sub_config = fit_config.with_estimator(fit.estimator);
    let mut total = 0.0;
    for s in phase1 {
        let f = estimation::fit(s, &sub_config)?.require_converged()?;
        total += distribution::quantile(config.p, &f.params)?;
    }
    let cl = total / phase1.len() as f64;
    build_shc_with_fit(fit, cl, config, fit_config)
}

/// SHC limits `cl ± z_{1-ν/2}·SE`, with the standard error computed from
/// the expected information of one subgroup at the phase-I fit.
pub fn build_shc_with_fit(fit: FitResult, cl: f64, config: &ChartConfig, fit_config: &FitConfig) -> Result<ControlChart> {
    config.validate()?;
    let info = information::scheme_info(&config.scheme, &fit.params, fit_config.quad_tol)?;
    let se = information::quantile_se(&fit.params, config.p, config.m, &info)?;
    let (lcl, ucl) = shc_limits(cl, se, config.nu)?;
    Ok(ControlChart {
        kind: ChartKind::Shc,
        lcl,
        cl,
        ucl,
        phase1_fit: fit,
        config: *config,
        failed_refits: 0,
        standard_error: Some(se),
    })
}

pub fn shc_limits(cl: f64, se: f64, nu: f64) -> Result<(f64, f64)> {
    let z = two_sided_z(nu)?;
    Ok((cl - z * se, cl + z * se))
}

/// Refits a phase-II subgroup with the chart's estimator and classifies its
/// quantile estimate.
pub fn monitor(chart: &ControlChart, test_sample: &HybridCensoredSample, fit_config: &FitConfig) -> MonitorVerdict {
    let cfg = FitConfig {
        init: fit_config.init.or(Some(chart.phase1_fit.params)),
        ..fit_config.with_estimator(chart.estimator())
    };
    match try_quantiles(test_sample, &[chart.config.p], &cfg) {
        Some(q) => MonitorVerdict {
            statistic: Some(q[0]),
            signal: chart.classify(q[0]),
        },
        None => MonitorVerdict {
            statistic: None,
            signal: Signal::Unassessable,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hf8_examples() {
        assert_abs_diff_eq!(empirical_quantile(&[1., 2., 3., 4., 5.], 0.5).unwrap(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(empirical_quantile(&[2., 1.], 0.5).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(empirical_quantile(&[10., 20., 30., 40.], 0.25).unwrap(), 14.1667, epsilon = 1e-4);
        assert!(empirical_quantile(&[], 0.5).is_err());
    }

    #[test]
    fn hf7_is_linear_interpolation() {
        let v = [1., 2., 3., 4., 5.];
        assert_abs_diff_eq!(empirical_quantile_with(&v, 0.1, QuantileMethod::Hf7).unwrap(), 1.4, epsilon = 1e-12);
    }

    #[test]
    fn extremes_clamp() {
        let v = [3., 1., 2.];
        for m in [QuantileMethod::Hf4, QuantileMethod::Hf6, QuantileMethod::Hf8, QuantileMethod::Hf9] {
            assert_abs_diff_eq!(empirical_quantile_with(&v, 1e-9, m).unwrap(), 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(empirical_quantile_with(&v, 1.0 - 1e-9, m).unwrap(), 3.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn z_multiplier() {
        assert_abs_diff_eq!(two_sided_z(0.0027).unwrap(), 3.0, epsilon = 1e-3);
        let (l, u) = shc_limits(5.0, 0.0, 0.0027).unwrap();
        assert_eq!((l, u), (5.0, 5.0));
    }

    #[test]
    fn classification_is_by_threshold() {
        assert_eq!(classify(1.0, 3.0, 2.0), Signal::InControl);
        assert_eq!(classify(1.0, 3.0, 3.0), Signal::InControl);
        assert_eq!(classify(1.0, 3.0, 3.0 + 1e-12), Signal::OutOfControlHigh);
        assert_eq!(classify(1.0, 3.0, 0.5), Signal::OutOfControlLow);
        assert!(!Signal::Unassessable.is_alarm());
    }

    #[test]
    fn config_validation() {
        let scheme = CensoringScheme::hybrid(25, 15, 7.6).unwrap();
        assert!(ChartConfig::new(0.9, 0.0027, 5, scheme, 100, 1).is_ok());
        assert!(ChartConfig::new(1.0, 0.0027, 5, scheme, 100, 1).is_err());
        assert!(ChartConfig::new(0.9, 0.0, 5, scheme, 100, 1).is_err());
        assert!(ChartConfig::new(0.9, 0.1, 5, scheme, 0, 1).is_err());
    }
}
