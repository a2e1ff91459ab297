//! Maximum-likelihood estimation of `(θ, α)` from hybrid-censored samples.
//!
//! Two estimators are provided:
//!
//! * [`Estimator::Em`] — the EM algorithm. The E-step represents the
//!   conditional law of each censored lifetime `Y | Y > c` under the current
//!   iterate by a tanh-sinh node set; the M-step maximizes the resulting
//!   weighted complete-data log-likelihood by safeguarded Newton-Raphson in
//!   `(ln θ, ln α)`. Its fixed point is the maximizer of the observed-data
//!   log-likelihood.
//! * [`Estimator::PseudoLikelihood`] — maximizes the pseudo log-likelihood
//!   `Σ ln f(x_i) + (n - d) E[ln f(Y) | Y > c]` with the conditional
//!   expectations `A`, `B`, `C` evaluated at the candidate parameters
//!   themselves. This is *not* the maximum-likelihood estimate; it is kept
//!   because published limits for this chart family were computed with it.

use serde::{Deserialize, Serialize};

use crate::censoring::HybridCensoredSample;
use crate::distribution::{
    self, ln_one_minus_exp_neg, ln_pdf_unchecked, ln_sf_unchecked, GwParams, Truncation,
};
use crate::error::{Error, Result};
use crate::quadrature::{self, Rule};

/// Smallest conditional-tail probability `1 - F(c)` accepted.
const TAIL_FLOOR: f64 = 1e-300;
const PARAM_MIN: f64 = 1e-6;
const PARAM_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    #[default]
    Em,
    PseudoLikelihood,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Starting point; `None` starts from a Weibull (`α = 1`) profile fit.
    pub init: Option<GwParams>,
    /// Convergence threshold on the largest relative parameter change, taken
    /// for EM as the estimated remaining distance to the fixed point.
    pub em_tol: f64,
    pub em_max_iter: usize,
    /// M-step score tolerance, per unit of total weight.
    pub nr_tol: f64,
    pub nr_max_iter: usize,
    pub quad_tol: f64,
    pub estimator: Estimator,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            init: None,
            em_tol: 1e-8,
            em_max_iter: 500,
            nr_tol: 1e-8,
            nr_max_iter: 50,
            quad_tol: 1e-8,
            estimator: Estimator::Em,
        }
    }
}

impl FitConfig {
    pub fn with_init(mut self, init: GwParams) -> Self {
        self.init = Some(init);
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("em_tol", self.em_tol),
            ("nr_tol", self.nr_tol),
            ("quad_tol", self.quad_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "tolerances must be positive",
                });
            }
        }
        if self.em_max_iter == 0 || self.nr_max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                reason: "iteration caps must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub params: GwParams,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: GwParams,
    /// Observed-data log-likelihood at `params`.
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Starting point followed by one entry per iteration.
    pub trace: Vec<TracePoint>,
    pub estimator: Estimator,
}

impl FitResult {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                method: match self.estimator {
                    Estimator::Em => "EM",
                    Estimator::PseudoLikelihood => "pseudo-likelihood",
                },
                iterations: self.iterations,
            })
        }
    }
}

/// Observed-data log-likelihood of one sample, additive constant dropped.
pub fn observed_loglik(sample: &HybridCensoredSample, params: &GwParams) -> Result<f64> {
    pooled_loglik(std::slice::from_ref(sample), params)
}

/// Sum of the observed-data log-likelihoods of independent samples.
pub fn pooled_loglik(samples: &[HybridCensoredSample], params: &GwParams) -> Result<f64> {
    let d: usize = samples.iter().map(|s| s.d()).sum();
    if d == 0 {
        return Err(Error::DegenerateSample {
            observed: 0,
            required: 1,
        });
    }
    Ok(loglik_unchecked(samples, params))
}

fn loglik_unchecked(samples: &[HybridCensoredSample], params: &GwParams) -> f64 {
    samples
        .iter()
        .map(|s| {
            let obs: f64 = s.observed().iter().map(|&x| ln_pdf_unchecked(x, params)).sum();
            let cens = s.censored();
            if cens == 0 {
                obs
            } else {
                obs + cens as f64 * ln_sf_unchecked(s.c(), params)
            }
        })
        .sum()
}

pub(crate) fn check_tail(c: f64, params: &GwParams) -> Result<Truncation> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain {
            op: "conditional expectation",
            value: c,
        });
    }
    let trunc = Truncation::new(c, params);
    if !(trunc.sf() >= TAIL_FLOOR) {
        return Err(Error::Numerical(format!(
            "truncation probability 1 - F({c}) = {:e} is below the floor",
            trunc.sf()
        )));
    }
    Ok(trunc)
}

/// `E[g(Y) | Y > c]` by adaptive quadrature on the conditional-probability scale.
pub fn conditional_expectation<G: FnMut(f64) -> f64>(
    c: f64,
    params: &GwParams,
    quad_tol: f64,
    mut g: G,
) -> Result<f64> {
    let tail = check_tail(c, params)?;
    quadrature::integrate_unit(|u, u_c| g(tail.point(u, u_c, params)), quad_tol)
}

/// `A(c) = E[ln Y | Y > c]`.
pub fn conditional_a(c: f64, params: &GwParams, quad_tol: f64) -> Result<f64> {
    conditional_expectation(c, params, quad_tol, f64::ln)
}

/// `B(c) = E[Y^θ | Y > c]`.
pub fn conditional_b(c: f64, params: &GwParams, quad_tol: f64) -> Result<f64> {
    let theta = params.theta();
    conditional_expectation(c, params, quad_tol, |y| y.powf(theta))
}

/// `C(c) = E[ln(1 - exp(-Y^θ)) | Y > c]`.
pub fn conditional_c(c: f64, params: &GwParams, quad_tol: f64) -> Result<f64> {
    let theta = params.theta();
    conditional_expectation(c, params, quad_tol, |y| ln_one_minus_exp_neg(y.powf(theta)))
}

/// Weighted log-lifetimes: observed failures (weight 1) and quadrature
/// nodes standing in for censored units.
#[derive(Debug, Default, Clone)]
struct WeightedPoints {
    ln_y: Vec<f64>,
    w: Vec<f64>,
}

impl WeightedPoints {
    fn push(&mut self, ln_y: f64, w: f64) {
        self.ln_y.push(ln_y);
        self.w.push(w);
    }

    fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Weighted `Σ ln f`, with gradient and Hessian in `(ln θ, ln α)`.
    fn evaluate(&self, params: &GwParams) -> (f64, [f64; 2], [f64; 3]) {
        let (theta, alpha) = (params.theta(), params.alpha());
        let (ln_theta, ln_alpha) = (theta.ln(), alpha.ln());
        let am1 = alpha - 1.0;
        let mut sw = 0.0;
        let (mut value, mut g_t, mut g_a, mut h_tt, mut h_ta) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&l, &w) in self.ln_y.iter().zip(&self.w) {
            let v = (theta * l).exp();
            let omega = ln_one_minus_exp_neg(v);
            let q = if v > 700.0 { 0.0 } else if v < 1e-300 { 1.0 } else { v / v.exp_m1() };
            sw += w;
            value += w * ((theta - 1.0) * l - v + am1 * omega);
            g_t += w * (l - v * l + am1 * q * l);
            g_a += w * omega;
            h_tt += w * (-v * l * l + am1 * l * l * q * (1.0 - v - q));
            h_ta += w * q * l;
        }
        value += sw * (ln_theta + ln_alpha);
        let gt = sw / theta + g_t;
        let ga = sw / alpha + g_a;
        let htt = -sw / (theta * theta) + h_tt;
        let haa = -sw / (alpha * alpha);
        // chain rule to log parameters
        let grad = [theta * gt, alpha * ga];
        let hess = [
            theta * theta * htt + theta * gt,
            theta * alpha * h_ta,
            alpha * alpha * haa + alpha * ga,
        ];
        (value, grad, hess)
    }
}

fn params_from_log(eta: [f64; 2]) -> Result<GwParams> {
    let (t, a) = (eta[0].exp(), eta[1].exp());
    if !(PARAM_MIN..=PARAM_MAX).contains(&t) || !(PARAM_MIN..=PARAM_MAX).contains(&a) {
        return Err(Error::Divergence { theta: t, alpha: a });
    }
    GwParams::new(t, a)
}

/// Newton direction for a maximization, falling back to a shifted Hessian
/// when the Hessian is not negative definite. Step length is capped at 2
/// in log space.
fn ascent_direction(grad: [f64; 2], hess: [f64; 3]) -> [f64; 2] {
    let (a, b, c) = (hess[0], hess[1], hess[2]);
    let mut shift = 0.0;
    let scale = a.abs().max(c.abs()).max(1e-12);
    let dir = loop {
        let (a2, c2) = (a - shift, c - shift);
        let det = a2 * c2 - b * b;
        if a2 < 0.0 && det > 0.0 {
            // solve (-H) d = g
            break [(-c2 * grad[0] + b * grad[1]) / det, (b * grad[0] - a2 * grad[1]) / det];
        }
        shift = if shift == 0.0 { 1e-3 * scale } else { shift * 10.0 };
        if shift > 1e12 * scale {
            break grad;
        }
    };
    let norm = dir[0].abs().max(dir[1].abs());
    if norm > 2.0 {
        [2.0 * dir[0] / norm, 2.0 * dir[1] / norm]
    } else {
        dir
    }
}

/// Maximizes the weighted complete-data log-likelihood starting at `start`.
fn m_step(points: &WeightedPoints, start: GwParams, cfg: &FitConfig) -> Result<GwParams> {
    let tol = cfg.nr_tol * points.total_weight().max(1.0);
    let mut eta = [start.theta().ln(), start.alpha().ln()];
    let mut current = start;
    let (mut value, mut grad, mut hess) = points.evaluate(&current);
    for _ in 0..cfg.nr_max_iter {
        if grad[0].abs().max(grad[1].abs()) < tol {
            return Ok(current);
        }
        let dir = ascent_direction(grad, hess);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial_eta = [eta[0] + step * dir[0], eta[1] + step * dir[1]];
            if let Ok(trial) = params_from_log(trial_eta) {
                let (tv, tg, th) = points.evaluate(&trial);
                if tv.is_finite() && tv >= value - 1e-12 * value.abs() {
                    eta = trial_eta;
                    current = trial;
                    value = tv;
                    grad = tg;
                    hess = th;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted || step * dir[0].abs().max(dir[1].abs()) < 1e-14 {
            break;
        }
    }
    if grad[0].abs().max(grad[1].abs()) < tol.sqrt() {
        Ok(current)
    } else {
        Err(Error::Divergence {
            theta: current.theta(),
            alpha: current.alpha(),
        })
    }
}

/// Appends the E-step node set for `n_censored` units beyond `c`.
fn push_conditional_nodes(
    points: &mut WeightedPoints,
    rule: &Rule,
    c: f64,
    n_censored: usize,
    params: &GwParams,
) -> Result<()> {
    let tail = check_tail(c, params)?;
    let scale = n_censored as f64;
    for node in rule.nodes() {
        let y = tail.point(node.u, node.u_c, params);
        if y > 0.0 && y.is_finite() {
            points.push(y.ln(), scale * node.weight);
        }
    }
    Ok(())
}

fn check_identifiable(samples: &[HybridCensoredSample]) -> Result<()> {
    let mut values: Vec<f64> = samples.iter().flat_map(|s| s.observed().iter().copied()).collect();
    let d = values.len();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if d < 2 || values.len() < 2 {
        return Err(Error::DegenerateSample {
            observed: values.len(),
            required: 2,
        });
    }
    Ok(())
}

/// Picks the fixed rule level for the E-step from an adaptive quadrature of
/// a representative integrand at the starting point. The adaptive scheme
/// stops once two successive levels agree to `tol`, so the coarser of the
/// two already meets it.
fn e_step_rule(samples: &[HybridCensoredSample], params: &GwParams, tol: f64) -> Result<Rule> {
    let mut level = quadrature::level_for_tolerance(tol);
    if let Some(s) = samples.iter().find(|s| s.censored() > 0) {
        let tail = check_tail(s.c(), params)?;
        let mut probe = |u: f64, u_c: f64| ln_pdf_unchecked(tail.point(u, u_c, params), params);
        if let Ok((_, l)) = quadrature::integrate_unit_with_level(&mut probe, tol) {
            level = l.saturating_sub(1).max(1);
        }
    }
    Ok(Rule::new(level))
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 || f1.is_nan() {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Weibull (`α = 1`) profile fit for `θ`, followed by a one-dimensional
/// refinement of `α` at that `θ`.
pub fn default_init(samples: &[HybridCensoredSample]) -> Result<GwParams> {
    check_identifiable(samples)?;
    let ll = |t: f64, a: f64| match GwParams::new(t, a) {
        Ok(p) => {
            let v = loglik_unchecked(samples, &p);
            if v.is_finite() {
                v
            } else {
                f64::NEG_INFINITY
            }
        }
        Err(_) => f64::NEG_INFINITY,
    };
    let ln_theta = golden_max(|lt| ll(lt.exp(), 1.0), -7.0, 4.0, 50);
    let theta = ln_theta.exp();
    let ln_alpha = golden_max(|la| ll(theta, la.exp()), -7.0, 7.0, 50);
    GwParams::new(theta, ln_alpha.exp())
}

/// EM fit of a single sample.
pub fn em_fit(sample: &HybridCensoredSample, config: &FitConfig) -> Result<FitResult> {
    em_fit_pooled(std::slice::from_ref(sample), config)
}

/// Fits a single sample with the estimator selected in `config`.
pub fn fit(sample: &HybridCensoredSample, config: &FitConfig) -> Result<FitResult> {
    fit_pooled(std::slice::from_ref(sample), config)
}

/// Fits the joint likelihood of independent samples with the estimator
/// selected in `config`.
pub fn fit_pooled(samples: &[HybridCensoredSample], config: &FitConfig) -> Result<FitResult> {
    match config.estimator {
        Estimator::Em => em_fit_pooled(samples, config),
        Estimator::PseudoLikelihood => pseudo_fit_pooled(samples, config),
    }
}

fn relative_change(a: &GwParams, b: &GwParams) -> f64 {
    ((b.theta() - a.theta()) / a.theta())
        .abs()
        .max(((b.alpha() - a.alpha()) / a.alpha()).abs())
}

/// EM on the joint likelihood of independent samples, each with its own
/// censoring threshold.
///
/// Iterations are grouped in cycles of two EM updates followed by a
/// squared-extrapolation (SQUAREM) step, which is kept only when it does
/// not lower the likelihood. The fit stops when the distance to the fixed
/// point, estimated from the contraction of two successive EM updates, falls
/// below `em_tol`.
pub fn em_fit_pooled(samples: &[HybridCensoredSample], config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_identifiable(samples)?;
    let mut params = match config.init {
        Some(p) => p,
        None => default_init(samples)?,
    };
    let mut observed = WeightedPoints::default();
    for s in samples {
        for &x in s.observed() {
            observed.push(x.ln(), 1.0);
        }
    }
    let n_observed = observed.ln_y.len();
    let rule = e_step_rule(samples, &params, config.quad_tol)?;

    let mut points = observed;
    let mut em_update = |p: GwParams| -> Result<GwParams> {
        points.ln_y.truncate(n_observed);
        points.w.truncate(n_observed);
        for s in samples.iter().filter(|s| s.censored() > 0) {
            push_conditional_nodes(&mut points, &rule, s.c(), s.censored(), &p)?;
        }
        m_step(&points, p, config)
    };

    let mut trace = vec![TracePoint {
        params,
        loglik: loglik_unchecked(samples, &params),
    }];
    let finish = |trace: Vec<TracePoint>, iterations: usize, converged: bool| {
        let last = *trace.last().expect("trace holds the starting point");
        FitResult {
            params: last.params,
            loglik: last.loglik,
            iterations,
            converged,
            trace,
            estimator: Estimator::Em,
        }
    };
    let mut iterations = 0;
    while iterations < config.em_max_iter {
        let p1 = em_update(params)?;
        iterations += 1;
        trace.push(TracePoint {
            params: p1,
            loglik: loglik_unchecked(samples, &p1),
        });
        let c1 = relative_change(&params, &p1);
        if c1 == 0.0 {
            return Ok(finish(trace, iterations, true));
        }
        if iterations == config.em_max_iter {
            break;
        }
        let p2 = em_update(p1)?;
        iterations += 1;
        let ll2 = loglik_unchecked(samples, &p2);
        trace.push(TracePoint { params: p2, loglik: ll2 });
        let c2 = relative_change(&p1, &p2);
        let rate = c2 / c1;
        if c2 == 0.0 || (rate < 1.0 && c2 / (1.0 - rate) < config.em_tol) {
            return Ok(finish(trace, iterations, true));
        }
        params = p2;
        if iterations == config.em_max_iter {
            break;
        }

        let eta = |p: &GwParams| [p.theta().ln(), p.alpha().ln()];
        let (e0, e1, e2) = (eta(&trace[trace.len() - 3].params), eta(&p1), eta(&p2));
        let r = [e1[0] - e0[0], e1[1] - e0[1]];
        let v = [e2[0] - 2.0 * e1[0] + e0[0], e2[1] - 2.0 * e1[1] + e0[1]];
        let step = -(r[0].hypot(r[1]) / v[0].hypot(v[1]));
        if !(step.is_finite() && step < -1.0) {
            continue;
        }
        let jump = [
            e0[0] - 2.0 * step * r[0] + step * step * v[0],
            e0[1] - 2.0 * step * r[1] + step * step * v[1],
        ];
        let Ok(start) = params_from_log(jump) else {
            continue;
        };
        let Ok(p3) = em_update(start) else {
            continue;
        };
        iterations += 1;
        let ll3 = loglik_unchecked(samples, &p3);
        if ll3.is_finite() && ll3 >= ll2 {
            trace.push(TracePoint { params: p3, loglik: ll3 });
            params = p3;
        }
    }
    Ok(finish(trace, iterations, false))
}

/// Pseudo log-likelihood with the censored-unit expectations taken under
/// the same parameters that are being scored.
pub fn pseudo_loglik(samples: &[HybridCensoredSample], params: &GwParams, rule: &Rule) -> Result<f64> {
    let mut total = 0.0;
    for s in samples {
        total += s.observed().iter().map(|&x| ln_pdf_unchecked(x, params)).sum::<f64>();
        if s.censored() > 0 {
            let tail = check_tail(s.c(), params)?;
            let expected = rule.integrate(|u, u_c| {
                let y = tail.point(u, u_c, params);
                ln_pdf_unchecked(y, params)
            });
            total += s.censored() as f64 * expected;
        }
    }
    Ok(total)
}

/// Maximizes [`pseudo_loglik`] by Newton-Raphson in `(ln θ, ln α)` with
/// central-difference derivatives and step halving.
pub fn pseudo_fit_pooled(samples: &[HybridCensoredSample], config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_identifiable(samples)?;
    let start = match config.init {
        Some(p) => p,
        None => default_init(samples)?,
    };
    let rule = e_step_rule(samples, &start, config.quad_tol)?;
    let objective = |eta: [f64; 2]| -> f64 {
        match params_from_log(eta) {
            Ok(p) => pseudo_loglik(samples, &p, &rule).unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let h = 1e-4;
    let mut eta = [start.theta().ln(), start.alpha().ln()];
    let mut value = objective(eta);
    if !value.is_finite() {
        return Err(Error::Numerical("pseudo log-likelihood is not finite at the start".into()));
    }
    let mut trace = vec![TracePoint {
        params: start,
        loglik: loglik_unchecked(samples, &start),
    }];
    for iter in 1..=config.em_max_iter {
        let fpp = objective([eta[0] + h, eta[1] + h]);
        let fpm = objective([eta[0] + h, eta[1] - h]);
        let fmp = objective([eta[0] - h, eta[1] + h]);
        let fmm = objective([eta[0] - h, eta[1] - h]);
        let f0p = objective([eta[0], eta[1] + h]);
        let f0m = objective([eta[0], eta[1] - h]);
        let fp0 = objective([eta[0] + h, eta[1]]);
        let fm0 = objective([eta[0] - h, eta[1]]);
        let grad = [(fp0 - fm0) / (2.0 * h), (f0p - f0m) / (2.0 * h)];
        let hess = [
            (fp0 - 2.0 * value + fm0) / (h * h),
            (fpp - fpm - fmp + fmm) / (4.0 * h * h),
            (f0p - 2.0 * value + f0m) / (h * h),
        ];
        if !grad.iter().chain(hess.iter()).all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite pseudo log-likelihood derivatives".into()));
        }
        let dir = ascent_direction(grad, hess);
        let mut step = 1.0;
        let mut moved = None;
        for _ in 0..40 {
            let trial = [eta[0] + step * dir[0], eta[1] + step * dir[1]];
            let tv = objective(trial);
            if tv.is_finite() && tv >= value - 1e-12 * value.abs() {
                moved = Some((trial, tv));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_value)) = moved else {
            let params = params_from_log(eta)?;
            let loglik = loglik_unchecked(samples, &params);
            return Ok(FitResult {
                params,
                loglik,
                iterations: iter,
                converged: grad[0].abs().max(grad[1].abs()) < 1e-4,
                trace,
                estimator: Estimator::PseudoLikelihood,
            });
        };
        let change = ((next[0] - eta[0]).exp_m1().abs()).max((next[1] - eta[1]).exp_m1().abs());
        eta = next;
        value = next_value;
        let params = params_from_log(eta)?;
        trace.push(TracePoint {
            params,
            loglik: loglik_unchecked(samples, &params),
        });
        if change < config.em_tol {
            return Ok(FitResult {
                params,
                loglik: trace.last().map(|t| t.loglik).unwrap_or(f64::NAN),
                iterations: iter,
                converged: true,
                trace,
                estimator: Estimator::PseudoLikelihood,
            });
        }
    }
    let params = params_from_log(eta)?;
    Ok(FitResult {
        params,
        loglik: loglik_unchecked(samples, &params),
        iterations: config.em_max_iter,
        converged: false,
        trace,
        estimator: Estimator::PseudoLikelihood,
    })
}

/// Plug-in estimate of the `p`-th quantile.
pub fn quantile_mle(fit: &FitResult, p: f64) -> Result<f64> {
    if !fit.converged {
        return Err(Error::NoConvergence {
            method: "quantile_mle",
            iterations: fit.iterations,
        });
    }
    distribution::quantile(p, &fit.params)
}

/// Kolmogorov-Smirnov distance between the empirical cdf of `data` and the
/// model cdf.
pub fn ks_statistic(data: &[f64], params: &GwParams) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidSample("K-S statistic needs at least one value".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = distribution::cdf(x, params)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}
