//! Fisher information under hybrid censoring by the missing-information
//! principle, and delta-method standard errors for quantile estimates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, Discrete};
use statrs::function::beta::ln_beta;

use crate::censoring::{CensoringScheme, HybridCensoredSample};
use crate::distribution::{self, ln_one_minus_exp_neg, point_from_ln_cdf, GwParams, Truncation};
use crate::error::{Error, Result};
use crate::estimation::check_tail;
use crate::quadrature::{self, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoKind {
    Complete,
    Missing,
    Observed,
}

/// Symmetric 2×2 information matrix in `(θ, α)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMatrix {
    pub entries: [[f64; 2]; 2],
    pub kind: InfoKind,
}

impl InfoMatrix {
    fn from_upper(tt: f64, ta: f64, aa: f64, kind: InfoKind) -> Self {
        Self {
            entries: [[tt, ta], [ta, aa]],
            kind,
        }
    }

    pub fn zeros(kind: InfoKind) -> Self {
        Self::from_upper(0.0, 0.0, 0.0, kind)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn det(&self) -> f64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.entries[0][0] > 0.0 && self.det() > 0.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let e = &self.entries;
        Self::from_upper(factor * e[0][0], factor * e[0][1], factor * e[1][1], self.kind)
    }

    /// `self - other`, labelled `kind`.
    pub fn minus(&self, other: &Self, kind: InfoKind) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        Self::from_upper(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][1] - b[1][1], kind)
    }

    fn plus(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        Self::from_upper(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][1] + b[1][1], self.kind)
    }

    /// Adds `eps` to the diagonal. For diagnostics only.
    pub fn with_jitter(&self, eps: f64) -> Self {
        let e = &self.entries;
        Self::from_upper(e[0][0] + eps, e[0][1], e[1][1] + eps, self.kind)
    }

    /// Inverse of a positive-definite matrix.
    pub fn inverse(&self) -> Result<[[f64; 2]; 2]> {
        let det = self.det();
        if !self.is_positive_definite() || !det.is_finite() {
            return Err(Error::NotPositiveDefinite { det });
        }
        let e = &self.entries;
        Ok([
            [e[1][1] / det, -e[0][1] / det],
            [-e[1][0] / det, e[0][0] / det],
        ])
    }

    pub fn require_positive_definite(self) -> Result<Self> {
        if self.is_positive_definite() {
            Ok(self)
        } else {
            Err(Error::NotPositiveDefinite { det: self.det() })
        }
    }
}

/// Second derivatives of `ln f(y)` in `(θ, θ)`, `(θ, α)`, `(α, α)`.
pub(crate) fn ln_pdf_hessian(y: f64, params: &GwParams) -> [f64; 3] {
    let (theta, alpha) = (params.theta(), params.alpha());
    let l = y.ln();
    let v = (theta * l).exp();
    let q = if v > 700.0 { 0.0 } else if v < 1e-300 { 1.0 } else { v / v.exp_m1() };
    [
        -1.0 / (theta * theta) - v * l * l + (alpha - 1.0) * l * l * q * (1.0 - v - q),
        q * l,
        -1.0 / (alpha * alpha),
    ]
}

/// Second derivatives of `ln(1 - F(c))` in `(θ, θ)`, `(θ, α)`, `(α, α)`.
pub(crate) fn ln_sf_hessian(c: f64, params: &GwParams) -> [f64; 3] {
    let (theta, alpha) = (params.theta(), params.alpha());
    let lc = c.ln();
    let v = (theta * lc).exp();
    let e = (-v).exp();
    let ln_z = ln_one_minus_exp_neg(v);
    let za = (alpha * ln_z).exp();
    let s = -(alpha * ln_z).exp_m1();
    let s2 = s * s;
    let z_t = e * v * lc;
    let z_tt = lc * lc * v * e * (1.0 - v);
    let za1 = ((alpha - 1.0) * ln_z).exp();
    let za2 = ((alpha - 2.0) * ln_z).exp();
    let g_aa = -za * ln_z * ln_z / s2;
    let g_ta = -z_t * za1 * (alpha * ln_z + s) / s2;
    let g_tt = -alpha * (((alpha - 1.0) * za2 * z_t * z_t + za1 * z_tt) * s + alpha * za1 * za1 * z_t * z_t) / s2;
    [g_tt, g_ta, g_aa]
}

/// `-E[∂² ln f(Y)]` for `Y ~ GW(params)` conditioned on `Y > c`
/// (`trunc = None` for the unconditional law).
fn neg_expected_hessian(trunc: &Truncation, params: &GwParams, tol: f64) -> Result<[f64; 3]> {
    let tt = quadrature::integrate_unit(|u, u_c| -ln_pdf_hessian(trunc.point(u, u_c, params), params)[0], tol)?;
    let ta = quadrature::integrate_unit(|u, u_c| -ln_pdf_hessian(trunc.point(u, u_c, params), params)[1], tol)?;
    let aa = 1.0 / (params.alpha() * params.alpha());
    Ok([tt, ta, aa])
}

/// Expected complete-data information of `n` independent lifetimes.
pub fn complete_info(n: usize, params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    let [tt, ta, _] = neg_expected_hessian(&Truncation::none(), params, quad_tol)?;
    let n = n as f64;
    let alpha = params.alpha();
    Ok(InfoMatrix::from_upper(n * tt, n * ta, n / (alpha * alpha), InfoKind::Complete))
}

/// Information about `(θ, α)` carried by one lifetime known only to exceed `c`.
fn missing_per_unit(c: f64, params: &GwParams, quad_tol: f64) -> Result<[f64; 3]> {
    let trunc = check_tail(c, params)?;
    let [tt, ta, _] = neg_expected_hessian(&trunc, params, quad_tol)?;
    let g = ln_sf_hessian(c, params);
    let alpha = params.alpha();
    let ln_z = ln_one_minus_exp_neg(c.powf(params.theta()));
    let za = (alpha * ln_z).exp();
    let s = -(alpha * ln_z).exp_m1();
    let aa = 1.0 / (alpha * alpha) - za * ln_z * ln_z / (s * s);
    if !(aa.is_finite() && g.iter().all(|x| x.is_finite())) {
        return Err(Error::Numerical(format!("missing information overflows at c = {c}")));
    }
    Ok([tt + g[0], ta + g[1], aa])
}

/// Missing information of `n_minus_d` units right-censored at `c`.
pub fn missing_info(n_minus_d: usize, c: f64, params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    if !(c > 0.0) {
        return Err(Error::Domain {
            op: "missing_info",
            value: c,
        });
    }
    if n_minus_d == 0 {
        return Ok(InfoMatrix::zeros(InfoKind::Missing));
    }
    let [tt, ta, aa] = missing_per_unit(c, params, quad_tol)?;
    let k = n_minus_d as f64;
    Ok(InfoMatrix::from_upper(k * tt, k * ta, k * aa, InfoKind::Missing))
}

/// Complete-data information conditional on the observed sample: the
/// observed failures contribute `-∂² ln f(x_i)` and each censored unit the
/// expectation of `-∂² ln f` beyond `c`.
pub fn conditional_complete_info(sample: &HybridCensoredSample, params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    let mut tt = 0.0;
    let mut ta = 0.0;
    for &x in sample.observed() {
        let h = ln_pdf_hessian(x, params);
        tt -= h[0];
        ta -= h[1];
    }
    let cens = sample.censored();
    if cens > 0 {
        let trunc = check_tail(sample.c(), params)?;
        let [ctt, cta, _] = neg_expected_hessian(&trunc, params, quad_tol)?;
        tt += cens as f64 * ctt;
        ta += cens as f64 * cta;
    }
    let alpha = params.alpha();
    Ok(InfoMatrix::from_upper(tt, ta, sample.n() as f64 / (alpha * alpha), InfoKind::Complete))
}

/// Observed information of a sample: conditional complete information
/// minus missing information. Errors if the result is not positive definite.
pub fn observed_info(sample: &HybridCensoredSample, params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    let complete = conditional_complete_info(sample, params, quad_tol)?;
    let missing = missing_info(sample.censored(), sample.c(), params, quad_tol)?;
    complete.minus(&missing, InfoKind::Observed).require_positive_definite()
}

/// Observed information of independent samples, summed.
pub fn pooled_observed_info(samples: &[HybridCensoredSample], params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    let mut total = InfoMatrix::zeros(InfoKind::Observed);
    for s in samples {
        let complete = conditional_complete_info(s, params, quad_tol)?;
        let missing = missing_info(s.censored(), s.c(), params, quad_tol)?;
        total = total.plus(&complete.minus(&missing, InfoKind::Observed));
    }
    total.require_positive_definite()
}

/// `complete_info(n) - missing_info(n - d, c)`: the expected-complete form
/// at a given `(d, c)`.
pub fn expected_observed_info(n: usize, d: usize, c: f64, params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    if d > n {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d as f64,
            reason: "cannot exceed n",
        });
    }
    let complete = complete_info(n, params, quad_tol)?;
    let missing = missing_info(n - d, c, params, quad_tol)?;
    Ok(complete.minus(&missing, InfoKind::Observed))
}

/// Expected information of one life test run under `scheme`, averaging the
/// missing information over the random number of failures and the random
/// stopping time.
pub fn scheme_info(scheme: &CensoringScheme, params: &GwParams, quad_tol: f64) -> Result<InfoMatrix> {
    scheme.validate()?;
    let (m, r) = (scheme.n, scheme.r);
    let mut missing = [0.0; 3];
    let f_x0 = if scheme.x0.is_finite() {
        distribution::cdf(scheme.x0, params)?
    } else {
        1.0
    };
    // time bound reached first: D ~ Binomial(m, F(x0)) with D < r, C = x0
    if scheme.x0.is_finite() && f_x0 < 1.0 {
        let binom = Binomial::new(f_x0, m as u64).map_err(|e| Error::Numerical(e.to_string()))?;
        let weight: f64 = (0..r).map(|d| binom.pmf(d as u64) * (m - d) as f64).sum();
        if weight > 0.0 {
            if let Ok(b) = missing_per_unit(scheme.x0, params, quad_tol) {
                for (acc, bi) in missing.iter_mut().zip(b) {
                    *acc += weight * bi;
                }
            }
        }
    }
    // quota reached first: F(X_{r:m}) ~ Beta(r, m - r + 1) restricted to below F(x0)
    if r < m && f_x0 > 0.0 {
        let ln_norm = ln_beta(r as f64, (m - r + 1) as f64);
        let sf_x0 = 1.0 - f_x0;
        let rule = Rule::new(quadrature::level_for_tolerance(quad_tol).min(3));
        for node in rule.nodes() {
            let w = f_x0 * node.u;
            let w_c = sf_x0 + f_x0 * node.u_c;
            let density = ((r - 1) as f64 * w.ln() + (m - r) as f64 * w_c.ln() - ln_norm).exp();
            if !(density > 0.0) {
                continue;
            }
            let t = if w_c < 0.5 {
                point_from_ln_cdf((-w_c).ln_1p(), params)
            } else {
                point_from_ln_cdf(w.ln(), params)
            };
            // lifetimes so far in the tail that the law cannot be resolved carry no weight
            if let Ok(b) = missing_per_unit(t, params, quad_tol) {
                let scale = node.weight * f_x0 * density * (m - r) as f64;
                for (acc, bi) in missing.iter_mut().zip(b) {
                    *acc += scale * bi;
                }
            }
        }
    }
    let complete = complete_info(m, params, quad_tol)?;
    let missing = InfoMatrix::from_upper(missing[0], missing[1], missing[2], InfoKind::Missing);
    Ok(complete.minus(&missing, InfoKind::Observed))
}

/// Gradient of the quantile function `ξ_p` with respect to `(θ, α)`.
pub fn quantile_gradient(p: f64, params: &GwParams) -> Result<[f64; 2]> {
    let xi = distribution::quantile(p, params)?;
    let (theta, alpha) = (params.theta(), params.alpha());
    let lw = p.ln() / alpha;
    let w = lw.exp();
    let one_minus_w = -lw.exp_m1();
    let big_l = -one_minus_w.ln();
    let d_theta = -xi * big_l.ln() / (theta * theta);
    // dL/dα = -w ln p / (α² (1 - w))
    let dl_dalpha = -w * p.ln() / (alpha * alpha * one_minus_w);
    let d_alpha = xi / (theta * big_l) * dl_dalpha;
    Ok([d_theta, d_alpha])
}

/// Delta-method standard error `sqrt(∇ξ_pᵀ I⁻¹ ∇ξ_p / m)`.
pub fn quantile_se(params: &GwParams, p: f64, m: usize, info: &InfoMatrix) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let g = quantile_gradient(p, params)?;
    let inv = info.inverse()?;
    let var = g[0] * (inv[0][0] * g[0] + inv[0][1] * g[1]) + g[1] * (inv[1][0] * g[0] + inv[1][1] * g[1]);
    Ok((var / m as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::censoring::censor;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gw(t: f64, a: f64) -> GwParams {
        GwParams::new(t, a).unwrap()
    }

    #[test]
    fn a22_is_n_over_alpha_squared() {
        let info = complete_info(25, &gw(0.8, 5.0), 1e-10).unwrap();
        assert_eq!(info.get(1, 1), 1.0);
        assert_eq!(info.get(0, 1), info.get(1, 0));
    }

    #[test]
    fn complete_info_is_linear_in_n() {
        let p = gw(0.51, 11.1);
        let a = complete_info(7, &p, 1e-10).unwrap();
        let b = complete_info(14, &p, 1e-10).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(b.get(i, j), 2.0 * a.get(i, j), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn exponential_a11_closed_form() {
        // θ = α = 1: -E[∂²θ ln f] = 1 + E[Y (ln Y)²] = 1 + (1 - γ)² + π²/6 - 1
        let g = 0.577_215_664_901_532_9;
        let expected = (1.0 - g) * (1.0 - g) + std::f64::consts::PI.powi(2) / 6.0;
        let info = complete_info(1, &gw(1.0, 1.0), 1e-12).unwrap();
        assert_abs_diff_eq!(info.get(0, 0), expected, epsilon = 1e-9);
    }

    #[test]
    fn missing_info_zero_when_nothing_censored() {
        let m = missing_info(0, 1.0, &gw(1.0, 1.0), 1e-8).unwrap();
        assert_eq!(m.entries, [[0.0; 2]; 2]);
    }

    #[test]
    fn b22_closed_form_at_unit_parameters() {
        let z: f64 = 1.0 - (-1.0f64).exp();
        let expected = 1.0 - z * z.ln().powi(2) / (1.0 - z).powi(2);
        let m = missing_info(1, 1.0, &gw(1.0, 1.0), 1e-10).unwrap();
        assert_abs_diff_eq!(m.get(1, 1), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.017_349, epsilon = 1e-6);
    }

    #[test]
    fn ln_sf_hessian_matches_finite_differences() {
        let c = 3.7;
        let f = |t: f64, a: f64| crate::distribution::sf(c, &gw(t, a)).unwrap().ln();
        let (t, a, h) = (0.7, 4.0, 1e-4);
        let g = ln_sf_hessian(c, &gw(t, a));
        let tt = (f(t + h, a) - 2.0 * f(t, a) + f(t - h, a)) / (h * h);
        let aa = (f(t, a + h) - 2.0 * f(t, a) + f(t, a - h)) / (h * h);
        let ta = (f(t + h, a + h) - f(t + h, a - h) - f(t - h, a + h) + f(t - h, a - h)) / (4.0 * h * h);
        assert_relative_eq!(g[0], tt, max_relative = 1e-5);
        assert_relative_eq!(g[1], ta, max_relative = 1e-5);
        assert_relative_eq!(g[2], aa, max_relative = 1e-5);
    }

    #[test]
    fn observed_identity_and_complete_case() {
        let p = gw(0.6, 3.0);
        let data: Vec<f64> = (1..=30).map(|i| distribution::quantile(i as f64 / 31.0, &p).unwrap()).collect();
        let s = censor(&data, &CensoringScheme::hybrid(30, 20, 2.0).unwrap()).unwrap();
        let comp = conditional_complete_info(&s, &p, 1e-10).unwrap();
        let miss = missing_info(s.censored(), s.c(), &p, 1e-10).unwrap();
        let obs = observed_info(&s, &p, 1e-10).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(obs.get(i, j), comp.get(i, j) - miss.get(i, j));
            }
        }
        let full = expected_observed_info(30, 30, 1.0, &p, 1e-10).unwrap();
        assert_eq!(full.entries, complete_info(30, &p, 1e-10).unwrap().entries);
        let none = expected_observed_info(30, 0, 1.0, &p, 1e-10).unwrap();
        assert!(none.det() < full.det());
    }

    #[test]
    fn gradient_vanishes_in_theta_at_unit_scale() {
        let g = quantile_gradient(1.0 - (-1.0f64).exp(), &gw(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(g[0], 0.0, epsilon = 1e-14);
        assert!(g[1] > 0.0);
    }

    #[test]
    fn se_scaling() {
        let p = gw(0.632, 8.946);
        let info = InfoMatrix::from_upper(40.0, 3.0, 0.5, InfoKind::Observed);
        let a = quantile_se(&p, 0.9, 25, &info).unwrap();
        let b = quantile_se(&p, 0.9, 100, &info).unwrap();
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-12);
        let c = quantile_se(&p, 0.9, 25, &info.scaled(2.0)).unwrap();
        assert_relative_eq!(a / c, 2f64.sqrt(), max_relative = 1e-12);
        let bad = InfoMatrix::from_upper(1.0, 2.0, 1.0, InfoKind::Observed);
        assert!(matches!(quantile_se(&p, 0.9, 25, &bad), Err(Error::NotPositiveDefinite { .. })));
        assert!(bad.with_jitter(10.0).is_positive_definite());
    }

    #[test]
    fn scheme_info_limits() {
        let p = gw(0.632, 8.946);
        let complete = complete_info(25, &p, 1e-9).unwrap();
        // an unreachable bound and full quota: nothing is ever censored
        let none = scheme_info(&CensoringScheme::type_i(25, 1e6).unwrap(), &p, 1e-9).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(none.get(i, j), complete.get(i, j), max_relative = 1e-9);
            }
        }
        let hybrid = scheme_info(&CensoringScheme::hybrid(25, 15, 7.6).unwrap(), &p, 1e-9).unwrap();
        assert!(hybrid.is_positive_definite());
        assert!(hybrid.det() < complete.det());
    }
}
