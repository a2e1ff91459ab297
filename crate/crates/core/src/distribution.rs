//! Generalized (exponentiated) Weibull distribution with unit scale.
//!
//! `F(x) = (1 - exp(-x^θ))^α` for `x > 0`. All evaluations go through
//! `v = x^θ` and use `expm1`/`ln_1p` so that the upper tail and large `α`
//! keep full precision.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape pair `(θ, α)`; the scale is fixed at one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwParams {
    theta: f64,
    alpha: f64,
}

impl GwParams {
    pub fn new(theta: f64, alpha: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must be positive and finite",
            });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be positive and finite",
            });
        }
        Ok(Self { theta, alpha })
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Parameters shifted by `(dθ, dα)`.
    pub fn shifted(&self, delta_theta: f64, delta_alpha: f64) -> Result<Self> {
        Self::new(self.theta + delta_theta, self.alpha + delta_alpha)
    }

    /// Weibull with shape `θ` (α = 1).
    pub fn weibull(theta: f64) -> Result<Self> {
        Self::new(theta, 1.0)
    }

    /// Generalized exponential (θ = 1).
    pub fn generalized_exponential(alpha: f64) -> Result<Self> {
        Self::new(1.0, alpha)
    }

    /// Burr type X (θ = 2).
    pub fn burr_x(alpha: f64) -> Result<Self> {
        Self::new(2.0, alpha)
    }

    /// Rayleigh (θ = 2, α = 1).
    pub fn rayleigh() -> Self {
        Self {
            theta: 2.0,
            alpha: 1.0,
        }
    }
}

/// Shape of the hazard function over `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HazardShape {
    Bathtub,
    Unimodal,
    Increasing,
    Decreasing,
    /// `α = 1` or `αθ = 1`, where the region rule does not assign a label.
    Boundary,
}

fn check_x(op: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { op, value: x })
    }
}

/// `ln(1 - exp(-v))` for `v > 0`.
#[inline]
pub(crate) fn ln_one_minus_exp_neg(v: f64) -> f64 {
    if v > std::f64::consts::LN_2 {
        (-(-v).exp()).ln_1p()
    } else {
        (-(-v).exp_m1()).ln()
    }
}

/// Log-density without argument checks.
#[inline]
pub(crate) fn ln_pdf_unchecked(x: f64, params: &GwParams) -> f64 {
    let (theta, alpha) = (params.theta, params.alpha);
    let lx = x.ln();
    let v = (theta * lx).exp();
    alpha.ln() + theta.ln() + (theta - 1.0) * lx - v + (alpha - 1.0) * ln_one_minus_exp_neg(v)
}

/// Log-survival `ln(1 - F(x))` without argument checks.
#[inline]
pub(crate) fn ln_sf_unchecked(x: f64, params: &GwParams) -> f64 {
    let v = x.powf(params.theta);
    let ln_cdf = params.alpha * ln_one_minus_exp_neg(v);
    // ln(1 - e^{ln_cdf})
    if ln_cdf > -std::f64::consts::LN_2 {
        (-ln_cdf.exp_m1()).ln()
    } else {
        (-ln_cdf.exp()).ln_1p()
    }
}

/// Point `y` with `ln F(y) = ln_p`.
#[inline]
pub(crate) fn point_from_ln_cdf(ln_p: f64, params: &GwParams) -> f64 {
    // (1 - e^{-v})^α = p  =>  v = -ln(1 - p^{1/α})
    let lw = ln_p / params.alpha;
    let v = if lw < -std::f64::consts::LN_2 {
        -(-lw.exp()).ln_1p()
    } else {
        -(-lw.exp_m1()).ln()
    };
    v.powf(1.0 / params.theta)
}

#[inline]
pub(crate) fn quantile_unchecked(p: f64, params: &GwParams) -> f64 {
    point_from_ln_cdf(p.ln(), params)
}

/// Truncation point `c` of the conditional law `Y | Y > c`, with `F(c)` and
/// `1 - F(c)` held separately so that nodes near either end stay accurate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Truncation {
    cdf: f64,
    sf: f64,
}

impl Truncation {
    /// The untruncated law.
    pub(crate) fn none() -> Self {
        Self { cdf: 0.0, sf: 1.0 }
    }

    pub(crate) fn new(c: f64, params: &GwParams) -> Self {
        let ln_sf = ln_sf_unchecked(c, params);
        let cdf = (params.alpha * ln_one_minus_exp_neg(c.powf(params.theta))).exp();
        Self { cdf, sf: ln_sf.exp() }
    }

    pub(crate) fn sf(&self) -> f64 {
        self.sf
    }

    /// Point at conditional probability `u` (with `u_c = 1 - u`).
    #[inline]
    pub(crate) fn point(&self, u: f64, u_c: f64, params: &GwParams) -> f64 {
        let s = self.sf * u_c;
        if s < 0.5 {
            point_from_ln_cdf((-s).ln_1p(), params)
        } else {
            point_from_ln_cdf((self.cdf + self.sf * u).ln(), params)
        }
    }
}

pub fn pdf(x: f64, params: &GwParams) -> Result<f64> {
    check_x("pdf", x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(ln_pdf_unchecked(x, params).exp())
}

pub fn ln_pdf(x: f64, params: &GwParams) -> Result<f64> {
    check_x("ln_pdf", x)?;
    Ok(ln_pdf_unchecked(x, params))
}

pub fn cdf(x: f64, params: &GwParams) -> Result<f64> {
    check_x("cdf", x)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    let v = x.powf(params.theta);
    Ok((params.alpha * ln_one_minus_exp_neg(v)).exp())
}

/// Survival function `1 - F(x)`, accurate in the upper tail.
pub fn sf(x: f64, params: &GwParams) -> Result<f64> {
    check_x("sf", x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(ln_sf_unchecked(x, params).exp())
}

/// Hazard rate `f(x) / (1 - F(x))`.
pub fn hazard(x: f64, params: &GwParams) -> Result<f64> {
    check_x("hazard", x)?;
    Ok((ln_pdf_unchecked(x, params) - ln_sf_unchecked(x, params)).exp())
}

/// `p`-th quantile `[ln(1 / (1 - p^{1/α}))]^{1/θ}`.
pub fn quantile(p: f64, params: &GwParams) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            op: "quantile",
            value: p,
        });
    }
    Ok(quantile_unchecked(p, params))
}

/// `n` draws by inverse-cdf sampling, returned as ascending order statistics.
pub fn sample<R: Rng + ?Sized>(params: &GwParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidSample("sample size must be at least 1".into()));
    }
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            quantile_unchecked(u, params)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub fn classify_hazard(params: &GwParams) -> HazardShape {
    let alpha = params.alpha;
    let product = params.alpha * params.theta;
    if alpha > 1.0 && product < 1.0 {
        HazardShape::Bathtub
    } else if alpha < 1.0 && product > 1.0 {
        HazardShape::Unimodal
    } else if alpha > 1.0 && product > 1.0 {
        HazardShape::Increasing
    } else if alpha < 1.0 && product < 1.0 {
        HazardShape::Decreasing
    } else {
        HazardShape::Boundary
    }
}
