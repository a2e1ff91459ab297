//! Type-I hybrid censoring of an ordered life test and its Type-I / Type-II
//! special cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensoringKind {
    Hybrid,
    /// Time bound only (`r = n`).
    #[serde(rename = "type1")]
    TypeI,
    /// Failure quota only (`x0 = ∞`).
    #[serde(rename = "type2")]
    TypeII,
}

/// Life-test plan: `n` units, stop at `min(X_{r:n}, x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoringScheme {
    pub n: usize,
    pub r: usize,
    #[serde(with = "crate::serde_inf")]
    pub x0: f64,
    pub kind: CensoringKind,
}

impl CensoringScheme {
    pub fn hybrid(n: usize, r: usize, x0: f64) -> Result<Self> {
        let s = Self {
            n,
            r,
            x0,
            kind: CensoringKind::Hybrid,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn type_i(n: usize, x0: f64) -> Result<Self> {
        let s = Self {
            n,
            r: n,
            x0,
            kind: CensoringKind::TypeI,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn type_ii(n: usize, r: usize) -> Result<Self> {
        let s = Self {
            n,
            r,
            x0: f64::INFINITY,
            kind: CensoringKind::TypeII,
        };
        s.validate()?;
        Ok(s)
    }

    /// No censoring at all: a Type-II plan with `r = n`.
    pub fn complete(n: usize) -> Result<Self> {
        Self::type_ii(n, n)
    }

    /// The same plan applied to a test of a different size. The failure
    /// quota keeps its fraction of `n` (rounded) for hybrid and Type-II
    /// plans and tracks `n` for Type-I plans.
    pub fn with_size(&self, n: usize) -> Result<Self> {
        match self.kind {
            CensoringKind::TypeI => Self::type_i(n, self.x0),
            _ => {
                let r = ((self.r as f64) * (n as f64) / (self.n as f64)).round() as usize;
                let r = r.clamp(1, n);
                match self.kind {
                    CensoringKind::Hybrid => Self::hybrid(n, r, self.x0),
                    _ => Self::type_ii(n, r),
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.r == 0 || self.r > self.n {
            return Err(Error::InvalidParameter {
                name: "r",
                value: self.r as f64,
                reason: "must lie in 1..=n",
            });
        }
        if !(self.x0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "x0",
                value: self.x0,
                reason: "must be positive",
            });
        }
        match self.kind {
            CensoringKind::TypeI if self.r != self.n => Err(Error::InvalidParameter {
                name: "r",
                value: self.r as f64,
                reason: "Type-I censoring requires r = n",
            }),
            CensoringKind::TypeII if self.x0.is_finite() => Err(Error::InvalidParameter {
                name: "x0",
                value: self.x0,
                reason: "Type-II censoring requires an infinite time bound",
            }),
            _ => Ok(()),
        }
    }
}

/// Observed part of a hybrid-censored life test.
///
/// Case I (`d = r`): the quota was reached first and `c = x_{r:n}`.
/// Case II (`d < r`): the time bound was reached first and `c = x0`.
/// The `n - d` unobserved units are right-censored at `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridCensoredSample {
    observed: Vec<f64>,
    c: f64,
    scheme: CensoringScheme,
}

impl HybridCensoredSample {
    /// Builds a sample from already-censored data, checking the invariants.
    pub fn from_parts(observed: Vec<f64>, c: f64, scheme: CensoringScheme) -> Result<Self> {
        scheme.validate()?;
        let d = observed.len();
        if d > scheme.r {
            return Err(Error::InvalidSample(format!(
                "{d} observed failures exceed the quota r = {}",
                scheme.r
            )));
        }
        if observed.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidSample("lifetimes must be positive and finite".into()));
        }
        if !observed.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::InvalidSample("observed values must be ascending".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidSample(format!("censoring threshold {c} must be positive and finite")));
        }
        if d == scheme.r {
            if observed.last() != Some(&c) {
                return Err(Error::InvalidSample(
                    "Case I requires c to equal the r-th failure time".into(),
                ));
            }
            if c >= scheme.x0 {
                return Err(Error::InvalidSample("Case I requires x_{r:n} < x0".into()));
            }
        } else {
            if c != scheme.x0 {
                return Err(Error::InvalidSample("Case II requires c = x0".into()));
            }
            if observed.iter().any(|&x| x >= c) {
                return Err(Error::InvalidSample("Case II failures must precede x0".into()));
            }
        }
        Ok(Self {
            observed,
            c,
            scheme,
        })
    }

    /// Uncensored sample (`d = n`), with `c` set to the largest value.
    pub fn complete(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        let scheme = CensoringScheme::complete(values.len())?;
        censor(&values, &scheme)
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn d(&self) -> usize {
        self.observed.len()
    }

    pub fn n(&self) -> usize {
        self.scheme.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn censored(&self) -> usize {
        self.scheme.n - self.observed.len()
    }

    pub fn scheme(&self) -> &CensoringScheme {
        &self.scheme
    }

    pub fn is_case_one(&self) -> bool {
        self.d() == self.scheme.r
    }
}

/// Censors a complete ascending sample of size `scheme.n`.
///
/// A value equal to `x0` counts as censored.
pub fn censor(complete: &[f64], scheme: &CensoringScheme) -> Result<HybridCensoredSample> {
    scheme.validate()?;
    if complete.len() != scheme.n {
        return Err(Error::InvalidSample(format!(
            "sample has {} values but the scheme expects n = {}",
            complete.len(),
            scheme.n
        )));
    }
    if !complete.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::InvalidSample("complete sample must be sorted ascending".into()));
    }
    if complete.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidSample("lifetimes must be positive and finite".into()));
    }
    let xr = complete[scheme.r - 1];
    let (observed, c) = if xr < scheme.x0 {
        (complete[..scheme.r].to_vec(), xr)
    } else {
        let d = complete.partition_point(|&x| x < scheme.x0);
        (complete[..d].to_vec(), scheme.x0)
    };
    Ok(HybridCensoredSample {
        observed,
        c,
        scheme: *scheme,
    })
}

/// `(d, c)` as used by the observed-data log-likelihood.
pub fn effective_threshold(sample: &HybridCensoredSample) -> (usize, f64) {
    (sample.d(), sample.c)
}
