//! Double-exponential (tanh-sinh) quadrature on the open unit interval.
//!
//! Integrands receive both `u` and `1 - u` so that the upper end can be
//! resolved without cancellation; conditional expectations are written as
//! integrals over the conditional probability scale, where the endpoint
//! behaviour is at worst a logarithmic singularity.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Nodes are laid out on `t ∈ [-T_MAX, T_MAX]`; at the ends the weights are
/// below 1e-20 and `min(u, 1 - u)` is about 1e-23.
const T_MAX: f64 = 3.5;
/// Coarsest step.
const H0: f64 = 0.5;
const MAX_LEVEL: usize = 7;

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub u: f64,
    /// `1 - u`, computed directly.
    pub u_c: f64,
    pub weight: f64,
}

#[inline]
fn node_at(t: f64, h: f64) -> Node {
    let s = FRAC_PI_2 * t.sinh();
    let e = (2.0 * s).exp();
    let cosh_s = s.cosh();
    Node {
        u: e / (1.0 + e),
        u_c: 1.0 / (1.0 + e),
        weight: h * 0.5 * FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s),
    }
}

/// A fixed tanh-sinh rule; `level` halves the step `level` times from 1/2.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<Node>,
    level: usize,
}

impl Rule {
    pub fn new(level: usize) -> Self {
        let h = H0 / (1u64 << level) as f64;
        let n = (T_MAX / h).ceil() as i64;
        let nodes = (-n..=n).map(|k| node_at(k as f64 * h, h)).collect();
        Self { nodes, level }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n.u, n.u_c)).sum()
    }
}

/// Adaptive integration of `f(u, 1 - u)` over `(0, 1)`, refining the step
/// until successive estimates agree to `tol` (absolute, or relative when
/// the integral exceeds one in magnitude).
pub fn integrate_unit<F: FnMut(f64, f64) -> f64>(mut f: F, tol: f64) -> Result<f64> {
    integrate_unit_with_level(&mut f, tol).map(|(v, _)| v)
}

/// As [`integrate_unit`], also returning the level at which it converged.
pub fn integrate_unit_with_level<F: FnMut(f64, f64) -> f64>(
    f: &mut F,
    tol: f64,
) -> Result<(f64, usize)> {
    let mut h = H0;
    let n0 = (T_MAX / h).ceil() as i64;
    let mut sum: f64 = (-n0..=n0)
        .map(|k| {
            let nd = node_at(k as f64 * h, 1.0);
            nd.weight * f(nd.u, nd.u_c)
        })
        .sum();
    let mut estimate = h * sum;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let n = (T_MAX / h).ceil() as i64;
        // only odd multiples of the new step are new
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            let nd = node_at(k as f64 * h, 1.0);
            sum += nd.weight * f(nd.u, nd.u_c);
            k += 2;
        }
        let next = h * sum;
        if !next.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if level >= 2 && (next - estimate).abs() <= tol * next.abs().max(1.0) {
            return Ok((next, level));
        }
        estimate = next;
    }
    Err(Error::Numerical(format!(
        "quadrature did not reach tolerance {tol} (last estimate {estimate})"
    )))
}

/// Level of a fixed rule expected to deliver roughly `tol`.
pub fn level_for_tolerance(tol: f64) -> usize {
    if tol >= 1e-5 {
        2
    } else if tol >= 1e-9 {
        3
    } else if tol >= 1e-12 {
        4
    } else {
        5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial() {
        let v = integrate_unit(|u, _| 3.0 * u * u, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn log_singularities_at_both_ends() {
        assert_abs_diff_eq!(integrate_unit(|u, _| u.ln(), 1e-12).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(integrate_unit(|_, uc| uc.ln(), 1e-12).unwrap(), -1.0, epsilon = 1e-12);
        // ∫ ln(-ln u) du = -γ
        assert_abs_diff_eq!(
            integrate_unit(|u, uc| (if u < 0.5 { -u.ln() } else { -(-uc).ln_1p() }).ln(), 1e-12).unwrap(),
            -0.577_215_664_901_532_9,
            epsilon = 1e-11
        );
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let v = integrate_unit(|u, _| 0.5 / u.sqrt(), 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn fixed_rule_matches_adaptive() {
        let r = Rule::new(4);
        let v = r.integrate(|u, uc| u.ln() * uc.ln());
        // ∫ ln u ln(1-u) du = 2 - π²/6
        assert_abs_diff_eq!(v, 2.0 - std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-12);
        assert!(r.nodes().iter().all(|n| n.u > 0.0 && n.u_c > 0.0));
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate_unit(|_, _| f64::NAN, 1e-8).is_err());
    }
}
