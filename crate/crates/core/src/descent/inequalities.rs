//! Scalar inequalities behind the orthogonality branch of the descent.

use serde::Serialize;

use crate::error::{Error, Result};

pub const GROWTH_GRID_NODES: usize = 10_000;
pub const GROWTH_GRID_MAX: f64 = 1e4;
const GROWTH_GRID_MIN: f64 = 1e-6;
const GROWTH_SCAN_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60

#[derive(Debug, Clone, Serialize)]
pub struct GrowthInequalityReport {
    pub c: f64,
    pub p: f64,
    pub alpha: f64,
    /// Smallest value of `f(t)/t^{2p}` over the positive grid nodes.
    pub min_scaled: f64,
    /// `f(0) = c^{2p}`.
    pub at_zero: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthWitness {
    pub c: f64,
    pub p: f64,
    pub alpha: f64,
    pub t_star: f64,
    /// `α t^{p-2} − 2 − t^{-p}` at `t_star`; positive.
    pub margin: f64,
}

fn check_args(c: f64, p: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be positive and finite, got {c}")));
    }
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::invalid(
            "p",
            format!("must be finite and greater than 2, got {p}"),
        ));
    }
    Ok(())
}

/// `α = p c² / (2(p − 1))`, half the largest admissible constant.
pub fn growth_constant(c: f64, p: f64) -> f64 {
    p * c * c / (2.0 * (p - 1.0))
}

/// Checks `f(t) = (t² + c²)^p − t^{2p} − α t^{2p−2} ≥ 0` at `t = 0` and on a
/// log-spaced grid of `(0, 10⁴]`. Positive nodes are evaluated as
/// `f(t)/t^{2p} = expm1(p ln1p(c²/t²)) − α/t²`, which stays accurate where the
/// three terms nearly cancel.
pub fn growth_inequality_check(c: f64, p: f64) -> Result<GrowthInequalityReport> {
    check_args(c, p)?;
    let alpha = growth_constant(c, p);
    let at_zero = c.powf(2.0 * p);
    let span = (GROWTH_GRID_MAX / GROWTH_GRID_MIN).ln();
    let mut min_scaled = f64::INFINITY;
    for k in 0..GROWTH_GRID_NODES - 1 {
        let t = GROWTH_GRID_MIN * (span * k as f64 / (GROWTH_GRID_NODES - 2) as f64).exp();
        let u = (c / t) * (c / t);
        let scaled = (p * u.ln_1p()).exp_m1() - alpha / (t * t);
        min_scaled = min_scaled.min(scaled);
    }
    if !(at_zero > 0.0) || min_scaled < 0.0 {
        return Err(Error::Internal(format!(
            "inequality violated for c = {c}, p = {p}: f(0) = {at_zero}, min f(t)/t^(2p) = {min_scaled}"
        )));
    }
    Ok(GrowthInequalityReport {
        c,
        p,
        alpha,
        min_scaled,
        at_zero,
        nodes: GROWTH_GRID_NODES,
    })
}

/// Smallest power of two `t ≥ 1` with `α t^{p−2} > 2 + t^{−p}`, i.e. with
/// `(t^p + 1)² < t^{2p} + α t^{2p−2}`.
pub fn growth_witness(c: f64, p: f64) -> Result<GrowthWitness> {
    check_args(c, p)?;
    let alpha = growth_constant(c, p);
    let mut t = 1.0_f64;
    while t <= GROWTH_SCAN_CAP {
        let margin = alpha * t.powf(p - 2.0) - 2.0 - t.powf(-p);
        if margin > 0.0 {
            return Ok(GrowthWitness {
                c,
                p,
                alpha,
                t_star: t,
                margin,
            });
        }
        t *= 2.0;
    }
    Err(Error::Internal(format!("no witness below 2^60 for c = {c}, p = {p}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((growth_constant(0.5, 3.0) - 0.1875).abs() < 1e-15);
        assert!((growth_constant(1.0, 4.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_checks_pass() {
        let r = growth_inequality_check(0.5, 3.0).unwrap();
        assert!(r.min_scaled >= 0.0);
        assert!((r.at_zero - 0.5f64.powi(6)).abs() < 1e-18);
        assert!(growth_inequality_check(1.0, 4.0).is_ok());
    }

    #[test]
    fn scaled_form_matches_direct_evaluation() {
        let (c, p) = (0.7, 3.5);
        let alpha = growth_constant(c, p);
        for t in [0.3, 1.0, 2.5] {
            let direct = (t * t + c * c).powf(p) - t.powf(2.0 * p) - alpha * t.powf(2.0 * p - 2.0);
            let u: f64 = (c / t) * (c / t);
            let scaled = ((p * u.ln_1p()).exp_m1() - alpha / (t * t)) * t.powf(2.0 * p);
            assert!((direct - scaled).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn growth_witnesses() {
        assert_eq!(growth_witness(0.5, 3.0).unwrap().t_star, 16.0);
        assert_eq!(growth_witness(1.0, 4.0).unwrap().t_star, 2.0);
    }

    #[test]
    fn bad_arguments() {
        assert!(growth_inequality_check(0.0, 3.0).is_err());
        assert!(growth_inequality_check(1.0, 2.0).is_err());
        assert!(growth_witness(-1.0, 3.0).is_err());
    }
}
