use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSelection {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub p: f64,
    /// open interval of admissible `p`; the upper end is infinite when `alpha >= d/2`
    pub p_lower: f64,
    pub p_upper: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// `2 - ((1+mu) theta1 + theta2 + 1/beta)`
    pub slack: f64,
    /// `alpha + (1-mu) beta >= d/2 + 1`, under which `slack >= 0` for every admissible `p`
    pub slack_guaranteed: bool,
}

pub fn theta1(d: usize, alpha: f64, p: f64) -> f64 {
    let d = d as f64;
    (d + 1.0 - 2.0 * alpha - d / p) / (d / 2.0 + 1.0 - alpha)
}

pub fn theta2(d: usize, beta: f64, p: f64) -> f64 {
    d as f64 / (p * beta)
}

/// Margins of `d/2 - d/p < alpha`, `alpha < (d+1)/2 - d/(2p)` and `beta > d/p`; all positive iff admissible.
pub fn gn_pair_margins(d: usize, alpha: f64, beta: f64, p: f64) -> [f64; 3] {
    let d = d as f64;
    [alpha - (d / 2.0 - d / p), (d + 1.0) / 2.0 - d / (2.0 * p) - alpha, beta - d / p]
}

fn check_inputs(d: usize, alpha: f64, beta: f64, mu: f64) -> Result<()> {
    let df = d as f64;
    if d < 2 || ![alpha, beta, mu].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad exponent inputs d={d}, alpha={alpha}, beta={beta}, mu={mu}")));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!("mu must lie in [0, 1], got {mu}")));
    }
    if !(alpha > 0.5 && alpha < (df + 1.0) / 2.0 && beta > 0.0 && alpha + beta > df / 2.0) {
        return Err(Error::Infeasible(format!(
            "need 1/2 < alpha < (d+1)/2, beta > 0, alpha + beta > d/2; got d={d}, alpha={alpha}, beta={beta}"
        )));
    }
    Ok(())
}

/// Admissible `p` interval.
pub fn feasible_interval(d: usize, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    check_inputs(d, alpha, beta, 0.0)?;
    let df = d as f64;
    let lower = 2.0f64.max(df / beta).max(df / (df + 1.0 - 2.0 * alpha));
    let upper = if alpha >= df / 2.0 { f64::INFINITY } else { df / (df / 2.0 - alpha) };
    Ok((lower, upper))
}

/// Exponents at a given `p`, which must be admissible.
pub fn exponents_at(d: usize, alpha: f64, beta: f64, mu: f64, p: f64) -> Result<ExponentSelection> {
    check_inputs(d, alpha, beta, mu)?;
    let (p_lower, p_upper) = feasible_interval(d, alpha, beta)?;
    if !(p > p_lower && p < p_upper && p.is_finite()) {
        return Err(Error::Infeasible(format!("p = {p} outside ({p_lower}, {p_upper})")));
    }
    let (t1, t2) = (theta1(d, alpha, p), theta2(d, beta, p));
    Ok(ExponentSelection {
        d,
        alpha,
        beta,
        mu,
        p,
        p_lower,
        p_upper,
        theta1: t1,
        theta2: t2,
        slack: 2.0 - ((1.0 + mu) * t1 + t2 + 1.0 / beta),
        slack_guaranteed: alpha + (1.0 - mu) * beta >= d as f64 / 2.0 + 1.0,
    })
}

/// Midpoint of the admissible interval, or twice its lower end when it is unbounded.
pub fn exponent_search(d: usize, alpha: f64, beta: f64, mu: f64) -> Result<ExponentSelection> {
    check_inputs(d, alpha, beta, mu)?;
    let (lo, hi) = feasible_interval(d, alpha, beta)?;
    let p = if hi.is_infinite() { 2.0 * lo } else { 0.5 * (lo + hi) };
    exponents_at(d, alpha, beta, mu, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_unit_case() {
        let s = exponents_at(2, 1.0, 1.0, 0.0, 4.0).unwrap();
        assert!((s.theta1 - 0.5).abs() < 1e-15);
        assert!((s.theta2 - 0.5).abs() < 1e-15);
        assert!(s.slack.abs() < 1e-15);
        assert!(s.slack_guaranteed);
        let s = exponent_search(2, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.p, 4.0);
    }

    #[test]
    fn three_dimensional_interval() {
        let (lo, hi) = feasible_interval(3, 1.0, 2.0).unwrap();
        assert_eq!((lo, hi), (2.0, 6.0));
        let s = exponent_search(3, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(s.p, 4.0);
        // (3 + 1 - 2 - 3/4) / (3/2 + 1 - 1)
        assert!((s.theta1 - 1.25 / 1.5).abs() < 1e-15);
        assert!((s.theta2 - 3.0 / 8.0).abs() < 1e-15);
        assert!(s.slack_guaranteed && s.slack >= 0.0);
    }

    #[test]
    fn large_p_branch() {
        let s = exponent_search(2, 1.2, 0.5, 0.0).unwrap();
        assert!(s.p_upper.is_infinite() && s.p.is_finite());
        assert!(s.beta > 2.0 / s.p);
        assert!(gn_pair_margins(2, 1.2, 0.5, s.p).iter().all(|&m| m > 0.0));
    }

    #[test]
    fn outside_interval_refused() {
        assert!(exponents_at(3, 1.0, 2.0, 0.0, 6.0).is_err());
        assert!(exponents_at(3, 1.0, 2.0, 0.0, 2.0).is_err());
        assert!(exponent_search(2, 0.5, 1.0, 0.0).is_err());
        assert!(exponent_search(2, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn mu_branch_has_slack() {
        // alpha < 1 with mu = (1 - alpha)/beta
        let (d, alpha, beta) = (2, 0.9, 2.5);
        let mu = (1.0 - alpha) / beta;
        let s = exponent_search(d, alpha, beta, mu).unwrap();
        assert!(s.slack_guaranteed);
        assert!(s.slack >= 0.0);
    }
}
