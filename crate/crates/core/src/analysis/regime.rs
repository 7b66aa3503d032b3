use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RemarkCase {
    A,
    B,
    C,
}

/// What a special case predicts, to be compared with the general classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemarkMatch {
    pub case: RemarkCase,
    pub existence: bool,
    pub uniqueness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeMargins {
    /// `alpha - 1/2`
    pub alpha_lower: f64,
    /// `(d+1)/2 - alpha`
    pub alpha_upper: f64,
    /// `min{alpha+beta, 2 alpha+beta-1} - d/2`
    pub existence: f64,
    /// `beta - 1`
    pub beta_unit: f64,
    /// `min{alpha+beta, 2 alpha+beta-1} - d/2 - 1`
    pub uniqueness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
    pub existence: bool,
    pub uniqueness: bool,
    pub margins: RegimeMargins,
    pub remarks: Vec<RemarkMatch>,
    /// every matched special case agrees with the general classification
    pub remarks_consistent: bool,
}

fn remark_a(d: f64, alpha: f64, beta: f64) -> Option<RemarkMatch> {
    (alpha == 1.0).then(|| RemarkMatch {
        case: RemarkCase::A,
        existence: beta > d / 2.0 - 1.0,
        uniqueness: beta > d / 2.0 - 1.0 && beta >= d / 2.0,
    })
}

fn remark_b(d: f64, alpha: f64, beta: f64) -> Option<RemarkMatch> {
    (beta == 1.0).then(|| {
        let lower = 0.5f64.max(d / 2.0 - 1.0).max(d / 4.0);
        let existence = lower < alpha && alpha < (d + 1.0) / 2.0;
        RemarkMatch { case: RemarkCase::B, existence, uniqueness: existence && alpha >= d / 2.0 }
    })
}

fn remark_c(d: f64, alpha: f64, beta: f64) -> Option<RemarkMatch> {
    (alpha == beta && (2.0..=4.0).contains(&d)).then(|| {
        let existence = (d + 2.0) / 6.0 < alpha && alpha < (d + 1.0) / 2.0;
        RemarkMatch { case: RemarkCase::C, existence, uniqueness: existence && alpha >= (d + 2.0) / 4.0 }
    })
}

pub fn classify_regime(d: usize, alpha: f64, beta: f64) -> Result<RegimeReport> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha, beta must be positive, got ({alpha}, {beta})")));
    }
    let df = d as f64;
    let m = (alpha + beta).min(2.0 * alpha + beta - 1.0);
    let margins = RegimeMargins {
        alpha_lower: alpha - 0.5,
        alpha_upper: (df + 1.0) / 2.0 - alpha,
        existence: m - df / 2.0,
        beta_unit: beta - 1.0,
        uniqueness: m - df / 2.0 - 1.0,
    };
    let existence = margins.alpha_lower > 0.0 && margins.alpha_upper > 0.0 && margins.existence > 0.0;
    let uniqueness = existence && margins.beta_unit >= 0.0 && margins.uniqueness >= 0.0;
    let remarks: Vec<RemarkMatch> =
        [remark_a(df, alpha, beta), remark_b(df, alpha, beta), remark_c(df, alpha, beta)]
            .into_iter()
            .flatten()
            .collect();
    let remarks_consistent = remarks.iter().all(|r| r.existence == existence && r.uniqueness == uniqueness);
    assert!(!uniqueness || existence);
    Ok(RegimeReport { d, alpha, beta, existence, uniqueness, margins, remarks, remarks_consistent })
}
