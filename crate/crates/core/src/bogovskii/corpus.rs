use serde::Serialize;

use super::{bogovskii_B, fd_divergence, mean_corrected, AxisWeights, BoxFunction, BoxGrid, ORDER};
use crate::error::Result;

/// A named smooth test function supported well inside `[-4, 4]^d`.
#[derive(Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub d: usize,
    pub f: fn(&[f64; 3]) -> f64,
}

/// `exp(2/(t^2 - 1))` on `(-1, 1)`; flatter at the edges than the weight bump.
pub fn corpus_bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (2.0 / (t * t - 1.0)).exp()
    } else {
        0.0
    }
}

fn radius(x: &[f64; 3], c: [f64; 3]) -> f64 {
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt()
}

fn radial_derivative_x1(x: &[f64; 3]) -> f64 {
    let s = (x[0] * x[0] + x[1] * x[1]) / 9.0;
    if s >= 1.0 {
        return 0.0;
    }
    corpus_bump(s.sqrt()) * (-2.0 / (s - 1.0).powi(2)) * 2.0 * x[0] / 9.0
}

pub fn smooth_corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry { name: "radial", d: 2, f: |x| corpus_bump(radius(x, [0.0; 3]) / 3.0) },
        CorpusEntry { name: "shifted", d: 2, f: |x| corpus_bump(radius(x, [0.4, -0.3, 0.0]) / 2.5) },
        CorpusEntry { name: "odd", d: 2, f: |x| x[0] * corpus_bump(radius(x, [0.0; 3]) / 3.0) },
        CorpusEntry { name: "oscillating", d: 2, f: |x| (1.5 * x[0]).cos() * corpus_bump(radius(x, [0.0; 3]) / 3.2) },
        CorpusEntry { name: "tensor", d: 2, f: |x| corpus_bump(x[0] / 3.0) * corpus_bump((x[1] - 0.2) / 2.7) },
        CorpusEntry { name: "derivative", d: 2, f: radial_derivative_x1 },
        CorpusEntry {
            name: "two-bumps",
            d: 2,
            f: |x| corpus_bump(radius(x, [0.5, 0.5, 0.0]) / 2.5) - 0.5 * corpus_bump(radius(x, [-0.5, 0.0, 0.0]) / 2.8),
        },
        CorpusEntry { name: "radial-3d", d: 3, f: |x| corpus_bump(radius(x, [0.0; 3]) / 3.0) },
        CorpusEntry { name: "quadrupole-3d", d: 3, f: |x| x[0] * x[1] * corpus_bump(radius(x, [0.0; 3]) / 3.0) },
        CorpusEntry { name: "wave-3d", d: 3, f: |x| x[2].cos() * corpus_bump(radius(x, [0.2, -0.1, 0.3]) / 2.8) },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BogovskiiReport {
    pub name: String,
    pub d: usize,
    pub n: usize,
    pub integral: f64,
    /// `max |div B(g) - (g - phi int g)|`
    pub max_error: f64,
    /// largest component value on the outer boundary layer, relative to the largest value
    pub boundary_ratio: f64,
    pub sup_b: f64,
    /// `max (1 + |x|^2) (|g| + |grad g|)`
    pub seminorm: f64,
    pub continuity_ratio: f64,
}

pub fn bogovskii_check(name: &str, g: &BoxFunction, weights: &AxisWeights) -> Result<BogovskiiReport> {
    let grid = *g.grid();
    let rule = grid.rule();
    let b = bogovskii_B(g, weights)?;
    let target = mean_corrected(g, weights)?;
    let max_error = fd_divergence(&b)?.sub(&target)?.max_abs();
    let sup_b = b.iter().map(BoxFunction::max_abs).fold(0.0, f64::max);
    let edge = b.iter().map(|c| c.boundary_max(ORDER)).fold(0.0, f64::max);
    let grads: Vec<BoxFunction> = (0..grid.d).map(|ax| g.derivative(ax, &rule)).collect();
    let seminorm = (0..grid.len())
        .map(|p| {
            let x = grid.point(p);
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let grad: f64 = grads.iter().map(|c| c.values()[p].abs()).sum();
            (1.0 + r2) * (g.values()[p].abs() + grad)
        })
        .fold(0.0, f64::max);
    Ok(BogovskiiReport {
        name: name.to_string(),
        d: grid.d,
        n: grid.n,
        integral: g.integral(&rule),
        max_error,
        boundary_ratio: if sup_b > 0.0 { edge / sup_b } else { 0.0 },
        sup_b,
        seminorm,
        continuity_ratio: if seminorm > 0.0 { sup_b / seminorm } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub n: usize,
    pub a: f64,
    pub weight_half_width: f64,
    pub entries: Vec<BogovskiiReport>,
    pub max_error: f64,
    /// largest over smallest continuity ratio
    pub continuity_spread: f64,
}

pub fn corpus_check(n: usize, a: f64, weight_half_width: f64) -> Result<CorpusReport> {
    let mut entries = Vec::new();
    for e in smooth_corpus() {
        let grid = BoxGrid::new(e.d, n, a)?;
        let w = AxisWeights::bump(&grid, weight_half_width)?;
        entries.push(bogovskii_check(e.name, &BoxFunction::from_fn(grid, e.f), &w)?);
    }
    let max_error = entries.iter().map(|e| e.max_error).fold(0.0, f64::max);
    let ratios = entries.iter().map(|e| e.continuity_ratio);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(CorpusReport { n, a, weight_half_width, entries, max_error, continuity_spread: hi / lo })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementOrder {
    pub name: String,
    pub coarse_error: f64,
    pub fine_error: f64,
    /// `log(e_coarse / e_fine) / log(h_coarse / h_fine)`
    pub order: f64,
}

/// Observed convergence order of each corpus entry between `n_coarse` and `n_fine` samples.
pub fn refinement_orders(n_coarse: usize, n_fine: usize, a: f64, weight_half_width: f64) -> Result<Vec<RefinementOrder>> {
    let coarse = corpus_check(n_coarse, a, weight_half_width)?;
    let fine = corpus_check(n_fine, a, weight_half_width)?;
    let ratio = (n_fine - 1) as f64 / (n_coarse - 1) as f64;
    Ok(coarse
        .entries
        .iter()
        .zip(&fine.entries)
        .map(|(c, f)| RefinementOrder {
            name: c.name.clone(),
            coarse_error: c.max_error,
            fine_error: f.max_error,
            order: (c.max_error / f.max_error).ln() / ratio.ln(),
        })
        .collect())
}
