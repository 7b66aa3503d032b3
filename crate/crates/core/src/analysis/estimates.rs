use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::exponents::{gn_pair_margins, ExponentSelection};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::norms::{lebesgue_norm_of, sobolev_norm, Rearrangement};
use crate::ops::{fractional_laplacian, grid_product, ZeroModePolicy};
use crate::random::{random_field_with, rng};

/// Allowed growth of the largest ratio when the resolution doubles.
pub const STABILITY_FACTOR: f64 = 2.0;

const RELATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub inequality: String,
    pub parameters: BTreeMap<String, f64>,
    pub m: usize,
    pub trials: usize,
    pub skipped: usize,
    /// LHS / RHS per trial; `None` for degenerate trials
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    pub coarse: InequalityReport,
    pub fine: InequalityReport,
    pub growth: f64,
    pub stable: bool,
}

/// Runs `check` at `M` and `2M` and compares the largest ratios.
pub fn refinement_check(
    grid: GridSpec,
    check: impl Fn(GridSpec) -> Result<InequalityReport>,
) -> Result<RefinementReport> {
    let coarse = check(grid)?;
    let fine = check(GridSpec::new(grid.d, 2 * grid.m, grid.l)?)?;
    let growth = fine.max_ratio / coarse.max_ratio;
    Ok(RefinementReport { stable: growth < STABILITY_FACTOR, coarse, fine, growth })
}

/// Infinity-norm band of trial fields; products of two such fields stay alias free.
pub fn trial_band(grid: &GridSpec) -> usize {
    (grid.m / 4).saturating_sub(1).max(1)
}

/// Zero-mean, unit-norm random field; `sigma` alternates between 1 and 2 with the trial index.
fn trial_field(grid: GridSpec, trial: usize, r: &mut ChaCha8Rng) -> SpectralField {
    let sigma = if trial % 2 == 0 { 1.0 } else { 2.0 };
    let f = random_field_with(grid, 1, sigma, trial_band(&grid), r);
    let n = f.norm();
    if n > 0.0 {
        f.scaled(1.0 / n)
    } else {
        f
    }
}

fn run_trials(
    name: &str,
    params: &[(&str, f64)],
    grid: GridSpec,
    trials: usize,
    seed: u64,
    ratio: impl Fn(usize, &mut ChaCha8Rng) -> Result<Option<f64>> + Sync,
) -> Result<InequalityReport> {
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64));
            ratio(t, &mut r)
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    let max_ratio = ratios.iter().flatten().fold(0.0, |a: f64, &b| a.max(b));
    Ok(InequalityReport {
        inequality: name.to_string(),
        parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        m: grid.m,
        trials,
        skipped,
        ratios,
        max_ratio,
    })
}

fn samples(f: &SpectralField) -> Vec<f64> {
    f.to_samples()[..f.grid().len()].to_vec()
}

fn lp(values: &[f64], grid: &GridSpec, p: f64) -> Result<f64> {
    lebesgue_norm_of(values, grid.cell_volume(), p)
}

fn scalar_pair(f: &SpectralField, g: &SpectralField) -> Result<()> {
    if f.ncomp() != 1 || g.ncomp() != 1 {
        return Err(Error::ComponentMismatch { expected: 1, got: f.ncomp().max(g.ncomp()) });
    }
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `||f g||_2 / (||f||_{q,inf}^{1-t1} ||f||_{H^alpha}^{t1} ||g||_2^{1-t2} ||g||_{H^beta}^{t2})`
/// with `q = d/(d+1-2 alpha)`; `None` when either side vanishes.
pub fn product_ratio(f: &SpectralField, g: &SpectralField, sel: &ExponentSelection) -> Result<Option<f64>> {
    scalar_pair(f, g)?;
    let grid = *f.grid();
    let (fs, gs) = (samples(f), samples(g));
    let fg: Vec<f64> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
    let lhs = lp(&fg, &grid, 2.0)?;
    let d = grid.d as f64;
    let q = d / (d + 1.0 - 2.0 * sel.alpha);
    let weak = Rearrangement::new(&fs, grid.cell_volume()).weak_quasinorm(q);
    let rhs = weak.powf(1.0 - sel.theta1)
        * sobolev_norm(f, sel.alpha, true)?.powf(sel.theta1)
        * g.norm().powf(1.0 - sel.theta2)
        * sobolev_norm(g, sel.beta, true)?.powf(sel.theta2);
    Ok((lhs > 0.0 && rhs > 0.0).then(|| lhs / rhs))
}

pub fn product_estimate_check(
    selection: &ExponentSelection,
    trials: usize,
    grid: GridSpec,
    seed: u64,
) -> Result<InequalityReport> {
    if grid.d != selection.d {
        return Err(Error::DimensionMismatch { expected: selection.d, got: grid.d });
    }
    let s = selection;
    if gn_pair_margins(s.d, s.alpha, s.beta, s.p).iter().any(|&m| m <= 0.0) {
        return Err(Error::IndexRelation(format!("p = {} is not admissible", s.p)));
    }
    let params = [("alpha", s.alpha), ("beta", s.beta), ("p", s.p), ("theta1", s.theta1), ("theta2", s.theta2)];
    run_trials("product", &params, grid, trials, seed, |t, r| {
        let f = trial_field(grid, t, r);
        let g = trial_field(grid, t + 1, r);
        product_ratio(&f, &g, s)
    })
}

/// `theta` solving `1/p - s0/d = (1-theta)/p1 + theta (1/2 - s/d)`.
pub fn gn_theta(d: usize, s0: f64, s: f64, p: f64, p1: f64) -> f64 {
    let d = d as f64;
    (1.0 / p - s0 / d - 1.0 / p1) / (0.5 - s / d - 1.0 / p1)
}

fn validate_gagliardo(d: usize, s0: f64, s: f64, p: f64, p1: f64, theta: f64) -> Result<()> {
    let df = d as f64;
    let fail = |why: &str| Err(Error::IndexRelation(format!("{why} (s0={s0}, s={s}, p={p}, p1={p1}, theta={theta})")));
    if !(0.0 <= s0 && s0 < s) {
        return fail("need 0 <= s0 < s");
    }
    if !(p > 1.0 && p.is_finite() && p1 > 1.0 && p1.is_finite()) {
        return fail("need 1 < p, p1 < inf");
    }
    if !(theta > 0.0 && theta < 1.0) {
        return fail("need 0 < theta < 1");
    }
    if theta < s0 / s {
        return fail("need theta >= s0/s");
    }
    let gap = 1.0 / p - s0 / df - ((1.0 - theta) / p1 + theta * (0.5 - s / df));
    if gap.abs() > RELATION_TOL {
        return fail(&format!("scaling relation off by {gap:e}"));
    }
    Ok(())
}

/// `||Lambda^{s0} f||_p / (||f||_{p1}^{1-theta} ||Lambda^s f||_2^theta)`.
pub fn gagliardo_ratio(f: &SpectralField, s0: f64, s: f64, p: f64, p1: f64, theta: f64) -> Result<Option<f64>> {
    let grid = *f.grid();
    let lhs = lp(&samples(&fractional_laplacian(f, s0, ZeroModePolicy::RequireZeroMean)?), &grid, p)?;
    let rhs = lp(&samples(f), &grid, p1)?.powf(1.0 - theta) * sobolev_norm(f, s, true)?.powf(theta);
    Ok((lhs > 0.0 && rhs > 0.0).then(|| lhs / rhs))
}

pub fn gagliardo_check(
    s0: f64,
    s: f64,
    p: f64,
    p1: f64,
    theta: f64,
    trials: usize,
    grid: GridSpec,
    seed: u64,
) -> Result<InequalityReport> {
    validate_gagliardo(grid.d, s0, s, p, p1, theta)?;
    let params = [("s0", s0), ("s", s), ("p", p), ("p1", p1), ("theta", theta)];
    run_trials("gagliardo-nirenberg", &params, grid, trials, seed, |t, r| {
        gagliardo_ratio(&trial_field(grid, t, r), s0, s, p, p1, theta)
    })
}

fn validate_sobolev_lorentz(d: usize, s: f64, p: f64, p1: f64, theta: f64) -> Result<()> {
    let df = d as f64;
    let fail = |why: &str| Err(Error::IndexRelation(format!("{why} (s={s}, p={p}, p1={p1}, theta={theta})")));
    if !(s > 0.0) {
        return fail("need s > 0");
    }
    if !(p > 1.0 && p.is_finite() && p1 >= 1.0 && p1.is_finite()) {
        return fail("need 1 < p < inf and 1 <= p1 < inf");
    }
    if !(theta > 0.0 && theta < 1.0) {
        return fail("need 0 < theta < 1");
    }
    if (1.0 / p1 - (0.5 - s / df)).abs() <= RELATION_TOL {
        return fail("need 1/p1 != 1/2 - s/d");
    }
    let gap = 1.0 / p - ((1.0 - theta) / p1 + theta * (0.5 - s / df));
    if gap.abs() > RELATION_TOL {
        return fail(&format!("scaling relation off by {gap:e}"));
    }
    Ok(())
}

/// `||f||_p / (||f||_{p1,inf}^{1-theta} ||Lambda^s f||_2^theta)`; the Lorentz
/// `L^{p,1}` norm on the left is replaced by the smaller `L^p` norm.
pub fn sobolev_lorentz_ratio(f: &SpectralField, s: f64, p: f64, p1: f64, theta: f64) -> Result<Option<f64>> {
    let grid = *f.grid();
    let fs = samples(f);
    let lhs = lp(&fs, &grid, p)?;
    let weak = Rearrangement::new(&fs, grid.cell_volume()).weak_quasinorm(p1);
    let rhs = weak.powf(1.0 - theta) * sobolev_norm(f, s, true)?.powf(theta);
    Ok((lhs > 0.0 && rhs > 0.0).then(|| lhs / rhs))
}

pub fn sobolev_lorentz_check(
    s: f64,
    p: f64,
    p1: f64,
    theta: f64,
    trials: usize,
    grid: GridSpec,
    seed: u64,
) -> Result<InequalityReport> {
    validate_sobolev_lorentz(grid.d, s, p, p1, theta)?;
    let params = [("s", s), ("p", p), ("p1", p1), ("theta", theta)];
    run_trials("sobolev-lorentz", &params, grid, trials, seed, |t, r| {
        sobolev_lorentz_ratio(&trial_field(grid, t, r), s, p, p1, theta)
    })
}

/// `||Lambda^s (f g)||_2 / (||f||_{H^s} ||g||_{H^gamma})`.
pub fn commutator_ratio(f: &SpectralField, g: &SpectralField, s: f64, gamma: f64) -> Result<Option<f64>> {
    scalar_pair(f, g)?;
    let fg = grid_product(f, g)?;
    let lhs = fractional_laplacian(&fg, s, ZeroModePolicy::Annihilate)?.norm();
    let rhs = sobolev_norm(f, s, false)? * sobolev_norm(g, gamma, false)?;
    Ok((lhs > 0.0 && rhs > 0.0).then(|| lhs / rhs))
}

/// Rough zero-mean `f` against a smooth `g` dominated by its mean.
pub fn commutator_check(s: f64, gamma: f64, trials: usize, grid: GridSpec, seed: u64) -> Result<InequalityReport> {
    let d = grid.d as f64;
    if !(gamma > d / 2.0 && s > 0.0 && s <= gamma) {
        return Err(Error::IndexRelation(format!("need gamma > d/2 and 0 < s <= gamma, got s={s}, gamma={gamma}")));
    }
    let mean = 1.0 / grid.volume().sqrt();
    run_trials("commutator", &[("s", s), ("gamma", gamma)], grid, trials, seed, |t, r| {
        let f = trial_field(grid, t, r);
        let mut g = random_field_with(grid, 1, 2.0, trial_band(&grid), r);
        let n = g.norm();
        if n > 0.0 {
            g = g.scaled(0.5 / n);
        }
        g.coeffs_mut()[0] += mean;
        commutator_ratio(&f, &g, s, gamma)
    })
}
