//! Dyadic decomposition and Bernstein-type measurements.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::ops::{apply_multiplier, spectral_derivative};
use crate::random::{random_field_where, rng};

use super::{lebesgue_norm, lebesgue_norm_of};

/// Radial profile `chi` equal to 1 on `[0, inner]` and 0 on `[outer, inf)`;
/// then `psi(xi) = chi(|xi|)` and `phi(xi) = chi(|xi|/2) - chi(|xi|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LPBumpSpec {
    pub inner: f64,
    pub outer: f64,
}

impl Default for LPBumpSpec {
    fn default() -> Self {
        Self { inner: 0.75, outer: 4.0 / 3.0 }
    }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

impl LPBumpSpec {
    pub fn chi(&self, r: f64) -> f64 {
        smooth_step((self.outer - r) / (self.outer - self.inner))
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.chi(r)
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.chi(r / 2.0) - self.chi(r)
    }
}

fn dyadic(j: i32) -> f64 {
    2f64.powi(j)
}

/// `Delta_j f`: multiplier `phi(2^-j xi)`.
pub fn lp_block(f: &SpectralField, j: i32, bumps: &LPBumpSpec) -> SpectralField {
    let g = *f.grid();
    apply_multiplier(f, |k| bumps.phi(g.freq_norm(k) / dyadic(j)))
}

/// `S_j f`: multiplier `psi(2^-j xi)`.
pub fn lp_low(f: &SpectralField, j: i32, bumps: &LPBumpSpec) -> SpectralField {
    let g = *f.grid();
    apply_multiplier(f, |k| bumps.psi(g.freq_norm(k) / dyadic(j)))
}

/// `S_{j0} f + sum_{j0 <= j <= j1} Delta_j f`.
pub fn lp_reconstruct(f: &SpectralField, j0: i32, j1: i32, bumps: &LPBumpSpec) -> SpectralField {
    let mut acc = lp_low(f, j0, bumps);
    for j in j0..=j1 {
        acc = acc.add(&lp_block(f, j, bumps)).expect("same shape");
    }
    acc
}

/// Dyadic range whose blocks cover every nonzero frequency of the grid.
pub fn block_range(grid: &GridSpec) -> (i32, i32) {
    let lo = (1.0 / grid.l).log2().floor() as i32 - 2;
    let hi = ((grid.d as f64).sqrt() * grid.m as f64 / (2.0 * grid.l)).log2().ceil() as i32 + 2;
    (lo, hi)
}

/// `sum_j 2^{2js} ||Delta_j f||_2^2` over [`block_range`].
pub fn lp_sobolev_sum(f: &SpectralField, s: f64, bumps: &LPBumpSpec) -> f64 {
    let (lo, hi) = block_range(f.grid());
    (lo..=hi).map(|j| dyadic(j).powf(2.0 * s) * lp_block(f, j, bumps).norm_sq()).sum()
}

/// Pointwise Frobenius norm of all `k`-th order partial derivatives of a scalar field.
pub fn derivative_magnitudes(u: &SpectralField, k: usize) -> Result<Vec<f64>> {
    let d = u.grid().d;
    let n = u.grid().len();
    let mut acc = vec![0.0; n];
    let mut level = vec![u.clone()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * d);
        for f in &level {
            for a in 0..d {
                next.push(spectral_derivative(f, a)?);
            }
        }
        level = next;
    }
    for f in &level {
        for (a, v) in acc.iter_mut().zip(f.to_samples()) {
            *a += v * v;
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// Upper ratio `||D^k u||_q / (2^{j(k + d(1/p - 1/q))} ||u||_p)` and two-sided ratio
/// `||D^k u||_p / (2^{jk} ||u||_p)`; `None` for the zero field.
pub fn bernstein_ratios(u: &SpectralField, j: i32, p: f64, q: f64, k: usize) -> Result<Option<(f64, f64)>> {
    let up = lebesgue_norm(u, p)?;
    if up == 0.0 {
        return Ok(None);
    }
    let d = u.grid().d as f64;
    let dk = derivative_magnitudes(u, k)?;
    let cell = u.grid().cell_volume();
    let dq = lebesgue_norm_of(&dk, cell, q)?;
    let dp = lebesgue_norm_of(&dk, cell, p)?;
    let two_j = dyadic(j);
    let upper = dq / (two_j.powf(k as f64 + d * (1.0 / p - 1.0 / q)) * up);
    let two_sided = dp / (two_j.powi(k as i32) * up);
    Ok(Some((upper, two_sided)))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BernsteinReport {
    pub j: i32,
    pub p: f64,
    pub q: f64,
    pub k: usize,
    pub trials: usize,
    pub skipped: usize,
    pub upper_min: f64,
    pub upper_max: f64,
    pub two_sided_min: f64,
    pub two_sided_max: f64,
}

/// Random fields supported where `phi(2^-j xi) > 0`, fixed seed.
pub fn bernstein_check(
    grid: GridSpec,
    j: i32,
    p: f64,
    q: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<BernsteinReport> {
    if !(1.0 <= p && p <= q) {
        return Err(Error::InvalidParameter(format!("need 1 <= p <= q, got p = {p}, q = {q}")));
    }
    let bumps = LPBumpSpec::default();
    let mut r = rng(seed ^ ((j as i64 as u64) << 32));
    let (mut umin, mut umax, mut tmin, mut tmax) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    let mut skipped = 0;
    for _ in 0..trials {
        let mut keep = |kv: &[i64; 3]| bumps.phi(grid.freq_norm(kv) / dyadic(j)) > 0.0;
        let u = random_field_where(grid, 1, 0.0, &mut keep, &mut r);
        match bernstein_ratios(&u, j, p, q, k)? {
            None => skipped += 1,
            Some((a, b)) => {
                umin = umin.min(a);
                umax = umax.max(a);
                tmin = tmin.min(b);
                tmax = tmax.max(b);
            }
        }
    }
    Ok(BernsteinReport {
        j,
        p,
        q,
        k,
        trials,
        skipped,
        upper_min: umin,
        upper_max: umax,
        two_sided_min: tmin,
        two_sided_max: tmax,
    })
}

/// Largest spread max/min across reports of each measured constant.
pub fn bernstein_spread(reports: &[BernsteinReport]) -> f64 {
    let spread = |vals: Vec<f64>| {
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    let used: Vec<&BernsteinReport> = reports.iter().filter(|r| r.skipped < r.trials).collect();
    [
        spread(used.iter().map(|r| r.upper_max).collect()),
        spread(used.iter().map(|r| r.two_sided_min).collect()),
        spread(used.iter().map(|r| r.two_sided_max).collect()),
    ]
    .into_iter()
    .fold(1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;
    use std::f64::consts::PI;

    #[test]
    fn supports_match_annuli() {
        let b = LPBumpSpec::default();
        assert_eq!(b.psi(4.0 / 3.0), 0.0);
        assert_eq!(b.psi(0.75), 1.0);
        assert_eq!(b.phi(0.75), 0.0);
        assert_eq!(b.phi(8.0 / 3.0), 0.0);
        assert!(b.phi(1.0) > 0.0 && b.phi(2.5) > 0.0);
    }

    #[test]
    fn partition_of_unity_pointwise() {
        let b = LPBumpSpec::default();
        for i in 0..2000 {
            let r = i as f64 * 0.013;
            let s: f64 = b.psi(r) + (0..12).map(|j| b.phi(r / dyadic(j))).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12, "r = {r}");
            if r > 0.0 {
                let full: f64 = (-20..20).map(|j| b.phi(r / dyadic(j))).sum();
                assert!((full - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruction_of_band_limited_field() {
        let g = GridSpec::new(2, 32, 1.0).unwrap();
        let f = random_field(g, 1, 1.0, 12, 4);
        let (lo, hi) = block_range(&g);
        let back = lp_reconstruct(&f, lo, hi, &LPBumpSpec::default());
        assert!(back.sub(&f).unwrap().max_abs_coeff() < 1e-12 * f.max_abs_coeff());
    }

    #[test]
    fn single_mode_lights_expected_blocks() {
        // |xi| = 1: phi(2^-j) > 0 iff 3/4 < 2^-j < 8/3, i.e. j in {-1, 0}
        let g = GridSpec::new(2, 16, 4.0).unwrap();
        let f = SpectralField::from_fn(g, 1, |x| vec![(2.0 * PI * x[0]).cos()]);
        let b = LPBumpSpec::default();
        for j in -4..5 {
            let on = lp_block(&f, j, &b).max_abs_coeff() > 1e-14;
            assert_eq!(on, j == -1 || j == 0, "j = {j}");
        }
    }

    #[test]
    fn single_mode_bernstein_ratio() {
        let g = GridSpec::new(2, 64, 2.0).unwrap();
        for j in 0..3 {
            let xi = 2f64.powi(j);
            let u = SpectralField::from_fn(g, 1, |x| vec![(2.0 * PI * xi * x[1]).cos()]);
            let (_, two) = bernstein_ratios(&u, j, 2.0, 2.0, 1).unwrap().unwrap();
            assert!((two - 2.0 * PI).abs() < 1e-12);
        }
        assert!(bernstein_ratios(&SpectralField::zeros(g, 1), 0, 2.0, 2.0, 1).unwrap().is_none());
        assert!(bernstein_check(g, 0, 3.0, 2.0, 1, 1, 0).is_err());
    }
}
