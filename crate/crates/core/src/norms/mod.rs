//! Lebesgue, Sobolev and weak-Lorentz norms on the torus.

mod littlewood_paley;

pub use littlewood_paley::*;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops::{fractional_laplacian, ZeroModePolicy};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NormReport {
    pub norm_name: String,
    pub parameters: BTreeMap<String, f64>,
    pub value: f64,
}

impl NormReport {
    pub fn new(name: &str, params: &[(&str, f64)], value: f64) -> Self {
        Self {
            norm_name: name.to_string(),
            parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
        }
    }
}

/// Pointwise Euclidean magnitude of a (multi-component) real field on the grid.
pub fn magnitudes(f: &SpectralField) -> Vec<f64> {
    let n = f.grid().len();
    let s = f.to_samples();
    (0..n)
        .map(|p| (0..f.ncomp()).map(|c| s[c * n + p].powi(2)).sum::<f64>().sqrt())
        .collect()
}

/// L^p norm of grid magnitudes; `p = f64::INFINITY` gives the grid maximum.
pub fn lebesgue_norm_of(values: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |a, &v| a.max(v.abs())));
    }
    // scale by the max to avoid overflow for large p
    let top = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if top == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = values.iter().map(|v| (v.abs() / top).powf(p)).sum();
    Ok(top * (s * cell_volume).powf(1.0 / p))
}

pub fn lebesgue_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if !f.real_valued() {
        return Err(Error::InvalidParameter("L^p norm needs a real-valued field".into()));
    }
    lebesgue_norm_of(&magnitudes(f), f.grid().cell_volume(), p)
}

/// `||Lambda^s f||_2` (homogeneous) or `||(1 + 4 pi^2 |xi|^2)^{s/2} f^||` (inhomogeneous).
pub fn sobolev_norm(f: &SpectralField, s: f64, homogeneous: bool) -> Result<f64> {
    if homogeneous {
        return Ok(fractional_laplacian(f, s, ZeroModePolicy::RequireZeroMean)?.norm());
    }
    let grid = *f.grid();
    let n = grid.len();
    let mut acc = 0.0;
    for flat in 0..n {
        let r = grid.freq_norm(&grid.mode(flat));
        let w = (1.0 + 4.0 * PI * PI * r * r).powf(s);
        for c in 0..f.ncomp() {
            acc += w * f.coeff(c, flat).norm_sqr();
        }
    }
    Ok((grid.volume() * acc).sqrt())
}

/// Decreasing rearrangement of a grid function with uniform cell weights.
#[derive(Debug, Clone)]
pub struct Rearrangement {
    values: Vec<f64>,
    cell: f64,
}

impl Rearrangement {
    pub fn new(values: &[f64], cell: f64) -> Self {
        let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Self { values: v, cell }
    }

    pub fn of(f: &SpectralField) -> Self {
        Self::new(&magnitudes(f), f.grid().cell_volume())
    }

    /// `f*(t) = inf { s : |{|f| > s}| <= t }`; right-continuous step function.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let i = (t / self.cell).floor() as usize;
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Breakpoints `t_i = i * cell` and values on `[t_{i-1}, t_i)`.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| ((i + 1) as f64 * self.cell, v))
    }

    /// `sup_t t^{1/p} f*(t)`, approached at the right end of each step.
    pub fn weak_quasinorm(&self, p: f64) -> f64 {
        self.steps().map(|(t, v)| t.powf(1.0 / p) * v).fold(0.0, f64::max)
    }
}

pub fn lorentz_weak_quasinorm(f: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("weak L^p needs 1 <= p < inf, got {p}")));
    }
    Ok(Rearrangement::of(f).weak_quasinorm(p))
}
