//! Truncated fractional heat equation `d_t b + eta Lambda^{2 beta} b + div(u (x) b) = div F`
//! with a frozen divergence-free velocity and time-independent forcing.

use serde::Serialize;

use super::{lawson_step, outer_samples, Decay, ModelParams};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops::{
    check_tensor, check_vector, divergence, fourier_truncate, fractional_laplacian, support_defect, tensor_divergence,
    vector_gradient, ZeroModePolicy,
};

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct HeatRecord {
    pub t: f64,
    pub b_l2_sq: f64,
    pub b_hbeta_sq: f64,
    /// `|‖b‖² + 2 int (eta ‖Λ^β b‖² - <div F, b>) - ‖b(0)‖²| / ‖b(0)‖²`
    pub energy_residual: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HeatOutput {
    pub records: Vec<HeatRecord>,
    /// Gronwall exponent `2 beta / (2 beta - 1)`, defined for `beta > 1/2`
    pub gamma: Option<f64>,
    #[serde(skip)]
    pub final_state: SpectralField,
}

/// Largest per-axis wavenumber carrying energy.
fn spectral_extent(f: &SpectralField) -> usize {
    let g = f.grid();
    let scale = f.max_abs_coeff();
    let mut ext = 0;
    for flat in 0..g.len() {
        if (0..f.ncomp()).any(|c| f.coeff(c, flat).norm() > 1e-14 * scale) {
            let k = g.mode(flat);
            ext = ext.max(k[..g.d].iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0));
        }
    }
    ext
}

/// `int (u (x) b) : grad b = sum_ij int u^i b^j d_i b^j` by grid quadrature.
pub fn transport_form(u: &SpectralField, b: &SpectralField) -> Result<f64> {
    check_vector(u)?;
    check_vector(b)?;
    let g = *b.grid();
    let (d, n) = (g.d, g.len());
    let us = u.to_samples();
    let bs = b.to_samples();
    let gs = vector_gradient(b)?.to_samples();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            for p in 0..n {
                acc += us[i * n + p] * bs[j * n + p] * gs[(j * d + i) * n + p];
            }
        }
    }
    Ok(acc * g.cell_volume())
}

/// Integrates from `S_R b0` with the Lawson RK4 stepper.
pub fn heat_solve(
    params: &ModelParams,
    b0: &SpectralField,
    u_frozen: Option<&SpectralField>,
    forcing: Option<&SpectralField>,
) -> Result<HeatOutput> {
    let grid = params.grid;
    let (d, n) = (grid.d, grid.len());
    for v in [&params.eta, &params.dt, &params.t_final] {
        if !(*v > 0.0) {
            return Err(Error::InvalidParameter("eta, dt and T_final must be positive".into()));
        }
    }
    check_vector(b0)?;
    let k_max = params.trunc.k_max(&grid);
    let us = match u_frozen {
        Some(u) => {
            check_vector(u)?;
            let div = divergence(u)?.norm();
            if div > 1e-10 * u.norm().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!("frozen velocity has divergence {div:e}")));
            }
            let needed = spectral_extent(u) + 2 * k_max + 1;
            if grid.m < needed {
                return Err(Error::AliasViolation { m: grid.m, needed, k_max });
            }
            Some(u.to_samples())
        }
        None => None,
    };
    let source = match forcing {
        Some(f) => {
            check_tensor(f)?;
            Some(fourier_truncate(&tensor_divergence(f)?, &params.trunc))
        }
        None => None,
    };
    let b = fourier_truncate(b0, &params.trunc);
    debug_assert!(support_defect(&b, &params.trunc) == 0.0);
    let (steps, h) = params.schedule();
    let decay = Decay::new(&grid, params.eta, params.beta, h);
    let initial = b.norm_sq();

    let eval = |s: &SpectralField| -> Result<(SpectralField, f64, f64)> {
        let mut term = SpectralField::zeros(grid, d);
        let mut work = 0.0;
        if let Some(us) = &us {
            // div(b (x) u) contracts the velocity index: (u.grad) b
            let bs = s.to_samples();
            let t = SpectralField::from_samples(grid, d * d, &outer_samples(&bs, us, d, n))?;
            term = term.sub(&fourier_truncate(&tensor_divergence(&t)?, &params.trunc))?;
        }
        if let Some(src) = &source {
            term = term.add(src)?;
            work = src.inner(s)?;
        }
        let diss = params.eta * fractional_laplacian(s, params.beta, ZeroModePolicy::Annihilate)?.norm_sq();
        Ok((term, 2.0 * (diss - work), 0.0))
    };

    let record = |t: f64, s: &SpectralField, q: f64| -> Result<HeatRecord> {
        let l2 = s.norm_sq();
        let scale = if initial > 0.0 { initial } else { 1.0 };
        Ok(HeatRecord {
            t,
            b_l2_sq: l2,
            b_hbeta_sq: fractional_laplacian(s, params.beta, ZeroModePolicy::Annihilate)?.norm_sq(),
            energy_residual: (l2 + q - initial).abs() / scale,
        })
    };

    let mut state = b;
    let mut q = 0.0;
    let mut records = vec![record(0.0, &state, q)?];
    for k in 1..=steps {
        let (next, dq, _) = lawson_step(&state, h, &decay, eval)?;
        if next.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite(k as f64 * h));
        }
        state = next;
        q += dq;
        if k % params.record_stride.max(1) == 0 || k == steps {
            records.push(record(k as f64 * h, &state, q)?);
        }
    }
    let gamma = (params.beta > 0.5).then(|| 2.0 * params.beta / (2.0 * params.beta - 1.0));
    Ok(HeatOutput { records, gamma, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::super::tests::params;
    use super::*;
    use crate::evolver::add_mode;
    use crate::ops::leray_project;
    use crate::random::random_field;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn free_decay_single_mode() {
        let mut p = params(16, 3.0 / (2.0 * PI));
        p.beta = 1.3;
        p.t_final = 0.1;
        let mut b0 = SpectralField::zeros(p.grid, 2);
        add_mode(&mut b0, &[1, 2], 1, 0.7, 0.3);
        let out = heat_solve(&p, &b0, None, None).unwrap();
        let lam = p.eta * 5f64.sqrt().powf(2.0 * p.beta);
        let want = b0.scaled((-lam * p.t_final).exp());
        assert!(out.final_state.sub(&want).unwrap().max_abs_coeff() < 1e-14);
        assert!(out.records.iter().all(|r| r.energy_residual < 1e-9));
        assert!((out.gamma.unwrap() - 2.6 / 1.6).abs() < 1e-15);
    }

    #[test]
    fn constant_forcing_variation_of_constants() {
        let mut p = params(16, 3.0 / (2.0 * PI));
        p.t_final = 0.5;
        p.dt = 1e-2;
        let g = p.grid;
        let mut f = SpectralField::zeros(g, 4);
        // F^{01} = cos(x_2): div F = (-sin(x_2), 0)
        add_mode(&mut f, &[0, 1], 1, 1.0, 0.0);
        let mut b0 = SpectralField::zeros(g, 2);
        add_mode(&mut b0, &[0, 1], 0, 0.3, 0.0);
        let out = heat_solve(&p, &b0, None, Some(&f)).unwrap();
        let k = [0i64, 1];
        let lam = p.eta;
        let fk = tensor_divergence(&f).unwrap().coeff_at(0, &k);
        let b0k = b0.coeff_at(0, &k);
        let t = p.t_final;
        let want = b0k * (-lam * t).exp() + fk * ((1.0 - (-lam * t).exp()) / lam);
        assert!((out.final_state.coeff_at(0, &k) - want).norm() < 1e-8);
        assert!(out.records.last().unwrap().energy_residual < 1e-8);
    }

    #[test]
    fn frozen_transport_is_energy_neutral() {
        let mut p = params(32, 4.0 / (2.0 * PI));
        p.t_final = 0.05;
        p.dt = 1e-3;
        let g = p.grid;
        let u = leray_project(&random_field(g, 2, 1.0, 4, 5)).unwrap();
        let b = fourier_truncate(&random_field(g, 2, 1.0, 4, 6), &p.trunc);
        let tf = transport_form(&u, &b).unwrap();
        let scale = u.norm() * b.norm() * vector_gradient(&b).unwrap().norm();
        assert!(tf.abs() < 1e-10 * scale, "{tf}");
        let out = heat_solve(&p, &b, Some(&u), None).unwrap();
        assert!(out.records.iter().all(|r| r.energy_residual < 1e-8));
        let rough = random_field(g, 2, 1.0, 15, 1);
        assert!(heat_solve(&p, &b, Some(&rough), None).is_err());
        let _ = Complex64::default();
    }
}
