//! Galerkin-truncated time integration with exact diffusion (Lawson RK4).

mod heat;

pub use heat::*;

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{GridSpec, TruncationSpec};
use crate::norms::lorentz_weak_quasinorm;
use crate::ops::{
    check_vector, divergence, fourier_truncate, fractional_laplacian, leray_project, support_defect,
    tensor_divergence, ZeroModePolicy,
};
use crate::stokes::solve_stokes_spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub grid: GridSpec,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub eta: f64,
    pub trunc: TruncationSpec,
    pub dt: f64,
    pub t_final: f64,
    /// steps between snapshots; 0 disables them
    pub snapshot_stride: usize,
    /// steps between diagnostic records
    pub record_stride: usize,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        pos("nu", self.nu)?;
        pos("eta", self.eta)?;
        pos("dt", self.dt)?;
        pos("T_final", self.t_final)?;
        if !self.alpha.is_finite() || !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidParameter("alpha must be finite and beta positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be >= 1".into()));
        }
        // the velocity carries modes up to 2 K_max, so u (x) b reaches 3 K_max
        self.trunc.check_cubic(&self.grid)
    }

    /// Number of steps and the step actually used (`dt` shrunk to divide `T_final`).
    pub fn schedule(&self) -> (usize, f64) {
        let n = ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }

    /// Exponent of the weak-Lorentz velocity norm, when it is at least 1.
    pub fn lorentz_exponent(&self) -> Option<f64> {
        let d = self.grid.d as f64;
        let den = d + 1.0 - 2.0 * self.alpha;
        (self.alpha >= 0.5 && den > 0.0).then(|| d / den)
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub b_l2_sq: f64,
    pub b_hbeta_sq: f64,
    pub u_halpha_sq: f64,
    pub u_weak_lorentz: f64,
    pub energy_residual: f64,
    pub max_div_b: f64,
    pub max_div_u: f64,
}

impl DiagnosticRecord {
    pub const CSV_HEADER: &'static str =
        "t,b_l2_sq,b_hbeta_sq,u_halpha_sq,u_weak_lorentz,energy_residual,max_div_b,max_div_u";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.b_l2_sq,
            self.b_hbeta_sq,
            self.u_halpha_sq,
            self.u_weak_lorentz,
            self.energy_residual,
            self.max_div_b,
            self.max_div_u
        )
    }
}

/// `P S_R b0`.
pub fn initial_truncate(b0: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    check_vector(b0)?;
    if b0.grid() != &params.grid {
        return Err(Error::GridMismatch);
    }
    leray_project(&fourier_truncate(b0, &params.trunc))
}

/// Outer product `(f^i g^j)` of grid samples, returned as samples.
fn outer_samples(fs: &[f64], gs: &[f64], d: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d * n];
    for i in 0..d {
        for j in 0..d {
            let dst = &mut out[(i * d + j) * n..(i * d + j + 1) * n];
            let (fi, gj) = (&fs[i * n..(i + 1) * n], &gs[j * n..(j + 1) * n]);
            for p in 0..n {
                dst[p] = fi[p] * gj[p];
            }
        }
    }
    out
}

pub(crate) fn max_magnitude(samples: &[f64], d: usize, n: usize) -> f64 {
    (0..n)
        .map(|p| (0..d).map(|c| samples[c * n + p].powi(2)).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt()
}

/// Nonlinear part and velocity for a given `b`.
pub struct NonlinearEval {
    /// `P S_R [(b.grad) u - (u.grad) b]`
    pub term: SpectralField,
    pub velocity: SpectralField,
    pub max_speed: f64,
}

/// Evaluates the transport part of the truncated system.
pub fn nonlinear(b: &SpectralField, params: &ModelParams) -> Result<NonlinearEval> {
    let grid = params.grid;
    let (d, n) = (grid.d, grid.len());
    let bs = b.to_samples();
    let bb = SpectralField::from_samples(grid, d * d, &outer_samples(&bs, &bs, d, n))?;
    let velocity = solve_stokes_spectral(&bb, params.alpha, params.nu)?.velocity;
    let us = velocity.to_samples();
    // div of u (x) b - b (x) u on the last index is (b.grad) u - (u.grad) b
    let mut a = outer_samples(&us, &bs, d, n);
    let bu = outer_samples(&bs, &us, d, n);
    a.iter_mut().zip(&bu).for_each(|(x, y)| *x -= y);
    let div = tensor_divergence(&SpectralField::from_samples(grid, d * d, &a)?)?;
    let term = leray_project(&fourier_truncate(&div, &params.trunc))?;
    Ok(NonlinearEval { term, velocity, max_speed: max_magnitude(&us, d, n) })
}

/// `-eta Lambda^{2 beta} b + P S_R [(b.grad) u - (u.grad) b]`.
pub fn rhs(b: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    check_vector(b)?;
    let defect = support_defect(b, &params.trunc);
    if defect > 1e-12 * b.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::SupportViolation(defect));
    }
    let lin = fractional_laplacian(b, 2.0 * params.beta, ZeroModePolicy::Annihilate)?.scaled(-params.eta);
    lin.add(&nonlinear(b, params)?.term)
}

/// Per-mode integrating factors for diffusion symbol `eta (2 pi |xi|)^{2 beta}`.
pub(crate) struct Decay {
    half: Vec<f64>,
    full: Vec<f64>,
}

impl Decay {
    pub(crate) fn new(grid: &GridSpec, eta: f64, beta: f64, h: f64) -> Self {
        let n = grid.len();
        let mut half = vec![0.0; n];
        let mut full = vec![0.0; n];
        for flat in 0..n {
            let r = grid.freq_norm(&grid.mode(flat));
            let lam = if r == 0.0 { 0.0 } else { eta * (2.0 * PI * r).powf(2.0 * beta) };
            half[flat] = (-0.5 * lam * h).exp();
            full[flat] = (-lam * h).exp();
        }
        Self { half, full }
    }

    fn apply(&self, f: &SpectralField, which: &[f64]) -> SpectralField {
        let n = which.len();
        let mut out = f.clone();
        for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
            *c *= which[i % n];
        }
        out
    }

    pub(crate) fn half(&self, f: &SpectralField) -> SpectralField {
        self.apply(f, &self.half)
    }

    pub(crate) fn full(&self, f: &SpectralField) -> SpectralField {
        self.apply(f, &self.full)
    }
}

/// `a + s * b` on raw coefficients (shapes are guaranteed by the caller).
pub(crate) fn lin(a: &SpectralField, s: f64, b: &SpectralField) -> SpectralField {
    let mut out = a.clone();
    out.coeffs_mut().iter_mut().zip(b.coeffs()).for_each(|(x, y)| *x += y * s);
    out
}

/// One Lawson RK4 step for `b' = -L b + N(b)` plus the scalar `q' = D(b)`.
/// `nl` returns `N(b)`, `D(b)` and the speed used by the CFL check.
pub(crate) fn lawson_step(
    b: &SpectralField,
    h: f64,
    decay: &Decay,
    mut nl: impl FnMut(&SpectralField) -> Result<(SpectralField, f64, f64)>,
) -> Result<(SpectralField, f64, f64)> {
    let (k1, d1, speed) = nl(b)?;
    let eb = decay.half(b);
    let s2 = decay.half(&lin(b, 0.5 * h, &k1));
    let (k2, d2, _) = nl(&s2)?;
    let s3 = lin(&eb, 0.5 * h, &k2);
    let (k3, d3, _) = nl(&s3)?;
    let s4 = lin(&decay.full(b), h, &decay.half(&k3));
    let (k4, d4, _) = nl(&s4)?;
    let mut next = decay.full(&lin(b, h / 6.0, &k1));
    next = lin(&next, h / 3.0, &decay.half(&k2.add(&k3)?));
    next = lin(&next, h / 6.0, &k4);
    let dq = h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    Ok((next, dq, speed))
}

pub const CFL_BUDGET: f64 = 0.5;
pub const CFL_INTERVAL: usize = 20;
pub const BLOWUP_FACTOR: f64 = 10.0;

/// Running truncated simulation.
pub struct Simulation {
    params: ModelParams,
    decay: Decay,
    h: f64,
    n_steps: usize,
    step: usize,
    t: f64,
    b: SpectralField,
    dissipated: f64,
    initial_sq: f64,
}

impl Simulation {
    pub fn new(params: &ModelParams, b0: &SpectralField) -> Result<Self> {
        params.validate()?;
        let b = initial_truncate(b0, params)?;
        let (n_steps, h) = params.schedule();
        Ok(Self {
            decay: Decay::new(&params.grid, params.eta, params.beta, h),
            params: params.clone(),
            h,
            n_steps,
            step: 0,
            t: 0.0,
            initial_sq: b.norm_sq(),
            b,
            dissipated: 0.0,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn b(&self) -> &SpectralField {
        &self.b
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn finished(&self) -> bool {
        self.step >= self.n_steps
    }

    /// `2 int_0^t (nu ||Lambda^alpha u||^2 + eta ||Lambda^beta b||^2)`.
    pub fn dissipated(&self) -> f64 {
        self.dissipated
    }

    pub fn energy_residual(&self) -> f64 {
        if self.initial_sq == 0.0 {
            return 0.0;
        }
        (self.b.norm_sq() + self.dissipated - self.initial_sq).abs() / self.initial_sq
    }

    pub fn advance(&mut self) -> Result<()> {
        let p = self.params.clone();
        let check_cfl = self.step % CFL_INTERVAL == 0;
        let (next, dq, speed) = lawson_step(&self.b, self.h, &self.decay, |s| {
            let ev = nonlinear(s, &p)?;
            let du = p.nu * fractional_laplacian(&ev.velocity, p.alpha, ZeroModePolicy::Annihilate)?.norm_sq();
            let db = p.eta * fractional_laplacian(s, p.beta, ZeroModePolicy::Annihilate)?.norm_sq();
            Ok((ev.term, 2.0 * (du + db), ev.max_speed))
        })?;
        if check_cfl && speed > 0.0 {
            let limit = CFL_BUDGET * p.grid.dx() / speed;
            if self.h > limit {
                return Err(Error::Cfl { t: self.t, dt: self.h, limit });
            }
        }
        self.step += 1;
        self.t = self.step as f64 * self.h;
        if next.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) || !dq.is_finite() {
            return Err(Error::NonFinite(self.t));
        }
        let norm = next.norm();
        let limit = BLOWUP_FACTOR * self.initial_sq.sqrt();
        if norm > limit && self.initial_sq > 0.0 {
            return Err(Error::BlowUp { t: self.t, norm, limit });
        }
        self.b = next;
        self.dissipated += dq;
        Ok(())
    }

    pub fn record(&self) -> Result<DiagnosticRecord> {
        let p = &self.params;
        let n = p.grid.len();
        let vel = solve_stokes_spectral(&outer_field(&self.b)?, p.alpha, p.nu)?.velocity;
        let lorentz = match p.lorentz_exponent() {
            Some(q) => lorentz_weak_quasinorm(&vel, q)?,
            None => f64::NAN,
        };
        let max_div = |f: &SpectralField| -> Result<f64> {
            let s = divergence(f)?.to_samples();
            Ok(s[..n].iter().fold(0.0, |a, v| a.max(v.abs())))
        };
        Ok(DiagnosticRecord {
            t: self.t,
            b_l2_sq: self.b.norm_sq(),
            b_hbeta_sq: fractional_laplacian(&self.b, p.beta, ZeroModePolicy::Annihilate)?.norm_sq(),
            u_halpha_sq: fractional_laplacian(&vel, p.alpha, ZeroModePolicy::Annihilate)?.norm_sq(),
            u_weak_lorentz: lorentz,
            energy_residual: self.energy_residual(),
            max_div_b: max_div(&self.b)?,
            max_div_u: max_div(&vel)?,
        })
    }

    /// Velocity of the current state.
    pub fn velocity(&self) -> Result<SpectralField> {
        Ok(solve_stokes_spectral(&outer_field(&self.b)?, self.params.alpha, self.params.nu)?.velocity)
    }
}

/// `b (x) b` as a tensor field (pseudo-spectral).
pub fn outer_field(b: &SpectralField) -> Result<SpectralField> {
    check_vector(b)?;
    let grid = *b.grid();
    let bs = b.to_samples();
    SpectralField::from_samples(grid, grid.d * grid.d, &outer_samples(&bs, &bs, grid.d, grid.len()))
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub records: Vec<DiagnosticRecord>,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub step_size: f64,
}

/// Runs to `T_final`, recording every `record_stride` steps and at the end.
pub fn simulate(params: &ModelParams, b0: &SpectralField) -> Result<SimulationOutput> {
    let mut sim = Simulation::new(params, b0)?;
    let mut records = vec![sim.record()?];
    let mut snapshots = Vec::new();
    if params.snapshot_stride > 0 {
        snapshots.push((0.0, sim.b().clone()));
    }
    while !sim.finished() {
        sim.advance()?;
        let k = sim.steps_taken();
        if k % params.record_stride == 0 || sim.finished() {
            records.push(sim.record()?);
        }
        if params.snapshot_stride > 0 && k % params.snapshot_stride == 0 {
            snapshots.push((sim.t(), sim.b().clone()));
        }
    }
    Ok(SimulationOutput { records, snapshots, step_size: sim.step_size() })
}

/// Largest relative increase of `||b||_2` between consecutive records.
pub fn monotonicity_defect(records: &[DiagnosticRecord]) -> f64 {
    let b0 = records.first().map(|r| r.b_l2_sq.sqrt()).unwrap_or(0.0);
    if b0 == 0.0 {
        return 0.0;
    }
    records
        .windows(2)
        .map(|w| (w[1].b_l2_sq.sqrt() - w[0].b_l2_sq.sqrt()) / b0)
        .fold(0.0, f64::max)
}

/// Single-mode helper: `amplitude * cos(2 pi k.x / L + phase)` in one component.
pub fn add_mode(f: &mut SpectralField, k: &[i64], component: usize, amplitude: f64, phase: f64) {
    let d = f.grid().d;
    let c = Complex64::from_polar(0.5 * amplitude, phase);
    let neg: Vec<i64> = k[..d].iter().map(|v| -v).collect();
    let cur = f.coeff_at(component, k);
    f.set_coeff_at(component, k, cur + c);
    let cur = f.coeff_at(component, &neg);
    f.set_coeff_at(component, &neg, cur + c.conj());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::gradient;
    use crate::random::random_field;

    pub(crate) fn params(m: usize, r: f64) -> ModelParams {
        ModelParams {
            grid: GridSpec::new(2, m, 2.0 * PI).unwrap(),
            alpha: 1.0,
            beta: 1.0,
            nu: 1.0,
            eta: 1.0,
            trunc: TruncationSpec::new(r).unwrap(),
            dt: 1e-3,
            t_final: 0.01,
            snapshot_stride: 0,
            record_stride: 1,
        }
    }

    #[test]
    fn validation() {
        let p = params(16, 3.0 / (2.0 * PI));
        assert!(p.validate().is_ok());
        assert!(matches!(params(16, 4.0 / (2.0 * PI)).validate(), Err(Error::AliasViolation { .. })));
        let mut q = p.clone();
        q.nu = 0.0;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.t_final = 0.0105;
        let (n, h) = q.schedule();
        assert_eq!(n, 11);
        assert!(h <= q.dt);
    }

    #[test]
    fn initial_truncation_examples() {
        let p = params(16, 3.0 / (2.0 * PI));
        let g = p.grid;
        let b = leray_project(&fourier_truncate(&random_field(g, 2, 1.0, 3, 1), &p.trunc)).unwrap();
        assert!(initial_truncate(&b, &p).unwrap().sub(&b).unwrap().max_abs_coeff() < 1e-15);
        let grad = gradient(&random_field(g, 1, 1.0, 6, 2)).unwrap();
        assert!(initial_truncate(&grad, &p).unwrap().max_abs_coeff() < 1e-14);
        let r = random_field(g, 2, 0.5, 7, 3);
        assert!(initial_truncate(&r, &p).unwrap().norm() <= r.norm());
    }

    #[test]
    fn rhs_zero_and_support() {
        let p = params(16, 3.0 / (2.0 * PI));
        let z = SpectralField::zeros(p.grid, 2);
        assert_eq!(rhs(&z, &p).unwrap().max_abs_coeff(), 0.0);
        let wide = random_field(p.grid, 2, 1.0, 6, 1);
        assert!(matches!(rhs(&wide, &p), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn nonlinear_energy_balance() {
        let p = params(32, 7.0 / (2.0 * PI));
        for seed in 0..5 {
            let b = initial_truncate(&random_field(p.grid, 2, 1.0, 7, seed), &p).unwrap();
            let ev = nonlinear(&b, &p).unwrap();
            let lhs = ev.term.inner(&b).unwrap();
            let diss = p.nu * fractional_laplacian(&ev.velocity, p.alpha, ZeroModePolicy::Annihilate).unwrap().norm_sq();
            assert!((lhs + diss).abs() < 1e-10 * diss, "{lhs} vs {diss}");
            assert!(divergence(&ev.term).unwrap().max_abs_coeff() < 1e-13 * ev.term.max_abs_coeff());
            assert!(support_defect(&ev.term, &p.trunc) == 0.0);
        }
    }

    #[test]
    fn pure_diffusion_is_exact() {
        // b = (sin(2 x_2), 0): b (x) b has no divergence-free forcing, so u = 0
        let mut p = params(16, 3.0 / (2.0 * PI));
        p.t_final = 0.05;
        p.beta = 0.75;
        let mut b0 = SpectralField::zeros(p.grid, 2);
        add_mode(&mut b0, &[0, 2], 0, 1.0, -PI / 2.0);
        let mut sim = Simulation::new(&p, &b0).unwrap();
        while !sim.finished() {
            sim.advance().unwrap();
        }
        let factor = (-p.eta * 2f64.powf(2.0 * p.beta) * p.t_final).exp();
        let want = b0.scaled(factor);
        assert!(sim.b().sub(&want).unwrap().max_abs_coeff() < 1e-14);
    }

    #[test]
    fn zero_state_stays_zero() {
        let p = params(16, 3.0 / (2.0 * PI));
        let out = simulate(&p, &SpectralField::zeros(p.grid, 2)).unwrap();
        assert_eq!(out.records.len(), 11);
        for r in &out.records {
            assert_eq!(r.b_l2_sq, 0.0);
            assert_eq!(r.u_halpha_sq, 0.0);
            assert_eq!(r.energy_residual, 0.0);
        }
    }

    #[test]
    fn fourth_order_in_time() {
        let mut p = params(32, 7.0 / (2.0 * PI));
        p.t_final = 0.2;
        let b0 = initial_truncate(&random_field(p.grid, 2, 1.0, 7, 9), &p).unwrap();
        let b0 = b0.scaled(4.0 / b0.norm());
        let run = |dt: f64| {
            let mut q = p.clone();
            q.dt = dt;
            let mut s = Simulation::new(&q, &b0).unwrap();
            while !s.finished() {
                s.advance().unwrap();
            }
            s.b().clone()
        };
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let e1 = a.sub(&b).unwrap().norm();
        let e2 = b.sub(&c).unwrap().norm();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }
}
