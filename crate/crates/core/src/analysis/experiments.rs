use rayon::prelude::*;
use serde::Serialize;

use super::exponents::{exponent_search, ExponentSelection};
use super::regime::{classify_regime, RegimeReport};
use crate::error::{Error, Result};
use crate::evolver::{initial_truncate, ModelParams, Simulation};
use crate::field::SpectralField;
use crate::grid::TruncationSpec;
use crate::ops::{fractional_laplacian, ZeroModePolicy};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub r_list: Vec<f64>,
    /// `||b_{2R} - b_R||_{L^2(0,T; L^2)}` for each `R`
    pub errors: Vec<f64>,
    pub strictly_decreasing: bool,
    pub t_final: f64,
    pub step_size: f64,
}

fn advance_all(sims: &mut [Simulation]) -> Result<()> {
    sims.par_iter_mut().map(|s| s.advance()).collect::<Result<Vec<_>>>()?;
    Ok(())
}

/// Runs every `R` and `2R` in lockstep and integrates the squared differences
/// in time with the trapezoid rule.
pub fn convergence_study(base: &ModelParams, r_list: &[f64], b0: &SpectralField) -> Result<ConvergenceReport> {
    if r_list.is_empty() || r_list.iter().any(|r| !(*r > 0.0)) || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("R list must be positive and increasing, got {r_list:?}")));
    }
    let mut radii: Vec<f64> = r_list.iter().flat_map(|&r| [r, 2.0 * r]).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut sims = radii
        .iter()
        .map(|&r| Simulation::new(&ModelParams { trunc: TruncationSpec::new(r)?, ..base.clone() }, b0))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = r_list
        .iter()
        .map(|&r| {
            let at = |x: f64| radii.iter().position(|&v| v == x).expect("radius present");
            (at(r), at(2.0 * r))
        })
        .collect();
    let gaps = |sims: &[Simulation]| -> Result<Vec<f64>> {
        pairs.iter().map(|&(a, b)| Ok(sims[b].b().sub(sims[a].b())?.norm_sq())).collect()
    };
    let h = sims[0].step_size();
    let mut acc = vec![0.0; pairs.len()];
    let mut prev = gaps(&sims)?;
    while !sims[0].finished() {
        advance_all(&mut sims)?;
        let cur = gaps(&sims)?;
        for (a, (p, c)) in acc.iter_mut().zip(prev.iter().zip(&cur)) {
            *a += 0.5 * h * (p + c);
        }
        prev = cur;
    }
    let errors: Vec<f64> = acc.iter().map(|v| v.sqrt()).collect();
    Ok(ConvergenceReport {
        r_list: r_list.to_vec(),
        strictly_decreasing: errors.windows(2).all(|w| w[1] < w[0]),
        errors,
        t_final: base.t_final,
        step_size: h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityRecord {
    pub t: f64,
    /// `||b - b_delta||_2^2`
    pub d_full: f64,
    /// `||b - b_{delta/2}||_2^2`
    pub d_half: f64,
    /// `int_0^t phi` for each pair
    pub phi_full: f64,
    pub phi_half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub delta: f64,
    pub regime: RegimeReport,
    /// run inside the uniqueness regime
    pub in_theory: bool,
    /// `(d + 2 - 2 alpha) / (4 beta)`, used when `alpha >= 1`
    pub lambda: Option<f64>,
    /// `(1 - alpha) / beta` when `alpha < 1`, else 0
    pub mu: f64,
    pub selection: Option<ExponentSelection>,
    /// `theta1 / (2 - theta2 - 1/beta)`, the power of `phi` in the estimate of the transport term
    pub phi_exponent: Option<f64>,
    pub records: Vec<StabilityRecord>,
    /// smallest `C >= 0` with `D(t) <= D(0) exp(C Phi(t))` on the `delta` run
    pub fitted_c: f64,
    /// `sup_t D(t) / (D(0) exp(C Phi(t)))` on the `delta` and `delta/2` runs
    pub envelope_full: f64,
    pub envelope_half: f64,
    pub envelope_holds: bool,
    /// `D_delta(T) / D_{delta/2}(T)`
    pub final_ratio: f64,
    pub quadratic_scaling: bool,
}

/// Accepted band for `D(delta) / D(delta/2)`.
pub const SCALING_BAND: (f64, f64) = (3.2, 4.8);

const ENVELOPE_TOL: f64 = 1e-9;

fn phi_part(sim: &Simulation) -> Result<f64> {
    let p = sim.params();
    let u = sim.velocity()?;
    Ok(fractional_laplacian(&u, p.alpha, ZeroModePolicy::Annihilate)?.norm_sq()
        + fractional_laplacian(sim.b(), p.beta, ZeroModePolicy::Annihilate)?.norm_sq())
}

/// Reference run from `b0` against runs from `b0 + delta e` and `b0 + delta/2 e`,
/// where `e` is the projected, normalized `perturbation`.
pub fn stability_experiment(
    params: &ModelParams,
    b0: &SpectralField,
    perturbation: &SpectralField,
    delta: f64,
) -> Result<StabilityReport> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    let d = params.grid.d;
    let regime = classify_regime(d, params.alpha, params.beta)?;
    let base = initial_truncate(b0, params)?;
    let mut e = initial_truncate(perturbation, params)?;
    let en = e.norm();
    if en > 0.0 {
        e = e.scaled(1.0 / en);
    }
    let starts = [base.clone(), base.axpy(delta, &e)?, base.axpy(0.5 * delta, &e)?];
    let mut sims = starts.iter().map(|s| Simulation::new(params, s)).collect::<Result<Vec<_>>>()?;
    let h = sims[0].step_size();

    let state = |sims: &[Simulation]| -> Result<(f64, f64, [f64; 3])> {
        let parts = sims.par_iter().map(phi_part).collect::<Result<Vec<_>>>()?;
        Ok((
            sims[1].b().sub(sims[0].b())?.norm_sq(),
            sims[2].b().sub(sims[0].b())?.norm_sq(),
            [parts[0], parts[1], parts[2]],
        ))
    };
    let (d_full, d_half, mut prev) = state(&sims)?;
    let mut records = vec![StabilityRecord { t: 0.0, d_full, d_half, phi_full: 0.0, phi_half: 0.0 }];
    let (mut phi_full, mut phi_half) = (0.0, 0.0);
    while !sims[0].finished() {
        advance_all(&mut sims)?;
        let (d_full, d_half, cur) = state(&sims)?;
        phi_full += 0.5 * h * (2.0 + prev[0] + prev[1] + cur[0] + cur[1]);
        phi_half += 0.5 * h * (2.0 + prev[0] + prev[2] + cur[0] + cur[2]);
        prev = cur;
        let k = sims[0].steps_taken();
        if k % params.record_stride == 0 || sims[0].finished() {
            records.push(StabilityRecord { t: sims[0].t(), d_full, d_half, phi_full, phi_half });
        }
    }

    let (d0_full, d0_half) = (records[0].d_full, records[0].d_half);
    let fitted_c = if d0_full > 0.0 {
        records[1..]
            .iter()
            .filter(|r| r.phi_full > 0.0 && r.d_full > 0.0)
            .map(|r| (r.d_full / d0_full).ln() / r.phi_full)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let envelope = |d0: f64, pick: &dyn Fn(&StabilityRecord) -> (f64, f64)| -> f64 {
        if d0 == 0.0 {
            return 0.0;
        }
        records
            .iter()
            .map(|r| {
                let (dv, phi) = pick(r);
                dv / (d0 * (fitted_c * phi).exp())
            })
            .fold(0.0, f64::max)
    };
    let envelope_full = envelope(d0_full, &|r| (r.d_full, r.phi_full));
    let envelope_half = envelope(d0_half, &|r| (r.d_half, r.phi_half));
    let last = records.last().expect("at least one record");
    let final_ratio = last.d_full / last.d_half;

    let (alpha, beta) = (params.alpha, params.beta);
    let mu = if alpha < 1.0 { ((1.0 - alpha) / beta).min(1.0) } else { 0.0 };
    let selection = exponent_search(d, alpha, beta, mu).ok();
    Ok(StabilityReport {
        delta,
        in_theory: regime.uniqueness,
        regime,
        lambda: (alpha >= 1.0).then(|| (d as f64 + 2.0 - 2.0 * alpha) / (4.0 * beta)),
        mu,
        phi_exponent: selection.map(|s| s.theta1 / (2.0 - s.theta2 - 1.0 / beta)),
        selection,
        fitted_c,
        envelope_holds: envelope_full <= 1.0 + ENVELOPE_TOL && envelope_half <= 1.0 + ENVELOPE_TOL,
        envelope_full,
        envelope_half,
        quadratic_scaling: final_ratio >= SCALING_BAND.0 && final_ratio <= SCALING_BAND.1,
        final_ratio,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolver::add_mode;
    use crate::grid::GridSpec;

    fn params(m: usize, t_final: f64) -> ModelParams {
        ModelParams {
            grid: GridSpec::new(2, m, 1.0).unwrap(),
            alpha: 1.0,
            beta: 1.0,
            nu: 1.0,
            eta: 1.0,
            trunc: TruncationSpec::new(8.0).unwrap(),
            dt: 2e-4,
            t_final,
            snapshot_stride: 0,
            record_stride: 10,
        }
    }

    fn low_mode_field(m: usize) -> SpectralField {
        let g = GridSpec::new(2, m, 1.0).unwrap();
        let mut b = SpectralField::zeros(g, 2);
        add_mode(&mut b, &[0, 1], 0, 0.3, 0.0);
        add_mode(&mut b, &[1, 0], 1, 0.2, 0.5);
        add_mode(&mut b, &[1, 1], 0, 0.2, 1.0);
        add_mode(&mut b, &[1, -1], 1, 0.2, 1.0);
        b
    }

    #[test]
    fn shear_mode_gives_zero_differences() {
        // a single shear mode has b.grad b = 0, so u = 0 and every R evolves identically
        let p = params(48, 0.01);
        let mut b = SpectralField::zeros(p.grid, 2);
        add_mode(&mut b, &[0, 1], 0, 0.3, 0.0);
        let rep = convergence_study(&p, &[2.0, 4.0], &b).unwrap();
        assert!(rep.errors.iter().all(|&e| e < 1e-14), "{:?}", rep.errors);
    }

    #[test]
    fn rejects_bad_lists_and_aliasing() {
        let p = params(48, 0.01);
        let b = low_mode_field(48);
        assert!(convergence_study(&p, &[4.0, 2.0], &b).is_err());
        assert!(convergence_study(&p, &[], &b).is_err());
        assert!(matches!(convergence_study(&p, &[2.0, 8.0], &b), Err(Error::AliasViolation { .. })));
    }

    #[test]
    fn zero_delta_gives_zero_difference() {
        let p = params(48, 0.004);
        let b = low_mode_field(48);
        let rep = stability_experiment(&p, &b, &b, 0.0).unwrap();
        assert!(rep.records.iter().all(|r| r.d_full == 0.0 && r.d_half == 0.0));
        assert_eq!(rep.fitted_c, 0.0);
        assert!(rep.envelope_holds && rep.in_theory);
        assert_eq!(rep.lambda, Some(0.5));
        assert_eq!(rep.mu, 0.0);
    }

    #[test]
    fn difference_scales_quadratically() {
        let p = params(48, 0.01);
        let b = low_mode_field(48);
        let mut e = SpectralField::zeros(*b.grid(), 2);
        add_mode(&mut e, &[2, 1], 0, 1.0, 0.2);
        add_mode(&mut e, &[1, 2], 1, 1.0, 0.7);
        let rep = stability_experiment(&p, &b, &e, 1e-4).unwrap();
        assert!((rep.final_ratio - 4.0).abs() < 0.01, "{}", rep.final_ratio);
        assert!(rep.envelope_holds);
    }
}
