//! Fractional Stokes system `nu Lambda^{2 alpha} u + grad p = div F`, `div u = 0`.

mod fourier_identity;
mod kernel;
mod window;

pub use fourier_identity::*;
pub use kernel::*;
pub use window::*;

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::ops::{
    check_tensor, check_vector, divergence, fractional_laplacian, gradient, tensor_divergence, vector_gradient,
    ZeroModePolicy,
};

#[derive(Debug, Clone, PartialEq)]
pub struct StokesSolution {
    pub velocity: SpectralField,
    pub pressure: SpectralField,
    pub alpha: f64,
    pub nu: f64,
}

/// Whether `alpha` lies in `(1/2, (d+1)/2)`, where the kernel representation holds.
pub fn alpha_in_kernel_range(alpha: f64, d: usize) -> bool {
    alpha > 0.5 && alpha < (d as f64 + 1.0) / 2.0
}

/// Solves mode by mode; zero modes of `u` and `p` are set to 0.
pub fn solve_stokes_spectral(f: &SpectralField, alpha: f64, nu: f64) -> Result<StokesSolution> {
    check_tensor(f)?;
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    let grid = *f.grid();
    let (d, n) = (grid.d, grid.len());
    let mut u = SpectralField::zeros(grid, d);
    let mut p = SpectralField::zeros(grid, 1);
    u.set_real_valued(f.real_valued());
    p.set_real_valued(f.real_valued());
    let mut fx = [Complex64::default(); 3];
    for flat in 1..n {
        let k = grid.mode(flat);
        let xi = grid.xi_eff(&k);
        let r2: f64 = xi[..d].iter().map(|x| x * x).sum();
        if r2 == 0.0 {
            continue;
        }
        let symbol = nu * (2.0 * PI * grid.freq_norm(&k)).powf(2.0 * alpha);
        // F xi (contraction on the last index) and xi . F xi
        let mut quad = Complex64::default();
        for j in 0..d {
            fx[j] = (0..d).map(|l| f.coeff(j * d + l, flat) * xi[l]).sum();
            quad += fx[j] * xi[j];
        }
        p.coeffs_mut()[flat] = quad / r2;
        let i2pi = Complex64::new(0.0, 2.0 * PI);
        for j in 0..d {
            u.coeffs_mut()[j * n + flat] = i2pi * (fx[j] - quad * (xi[j] / r2)) / symbol;
        }
    }
    Ok(StokesSolution { velocity: u, pressure: p, alpha, nu })
}

/// `||nu Lambda^{2 alpha} u + grad p - div F|| / ||div F||`.
pub fn plugback_residual(sol: &StokesSolution, f: &SpectralField) -> Result<f64> {
    let lu = fractional_laplacian(&sol.velocity, 2.0 * sol.alpha, ZeroModePolicy::Annihilate)?.scaled(sol.nu);
    let div_f = tensor_divergence(f)?;
    let res = lu.add(&gradient(&sol.pressure)?)?.sub(&div_f)?;
    let scale = div_f.norm();
    Ok(if scale == 0.0 { res.norm() } else { res.norm() / scale })
}

/// `|nu ||Lambda^alpha u||^2 - <div F, u>| / max(nu ||Lambda^alpha u||^2, eps)`.
pub fn stokes_energy_residual(sol: &StokesSolution, f: &SpectralField) -> Result<f64> {
    let dissipation = sol.nu * fractional_laplacian(&sol.velocity, sol.alpha, ZeroModePolicy::Annihilate)?.norm_sq();
    let work = tensor_divergence(f)?.inner(&sol.velocity)?;
    Ok((dissipation - work).abs() / dissipation.max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StokesReport {
    pub alpha: f64,
    pub nu: f64,
    pub alpha_in_kernel_range: bool,
    pub energy_residual: f64,
    pub plugback_residual: f64,
    pub max_div_u: f64,
}

pub fn stokes_report(sol: &StokesSolution, f: &SpectralField) -> Result<StokesReport> {
    Ok(StokesReport {
        alpha: sol.alpha,
        nu: sol.nu,
        alpha_in_kernel_range: alpha_in_kernel_range(sol.alpha, f.grid().d),
        energy_residual: stokes_energy_residual(sol, f)?,
        plugback_residual: plugback_residual(sol, f)?,
        max_div_u: divergence(&sol.velocity)?.max_abs_coeff(),
    })
}

/// A test pair for the very weak formulation: a divergence-free `Phi`
/// and/or a scalar `psi` entering through its gradient.
#[derive(Debug, Clone, Default)]
pub struct VeryWeakTest {
    pub phi: Option<SpectralField>,
    pub psi: Option<SpectralField>,
}

/// Largest normalized defect of
/// `nu <u, Lambda^{2 alpha} Phi> + <u, grad psi> + <F, grad Phi>` over the tests.
pub fn very_weak_residual(
    u: &SpectralField,
    f: &SpectralField,
    alpha: f64,
    nu: f64,
    tests: &[VeryWeakTest],
) -> Result<f64> {
    check_vector(u)?;
    check_tensor(f)?;
    let mut worst: f64 = 0.0;
    for t in tests {
        let mut value = 0.0;
        let mut scale = 0.0;
        if let Some(phi) = &t.phi {
            check_vector(phi)?;
            let grad = vector_gradient(phi)?;
            let div = divergence(phi)?.norm();
            if div > 1e-10 * grad.norm().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidParameter(format!("test field not divergence-free: {div:e}")));
            }
            let lphi = fractional_laplacian(phi, 2.0 * alpha, ZeroModePolicy::Annihilate)?.scaled(nu);
            value += u.inner(&lphi)? + f.inner(&grad)?;
            scale += u.norm() * lphi.norm() + f.norm() * grad.norm();
        }
        if let Some(psi) = &t.psi {
            let g = gradient(psi)?;
            value += u.inner(&g)?;
            scale += u.norm() * g.norm();
        }
        if scale > 0.0 {
            worst = worst.max(value.abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::ops::leray_project;
    use crate::random::random_field;

    #[test]
    fn zero_data_zero_solution() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let s = solve_stokes_spectral(&SpectralField::zeros(g, 4), 1.0, 1.0).unwrap();
        assert_eq!(s.velocity.max_abs_coeff(), 0.0);
        assert_eq!(s.pressure.max_abs_coeff(), 0.0);
        assert_eq!(stokes_energy_residual(&s, &SpectralField::zeros(g, 4)).unwrap(), 0.0);
        assert!(solve_stokes_spectral(&SpectralField::zeros(g, 4), 1.0, 0.0).is_err());
        assert!(solve_stokes_spectral(&SpectralField::zeros(g, 2), 1.0, 1.0).is_err());
    }

    #[test]
    fn pure_pressure_datum() {
        let g = GridSpec::new(3, 8, 2.0).unwrap();
        let p = SpectralField::from_fn(g, 1, |x| vec![0.3 + (2.0 * PI * x[1] / g.l).cos()]);
        let n = g.len();
        let mut coeffs = vec![Complex64::default(); 9 * n];
        for j in 0..3 {
            coeffs[(j * 3 + j) * n..(j * 3 + j + 1) * n].copy_from_slice(p.component(0));
        }
        let f = SpectralField::from_coeffs(g, 9, coeffs, true).unwrap();
        let s = solve_stokes_spectral(&f, 1.0, 1.0).unwrap();
        assert!(s.velocity.max_abs_coeff() < 1e-15);
        let mut want = p.clone();
        want.coeffs_mut()[0] = Complex64::default();
        assert!(s.pressure.sub(&want).unwrap().max_abs_coeff() < 1e-15);
        assert_eq!(stokes_energy_residual(&s, &f).unwrap(), 0.0);
    }

    #[test]
    fn random_data_plugback_energy_and_divergence() {
        for (d, m) in [(2, 16), (3, 8)] {
            let g = GridSpec::new(d, m, 1.3).unwrap();
            for alpha in [0.6, 1.0, 1.5] {
                let f = random_field(g, d * d, 1.0, m / 2, 17);
                let s = solve_stokes_spectral(&f, alpha, 0.7).unwrap();
                assert!(plugback_residual(&s, &f).unwrap() < 1e-12);
                assert!(stokes_energy_residual(&s, &f).unwrap() < 1e-12);
                assert!(divergence(&s.velocity).unwrap().max_abs_coeff() < 1e-13 * s.velocity.norm());
                assert!(s.velocity.hermitian_defect() < 1e-14);
                assert_eq!(s.velocity.mean(0).norm(), 0.0);
            }
        }
    }

    #[test]
    fn very_weak_detects_gradient_defect() {
        let g = GridSpec::new(2, 16, 1.0).unwrap();
        let f = random_field(g, 4, 1.0, 6, 3);
        let s = solve_stokes_spectral(&f, 1.0, 1.0).unwrap();
        let tests: Vec<VeryWeakTest> = (0..4)
            .map(|i| VeryWeakTest {
                phi: Some(leray_project(&random_field(g, 2, 1.0, 5, 100 + i)).unwrap()),
                psi: Some(random_field(g, 1, 1.0, 5, 200 + i)),
            })
            .collect();
        assert!(very_weak_residual(&s.velocity, &f, 1.0, 1.0, &tests).unwrap() < 1e-12);
        let c = SpectralField::from_fn(g, 2, |_| vec![1.0, -2.0]);
        assert_eq!(very_weak_residual(&c, &SpectralField::zeros(g, 4), 1.0, 1.0, &tests).unwrap(), 0.0);
        let chi = random_field(g, 1, 1.0, 5, 200);
        let bad = s.velocity.add(&gradient(&chi).unwrap()).unwrap();
        assert!(very_weak_residual(&bad, &f, 1.0, 1.0, &tests).unwrap() > 1e-3);
        let not_solenoidal = VeryWeakTest { phi: Some(random_field(g, 2, 1.0, 3, 9)), psi: None };
        assert!(very_weak_residual(&s.velocity, &f, 1.0, 1.0, &[not_solenoidal]).is_err());
    }
}
