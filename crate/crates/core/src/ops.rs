//! Fourier multipliers and products on the periodic grid.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{GridSpec, TruncationSpec};

/// What a negative-order multiplier does with the zero mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroModePolicy {
    #[default]
    RequireZeroMean,
    Annihilate,
}

pub fn forward_transform(samples: &[f64], grid: GridSpec) -> Result<SpectralField> {
    SpectralField::from_samples(grid, 1, samples)
}

pub fn inverse_transform(f: &SpectralField) -> Vec<f64> {
    f.to_samples()
}

/// Applies a real radial-in-k multiplier to every component.
pub fn apply_multiplier(f: &SpectralField, m: impl Fn(&[i64; 3]) -> f64) -> SpectralField {
    let grid = *f.grid();
    let n = grid.len();
    let mut out = f.clone();
    for flat in 0..n {
        let s = m(&grid.mode(flat));
        for c in 0..f.ncomp() {
            out.coeffs_mut()[c * n + flat] *= s;
        }
    }
    out
}

/// Symbol `(2 pi |k|/L)^s` with the conventions at `k = 0`.
pub fn lambda_symbol(grid: &GridSpec, k: &[i64; 3], s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let r = grid.freq_norm(k);
    if r == 0.0 {
        0.0
    } else {
        (2.0 * PI * r).powf(s)
    }
}

/// `Lambda^s f`.
pub fn fractional_laplacian(f: &SpectralField, s: f64, policy: ZeroModePolicy) -> Result<SpectralField> {
    if s < 0.0 && policy == ZeroModePolicy::RequireZeroMean {
        let scale = f.max_abs_coeff().max(1e-300);
        for c in 0..f.ncomp() {
            let m = f.mean(c).norm();
            if m > 1e-12 * scale {
                return Err(Error::NonzeroMean(m));
            }
        }
    }
    let grid = *f.grid();
    Ok(apply_multiplier(f, |k| lambda_symbol(&grid, k, s)))
}

pub fn check_vector(v: &SpectralField) -> Result<()> {
    let d = v.grid().d;
    if v.ncomp() != d {
        return Err(Error::ComponentMismatch { expected: d, got: v.ncomp() });
    }
    Ok(())
}

pub fn check_scalar(v: &SpectralField) -> Result<()> {
    if v.ncomp() != 1 {
        return Err(Error::ComponentMismatch { expected: 1, got: v.ncomp() });
    }
    Ok(())
}

pub fn check_tensor(v: &SpectralField) -> Result<()> {
    let d = v.grid().d;
    if v.ncomp() != d * d {
        return Err(Error::ComponentMismatch { expected: d * d, got: v.ncomp() });
    }
    Ok(())
}

/// Leray projection `I - xi xi^T / |xi|^2`; the zero mode passes through.
pub fn leray_project(v: &SpectralField) -> Result<SpectralField> {
    check_vector(v)?;
    let grid = *v.grid();
    let (d, n) = (grid.d, grid.len());
    let mut out = v.clone();
    let data = out.coeffs_mut();
    for flat in 0..n {
        let xi = grid.xi_eff(&grid.mode(flat));
        let r2: f64 = xi[..d].iter().map(|x| x * x).sum();
        if r2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::default();
        for a in 0..d {
            dot += data[a * n + flat] * xi[a];
        }
        for a in 0..d {
            data[a * n + flat] -= dot * (xi[a] / r2);
        }
    }
    Ok(out)
}

/// Sharp cutoff `S_R`.
pub fn fourier_truncate(f: &SpectralField, trunc: &TruncationSpec) -> SpectralField {
    let grid = *f.grid();
    apply_multiplier(f, |k| if trunc.keeps(&grid, k) { 1.0 } else { 0.0 })
}

/// L^2 mass of `f` outside the retained set.
pub fn support_defect(f: &SpectralField, trunc: &TruncationSpec) -> f64 {
    let grid = *f.grid();
    let n = grid.len();
    let mut s = 0.0;
    for flat in 0..n {
        if !trunc.keeps(&grid, &grid.mode(flat)) {
            for c in 0..f.ncomp() {
                s += f.coeff(c, flat).norm_sqr();
            }
        }
    }
    (grid.volume() * s).sqrt()
}

/// `d/dx_axis` of every component.
pub fn spectral_derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = *f.grid();
    if axis >= grid.d {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    let n = grid.len();
    let mut out = f.clone();
    let data = out.coeffs_mut();
    for flat in 0..n {
        let xi = grid.xi_eff(&grid.mode(flat));
        let m = Complex64::new(0.0, 2.0 * PI * xi[axis]);
        for c in 0..f.ncomp() {
            data[c * n + flat] *= m;
        }
    }
    Ok(out)
}

/// Gradient of a scalar field.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    check_scalar(f)?;
    let parts = (0..f.grid().d).map(|a| spectral_derivative(f, a)).collect::<Result<Vec<_>>>()?;
    SpectralField::stack(&parts)
}

/// Gradient of a vector field as the tensor `(grad v)^{jk} = d_k v^j`.
pub fn vector_gradient(v: &SpectralField) -> Result<SpectralField> {
    check_vector(v)?;
    let grid = *v.grid();
    let (d, n) = (grid.d, grid.len());
    let mut out = SpectralField::zeros(grid, d * d);
    out.set_real_valued(v.real_valued());
    for flat in 0..n {
        let xi = grid.xi_eff(&grid.mode(flat));
        for j in 0..d {
            let c = v.coeff(j, flat);
            for k in 0..d {
                out.coeffs_mut()[(j * d + k) * n + flat] = c * Complex64::new(0.0, 2.0 * PI * xi[k]);
            }
        }
    }
    Ok(out)
}

pub fn divergence(v: &SpectralField) -> Result<SpectralField> {
    check_vector(v)?;
    let grid = *v.grid();
    let (d, n) = (grid.d, grid.len());
    let mut out = SpectralField::zeros(grid, 1);
    out.set_real_valued(v.real_valued());
    for flat in 0..n {
        let xi = grid.xi_eff(&grid.mode(flat));
        let mut s = Complex64::default();
        for a in 0..d {
            s += v.coeff(a, flat) * xi[a];
        }
        out.coeffs_mut()[flat] = s * Complex64::new(0.0, 2.0 * PI);
    }
    Ok(out)
}

/// `(div T)^j = sum_k d_k T^{jk}` (contraction on the last index).
pub fn tensor_divergence(t: &SpectralField) -> Result<SpectralField> {
    check_tensor(t)?;
    let grid = *t.grid();
    let (d, n) = (grid.d, grid.len());
    let mut out = SpectralField::zeros(grid, d);
    out.set_real_valued(t.real_valued());
    for flat in 0..n {
        let xi = grid.xi_eff(&grid.mode(flat));
        for j in 0..d {
            let mut s = Complex64::default();
            for k in 0..d {
                s += t.coeff(j * d + k, flat) * xi[k];
            }
            out.coeffs_mut()[j * n + flat] = s * Complex64::new(0.0, 2.0 * PI);
        }
    }
    Ok(out)
}

/// Samples of every component, in physical space.
pub(crate) fn physical(f: &SpectralField) -> Vec<Complex64> {
    f.to_complex_samples()
}

/// Pointwise outer product `(f^i g^j)` on the grid, with no truncation.
/// Component `i * g.ncomp() + j` holds `f^i g^j`.
pub fn grid_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *f.grid();
    let n = grid.len();
    let fs = physical(f);
    let gs = if std::ptr::eq(f, g) { fs.clone() } else { physical(g) };
    let real = f.real_valued() && g.real_valued();
    let (cf, cg) = (f.ncomp(), g.ncomp());
    let mut prod = vec![0.0; cf * cg * n];
    let mut cprod = if real { Vec::new() } else { vec![Complex64::default(); cf * cg * n] };
    for i in 0..cf {
        for j in 0..cg {
            let dst = (i * cg + j) * n;
            for p in 0..n {
                let v = fs[i * n + p] * gs[j * n + p];
                if real {
                    prod[dst + p] = v.re;
                } else {
                    cprod[dst + p] = v;
                }
            }
        }
    }
    if real {
        SpectralField::from_samples(grid, cf * cg, &prod)
    } else {
        let mut data = cprod;
        crate::fft::forward(&mut data, grid.d, grid.m);
        let scale = 1.0 / n as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        SpectralField::from_coeffs(grid, cf * cg, data, false)
    }
}

/// `S_R (f g)` computed pseudo-spectrally; exact inside `K_R` under the
/// alias rule `M >= 3 K_max + 1` when both factors live in `K_R`.
pub fn alias_safe_product(f: &SpectralField, g: &SpectralField, trunc: &TruncationSpec) -> Result<SpectralField> {
    trunc.check_quadratic(f.grid())?;
    for h in [f, g] {
        let defect = support_defect(h, trunc);
        if defect > 1e-12 * h.norm().max(1e-300) {
            return Err(Error::SupportViolation(defect));
        }
    }
    Ok(fourier_truncate(&grid_product(f, g)?, trunc))
}
