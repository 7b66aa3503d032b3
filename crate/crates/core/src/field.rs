use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridSpec;

/// Field stored by Fourier coefficients `c_k = M^-d sum_x f(x) e^{-2 pi i k.x/L}`,
/// laid out as `(component, mode)` with modes in row-major FFT order.
///
/// Tensor components are stored row-major too: entry `(j, k)` of a 2-tensor
/// is component `j * d + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    ncomp: usize,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, ncomp: usize) -> Self {
        Self { grid, ncomp, coeffs: vec![Complex64::default(); ncomp * grid.len()], real_valued: true }
    }

    pub fn from_coeffs(grid: GridSpec, ncomp: usize, coeffs: Vec<Complex64>, real_valued: bool) -> Result<Self> {
        let expected = ncomp * grid.len();
        if coeffs.len() != expected || ncomp == 0 {
            return Err(Error::DimensionMismatch { expected, got: coeffs.len() });
        }
        Ok(Self { grid, ncomp, coeffs, real_valued })
    }

    /// Forward transform of real samples laid out `(component, point)`.
    pub fn from_samples(grid: GridSpec, ncomp: usize, samples: &[f64]) -> Result<Self> {
        let expected = ncomp * grid.len();
        if samples.len() != expected || ncomp == 0 {
            return Err(Error::DimensionMismatch { expected, got: samples.len() });
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut data, grid.d, grid.m);
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { grid, ncomp, coeffs: data, real_valued: true })
    }

    /// Samples a function of position on the grid.
    pub fn from_fn(grid: GridSpec, ncomp: usize, f: impl Fn(&[f64; 3]) -> Vec<f64>) -> Self {
        let n = grid.len();
        let mut samples = vec![0.0; ncomp * n];
        for p in 0..n {
            let v = f(&grid.point(p));
            for c in 0..ncomp {
                samples[c * n + p] = v[c];
            }
        }
        Self::from_samples(grid, ncomp, &samples).expect("sizes agree by construction")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn set_real_valued(&mut self, flag: bool) {
        self.real_valued = flag;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    pub fn coeff(&self, c: usize, flat: usize) -> Complex64 {
        self.coeffs[c * self.grid.len() + flat]
    }

    /// Coefficient of the signed wavevector `k`.
    pub fn coeff_at(&self, c: usize, k: &[i64]) -> Complex64 {
        let mut idx = [0usize; 3];
        for a in 0..self.grid.d {
            idx[a] = self.grid.index_of(k[a]);
        }
        self.coeff(c, self.grid.flatten(&idx))
    }

    pub fn set_coeff_at(&mut self, c: usize, k: &[i64], v: Complex64) {
        let mut idx = [0usize; 3];
        for a in 0..self.grid.d {
            idx[a] = self.grid.index_of(k[a]);
        }
        let f = self.grid.flatten(&idx);
        let n = self.grid.len();
        self.coeffs[c * n + f] = v;
    }

    /// Extracts one component as a scalar field.
    pub fn extract(&self, c: usize) -> SpectralField {
        Self { grid: self.grid, ncomp: 1, coeffs: self.component(c).to_vec(), real_valued: self.real_valued }
    }

    /// Stacks fields with a common grid into one multi-component field.
    pub fn stack(parts: &[SpectralField]) -> Result<SpectralField> {
        let first = parts.first().ok_or(Error::ComponentMismatch { expected: 1, got: 0 })?;
        let mut coeffs = Vec::new();
        let mut real = true;
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::GridMismatch);
            }
            coeffs.extend_from_slice(&p.coeffs);
            real &= p.real_valued;
        }
        let ncomp = parts.iter().map(|p| p.ncomp).sum();
        Ok(Self { grid: first.grid, ncomp, coeffs, real_valued: real })
    }

    /// Inverse transform; complex samples laid out `(component, point)`.
    pub fn to_complex_samples(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::inverse(&mut data, self.grid.d, self.grid.m);
        data
    }

    /// Inverse transform keeping the real part.
    pub fn to_samples(&self) -> Vec<f64> {
        self.to_complex_samples().iter().map(|c| c.re).collect()
    }

    pub fn mean(&self, c: usize) -> Complex64 {
        self.coeff(c, 0)
    }

    /// Torus L^2 norm squared: `L^d sum |c_k|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Real part of the torus inner product `int f . conj(g)`.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same(other)?;
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum();
        Ok(self.grid.volume() * s)
    }

    pub fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.ncomp != other.ncomp {
            return Err(Error::ComponentMismatch { expected: self.ncomp, got: other.ncomp });
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += b * s);
        out.real_valued = self.real_valued && other.real_valued;
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from `c(-k) = conj(c(k))`, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.len();
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for c in 0..self.ncomp {
            for f in 0..n {
                let a = self.coeffs[c * n + f];
                let b = self.coeffs[c * n + self.grid.negate(f)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst / scale
    }

    /// Replaces the field by its real part in physical space.
    pub fn symmetrize(&self) -> SpectralField {
        let n = self.grid.len();
        let mut out = self.clone();
        for c in 0..self.ncomp {
            for f in 0..n {
                let a = self.coeffs[c * n + f];
                let b = self.coeffs[c * n + self.grid.negate(f)];
                out.coeffs[c * n + f] = (a + b.conj()) * 0.5;
            }
        }
        out.real_valued = true;
        out
    }
}
