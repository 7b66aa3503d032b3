//! Seeded band-limited random fields with power-law spectra.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::field::SpectralField;
use crate::grid::GridSpec;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real, mean-zero field with modes `0 < |k|_inf <= kmax` and amplitudes
/// `|k|^-sigma` times complex Gaussians.
pub fn random_field(grid: GridSpec, ncomp: usize, sigma: f64, kmax: usize, seed: u64) -> SpectralField {
    let mut r = rng(seed);
    random_field_with(grid, ncomp, sigma, kmax, &mut r)
}

pub fn random_field_with(grid: GridSpec, ncomp: usize, sigma: f64, kmax: usize, r: &mut ChaCha8Rng) -> SpectralField {
    let mut pred = |k: &[i64; 3]| {
        let inf = k[..grid.d].iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
        inf <= kmax
    };
    random_field_where(grid, ncomp, sigma, &mut pred, r)
}

/// Like [`random_field`] but restricted to modes selected by `keep`.
pub fn random_field_where(
    grid: GridSpec,
    ncomp: usize,
    sigma: f64,
    keep: &mut dyn FnMut(&[i64; 3]) -> bool,
    r: &mut ChaCha8Rng,
) -> SpectralField {
    let n = grid.len();
    let nyq = grid.m as i64 / 2;
    let mut coeffs = vec![Complex64::default(); ncomp * n];
    for c in 0..ncomp {
        for flat in 0..n {
            let k = grid.mode(flat);
            let zero = k[..grid.d].iter().all(|&v| v == 0);
            let nyquist = k[..grid.d].iter().any(|&v| v == -nyq);
            if zero || nyquist || !keep(&k) {
                continue;
            }
            let kn = k[..grid.d].iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            let amp = kn.powf(-sigma);
            let re: f64 = StandardNormal.sample(r);
            let im: f64 = StandardNormal.sample(r);
            coeffs[c * n + flat] = Complex64::new(re, im) * amp;
        }
    }
    let f = SpectralField::from_coeffs(grid, ncomp, coeffs, false).expect("sizes agree");
    f.symmetrize()
}
