//! Kernel convolution against the periodic spectral solve on a compactly supported load.

use serde::Serialize;

use super::kernel::{kernel_convolve, BoxSamples, KernelSpec, SingularCellRule};
use super::solve_stokes_spectral;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;

/// Largest accepted relative window error.
pub const WINDOW_TOLERANCE: f64 = 1e-2;

const LOAD: [[f64; 2]; 2] = [[1.0, 0.5], [0.5, -1.0]];

fn bump0(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Zero-mean load `(bump(x) - 4 bump(2x)) A` supported in the unit disc.
pub fn window_load(x: &[f64; 3]) -> Vec<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = bump0(r2) - 4.0 * bump0(4.0 * r2);
    vec![s * LOAD[0][0], s * LOAD[0][1], s * LOAD[1][0], s * LOAD[1][1]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelWindowReport {
    pub alpha: f64,
    pub h: f64,
    /// torus side over the window side
    pub box_factors: Vec<usize>,
    /// relative L2 difference on the window nodes, one per box factor
    pub errors: Vec<f64>,
    pub decreasing: bool,
    pub within_tolerance: bool,
}

/// Compares the kernel sum on the nodes of `[-1, 1]^2` (spacing `1/n_half`)
/// with the spectral solution on tori of side `2 * factor`.
pub fn kernel_window_check(alpha: f64, n_half: usize, box_factors: &[usize]) -> Result<KernelWindowReport> {
    if n_half == 0 || box_factors.iter().any(|&f| f < 2) {
        return Err(Error::InvalidParameter("need n_half >= 1 and box factors >= 2".into()));
    }
    let d = 2;
    let spec = KernelSpec::new(alpha, d)?;
    let h = 1.0 / n_half as f64;
    let n = 2 * n_half + 1;
    let samples = BoxSamples::from_fn(d, n, h, [-1.0, -1.0, 0.0], window_load);
    let targets: Vec<[f64; 3]> = (0..n * n).map(|p| samples.point(p)).collect();
    let direct = kernel_convolve(&samples, &spec, &targets, SingularCellRule::Exclude)?;
    let norm: f64 = direct.iter().map(|u| u[0] * u[0] + u[1] * u[1]).sum::<f64>().sqrt();

    let mut errors = Vec::with_capacity(box_factors.len());
    for &factor in box_factors {
        let m = 2 * factor * n_half;
        let side = 2.0 * factor as f64;
        let grid = GridSpec::new(d, m, side)?;
        let centre = side / 2.0;
        let load = SpectralField::from_fn(grid, d * d, |x| window_load(&[x[0] - centre, x[1] - centre, 0.0]));
        let u = solve_stokes_spectral(&load, alpha, 1.0)?.velocity.to_samples();
        let np = grid.len();
        let mut diff = 0.0;
        for i in 0..n {
            for j in 0..n {
                let flat = grid.flatten(&[m / 2 - n_half + i, m / 2 - n_half + j]);
                let ud = direct[i * n + j];
                diff += (u[flat] - ud[0]).powi(2) + (u[np + flat] - ud[1]).powi(2);
            }
        }
        errors.push(diff.sqrt() / norm);
    }
    Ok(KernelWindowReport {
        alpha,
        h,
        box_factors: box_factors.to_vec(),
        decreasing: errors.windows(2).all(|w| w[1] < w[0]),
        within_tolerance: errors.iter().all(|&e| e < WINDOW_TOLERANCE),
        errors,
    })
}
