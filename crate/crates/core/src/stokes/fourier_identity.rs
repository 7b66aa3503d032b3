//! Two-sided quadrature of the Fourier identities for `xi^gamma / |xi|^lambda`
//! paired with Gaussian-polynomial test functions.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, radial_integral};

/// `psi(x) = prod_a x_a^{powers[a]} exp(-pi |x|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GaussianTest {
    pub d: usize,
    pub powers: [u32; 3],
}

fn hermite(n: u32, t: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * t);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * t * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

impl GaussianTest {
    pub fn new(d: usize, powers: [u32; 3]) -> Self {
        Self { d, powers }
    }

    pub fn degree(&self) -> u32 {
        self.powers[..self.d].iter().sum()
    }

    pub fn psi(&self, x: &[f64]) -> f64 {
        let r2: f64 = x[..self.d].iter().map(|v| v * v).sum();
        let poly: f64 = (0..self.d).map(|a| x[a].powi(self.powers[a] as i32)).product();
        poly * (-PI * r2).exp()
    }

    /// `psi^vee(xi) = int e^{2 pi i x.xi} psi(x) dx`, one Hermite factor per axis.
    pub fn psi_check(&self, xi: &[f64]) -> Complex64 {
        let r2: f64 = xi[..self.d].iter().map(|v| v * v).sum();
        let c = Complex64::new(0.0, 1.0 / (2.0 * PI.sqrt()));
        let mut v = Complex64::new((-PI * r2).exp(), 0.0);
        for a in 0..self.d {
            let n = self.powers[a];
            v *= c.powu(n) * hermite(n, PI.sqrt() * xi[a]);
        }
        v
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FourierIdentityReport {
    pub part: u8,
    pub d: usize,
    pub lambda: f64,
    pub indices: Vec<usize>,
    pub powers: Vec<u32>,
    pub frequency_side: [f64; 2],
    pub space_side: [f64; 2],
    pub discrepancy: f64,
    /// both sides vanish (odd integrand)
    pub trivial: bool,
    pub passed: bool,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-6;
const R_MAX: f64 = 8.0;

fn angular_nodes(d: usize) -> Vec<([f64; 3], f64)> {
    if d == 2 {
        let n = 64;
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                ([t.cos(), t.sin(), 0.0], 2.0 * PI / n as f64)
            })
            .collect()
    } else {
        let (z, w) = gauss_legendre(24);
        let nphi = 48;
        let mut out = Vec::with_capacity(z.len() * nphi);
        for (zi, wi) in z.iter().zip(&w) {
            let s = (1.0 - zi * zi).sqrt();
            for k in 0..nphi {
                let t = 2.0 * PI * k as f64 / nphi as f64;
                out.push(([s * t.cos(), s * t.sin(), *zi], wi * 2.0 * PI / nphi as f64));
            }
        }
        out
    }
}

fn spherical_integral(
    d: usize,
    f: impl Fn(&[f64; 3], f64) -> Complex64,
    leading_power: f64,
) -> Result<Complex64> {
    let nodes = angular_nodes(d);
    let shell = |r: f64, absolute: bool| {
        let mut acc = Complex64::default();
        let mut x = [0.0; 3];
        for (w, wt) in &nodes {
            for a in 0..d {
                x[a] = r * w[a];
            }
            let v = f(&x, r);
            acc += if absolute { Complex64::new(v.norm(), 0.0) } else { v } * *wt;
        }
        acc * r.powi(d as i32 - 1)
    };
    let a = leading_power + d as f64 - 1.0;
    // integral of |f| sets the absolute floor, so cancelling integrands terminate
    let mass = radial_integral(|r| shell(r, true), a, R_MAX, 0.0, 1e-6)?.re;
    radial_integral(|r| shell(r, false), a, R_MAX, 1e-14 * mass, 1e-12)
}

/// Evaluates both sides of identity `part` (1, 2 or 3).
pub fn fourier_identity_check(part: u8, lambda: f64, indices: &[usize], test: GaussianTest) -> Result<FourierIdentityReport> {
    let d = test.d;
    if d != 2 && d != 3 {
        return Err(Error::InvalidParameter(format!("d must be 2 or 3, got {d}")));
    }
    let order = part as usize;
    if !(1..=3).contains(&order) || indices.len() != order || indices.iter().any(|&i| i >= d) {
        return Err(Error::InvalidParameter(format!("part {part} with indices {indices:?}")));
    }
    let df = d as f64;
    let lo = order as f64;
    if !(lambda > lo && lambda < df + lo) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside ({lo}, {})", df + lo)));
    }
    let deg = test.degree() as f64;

    let lhs = spherical_integral(
        d,
        |xi, r| {
            let mut v = test.psi_check(xi) / r.powf(lambda);
            for &i in indices {
                v *= Complex64::new(0.0, -2.0 * PI * xi[i]);
            }
            v
        },
        lo - lambda,
    )?;

    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let pre = |top: f64| 2.0 * gamma(top / 2.0) / (gamma(lambda / 2.0) * PI.powf(df / 2.0 - lambda));
    let rhs = match part {
        1 => {
            let (j, c) = (indices[0], pre(df + 2.0 - lambda));
            let e = df + 2.0 - lambda;
            spherical_integral(d, |x, r| Complex64::new(c * x[j] / r.powf(e) * test.psi(x), 0.0), 1.0 - e + deg)?
        }
        2 => {
            let (j, k, c) = (indices[0], indices[1], pre(df + 2.0 - lambda));
            let e = df + 4.0 - lambda;
            spherical_integral(
                d,
                |x, r| {
                    let num = (df + 2.0 - lambda) * x[j] * x[k] - delta(j, k) * r * r;
                    Complex64::new(c * num / r.powf(e) * test.psi(x), 0.0)
                },
                2.0 - e + deg,
            )?
        }
        _ => {
            let (j, k, l) = (indices[0], indices[1], indices[2]);
            let c = 2.0 * pre(df + 4.0 - lambda);
            let e = df + 4.0 - lambda;
            spherical_integral(
                d,
                |x, r| {
                    let re = r.powf(-e);
                    let dl = (delta(l, j) * x[k] + delta(l, k) * x[j]) * re - e * x[j] * x[k] * x[l] * re / (r * r);
                    let v = -dl - delta(j, k) * x[l] * re;
                    Complex64::new(c * v * test.psi(x), 0.0)
                },
                1.0 - e + deg,
            )?
        }
    };

    let scale = lhs.norm().max(rhs.norm());
    let trivial = scale < 1e-12;
    let discrepancy = if trivial { 0.0 } else { (lhs - rhs).norm() / scale };
    Ok(FourierIdentityReport {
        part,
        d,
        lambda,
        indices: indices.to_vec(),
        powers: test.powers[..d].to_vec(),
        frequency_side: [lhs.re, lhs.im],
        space_side: [rhs.re, rhs.im],
        discrepancy,
        trivial,
        passed: discrepancy < IDENTITY_TOLERANCE,
    })
}
