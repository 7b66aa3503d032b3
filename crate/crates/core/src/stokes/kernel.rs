//! Green kernel of the fractional Stokes system and direct convolution.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// `c(alpha, d) = Gamma(1 + d/2 - alpha) / (2^{2 alpha} pi^{d/2} Gamma(1 + alpha))`.
pub fn kernel_coefficient(alpha: f64, d: usize) -> Result<f64> {
    if !super::alpha_in_kernel_range(alpha, d) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (1/2, {})", (d as f64 + 1.0) / 2.0)));
    }
    let df = d as f64;
    Ok(gamma(1.0 + df / 2.0 - alpha) / (4f64.powf(alpha) * std::f64::consts::PI.powf(df / 2.0) * gamma(1.0 + alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub alpha: f64,
    pub d: usize,
    pub coefficient: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidParameter(format!("d must be 2 or 3, got {d}")));
        }
        Ok(Self { alpha, d, coefficient: kernel_coefficient(alpha, d)? })
    }

    /// Degree of homogeneity is `-(d + 1 - 2 alpha)`.
    pub fn decay_exponent(&self) -> f64 {
        self.d as f64 + 1.0 - 2.0 * self.alpha
    }

    fn e(&self) -> f64 {
        self.d as f64 + 2.0 - 2.0 * self.alpha
    }

    /// `sum_{kl} U_j^{kl}(x) F^{kl}` for all `j`, with `F` row-major `d x d`.
    pub fn contract(&self, x: &[f64], f: &[f64], out: &mut [f64]) {
        let d = self.d;
        let r2: f64 = x[..d].iter().map(|v| v * v).sum();
        let scale = self.coefficient * r2.powf(-0.5 * self.e());
        let mut trace = 0.0;
        let mut quad = 0.0;
        for k in 0..d {
            trace += f[k * d + k];
            for l in 0..d {
                quad += x[k] * f[k * d + l] * x[l];
            }
        }
        let e = self.e();
        let a = 2.0 * self.alpha - 1.0;
        for j in 0..d {
            let mut ftx = 0.0;
            let mut fx = 0.0;
            for k in 0..d {
                ftx += f[k * d + j] * x[k];
                fx += f[j * d + k] * x[k];
            }
            out[j] = scale * (ftx + x[j] * trace - e * x[j] * quad / r2 - a * fx);
        }
    }
}

/// `U_j^{kl}(x) = c [D_l(x_j x_k / |x|^e) - delta_jk (2 alpha - 1) x_l / |x|^e]`, `e = d + 2 - 2 alpha`.
pub fn kernel_evaluate(x: &[f64], j: usize, k: usize, l: usize, spec: &KernelSpec) -> Result<f64> {
    let d = spec.d;
    if j >= d || k >= d || l >= d || x.len() < d {
        return Err(Error::InvalidParameter("kernel index out of range".into()));
    }
    let r2: f64 = x[..d].iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::Singular);
    }
    let e = spec.e();
    let re = r2.powf(-0.5 * e);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let deriv = (delta(l, j) * x[k] + delta(l, k) * x[j]) * re - e * x[j] * x[k] * x[l] * re / r2;
    Ok(spec.coefficient * (deriv - delta(j, k) * (2.0 * spec.alpha - 1.0) * x[l] * re))
}

/// Frobenius norm of the full kernel tensor at `x`.
pub fn kernel_magnitude(x: &[f64], spec: &KernelSpec) -> Result<f64> {
    let d = spec.d;
    let mut s = 0.0;
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                s += kernel_evaluate(x, j, k, l, spec)?.powi(2);
            }
        }
    }
    Ok(s.sqrt())
}

/// Quasi-uniform points on the unit sphere.
pub fn sphere_points(d: usize, n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            if d == 2 {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [t.cos(), t.sin(), 0.0]
            } else {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                [r * t.cos(), r * t.sin(), z]
            }
        })
        .collect()
}

/// Sampled `sup_{|x| = 1} |U(x)|`; the decay bound is `|U(x)| <= C |x|^{-(d+1-2 alpha)}`.
pub fn kernel_sphere_constant(spec: &KernelSpec, samples: usize) -> f64 {
    sphere_points(spec.d, samples)
        .iter()
        .map(|x| kernel_magnitude(x, spec).expect("unit vector"))
        .fold(0.0, f64::max)
}

/// How a target that sits on a source node is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingularCellRule {
    /// drop the coincident node (the kernel is locally integrable)
    #[default]
    Exclude,
    Forbid,
}

/// Tensor samples on a uniform box `origin + h * i`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSamples {
    pub d: usize,
    pub n: usize,
    pub h: f64,
    pub origin: [f64; 3],
    /// `d * d` components, each `n^d` values row-major
    pub values: Vec<f64>,
}

impl BoxSamples {
    pub fn from_fn(d: usize, n: usize, h: f64, origin: [f64; 3], f: impl Fn(&[f64; 3]) -> Vec<f64>) -> Self {
        let np = n.pow(d as u32);
        let mut values = vec![0.0; d * d * np];
        for p in 0..np {
            let x = Self::node(d, n, h, &origin, p);
            let v = f(&x);
            for c in 0..d * d {
                values[c * np + p] = v[c];
            }
        }
        Self { d, n, h, origin, values }
    }

    fn node(d: usize, n: usize, h: f64, origin: &[f64; 3], mut p: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in (0..d).rev() {
            x[a] = origin[a] + h * (p % n) as f64;
            p /= n;
        }
        x
    }

    pub fn point(&self, p: usize) -> [f64; 3] {
        Self::node(self.d, self.n, self.h, &self.origin, p)
    }
}

/// `u_j(x) = sum_y sum_{kl} U_j^{kl}(x - y) F^{kl}(y) h^d` at every target.
pub fn kernel_convolve(
    f: &BoxSamples,
    spec: &KernelSpec,
    targets: &[[f64; 3]],
    rule: SingularCellRule,
) -> Result<Vec<[f64; 3]>> {
    let d = f.d;
    if spec.d != d {
        return Err(Error::DimensionMismatch { expected: spec.d, got: d });
    }
    let np = f.n.pow(d as u32);
    if f.values.len() != d * d * np {
        return Err(Error::DimensionMismatch { expected: d * d * np, got: f.values.len() });
    }
    let cell = f.h.powi(d as i32);
    let sources: Vec<([f64; 3], [f64; 9])> = (0..np)
        .filter_map(|p| {
            let mut t = [0.0; 9];
            for c in 0..d * d {
                t[c] = f.values[c * np + p] * cell;
            }
            t.iter().any(|v| *v != 0.0).then(|| (f.point(p), t))
        })
        .collect();
    let hit = 1e-9 * f.h;
    targets
        .par_iter()
        .map(|x| {
            let mut u = [0.0; 3];
            let mut buf = [0.0; 3];
            let mut z = [0.0; 3];
            for (y, t) in &sources {
                for a in 0..d {
                    z[a] = x[a] - y[a];
                }
                if z[..d].iter().map(|v| v * v).sum::<f64>().sqrt() < hit {
                    match rule {
                        SingularCellRule::Exclude => continue,
                        SingularCellRule::Forbid => return Err(Error::Singular),
                    }
                }
                spec.contract(&z, t, &mut buf);
                for a in 0..d {
                    u[a] += buf[a];
                }
            }
            Ok(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn coefficient_in_three_dimensions() {
        let c = kernel_coefficient(1.0, 3).unwrap();
        assert!((c - 1.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-12 * c);
        assert!(kernel_coefficient(0.5, 3).is_err());
        assert!(kernel_coefficient(2.0, 3).is_err());
    }

    #[test]
    fn gamma_accuracy() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let mut fact = 1.0;
        for n in 1..10 {
            assert!((gamma(n as f64) - fact).abs() < 1e-12 * fact);
            fact *= n as f64;
        }
    }

    #[test]
    fn coefficient_is_smooth_in_alpha() {
        // second differences shrink like h^2
        for d in [2, 3] {
            let a0 = 0.9;
            let second = |h: f64| {
                let c = |a| kernel_coefficient(a, d).unwrap();
                (c(a0 + h) - 2.0 * c(a0) + c(a0 - h)).abs()
            };
            let r = second(1e-2) / second(5e-3);
            assert!((r - 4.0).abs() < 0.1, "d={d} r={r}");
        }
    }

    #[test]
    fn contraction_matches_componentwise() {
        let spec = KernelSpec::new(1.2, 3).unwrap();
        let x = [0.3, -0.7, 1.1];
        let f = [1.0, 2.0, -0.5, 0.3, 0.0, 1.5, -1.0, 0.25, 0.7];
        let mut out = [0.0; 3];
        spec.contract(&x, &f, &mut out);
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += kernel_evaluate(&x, j, k, l, &spec).unwrap() * f[k * 3 + l];
                }
            }
            assert!((s - out[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneity_oddness_and_decay() {
        let mut r = crate::random::rng(5);
        for (alpha, d) in [(1.0, 2), (1.0, 3), (0.8, 2)] {
            let spec = KernelSpec::new(alpha, d).unwrap();
            let c = kernel_sphere_constant(&spec, 4000);
            for _ in 0..50 {
                let x: Vec<f64> = (0..d).map(|_| r.gen_range(-3.0..3.0)).collect();
                let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
                let xm: Vec<f64> = x.iter().map(|v| -v).collect();
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                for (j, k, l) in [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)] {
                    let u = kernel_evaluate(&x, j, k, l, &spec).unwrap();
                    let u2 = kernel_evaluate(&x2, j, k, l, &spec).unwrap();
                    assert!((u2 - 2f64.powf(-spec.decay_exponent()) * u).abs() < 1e-12 * u.abs().max(1e-12));
                    assert!((kernel_evaluate(&xm, j, k, l, &spec).unwrap() + u).abs() < 1e-14 * u.abs().max(1.0));
                }
                let m = kernel_magnitude(&x, &spec).unwrap();
                assert!(m * norm.powf(spec.decay_exponent()) <= c * 1.01);
            }
            assert!(matches!(kernel_evaluate(&vec![0.0; d], 0, 0, 0, &spec), Err(Error::Singular)));
        }
    }

    #[test]
    fn convolution_linear_and_singular_rules() {
        let spec = KernelSpec::new(1.0, 2).unwrap();
        let bump = |x: &[f64; 3], s: f64| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 < 1.0 {
                s * (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        };
        let f1 = BoxSamples::from_fn(2, 17, 0.125, [-1.0, -1.0, 0.0], |x| vec![bump(x, 1.0), 0.0, bump(x, 0.5), 0.0]);
        let f2 = BoxSamples::from_fn(2, 17, 0.125, [-1.0, -1.0, 0.0], |x| vec![0.0, bump(x, 2.0), 0.0, -bump(x, 1.0)]);
        let sum = BoxSamples { values: f1.values.iter().zip(&f2.values).map(|(a, b)| a + b).collect(), ..f1.clone() };
        let targets = [[0.0, 0.0, 0.0], [0.3, 0.01, 0.0], [2.0, -1.5, 0.0]];
        let a = kernel_convolve(&f1, &spec, &targets, SingularCellRule::Exclude).unwrap();
        let b = kernel_convolve(&f2, &spec, &targets, SingularCellRule::Exclude).unwrap();
        let s = kernel_convolve(&sum, &spec, &targets, SingularCellRule::Exclude).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert!((s[i][j] - a[i][j] - b[i][j]).abs() < 1e-12 * (1.0 + s[i][j].abs()));
            }
        }
        assert!(kernel_convolve(&f1, &spec, &targets, SingularCellRule::Forbid).is_err());
        let zero = BoxSamples { values: vec![0.0; f1.values.len()], ..f1 };
        let z = kernel_convolve(&zero, &spec, &targets, SingularCellRule::Forbid).unwrap();
        assert!(z.iter().all(|u| u.iter().all(|v| *v == 0.0)));
    }
}
