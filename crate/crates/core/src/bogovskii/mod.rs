//! A right inverse of the divergence for compactly supported data on a box.
//!
//! With `phi = phi_1(x_1) ... phi_d(x_d)`, `gbar = g - phi int g` and the
//! marginals `G_0 = gbar`, `G_k(x_{k+1}, ...) = int G_{k-1} dx_k`,
//!
//! ```text
//! S^(j) = phi_1 ... phi_{j-1} (G_{j-1} - phi_j G_j),    B(g)_j = T^(j) S^(j)
//! ```
//!
//! where `T^(j)` integrates along axis `j` from the left edge. In two dimensions
//! this reads `S^(1) = gbar - phi_1 G_1` and `S^(2) = phi_1 G_1`, since `G_2 = 0`.
//! Each `S^(j)` has vanishing line integrals along axis `j`, so `T^(j) S^(j)`
//! keeps compact support and `div B(g) = gbar`.

mod corpus;
mod stencil;

pub use corpus::*;
pub use stencil::{AxisRule, ORDER};

use crate::error::{Error, Result};

/// Tolerance on line integrals and weight masses.
pub const LINE_TOL: f64 = 1e-10;
/// Threshold below which boundary values count as decayed.
pub const DECAY_TOL: f64 = 1e-14;

/// `n` samples per axis on `[-a, a]^d`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    pub d: usize,
    pub n: usize,
    pub a: f64,
}

impl BoxGrid {
    pub fn new(d: usize, n: usize, a: f64) -> Result<Self> {
        if !(d == 2 || d == 3) {
            return Err(Error::InvalidParameter(format!("box dimension must be 2 or 3, got {d}")));
        }
        if n <= ORDER + 1 {
            return Err(Error::InvalidParameter(format!("need more than {} samples per axis, got {n}", ORDER + 1)));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("half-width must be positive, got {a}")));
        }
        Ok(Self { d, n, a })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.a / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.a + i as f64 * self.h()
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for ax in (0..self.d).rev() {
            idx[ax] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.index(flat);
        let mut x = [0.0; 3];
        for ax in 0..self.d {
            x[ax] = self.coord(idx[ax]);
        }
        x
    }

    pub fn rule(&self) -> AxisRule {
        AxisRule::new(self.n, self.h())
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }
}

/// Real samples on a [`BoxGrid`], row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxFunction {
    grid: BoxGrid,
    values: Vec<f64>,
}

impl BoxFunction {
    pub fn new(grid: BoxGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: BoxGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: BoxGrid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|p| f(&grid.point(p))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest magnitude within `layer` samples of the boundary.
    pub fn boundary_max(&self, layer: usize) -> f64 {
        let n = self.grid.n;
        let near = |i: usize| i < layer || i + layer >= n;
        (0..self.values.len())
            .filter(|&p| self.grid.index(p)[..self.grid.d].iter().any(|&i| near(i)))
            .fold(0.0, |a, p| a.max(self.values[p].abs()))
    }

    /// Whether the function is negligible on the outer stencil layer.
    pub fn decays(&self) -> bool {
        self.boundary_max(ORDER) < DECAY_TOL
    }

    fn check_same(&self, other: &BoxFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &BoxFunction) -> Result<BoxFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn sub(&self, other: &BoxFunction) -> Result<BoxFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scaled(&self, s: f64) -> BoxFunction {
        Self { grid: self.grid, values: self.values.iter().map(|v| s * v).collect() }
    }

    /// `int g` over the box.
    pub fn integral(&self, rule: &AxisRule) -> f64 {
        let mut cur = self.values.clone();
        for _ in 0..self.grid.d {
            cur = cur.chunks(self.grid.n).map(|line| rule.integral(line)).collect();
        }
        cur[0]
    }

    /// Applies `f(line_in, line_out)` to every line along `axis`.
    fn map_lines(&self, axis: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> BoxFunction {
        let g = self.grid;
        let (n, stride) = (g.n, g.stride(axis));
        let outer = g.len() / (n * stride);
        let mut out = vec![0.0; g.len()];
        let (mut src, mut dst) = (vec![0.0; n], vec![0.0; n]);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * n * stride + i;
                for k in 0..n {
                    src[k] = self.values[base + k * stride];
                }
                f(&src, &mut dst);
                for k in 0..n {
                    out[base + k * stride] = dst[k];
                }
            }
        }
        Self { grid: g, values: out }
    }

    /// `int u dx_axis`, returned constant along `axis`.
    pub fn marginal(&self, axis: usize, rule: &AxisRule) -> BoxFunction {
        self.map_lines(axis, |src, dst| dst.fill(rule.integral(src)))
    }

    /// Largest line integral along `axis`.
    pub fn line_integral_residual(&self, axis: usize, rule: &AxisRule) -> f64 {
        let mut worst = 0.0f64;
        self.map_lines(axis, |src, _| worst = worst.max(rule.integral(src).abs()));
        worst
    }

    pub fn derivative(&self, axis: usize, rule: &AxisRule) -> BoxFunction {
        self.map_lines(axis, |src, dst| rule.derivative(src, dst))
    }

    /// Pointwise product with a function of `x_axis` alone.
    fn times_axis(&self, axis: usize, w: &[f64]) -> BoxFunction {
        self.map_lines(axis, |src, dst| {
            for k in 0..src.len() {
                dst[k] = src[k] * w[k];
            }
        })
    }
}

/// One-dimensional unit-mass weights `phi_i`, sampled on the box axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisWeights {
    pub per_axis: Vec<Vec<f64>>,
}

/// `exp(1/(t^2 - 1))` on `(-1, 1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 / (t * t - 1.0)).exp()
    } else {
        0.0
    }
}

/// Default half-width of the weight bumps.
pub const WEIGHT_HALF_WIDTH: f64 = 3.0;

impl AxisWeights {
    /// `phi_i(t) = c bump(t / w)` with `c` fixing the discrete mass to 1.
    pub fn bump(grid: &BoxGrid, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width < grid.a) {
            return Err(Error::InvalidParameter(format!("weight half-width {half_width} must lie in (0, {})", grid.a)));
        }
        let rule = grid.rule();
        let raw: Vec<f64> = (0..grid.n).map(|i| bump(grid.coord(i) / half_width)).collect();
        let mass = rule.integral(&raw);
        let phi: Vec<f64> = raw.iter().map(|v| v / mass).collect();
        Ok(Self { per_axis: vec![phi; grid.d] })
    }

    fn check(&self, grid: &BoxGrid, rule: &AxisRule) -> Result<()> {
        if self.per_axis.len() != grid.d || self.per_axis.iter().any(|w| w.len() != grid.n) {
            return Err(Error::DimensionMismatch { expected: grid.d * grid.n, got: self.per_axis.iter().map(Vec::len).sum() });
        }
        for (axis, w) in self.per_axis.iter().enumerate() {
            let mass = rule.integral(w);
            if (mass - 1.0).abs() > LINE_TOL {
                return Err(Error::WeightMass { axis, mass });
            }
        }
        Ok(())
    }

    /// `phi(x) = prod_i phi_i(x_i)` on the grid.
    pub fn product(&self, grid: &BoxGrid) -> BoxFunction {
        let mut f = BoxFunction { grid: *grid, values: vec![1.0; grid.len()] };
        for (axis, w) in self.per_axis.iter().enumerate() {
            f = f.times_axis(axis, w);
        }
        f
    }
}

/// `T^(j) u (x) = int_{-a}^{x_j} u dt`; needs vanishing line integrals along `axis`.
#[allow(non_snake_case)]
pub fn antiderivative_T(u: &BoxFunction, axis: usize) -> Result<BoxFunction> {
    if axis >= u.grid.d {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    let rule = u.grid.rule();
    let residual = u.line_integral_residual(axis, &rule);
    if residual > LINE_TOL * u.max_abs().max(1.0) {
        return Err(Error::LineIntegral { axis, residual });
    }
    Ok(u.map_lines(axis, |src, dst| rule.cumulative(src, dst)))
}

/// `g - phi int g`.
pub fn mean_corrected(g: &BoxFunction, weights: &AxisWeights) -> Result<BoxFunction> {
    let rule = g.grid.rule();
    weights.check(&g.grid, &rule)?;
    let total = g.integral(&rule);
    g.sub(&weights.product(&g.grid).scaled(total))
}

/// `S^(1) g, ..., S^(d) g`.
#[allow(non_snake_case)]
pub fn split_S(g: &BoxFunction, weights: &AxisWeights) -> Result<Vec<BoxFunction>> {
    let grid = g.grid;
    let rule = grid.rule();
    let mut prev = mean_corrected(g, weights)?;
    let mut out = Vec::with_capacity(grid.d);
    for j in 0..grid.d {
        let next = prev.marginal(j, &rule);
        let mut s = if j + 1 < grid.d {
            prev.sub(&next.times_axis(j, &weights.per_axis[j]))?
        } else {
            // G_d is the total integral of gbar, which vanishes
            prev
        };
        for (i, w) in weights.per_axis[..j].iter().enumerate() {
            s = s.times_axis(i, w);
        }
        out.push(s);
        prev = next;
    }
    Ok(out)
}

#[allow(non_snake_case)]
pub fn bogovskii_B(g: &BoxFunction, weights: &AxisWeights) -> Result<Vec<BoxFunction>> {
    split_S(g, weights)?
        .iter()
        .enumerate()
        .map(|(j, s)| antiderivative_T(s, j))
        .collect()
}

/// Finite-difference divergence of a vector of box functions.
pub fn fd_divergence(components: &[BoxFunction]) -> Result<BoxFunction> {
    let first = components.first().ok_or_else(|| Error::InvalidParameter("no components".into()))?;
    let grid = first.grid;
    if components.len() != grid.d {
        return Err(Error::ComponentMismatch { expected: grid.d, got: components.len() });
    }
    let rule = grid.rule();
    let mut acc = BoxFunction::zeros(grid);
    for (axis, c) in components.iter().enumerate() {
        acc = acc.add(&c.derivative(axis, &rule))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> BoxGrid {
        BoxGrid::new(2, n, 4.0).unwrap()
    }

    fn h(x: &[f64; 3]) -> f64 {
        corpus_bump(((x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2)).sqrt() / 3.0)
    }

    // analytic d/dx1 of h
    fn dh(x: &[f64; 3]) -> f64 {
        let (dx, dy) = (x[0] - 0.3, x[1] + 0.2);
        let s = (dx * dx + dy * dy) / 9.0;
        if s >= 1.0 {
            return 0.0;
        }
        h(x) * (-2.0 / (s - 1.0).powi(2)) * 2.0 * dx / 9.0
    }

    #[test]
    fn antiderivative_of_derivative() {
        let g = grid2(256);
        let t = antiderivative_T(&BoxFunction::from_fn(g, dh), 0).unwrap();
        let err = t.sub(&BoxFunction::from_fn(g, h)).unwrap().max_abs();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn antiderivative_of_zero_and_symmetry() {
        let g = grid2(64);
        assert_eq!(antiderivative_T(&BoxFunction::zeros(g), 1).unwrap().max_abs(), 0.0);
        let odd = BoxFunction::from_fn(g, |x| x[0] * bump(x[0].hypot(x[1]) / 3.0));
        let t = antiderivative_T(&odd, 0).unwrap();
        let n = g.n;
        for i in 0..n {
            for j in 0..n {
                let a = t.values()[i * n + j];
                let b = t.values()[(n - 1 - i) * n + j];
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(t.boundary_max(1) < 1e-14);
    }

    #[test]
    fn antiderivative_refuses_nonzero_line_integral() {
        let u = BoxFunction::from_fn(grid2(64), h);
        assert!(matches!(antiderivative_T(&u, 0), Err(Error::LineIntegral { axis: 0, .. })));
    }

    #[test]
    fn split_of_weight_is_zero() {
        let g = grid2(64);
        let w = AxisWeights::bump(&g, WEIGHT_HALF_WIDTH).unwrap();
        let parts = split_S(&w.product(&g), &w).unwrap();
        let sum = parts[0].add(&parts[1]).unwrap();
        assert!(sum.max_abs() < 1e-14);
    }

    #[test]
    fn split_of_mean_zero_data_sums_to_data() {
        let g = grid2(64);
        let w = AxisWeights::bump(&g, WEIGHT_HALF_WIDTH).unwrap();
        // odd in x1 on a symmetric grid, so the discrete integral vanishes
        let u = BoxFunction::from_fn(g, |x| x[0] * corpus_bump(x[0].hypot(x[1]) / 3.0));
        let parts = split_S(&u, &w).unwrap();
        let sum = parts[0].add(&parts[1]).unwrap();
        assert!(sum.sub(&u).unwrap().max_abs() < 1e-12 * u.max_abs());
    }

    #[test]
    fn split_parts_have_zero_line_integrals() {
        for d in [2, 3] {
            let g = BoxGrid::new(d, 40, 4.0).unwrap();
            let w = AxisWeights::bump(&g, WEIGHT_HALF_WIDTH).unwrap();
            let u = BoxFunction::from_fn(g, |x| bump((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() / 3.0) * (1.0 + x[0]));
            let rule = g.rule();
            let parts = split_S(&u, &w).unwrap();
            let total = parts.iter().skip(1).try_fold(parts[0].clone(), |a, b| a.add(b)).unwrap();
            let gbar = mean_corrected(&u, &w).unwrap();
            assert!(total.sub(&gbar).unwrap().max_abs() < 1e-13);
            for (j, s) in parts.iter().enumerate() {
                assert!(s.line_integral_residual(j, &rule) < 1e-10);
            }
        }
    }

    #[test]
    fn weight_mass_checked() {
        let g = grid2(32);
        let mut w = AxisWeights::bump(&g, 2.0).unwrap();
        w.per_axis[1].iter_mut().for_each(|v| *v *= 1.01);
        let u = BoxFunction::from_fn(g, h);
        assert!(matches!(split_S(&u, &w), Err(Error::WeightMass { axis: 1, .. })));
    }

    #[test]
    fn divergence_of_derivative_data() {
        let g = grid2(256);
        let w = AxisWeights::bump(&g, WEIGHT_HALF_WIDTH).unwrap();
        let u = BoxFunction::from_fn(g, dh);
        let div = fd_divergence(&bogovskii_B(&u, &w).unwrap()).unwrap();
        let err = div.sub(&u).unwrap().max_abs();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn weight_maps_to_divergence_free_field() {
        let g = grid2(64);
        let w = AxisWeights::bump(&g, WEIGHT_HALF_WIDTH).unwrap();
        let b = bogovskii_B(&w.product(&g), &w).unwrap();
        assert!(b.iter().all(|c| c.max_abs() < 1e-14));
    }

    #[test]
    fn linear() {
        let g = grid2(64);
        let w = AxisWeights::bump(&g, WEIGHT_HALF_WIDTH).unwrap();
        let u = BoxFunction::from_fn(g, h);
        let v = BoxFunction::from_fn(g, |x| x[1] * bump(x[0].hypot(x[1]) / 3.0));
        let sum = bogovskii_B(&u.add(&v).unwrap(), &w).unwrap();
        let (bu, bv) = (bogovskii_B(&u, &w).unwrap(), bogovskii_B(&v, &w).unwrap());
        for j in 0..2 {
            let diff = sum[j].sub(&bu[j].add(&bv[j]).unwrap()).unwrap().max_abs();
            assert!(diff < 1e-12 * sum[j].max_abs().max(1.0));
        }
    }
}
