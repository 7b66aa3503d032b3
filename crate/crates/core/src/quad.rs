//! One-dimensional quadrature rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    ((kron * h), ((kron - gauss) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    val: Complex64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss-Kronrod (7, 15) for complex integrands.
pub fn adaptive_gk(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Result<Complex64> {
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.norm()) {
        if heap.len() >= max_pieces {
            return Err(Error::Quadrature(format!("error estimate {err:e} after {max_pieces} pieces")));
        }
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, val: v2, err: e2 });
    }
    // re-sum to shed accumulated cancellation error
    Ok(heap.iter().map(|p| p.val).sum())
}

/// `int_0^R f(r) dr` for `f(r) ~ r^a` near 0 with `a > -1`, via `r = R t^g`
/// chosen so the transformed integrand vanishes linearly at `t = 0`.
pub fn radial_integral(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    r_max: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    if a <= -1.0 {
        return Err(Error::Quadrature(format!("non-integrable singularity r^{a}")));
    }
    let g = if a < 1.0 { 2.0 / (a + 1.0) } else { 1.0 };
    adaptive_gk(
        |t| {
            if t <= 0.0 {
                return Complex64::default();
            }
            let r = r_max * t.powf(g);
            f(r) * (r_max * g * t.powf(g - 1.0))
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        20_000,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_smooth_and_singular() {
        let v = adaptive_gk(|x| Complex64::new(x.exp(), 0.0), 0.0, 1.0, 1e-14, 1e-14, 100).unwrap();
        assert!((v.re - (1f64.exp() - 1.0)).abs() < 1e-14);
        let s = radial_integral(|r| Complex64::new(r.powf(-0.8) * (-r).exp(), 0.0), -0.8, 40.0, 0.0, 1e-13).unwrap();
        // Gamma(0.2)
        assert!((s.re - 4.590843711998803).abs() < 1e-11, "{}", s.re);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg {deg}");
        }
    }
}
