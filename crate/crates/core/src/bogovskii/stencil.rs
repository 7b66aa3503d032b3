//! Polynomial stencils on a uniform axis: cumulative integration and first derivatives.

/// Stencil order used by the cumulative rule and the divergence check.
pub const ORDER: usize = 8;

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).expect("nonempty");
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Weights `w` with `sum_k w_k o_k^m = moment(m)` for `m < offsets.len()`.
fn stencil(offsets: &[f64], moment: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = offsets.len();
    let a = (0..n).map(|m| offsets.iter().map(|o| o.powi(m as i32)).collect()).collect();
    solve(a, (0..n).map(moment).collect())
}

/// Stencils for one axis of `n` uniformly spaced samples with spacing `h`.
#[derive(Debug, Clone)]
pub struct AxisRule {
    pub n: usize,
    pub h: f64,
    /// `int_{x_i}^{x_{i+1}} u ~ sum_k w_k u_{s+k}` as `(s, w)`, already scaled by `h`
    intervals: Vec<(usize, Vec<f64>)>,
    /// `u'(x_i) ~ sum_k w_k u_{s+k}`, scaled by `1/h`
    derivative: Vec<(usize, Vec<f64>)>,
    /// total weights; equal to the sum of the interval rules
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(n: usize, h: f64) -> Self {
        assert!(n > ORDER + 1, "axis needs more than {} samples", ORDER + 1);
        let q = ORDER;
        let intervals: Vec<(usize, Vec<f64>)> = (0..n - 1)
            .map(|i| {
                let s = i.saturating_sub(q / 2 - 1).min(n - q);
                let offs: Vec<f64> = (s..s + q).map(|o| o as f64 - i as f64).collect();
                let w = stencil(&offs, |m| 1.0 / (m as f64 + 1.0));
                (s, w.into_iter().map(|v| v * h).collect())
            })
            .collect();
        let derivative = (0..n)
            .map(|i| {
                let s = i.saturating_sub(q / 2).min(n - q - 1);
                let offs: Vec<f64> = (s..s + q + 1).map(|o| o as f64 - i as f64).collect();
                let w = stencil(&offs, |m| if m == 1 { 1.0 } else { 0.0 });
                (s, w.into_iter().map(|v| v / h).collect())
            })
            .collect();
        let mut weights = vec![0.0; n];
        for (s, w) in &intervals {
            for (k, v) in w.iter().enumerate() {
                weights[s + k] += v;
            }
        }
        Self { n, h, intervals, derivative, weights }
    }

    pub fn integral(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v).sum()
    }

    /// `U_i = int_{x_0}^{x_i} u`.
    pub fn cumulative(&self, u: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        for (i, (s, w)) in self.intervals.iter().enumerate() {
            let step: f64 = w.iter().zip(&u[*s..]).map(|(a, b)| a * b).sum();
            out[i + 1] = out[i] + step;
        }
    }

    pub fn derivative(&self, u: &[f64], out: &mut [f64]) {
        for (i, (s, w)) in self.derivative.iter().enumerate() {
            out[i] = w.iter().zip(&u[*s..]).map(|(a, b)| a * b).sum();
        }
    }
}
