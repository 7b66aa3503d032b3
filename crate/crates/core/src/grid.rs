use crate::error::{Error, Result};

/// Periodic box `[0, L)^d` with `M` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub d: usize,
    pub m: usize,
    pub l: f64,
}

impl GridSpec {
    pub fn new(d: usize, m: usize, l: f64) -> Result<Self> {
        if d != 2 && d != 3 {
            return Err(Error::InvalidParameter(format!("d must be 2 or 3, got {d}")));
        }
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidParameter(format!("M must be even and >= 4, got {m}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
        }
        Ok(Self { d, m, l })
    }

    /// Number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l / self.m as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    /// Signed integer wavenumber of FFT-order index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.m / 2 {
            i as i64
        } else {
            i as i64 - self.m as i64
        }
    }

    /// FFT-order index of signed wavenumber `k`.
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.m as i64) as usize
    }

    /// Per-axis FFT-order indices of a flat row-major index (axis 0 slowest).
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.m;
            flat /= self.m;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.d].iter().fold(0, |acc, &i| acc * self.m + i)
    }

    /// Signed wavevector of flat mode index.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut k = [0i64; 3];
        for a in 0..self.d {
            k[a] = self.wavenumber(idx[a]);
        }
        k
    }

    /// Flat index of the mode `-k`.
    pub fn negate(&self, flat: usize) -> usize {
        let idx = self.unflatten(flat);
        let mut out = [0usize; 3];
        for a in 0..self.d {
            out[a] = (self.m - idx[a]) % self.m;
        }
        self.flatten(&out)
    }

    /// Continuous frequency |k|/L.
    pub fn freq_norm(&self, k: &[i64; 3]) -> f64 {
        k[..self.d].iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt() / self.l
    }

    /// Frequency k/L used by derivatives: the Nyquist component is dropped
    /// so that odd multipliers stay Hermitian.
    pub fn xi_eff(&self, k: &[i64; 3]) -> [f64; 3] {
        let nyq = -(self.m as i64 / 2);
        let mut xi = [0.0; 3];
        for a in 0..self.d {
            if k[a] != nyq {
                xi[a] = k[a] as f64 / self.l;
            }
        }
        xi
    }

    /// Physical coordinate of grid point along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = self.coord(idx[a]);
        }
        x
    }
}

/// Sharp Fourier cutoff keeping `|k|/L <= R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    pub r: f64,
}

impl TruncationSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter(format!("R must be positive, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn keeps(&self, grid: &GridSpec, k: &[i64; 3]) -> bool {
        // tolerance so that R = |k|/L computed in floating point keeps the shell
        grid.freq_norm(k) <= self.r * (1.0 + 1e-12)
    }

    /// Largest per-axis wavenumber in the retained set.
    pub fn k_max(&self, grid: &GridSpec) -> usize {
        (self.r * grid.l * (1.0 + 1e-12)).floor() as usize
    }

    /// `M >= 3 K_max + 1`: a product of two fields in K_R is exact inside K_R.
    pub fn check_quadratic(&self, grid: &GridSpec) -> Result<()> {
        self.check_factor(grid, 3)
    }

    /// `M >= 4 K_max + 1`: needed when one factor is itself a product of
    /// fields in K_R (the velocity lives on K_{2R}).
    pub fn check_cubic(&self, grid: &GridSpec) -> Result<()> {
        self.check_factor(grid, 4)
    }

    fn check_factor(&self, grid: &GridSpec, factor: usize) -> Result<()> {
        let k_max = self.k_max(grid);
        let needed = factor * k_max + 1;
        if grid.m < needed {
            return Err(Error::AliasViolation { m: grid.m, needed, k_max });
        }
        Ok(())
    }
}
