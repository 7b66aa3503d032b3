//! Pseudo-spectral tools for the fractional Stokes-magneto system
//!
//! ```text
//! d_t b + eta Lambda^{2 beta} b = (b.grad) u - (u.grad) b
//! nu Lambda^{2 alpha} u + grad p = div(b (x) b),   div u = div b = 0
//! ```
//!
//! on a periodic box, with the Fourier convention `f^(xi) = int e^{-2 pi i x.xi} f`.

pub mod analysis;
pub mod bogovskii;
pub mod error;
pub mod evolver;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod ops;
pub mod random;
pub mod quad;
pub mod snapshot;
pub mod stokes;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::{GridSpec, TruncationSpec};
pub use rustfft::num_complex::Complex64;
