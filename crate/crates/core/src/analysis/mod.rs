//! Parameter regimes, product-estimate exponents, empirical inequality checks,
//! and convergence/stability experiments on the truncated system.

mod estimates;
mod experiments;
mod exponents;
mod regime;

pub use estimates::*;
pub use experiments::*;
pub use exponents::*;
pub use regime::*;
