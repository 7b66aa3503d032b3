//! Experiment configuration files.
//!
//! All physics lives in a TOML file; unknown keys are rejected. Global keys:
//!
//! ```toml
//! seed = 1
//! output_dir = "out"
//!
//! [grid]
//! d = 2
//! M = 64
//! L = 6.283185307179586
//!
//! [model]
//! alpha = 1.0
//! beta = 1.0
//! nu = 1.0
//! eta = 1.0
//! R = 1.5915494309189535
//!
//! [time]
//! dt = 1e-3
//! T_final = 1.0
//! snapshot_stride = 0
//! record_stride = 10
//!
//! [initial]
//! kind = "random"          # or "modes"
//! spectrum_sigma = 1.0
//! seed = 1
//! kmax = 10
//! norm = 10.0
//! ```
//!
//! `kind = "zero"` starts from rest. A mode list reads `kind = "modes"` with
//! `modes = [{ k = [0, 1], component = 0, amplitude = 1.0, phase = 0.0 }]`.
//! Subcommand sections (`[stokes]`, `[kernel]`, `[regime]`, `[estimate]`,
//! `[convergence]`, `[stability]`, `[bogovskii]`) are documented on their types.

use std::path::{Path, PathBuf};

use fracmhd::evolver::{add_mode, ModelParams};
use fracmhd::random::random_field;
use fracmhd::{GridSpec, SpectralField, TruncationSpec};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub grid: Option<GridConfig>,
    pub model: Option<ModelConfig>,
    pub time: Option<TimeConfig>,
    pub initial: Option<InitialConfig>,
    pub stokes: Option<StokesConfig>,
    pub kernel: Option<KernelConfig>,
    pub regime: Option<RegimeConfig>,
    pub estimate: Option<EstimateConfig>,
    pub convergence: Option<ConvergenceConfig>,
    pub stability: Option<StabilityConfig>,
    pub bogovskii: Option<BogovskiiConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub eta: f64,
    /// Fourier cutoff; replaced by the R list in `convergence`
    #[serde(rename = "R")]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    #[serde(rename = "T_final")]
    pub t_final: f64,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default = "one")]
    pub record_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: Vec<i64>,
    pub component: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    Modes {
        modes: Vec<ModeSpec>,
    },
    Zero,
    Random {
        spectrum_sigma: f64,
        seed: Option<u64>,
        /// infinity-norm band of the raw field before truncation
        kmax: Option<usize>,
        /// L2 norm after projection and truncation
        norm: Option<f64>,
    },
}

/// `[stokes]`: solves for the load in `input` (a tensor snapshot, relative to
/// the config file), or for a random band-limited load when `input` is absent.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StokesConfig {
    pub alpha: f64,
    #[serde(default = "unit")]
    pub nu: f64,
    pub input: Option<PathBuf>,
    #[serde(default = "unit")]
    pub spectrum_sigma: f64,
    pub kmax: Option<usize>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCase {
    pub part: u8,
    pub lambda: f64,
    pub indices: Vec<usize>,
    /// monomial powers of the Gaussian test function, one per axis
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub alpha: f64,
    /// window nodes per unit length
    pub n_half: usize,
    pub box_factors: Vec<usize>,
}

/// `[kernel]`: Fourier identity cases and an optional two-dimensional window comparison.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub identities: Vec<IdentityCase>,
    pub window: Option<WindowConfig>,
}

/// `[regime]`
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub d: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// `[estimate]`, selected by `inequality`; runs on `[grid]` and its doubling.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "inequality", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EstimateConfig {
    Product { alpha: f64, beta: f64, #[serde(default)] mu: f64, trials: usize },
    Gagliardo { s0: f64, s: f64, p: f64, p1: f64, theta: Option<f64>, trials: usize },
    SobolevLorentz { s: f64, p: f64, p1: f64, theta: f64, trials: usize },
    Commutator { s: f64, gamma: f64, trials: usize },
}

/// `[convergence]`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub r_list: Vec<f64>,
}

/// `[stability]`; the perturbation is projected and normalized before scaling by `delta`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub delta: f64,
    pub perturbation: InitialConfig,
}

/// `[bogovskii]`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BogovskiiConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_weight_half_width")]
    pub weight_half_width: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// coarser resolution for the observed order; skipped when absent
    pub refine_from: Option<usize>,
}

fn default_samples() -> usize {
    256
}
fn default_half_width() -> f64 {
    4.0
}
fn default_weight_half_width() -> f64 {
    fracmhd::bogovskii::WEIGHT_HALF_WIDTH
}
fn default_tolerance() -> f64 {
    1e-6
}

/// A configuration problem; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<fracmhd::Error> for ConfigError {
    fn from(e: fracmhd::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn missing(section: &str) -> ConfigError {
    ConfigError(format!("missing [{section}] section"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        let g = self.grid.ok_or_else(|| missing("grid"))?;
        Ok(GridSpec::new(g.d, g.m, g.l)?)
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let grid = self.grid()?;
        let m = self.model.ok_or_else(|| missing("model"))?;
        let t = self.time.ok_or_else(|| missing("time"))?;
        let r = m.r.ok_or_else(|| ConfigError("missing model.R".into()))?;
        let params = ModelParams {
            grid,
            alpha: m.alpha,
            beta: m.beta,
            nu: m.nu,
            eta: m.eta,
            trunc: TruncationSpec::new(r)?,
            dt: t.dt,
            t_final: t.t_final,
            snapshot_stride: t.snapshot_stride,
            record_stride: t.record_stride,
        };
        params.validate()?;
        Ok(params)
    }
}

impl InitialConfig {
    /// Builds `P S_R b0`; `norm` is imposed after the projection.
    pub fn build(&self, params: &ModelParams, default_seed: u64) -> Result<SpectralField, ConfigError> {
        let grid = params.grid;
        match self {
            InitialConfig::Modes { modes } => {
                let mut b = SpectralField::zeros(grid, grid.d);
                let half = (grid.m / 2) as i64;
                for m in modes {
                    if m.k.len() != grid.d || m.component >= grid.d || m.k.iter().any(|k| k.abs() >= half) {
                        return Err(ConfigError(format!("bad mode {:?} for d = {}, M = {}", m.k, grid.d, grid.m)));
                    }
                    add_mode(&mut b, &m.k, m.component, m.amplitude, m.phase);
                }
                Ok(fracmhd::evolver::initial_truncate(&b, params)?)
            }
            InitialConfig::Zero => Ok(SpectralField::zeros(grid, grid.d)),
            InitialConfig::Random { spectrum_sigma, seed, kmax, norm } => {
                let kmax = kmax.unwrap_or_else(|| params.trunc.k_max(&grid));
                let raw = random_field(grid, grid.d, *spectrum_sigma, kmax, seed.unwrap_or(default_seed));
                let b = fracmhd::evolver::initial_truncate(&raw, params)?;
                Ok(match norm {
                    Some(n) if b.norm() > 0.0 => b.scaled(n / b.norm()),
                    _ => b,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let e = toml::from_str::<ExperimentConfig>("[grid]\nd = 2\nM = 16\nL = 1.0\nextra = 3\n");
        assert!(e.is_err());
        let e = toml::from_str::<ExperimentConfig>("bogus = 1\n");
        assert!(e.is_err());
        let e = toml::from_str::<ExperimentConfig>("[estimate]\ninequality = \"commutator\"\ns = 1.0\ngamma = 1.5\ntrials = 3\nzzz = 1\n");
        assert!(e.is_err());
    }

    #[test]
    fn tagged_sections_parse() {
        let c: ExperimentConfig = toml::from_str(
            "[estimate]\ninequality = \"sobolev-lorentz\"\ns = 1.0\np = 4.0\np1 = 2.0\ntheta = 0.5\ntrials = 3\n\
             [initial]\nkind = \"modes\"\nmodes = [{ k = [0, 1], component = 0, amplitude = 1.0 }]\n",
        )
        .unwrap();
        assert!(matches!(c.estimate, Some(EstimateConfig::SobolevLorentz { .. })));
        assert!(matches!(c.initial, Some(InitialConfig::Modes { .. })));
    }
}
