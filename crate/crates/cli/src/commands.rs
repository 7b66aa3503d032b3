//! Subcommand bodies. Each writes its artifacts and returns whether its assertions held.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fracmhd::analysis::{
    classify_regime, commutator_check, convergence_study, exponent_search, gagliardo_check, gn_theta,
    product_estimate_check, refinement_check, sobolev_lorentz_check, stability_experiment,
};
use fracmhd::bogovskii::{corpus_check, refinement_orders};
use fracmhd::evolver::{monotonicity_defect, simulate, DiagnosticRecord, ModelParams};
use fracmhd::ops::check_tensor;
use fracmhd::random::random_field;
use fracmhd::stokes::{
    fourier_identity_check, kernel_window_check, solve_stokes_spectral, stokes_report, GaussianTest,
};
use fracmhd::{snapshot, TruncationSpec};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{missing, ConfigError, EstimateConfig, ExperimentConfig};

/// Energy residual bound for `simulate`.
pub const ENERGY_TOL: f64 = 1e-6;
/// Allowed relative growth of `||b||_2` between records.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// Divergence bound relative to `||b||_2`.
pub const DIV_TOL: f64 = 1e-12;
pub const STOKES_PLUGBACK_TOL: f64 = 1e-10;
pub const STOKES_ENERGY_TOL: f64 = 1e-9;

pub struct Context {
    pub config: ExperimentConfig,
    /// directory of the config file; relative input paths resolve against it
    pub base: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
}

type Outcome = Result<bool, ConfigError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{}: {e}", path.display()))
}

impl Context {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), ConfigError> {
        let path = self.out.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))
    }

    /// Writes `<name>.json` with `passed` merged into the report object.
    fn report(&self, name: &str, report: &impl Serialize, passed: bool) -> Outcome {
        let mut v = serde_json::to_value(report).map_err(|e| ConfigError(e.to_string()))?;
        match &mut v {
            Value::Object(m) => {
                m.insert("passed".into(), Value::Bool(passed));
                m.insert("seed".into(), json!(self.seed));
            }
            other => *other = json!({ "report": other.clone(), "passed": passed, "seed": self.seed }),
        }
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| ConfigError(e.to_string()))?;
        text.push('\n');
        self.write(&format!("{name}.json"), text.as_bytes())?;
        Ok(passed)
    }
}

pub fn simulate_cmd(ctx: &Context) -> Outcome {
    let params = ctx.config.model_params()?;
    let init = ctx.config.initial.as_ref().ok_or_else(|| missing("initial"))?;
    let b0 = init.build(&params, ctx.seed)?;
    let out = simulate(&params, &b0)?;

    let mut csv = String::from(DiagnosticRecord::CSV_HEADER);
    csv.push('\n');
    for r in &out.records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    ctx.write("diagnostics.csv", csv.as_bytes())?;
    let mut snapshots = Vec::new();
    for (i, (t, b)) in out.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:05}.fmhd");
        let path = ctx.out.join(&name);
        snapshot::save(&path, b).map_err(|e| io_err(&path, e))?;
        snapshots.push(json!({ "t": t, "file": name }));
    }

    let max_residual = out.records.iter().map(|r| r.energy_residual).fold(0.0, f64::max);
    let defect = monotonicity_defect(&out.records);
    let div_ok = out.records.iter().all(|r| {
        let bound = DIV_TOL * r.b_l2_sq.sqrt();
        r.max_div_b <= bound && r.max_div_u <= bound
    });
    let passed = max_residual < ENERGY_TOL && defect <= MONOTONE_SLACK && div_ok;
    let summary = json!({
        "d": params.grid.d,
        "M": params.grid.m,
        "L": params.grid.l,
        "alpha": params.alpha,
        "beta": params.beta,
        "nu": params.nu,
        "eta": params.eta,
        "R": params.trunc.r,
        "step_size": out.step_size,
        "records": out.records.len(),
        "final": out.records.last(),
        "max_energy_residual": max_residual,
        "monotonicity_defect": defect,
        "divergence_free": div_ok,
        "snapshots": snapshots,
    });
    ctx.report("summary", &summary, passed)
}

pub fn stokes_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.stokes.as_ref().ok_or_else(|| missing("stokes"))?;
    let f = match &cfg.input {
        Some(p) => {
            let path = ctx.base.join(p);
            snapshot::load(&path).map_err(|e| io_err(&path, e))?
        }
        None => {
            let grid = ctx.config.grid()?;
            let kmax = cfg.kmax.unwrap_or(grid.m / 4);
            random_field(grid, grid.d * grid.d, cfg.spectrum_sigma, kmax, ctx.seed)
        }
    };
    check_tensor(&f)?;
    let sol = solve_stokes_spectral(&f, cfg.alpha, cfg.nu)?;
    let path = ctx.out.join("stokes_velocity.fmhd");
    snapshot::save(&path, &sol.velocity).map_err(|e| io_err(&path, e))?;
    let report = stokes_report(&sol, &f)?;
    let passed = report.plugback_residual < STOKES_PLUGBACK_TOL && report.energy_residual < STOKES_ENERGY_TOL;
    ctx.report("stokes", &report, passed)
}

pub fn kernel_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.kernel.as_ref().ok_or_else(|| missing("kernel"))?;
    let mut identities = Vec::new();
    for case in &cfg.identities {
        let d = case.powers.len();
        if !(2..=3).contains(&d) {
            return Err(ConfigError(format!("powers must have 2 or 3 entries, got {d}")));
        }
        let mut powers = [0; 3];
        powers[..d].copy_from_slice(&case.powers);
        identities.push(fourier_identity_check(case.part, case.lambda, &case.indices, GaussianTest::new(d, powers))?);
    }
    let window = cfg.window.as_ref().map(|w| kernel_window_check(w.alpha, w.n_half, &w.box_factors)).transpose()?;
    let passed = identities.iter().all(|r| r.passed) && window.as_ref().map_or(true, |w| w.decreasing && w.within_tolerance);
    ctx.report("kernel-check", &json!({ "identities": identities, "window": window }), passed)
}

pub fn regime_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.regime.ok_or_else(|| missing("regime"))?;
    let report = classify_regime(cfg.d, cfg.alpha, cfg.beta)?;
    let passed = report.remarks_consistent;
    ctx.report("regime", &report, passed)
}

pub fn estimate_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.estimate.as_ref().ok_or_else(|| missing("estimate"))?;
    let grid = ctx.config.grid()?;
    let seed = ctx.seed;
    let report = match *cfg {
        EstimateConfig::Product { alpha, beta, mu, trials } => {
            let sel = exponent_search(grid.d, alpha, beta, mu)?;
            refinement_check(grid, |g| product_estimate_check(&sel, trials, g, seed))?
        }
        EstimateConfig::Gagliardo { s0, s, p, p1, theta, trials } => {
            let theta = theta.unwrap_or_else(|| gn_theta(grid.d, s0, s, p, p1));
            refinement_check(grid, |g| gagliardo_check(s0, s, p, p1, theta, trials, g, seed))?
        }
        EstimateConfig::SobolevLorentz { s, p, p1, theta, trials } => {
            refinement_check(grid, |g| sobolev_lorentz_check(s, p, p1, theta, trials, g, seed))?
        }
        EstimateConfig::Commutator { s, gamma, trials } => {
            refinement_check(grid, |g| commutator_check(s, gamma, trials, g, seed))?
        }
    };
    let passed = report.stable;
    ctx.report("estimate-check", &report, passed)
}

/// Parameters for experiments that set `R` themselves; `model.R` only fixes the initial projection.
fn base_params(ctx: &Context, fallback_r: f64) -> Result<ModelParams, ConfigError> {
    let mut cfg = ctx.config.clone();
    if let Some(m) = cfg.model.as_mut() {
        m.r.get_or_insert(fallback_r);
    }
    cfg.model_params()
}

pub fn convergence_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.convergence.as_ref().ok_or_else(|| missing("convergence"))?;
    let top = cfg.r_list.iter().copied().fold(0.0, f64::max);
    let params = base_params(ctx, 2.0 * top)?;
    let init = ctx.config.initial.as_ref().ok_or_else(|| missing("initial"))?;
    let b0 = init.build(&params, ctx.seed)?;
    let base = ModelParams { trunc: TruncationSpec::new(top)?, ..params };
    let report = convergence_study(&base, &cfg.r_list, &b0)?;
    let passed = report.strictly_decreasing;
    ctx.report("convergence", &report, passed)
}

pub fn stability_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.stability.as_ref().ok_or_else(|| missing("stability"))?;
    let params = ctx.config.model_params()?;
    let init = ctx.config.initial.as_ref().ok_or_else(|| missing("initial"))?;
    let b0 = init.build(&params, ctx.seed)?;
    let e = cfg.perturbation.build(&params, ctx.seed.wrapping_add(1))?;
    let report = stability_experiment(&params, &b0, &e, cfg.delta)?;
    let passed = report.quadratic_scaling && report.envelope_holds;
    ctx.report("stability", &report, passed)
}

pub fn bogovskii_cmd(ctx: &Context) -> Outcome {
    let cfg = ctx.config.bogovskii.as_ref().ok_or_else(|| missing("bogovskii"))?;
    let corpus = corpus_check(cfg.samples, cfg.half_width, cfg.weight_half_width)?;
    let orders = cfg
        .refine_from
        .map(|n| refinement_orders(n, cfg.samples, cfg.half_width, cfg.weight_half_width))
        .transpose()?;
    let min_order = orders.as_ref().map(|o| o.iter().map(|r| r.order).fold(f64::INFINITY, f64::min));
    let passed = corpus.max_error < cfg.tolerance && min_order.map_or(true, |o| o >= 4.0);
    let report = json!({
        "tolerance": cfg.tolerance,
        "corpus": corpus,
        "orders": orders,
        "min_order": min_order,
    });
    ctx.report("bogovskii-check", &report, passed)
}

/// Flushes stdout so progress lines interleave sensibly with stderr diagnostics.
pub fn announce(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
