//! JSON parameter files.
//!
//! Every field is optional; missing fields take the defaults below (the
//! published VIX calibration, per trading day). Unknown fields are rejected.
//!
//! ```json
//! {
//!   "fou": { "alpha": 0.0333, "m": 5.9915, "nu": 0.3333, "h": 0.75, "x0": null },
//!   "lambda": 0.05,
//!   "rho": -0.02,
//!   "jumps": { "family": "compound_poisson_exp", "kappa1": 30.0, "kappa2": 25.0 },
//!   "sigma0_sq": null,
//!   "s0": 100.0,
//!   "rate": 0.0,
//!   "drift": null,
//!   "quad": { "abs_tol": 1e-10, "rel_tol": 1e-8, "max_depth": 40 },
//!   "series": { "beta2": null, "max_terms": 20, "target_abs_error": null }
//! }
//! ```
//!
//! `x0 = null` starts `X` at `m`; `sigma0_sq = null` sets `σ₀² = e^{X₀}`;
//! `drift = null` picks `c₁ = r − κ(ρ)`, `c₂ = ½` so the discounted price is
//! a martingale.

use std::path::Path;

use fracvol_core::backtest::BacktestParams;
use fracvol_core::fou::FouParams;
use fracvol_core::levy::{FamilyKind, SubordinatorSpec};
use fracvol_core::pricing::{ModelParams, SeriesConfig};
use fracvol_core::quad::QuadConfig;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FouFile {
    pub alpha: f64,
    pub m: f64,
    pub nu: f64,
    pub h: f64,
    pub x0: Option<f64>,
}

impl Default for FouFile {
    fn default() -> Self {
        let b = BacktestParams::default();
        Self { alpha: b.alpha, m: b.m, nu: b.nu, h: b.h, x0: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpFamily {
    None,
    CompoundPoissonExp,
    Gamma,
    InverseGaussian,
}

/// Subordinator calibrated to its first two cumulants per day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpsFile {
    pub family: JumpFamily,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Default for JumpsFile {
    fn default() -> Self {
        let b = BacktestParams::default();
        Self { family: JumpFamily::CompoundPoissonExp, kappa1: b.kappa1, kappa2: b.kappa2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftFile {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadFile {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadFile {
    fn default() -> Self {
        let q = QuadConfig::default();
        Self { abs_tol: q.abs_tol, rel_tol: q.rel_tol, max_depth: q.max_depth }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesFile {
    pub beta2: Option<f64>,
    pub max_terms: usize,
    pub target_abs_error: Option<f64>,
}

impl Default for SeriesFile {
    fn default() -> Self {
        let s = SeriesConfig::default();
        Self { beta2: s.beta2, max_terms: s.max_terms, target_abs_error: s.target_abs_error }
    }
}

/// Complete parameter file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsFile {
    pub fou: FouFile,
    pub lambda: f64,
    pub rho: f64,
    pub jumps: JumpsFile,
    pub sigma0_sq: Option<f64>,
    pub s0: f64,
    /// Continuously compounded rate per day.
    pub rate: f64,
    pub drift: Option<DriftFile>,
    pub quad: QuadFile,
    pub series: SeriesFile,
}

impl Default for ParamsFile {
    fn default() -> Self {
        Self {
            fou: FouFile::default(),
            lambda: BacktestParams::default().lambda,
            rho: -0.02,
            jumps: JumpsFile::default(),
            sigma0_sq: None,
            s0: 100.0,
            rate: 0.0,
            drift: None,
            quad: QuadFile::default(),
            series: SeriesFile::default(),
        }
    }
}

impl ParamsFile {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Config(format!("parameter file: {e}")))
    }

    pub fn spec(&self) -> AppResult<SubordinatorSpec> {
        let kind = match self.jumps.family {
            JumpFamily::None => return Ok(SubordinatorSpec::none()),
            JumpFamily::CompoundPoissonExp => FamilyKind::CompoundPoissonExp,
            JumpFamily::Gamma => FamilyKind::Gamma,
            JumpFamily::InverseGaussian => FamilyKind::InverseGaussian,
        };
        Ok(SubordinatorSpec::from_cumulants(kind, self.jumps.kappa1, self.jumps.kappa2)?)
    }

    pub fn quad(&self) -> AppResult<QuadConfig> {
        let q = QuadConfig { abs_tol: self.quad.abs_tol, rel_tol: self.quad.rel_tol, max_depth: self.quad.max_depth };
        q.validate()?;
        Ok(q)
    }

    pub fn series(&self) -> SeriesConfig {
        SeriesConfig {
            beta2: self.series.beta2,
            max_terms: self.series.max_terms,
            target_abs_error: self.series.target_abs_error,
            ..SeriesConfig::default()
        }
    }

    /// Model parameters, validated.
    pub fn model(&self) -> AppResult<ModelParams> {
        let f = &self.fou;
        let x0 = f.x0.unwrap_or(f.m);
        let fou = FouParams::new(f.alpha, f.m, f.nu, f.h, x0)?;
        let p = ModelParams {
            fou,
            lambda: self.lambda,
            rho: self.rho,
            c1: 0.0,
            c2: 0.0,
            sigma0_sq: self.sigma0_sq.unwrap_or_else(|| x0.exp()),
            s0: self.s0,
            spec: self.spec()?,
        };
        let p = match self.drift {
            Some(d) => ModelParams { c1: d.c1, c2: d.c2, ..p },
            None => p.with_martingale_drift(self.rate)?,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameter block of the model comparison.
    pub fn backtest(&self) -> AppResult<BacktestParams> {
        let b = BacktestParams {
            alpha: self.fou.alpha,
            m: self.fou.m,
            nu: self.fou.nu,
            h: self.fou.h,
            lambda: self.lambda,
            kappa1: self.jumps.kappa1,
            kappa2: self.jumps.kappa2,
        };
        b.validate()?;
        Ok(b)
    }
}
