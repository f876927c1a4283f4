//! Fractional Ornstein–Uhlenbeck log-variance factor
//! `dX = α (m − X) dt + ν dW^H`.
//!
//! ```text
//! mean   μ(t)   = e^{−αt} (X₀ − m) + m
//! cov    C(s,t) = ν² [ρ_H(s,t) − α I(s;t) − α I(t;s) + α² D(s,t)]
//!        I(s;t) = ∫_0^t e^{−α(t−y)} ρ_H(s,y) dy
//!        D(s,t) = ∫_0^s ∫_0^t e^{−α(s−x)} e^{−α(t−y)} ρ_H(x,y) dy dx
//! ```
//!
//! The double integral is reduced to one-dimensional pieces. Writing
//! `E(t) = (1 − e^{−αt})/α` and `a(t) = ∫_0^t e^{−α(t−x)} x^{2H} dx`,
//!
//! ```text
//! D(s,t) = ½ [a(s) E(t) + E(s) a(t) − K(s,t)]
//! K(s,t) = ∫_{−t}^{s} |r|^{2H} g(r) dr,
//! g(r)   = e^{α(2 lo − s − t − r)} (e^{2α(hi − lo)} − 1) / (2α),
//! lo = max(0, r),  hi = min(s, t + r)
//! ```
//!
//! obtained by substituting `r = x − y` and integrating out `x` exactly.

use alloc::vec::Vec;

use crate::gaussian::{fbm_covariance, FbmSampler, GaussianLaw, HurstParameter, SamplePath, TimeGrid};
use crate::linalg::{Cholesky, SymMatrix};
use crate::quad::{self, GaussLegendre, QuadConfig};
use crate::rng::{fill_normal, path_rng};
use crate::{Error, Result};

/// Largest exponent accepted inside `exp(μ + v/2)`.
pub const EXPONENT_CAP: f64 = 700.0;

/// Parameters of the fractional OU factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FouParams {
    /// Mean-reversion rate (per day).
    pub alpha: f64,
    /// Long-run level of `X`.
    pub m: f64,
    /// Volatility of `X`.
    pub nu: f64,
    pub h: HurstParameter,
    /// Initial value `X₀`.
    pub x0: f64,
}

impl FouParams {
    pub fn new(alpha: f64, m: f64, nu: f64, h: f64, x0: f64) -> Result<Self> {
        let p = Self { alpha, m, nu, h: HurstParameter::new(h)?, x0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(crate::error::invalid("fou.alpha must be positive"));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(crate::error::invalid("fou.nu must be non-negative"));
        }
        if !(self.m.is_finite() && self.x0.is_finite()) {
            return Err(crate::error::invalid("fou.m and fou.x0 must be finite"));
        }
        HurstParameter::new(self.h.value()).map(|_| ())
    }

    pub fn with_x0(self, x0: f64) -> Self {
        Self { x0, ..self }
    }

    pub fn with_nu(self, nu: f64) -> Self {
        Self { nu, ..self }
    }
}

/// `μ(t) = e^{−αt}(X₀ − m) + m`.
pub fn fou_mean(t: f64, p: &FouParams) -> f64 {
    libm::exp(-p.alpha * t) * (p.x0 - p.m) + p.m
}

/// `(1 − e^{−αt})/α`.
#[inline]
fn decay_integral(t: f64, alpha: f64) -> f64 {
    -libm::expm1(-alpha * t) / alpha
}

/// `a(t) = ∫_0^t e^{−α(t−x)} x^{2H} dx`.
pub(crate) fn power_decay(t: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    let e = 2.0 * p.h.value();
    quad::integrate(|x| libm::exp(-p.alpha * (t - x)) * libm::pow(x, e), 0.0, t, cfg)
}

/// `I(s;t) = ∫_0^t e^{−α(t−y)} ρ_H(s,y) dy`.
fn history_cross(s: f64, t: f64, a_t: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    let e = 2.0 * p.h.value();
    let b = quad::try_integrate_pieces(
        |y| Ok(libm::exp(-p.alpha * (t - y)) * libm::pow((s - y).abs(), e)),
        0.0,
        t,
        &[s],
        cfg,
    )?;
    Ok(0.5 * (libm::pow(s, e) * decay_integral(t, p.alpha) + a_t - b))
}

/// `K(s,t)` from the module docs.
fn lag_integral(s: f64, t: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    let e = 2.0 * p.h.value();
    let al = p.alpha;
    let g = |r: f64| {
        let lo = r.max(0.0);
        let hi = s.min(t + r);
        if hi <= lo {
            return 0.0;
        }
        libm::exp(al * (2.0 * lo - s - t - r)) * libm::expm1(2.0 * al * (hi - lo)) / (2.0 * al)
    };
    quad::try_integrate_pieces(|r| Ok(libm::pow(r.abs(), e) * g(r)), -t, s, &[0.0, s - t], cfg)
}

/// Covariance `C(s,t)` of the fOU process.
pub fn fou_covariance(s: f64, t: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(crate::error::invalid("times must be non-negative"));
    }
    if p.nu == 0.0 || s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let a_s = power_decay(s, p, cfg)?;
    let a_t = if s == t { a_s } else { power_decay(t, p, cfg)? };
    covariance_with(s, t, a_s, a_t, p, cfg)
}

pub(crate) fn covariance_with(s: f64, t: f64, a_s: f64, a_t: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    let al = p.alpha;
    let rho = fbm_covariance(s, t, p.h.value());
    let i_st = history_cross(s, t, a_t, p, cfg)?;
    let i_ts = if s == t { i_st } else { history_cross(t, s, a_s, p, cfg)? };
    let k = lag_integral(s, t, p, cfg)?;
    let d = 0.5 * (a_s * decay_integral(t, al) + decay_integral(s, al) * a_t - k);
    Ok(p.nu * p.nu * (rho - al * i_st - al * i_ts + al * al * d))
}

/// `v(t) = C(t,t)`.
pub fn fou_variance_v(t: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    Ok(fou_covariance(t, t, p, cfg)?.max(0.0))
}

fn capped_exp(x: f64) -> Result<f64> {
    if x > EXPONENT_CAP {
        Err(Error::Overflow { exponent: x, cap: EXPONENT_CAP })
    } else {
        Ok(libm::exp(x))
    }
}

/// `E[(1/T) ∫_0^T e^{X_t} dt] = (1/T) ∫_0^T exp(μ(t) + v(t)/2) dt`.
pub fn expected_exp_integral(maturity: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    if !(maturity > 0.0) {
        return Err(crate::error::invalid("maturity must be positive"));
    }
    let inner = cfg.tightened(0.1);
    let total =
        quad::try_integrate(|t| capped_exp(fou_mean(t, p) + 0.5 * fou_variance_v(t, p, &inner)?), 0.0, maturity, cfg)?;
    Ok(total / maturity)
}

/// `v(t)` tabulated on a fixed quadrature rule over `[0, T]`.
///
/// `v` depends only on `(α, ν, H)`, so one table serves every `X₀` and `m`.
/// Nodes sit at `t = T u²` (composite Gauss–Legendre in `u`) so the
/// `t^{2H}` onset of `v` near 0 is integrated to full accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct VTable {
    pub maturity: f64,
    pub times: Vec<f64>,
    /// Weights for `∫_0^T · dt` (the Jacobian `2 T u` is folded in).
    pub weights: Vec<f64>,
    pub v: Vec<f64>,
    alpha: f64,
    nu: f64,
    h: f64,
}

impl VTable {
    pub fn new(maturity: f64, p: &FouParams, cfg: &QuadConfig) -> Result<Self> {
        if !(maturity > 0.0) {
            return Err(crate::error::invalid("maturity must be positive"));
        }
        let gl = GaussLegendre::new(20);
        let (us, wu) = gl.composite(0.0, 1.0, 4);
        let times: Vec<f64> = us.iter().map(|u| maturity * u * u).collect();
        let weights = us.iter().zip(&wu).map(|(u, w)| 2.0 * maturity * u * w).collect();
        let inner = cfg.tightened(0.1);
        let v = times.iter().map(|&t| fou_variance_v(t, p, &inner)).collect::<Result<_>>()?;
        Ok(Self { maturity, times, weights, v, alpha: p.alpha, nu: p.nu, h: p.h.value() })
    }

    /// True if this table was built for the variance parameters of `p`.
    pub fn matches(&self, p: &FouParams) -> bool {
        self.alpha == p.alpha && self.nu == p.nu && self.h == p.h.value()
    }

    /// `(1/T) ∫_0^T exp(μ(t) + v(t)/2) dt` for the given `X₀` and `m`.
    pub fn expected_exp_integral(&self, p: &FouParams) -> Result<f64> {
        if !self.matches(p) {
            return Err(crate::error::invalid("VTable built for different (alpha, nu, h)"));
        }
        let mut sum = 0.0;
        for ((&t, &w), &v) in self.times.iter().zip(&self.weights).zip(&self.v) {
            sum += w * capped_exp(fou_mean(t, p) + 0.5 * v)?;
        }
        Ok(sum / self.maturity)
    }
}

/// Gaussian law of `X` (mean and covariance), usable with the generic
/// Gaussian-process helpers.
#[derive(Clone, Copy, Debug)]
pub struct FouLaw {
    pub params: FouParams,
    pub quad: QuadConfig,
}

impl GaussianLaw for FouLaw {
    fn mean(&self, t: f64) -> f64 {
        fou_mean(t, &self.params)
    }
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        fou_covariance(s, t, &self.params, &self.quad)
    }
}

/// Gram matrix of `X` on `times`, sharing the `a(t)` integrals across entries.
pub fn fou_gram(times: &[f64], p: &FouParams, cfg: &QuadConfig) -> Result<SymMatrix> {
    let n = times.len();
    if p.nu == 0.0 {
        return Ok(SymMatrix::zeros(n));
    }
    let a: Vec<f64> = times.iter().map(|&t| power_decay(t, p, cfg)).collect::<Result<_>>()?;
    SymMatrix::from_fn(n, |i, j| {
        let (s, t) = (times[i], times[j]);
        if s == 0.0 || t == 0.0 {
            Ok(0.0)
        } else {
            covariance_with(s, t, a[i], a[j], p, cfg)
        }
    })
}

/// Explicit solution `X_t = μ(t) + ν (W_t − α ∫_0^t e^{−α(t−u)} W_u du)`
/// evaluated from an fBm path `w` on `grid`, trapezoid rule for the history.
pub fn fou_path_from_fbm(p: &FouParams, grid: &TimeGrid, w: &[f64]) -> Vec<f64> {
    let t = grid.points();
    let mut out = Vec::with_capacity(t.len());
    let mut hist = 0.0;
    out.push(fou_mean(0.0, p) + p.nu * w[0]);
    for k in 1..t.len() {
        let dt = t[k] - t[k - 1];
        let d = libm::exp(-p.alpha * dt);
        hist = d * hist + 0.5 * dt * (d * w[k - 1] + w[k]);
        out.push(fou_mean(t[k], p) + p.nu * (w[k] - p.alpha * hist));
    }
    out
}

/// fOU path via the explicit solution on a sampled fBm path.
pub fn sample_fou(p: &FouParams, grid: &TimeGrid, seed: u64) -> Result<SamplePath> {
    let sampler = FbmSampler::auto(p.h, grid)?;
    let mut rng = path_rng(seed, 0);
    let mut w = alloc::vec![0.0; grid.len()];
    sampler.sample_into(&mut rng, &mut w);
    SamplePath::new(grid.clone(), fou_path_from_fbm(p, grid, &w), seed)
}

/// Exact-law sampler of `X` on a grid: Cholesky factor of the fOU Gram matrix.
#[derive(Clone, Debug)]
pub struct FouExactSampler {
    mean: Vec<f64>,
    factor: Cholesky,
}

impl FouExactSampler {
    pub fn new(p: &FouParams, grid: &TimeGrid, cfg: &QuadConfig) -> Result<Self> {
        let gram = fou_gram(grid.points(), p, cfg)?;
        let factor = Cholesky::factor(&gram)?;
        let mean = grid.points().iter().map(|&t| fou_mean(t, p)).collect();
        Ok(Self { mean, factor })
    }

    /// Number of standard normals consumed per path.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Writes `μ + L z` into `out` for given normals `z`.
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        self.factor.mul_into(z, out);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
    }

    /// Writes `μ − L z` (the antithetic partner of [`Self::transform`]).
    pub fn transform_antithetic(&self, z: &[f64], out: &mut [f64]) {
        self.factor.mul_into(z, out);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o = m - *o;
        }
    }

    pub fn sample_into<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut z = alloc::vec![0.0; self.dim()];
        fill_normal(rng, &mut z);
        self.transform(&z, out);
    }
}
