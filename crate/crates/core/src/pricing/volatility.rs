//! Volatility swap by the binomial series of `√σ_R²` around `β²`.
//!
//! With `x = (σ_R² − β²)/β²`,
//!
//! ```text
//! E[σ_R] = β Σ_n c_n E[x^n],   c_n = binom(1/2, n)
//! E[(σ_R² − β²)^n] = Σ_k C(n,k) A_{n−k} B_k
//! ```
//!
//! where `A` are moments of the (shifted) jump leg and `B` moments of
//! `Y = (1/T) ∫ e^{X_t} dt`. Both legs are shifted by `E[Y]` before the
//! binomial convolution so that only central moments of `Y` enter; the raw
//! moments are far too large for that sum to survive cancellation.

use alloc::vec::Vec;

use crate::fou::{covariance_with, expected_exp_integral, fou_gram, fou_mean, power_decay, FouParams, EXPONENT_CAP};
use crate::levy::{shifted_jump_moments, TimeScale};
use crate::quad::{GaussLegendre, QuadConfig};
use crate::sobol::Sobol;
use crate::special::{binomial, factorial, norm_inv, sqrt1p_coefficients};
use crate::{Error, Result};

use super::{frac_bns_expected_rv, require, ModelParams, SwapContract, SwapKind};

/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 20;

/// Integrator for `B_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BIntegrator {
    /// Nested Gauss–Legendre on the ordered simplex, `k <= 3`.
    TensorQuad,
    /// Scrambled Sobol points on the Gaussian vector of `X` at a time rule.
    Qmc,
}

/// Quasi-Monte Carlo settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QmcConfig {
    /// Total points of the first pass, as a power of two.
    pub log2_points_min: u32,
    /// Total point budget, as a power of two.
    pub log2_points_max: u32,
    /// Independent scrambles; the standard error comes from their spread.
    pub replicates: usize,
    /// Gauss–Legendre nodes per panel and panels of the time rule.
    pub time_nodes: usize,
    pub time_panels: usize,
    /// Target standard error relative to `E|Y − c|^k`.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for QmcConfig {
    fn default() -> Self {
        Self {
            log2_points_min: 16,
            log2_points_max: 20,
            replicates: 16,
            time_nodes: 16,
            time_panels: 3,
            rel_tol: 1e-3,
            seed: 0x5eed,
        }
    }
}

/// Controls of the volatility series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesConfig {
    /// Expansion point `β²`; `None` centres it at `E[σ_R²]`.
    pub beta2: Option<f64>,
    pub max_terms: usize,
    /// Stopping tolerance; `None` means `0.01 β`.
    pub target_abs_error: Option<f64>,
    pub qmc: QmcConfig,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { beta2: None, max_terms: MAX_SERIES_TERMS, target_abs_error: None, qmc: QmcConfig::default() }
    }
}

/// `β / ((2N − 1) √(3N + 1))`.
pub fn vol_series_error_bound(beta: f64, n: usize) -> f64 {
    let n = n as f64;
    beta / ((2.0 * n - 1.0) * libm::sqrt(3.0 * n + 1.0))
}

fn fail_domain(msg: &str) -> Error {
    Error::Domain(msg.into())
}

/// Node at one level of the simplex rule: time, weight, `a(t)` and
/// `exp(μ + v/2)`.
#[derive(Clone, Copy)]
struct Node {
    t: f64,
    w: f64,
    a: f64,
    lvl: f64,
}

struct Evaluator<'a> {
    p: &'a FouParams,
    cfg: &'a QuadConfig,
}

impl Evaluator<'_> {
    fn node(&self, t: f64, w: f64) -> Result<Node> {
        let a = if t > 0.0 { power_decay(t, self.p, self.cfg)? } else { 0.0 };
        let v = self.cov(t, t, a, a)?.max(0.0);
        let e = fou_mean(t, self.p) + 0.5 * v;
        if e > EXPONENT_CAP {
            return Err(Error::Overflow { exponent: e, cap: EXPONENT_CAP });
        }
        Ok(Node { t, w, a, lvl: libm::exp(e) })
    }

    fn cov(&self, s: f64, t: f64, a_s: f64, a_t: f64) -> Result<f64> {
        if self.p.nu == 0.0 || s == 0.0 || t == 0.0 {
            return Ok(0.0);
        }
        covariance_with(s, t, a_s, a_t, self.p, self.cfg)
    }
}

/// `(k!/T^k) ∫_{T > t₁ > ... > t_k > 0} f` on nested Gauss–Legendre rules
/// with `t₁ = T u²`, `t₂ = t₁ v`, `t₃ = t₂ w`. The callback receives the
/// levels `exp(μ + v/2)` and covariances `[C₁₂, C₁₃, C₂₃]`.
fn tensor_sum<F>(k: usize, maturity: f64, p: &FouParams, cfg: &QuadConfig, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64; 3], &[f64; 3]) -> f64,
{
    let ev = Evaluator { p, cfg };
    let (us, wu) = GaussLegendre::new(16).composite(0.0, 1.0, 2);
    let inner_n = if k == 3 { 12 } else { 16 };
    let (vs, wv) = GaussLegendre::new(inner_n).composite(0.0, 1.0, 2);
    let norm = factorial(k) / libm::pow(maturity, k as f64);
    let mut sum = 0.0;
    for (&u, &a) in us.iter().zip(&wu) {
        let t1 = maturity * u * u;
        let n1 = ev.node(t1, 2.0 * maturity * u * a)?;
        if k == 1 {
            sum += n1.w * f(&[n1.lvl, 0.0, 0.0], &[0.0; 3]);
            continue;
        }
        for (&v, &b) in vs.iter().zip(&wv) {
            let n2 = ev.node(t1 * v, n1.w * t1 * b)?;
            let c12 = ev.cov(n1.t, n2.t, n1.a, n2.a)?;
            if k == 2 {
                sum += n2.w * f(&[n1.lvl, n2.lvl, 0.0], &[c12, 0.0, 0.0]);
                continue;
            }
            for (&w, &c) in vs.iter().zip(&wv) {
                let n3 = ev.node(n2.t * w, n2.w * n2.t * c)?;
                let c13 = ev.cov(n1.t, n3.t, n1.a, n3.a)?;
                let c23 = ev.cov(n2.t, n3.t, n2.a, n3.a)?;
                sum += n3.w * f(&[n1.lvl, n2.lvl, n3.lvl], &[c12, c13, c23]);
            }
        }
    }
    let sum = norm * sum;
    if sum.is_finite() {
        Ok(sum)
    } else {
        Err(fail_domain("non-finite B_k integrand"))
    }
}

/// Central moments `E[(Y − E Y)^k]` for `k = 2, 3` on the simplex rule.
fn tensor_central(k: usize, maturity: f64, p: &FouParams, cfg: &QuadConfig) -> Result<f64> {
    match k {
        2 => tensor_sum(2, maturity, p, cfg, |m, c| m[0] * m[1] * libm::expm1(c[0])),
        3 => tensor_sum(3, maturity, p, cfg, |m, c| {
            let [a, b, d] = *c;
            m[0] * m[1] * m[2] * (libm::expm1(a + b + d) - libm::expm1(a) - libm::expm1(b) - libm::expm1(d))
        }),
        _ => Err(fail_domain("tensor central moments cover k = 2, 3")),
    }
}

/// Gaussian vector of `X` at a fixed time rule, in principal components.
struct QmcModel {
    weights: Vec<f64>,
    mean: Vec<f64>,
    /// Columns `√λ_j e_j` ordered by decreasing eigenvalue, row-major `n × n`.
    loadings: Vec<f64>,
    n: usize,
}

impl QmcModel {
    fn new(maturity: f64, p: &FouParams, q: &QmcConfig, cfg: &QuadConfig) -> Result<Self> {
        let gl = GaussLegendre::new(q.time_nodes);
        let (us, wu) = gl.composite(0.0, 1.0, q.time_panels);
        let times: Vec<f64> = us.iter().map(|u| maturity * u * u).collect();
        let weights: Vec<f64> = us.iter().zip(&wu).map(|(u, w)| 2.0 * u * w).collect();
        let n = times.len();
        let gram = fou_gram(&times, p, cfg)?;
        let (vals, vecs) = gram.eigen();
        let mut loadings = alloc::vec![0.0; n * n];
        for j in 0..n {
            let src = n - 1 - j;
            let s = libm::sqrt(vals[src].max(0.0));
            for i in 0..n {
                loadings[i * n + j] = s * vecs[i * n + src];
            }
        }
        let mean = times.iter().map(|&t| fou_mean(t, p)).collect();
        Ok(Self { weights, mean, loadings, n })
    }

    fn y(&self, z: &[f64]) -> f64 {
        let mut y = 0.0;
        for i in 0..self.n {
            let row = &self.loadings[i * self.n..(i + 1) * self.n];
            let x = self.mean[i] + row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
            y += self.weights[i] * libm::exp(x.min(EXPONENT_CAP));
        }
        y
    }
}

/// Moments of `(Y − shift)^k`, `k = 0..=kmax`, with standard errors.
struct QmcMoments {
    values: Vec<f64>,
    errors: Vec<f64>,
    abs_scale: Vec<f64>,
    points: usize,
}

fn qmc_moments<D>(model: &QmcModel, shift: f64, kmax: usize, q: &QmcConfig, mut done: D) -> Result<QmcMoments>
where
    D: FnMut(&QmcMoments) -> bool,
{
    require(q.replicates >= 2, "QMC needs at least two replicates")?;
    require(q.log2_points_max >= q.log2_points_min, "QMC budget below its first pass")?;
    let r = q.replicates;
    let mut gens = (0..r).map(|i| Sobol::scrambled(model.n, q.seed, i as u64)).collect::<Result<Vec<_>>>()?;
    let mut sums = alloc::vec![alloc::vec![0.0; kmax + 1]; r];
    let mut abs_sums = alloc::vec![0.0; kmax + 1];
    let mut per_rep = ((1usize << q.log2_points_min) / r).max(1);
    let budget = 1usize << q.log2_points_max;
    let mut taken = 0usize;
    let mut u = alloc::vec![0.0; model.n];
    loop {
        for (g, s) in gens.iter_mut().zip(sums.iter_mut()) {
            for _ in taken..per_rep {
                g.next_point(&mut u);
                for z in u.iter_mut() {
                    *z = norm_inv(*z);
                }
                let d = model.y(&u) - shift;
                let mut pw: f64 = 1.0;
                for k in 0..=kmax {
                    s[k] += pw;
                    abs_sums[k] += pw.abs();
                    pw *= d;
                }
            }
        }
        taken = per_rep;
        let total = (taken * r) as f64;
        let mut out = QmcMoments {
            values: alloc::vec![0.0; kmax + 1],
            errors: alloc::vec![0.0; kmax + 1],
            abs_scale: abs_sums.iter().map(|a| a / total).collect(),
            points: taken * r,
        };
        for k in 0..=kmax {
            let means: Vec<f64> = sums.iter().map(|s| s[k] / taken as f64).collect();
            let m = means.iter().sum::<f64>() / r as f64;
            let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (r - 1) as f64;
            out.values[k] = m;
            out.errors[k] = libm::sqrt(var / r as f64);
        }
        if out.values.iter().any(|v| !v.is_finite()) {
            return Err(fail_domain("non-finite QMC moment"));
        }
        if done(&out) || taken * r * 2 > budget {
            return Ok(out);
        }
        per_rep *= 2;
    }
}

/// `B_k = E[Y^k]`, `Y = (1/T) ∫_0^T e^{X_t} dt`.
pub fn b_moment(p: &FouParams, k: usize, maturity: f64, integrator: BIntegrator, cfg: &QuadConfig) -> Result<f64> {
    b_moment_with(p, k, maturity, integrator, &QmcConfig::default(), cfg)
}

/// [`b_moment`] with explicit QMC settings.
pub fn b_moment_with(
    p: &FouParams,
    k: usize,
    maturity: f64,
    integrator: BIntegrator,
    q: &QmcConfig,
    cfg: &QuadConfig,
) -> Result<f64> {
    p.validate()?;
    require(maturity > 0.0, "maturity must be positive")?;
    if k == 0 {
        return Ok(1.0);
    }
    match integrator {
        BIntegrator::TensorQuad => match k {
            1 => expected_exp_integral(maturity, p, cfg),
            2 => tensor_sum(2, maturity, p, cfg, |m, c| m[0] * m[1] * libm::exp(c[0])),
            3 => tensor_sum(3, maturity, p, cfg, |m, c| m[0] * m[1] * m[2] * libm::exp(c[0] + c[1] + c[2])),
            _ => Err(fail_domain("tensor quadrature covers k <= 3; use QMC")),
        },
        BIntegrator::Qmc => {
            let est = b_moment_qmc(p, k, maturity, q, cfg)?;
            if est.error > q.rel_tol * est.scale {
                return Err(Error::QmcBudget { points: est.points, estimate: est.value, error: est.error });
            }
            Ok(est.value)
        }
    }
}

/// QMC estimate of a moment with its replicate standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QmcEstimate {
    pub value: f64,
    pub error: f64,
    /// `E|Y|^k`, the scale the relative tolerance refers to.
    pub scale: f64,
    pub points: usize,
}

/// `B_k` by QMC, returned with its error even when the budget ran out.
pub fn b_moment_qmc(p: &FouParams, k: usize, maturity: f64, q: &QmcConfig, cfg: &QuadConfig) -> Result<QmcEstimate> {
    p.validate()?;
    require(maturity > 0.0, "maturity must be positive")?;
    let model = QmcModel::new(maturity, p, q, cfg)?;
    let res = qmc_moments(&model, 0.0, k, q, |m| m.errors[k] <= q.rel_tol * m.abs_scale[k])?;
    Ok(QmcEstimate { value: res.values[k], error: res.errors[k], scale: res.abs_scale[k], points: res.points })
}

/// The expansion: terms, partial sums and the chosen truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct VolSeries {
    pub beta: f64,
    /// `β c_n E[x^n]` for `n = 0..max_terms`.
    pub terms: Vec<f64>,
    /// `E[x^n]`.
    pub x_moments: Vec<f64>,
    /// Terms used in the quoted value.
    pub n_terms: usize,
    /// `S_N = Σ_{n<N} terms[n]`.
    pub value: f64,
    pub bound: f64,
    /// Price uncertainty from the QMC moments.
    pub qmc_error: f64,
}

impl VolSeries {
    /// `S_N` for any `N <= terms.len()`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.terms[..n.min(self.terms.len())].iter().sum()
    }
}

/// Evaluates the series for `E[σ_R]`. Requires `σ₀² = e^{X₀}`.
pub fn volatility_series(p: &ModelParams, maturity: f64, series: &SeriesConfig, cfg: &QuadConfig) -> Result<VolSeries> {
    p.validate()?;
    require(maturity > 0.0, "maturity must be positive")?;
    require(series.max_terms >= 1 && series.max_terms <= MAX_SERIES_TERMS, "max_terms must be in 1..=20")?;
    let ex0 = libm::exp(p.fou.x0);
    if (p.sigma0_sq - ex0).abs() > 1e-9 * p.sigma0_sq {
        return Err(Error::InvalidParameter(alloc::format!(
            "volatility series needs sigma0_sq = exp(x0); got {} vs {}",
            p.sigma0_sq,
            ex0
        )));
    }
    let beta2 = match series.beta2 {
        Some(b) => b,
        None => frac_bns_expected_rv(p, maturity, cfg)?,
    };
    require(beta2 > 0.0 && beta2.is_finite(), "beta2 must be positive")?;
    let beta = libm::sqrt(beta2);
    let target = series.target_abs_error.unwrap_or(0.01 * beta);
    require(target > 0.0, "target_abs_error must be positive")?;

    let nmax = series.max_terms - 1;
    let shift = expected_exp_integral(maturity, &p.fou, cfg)?;
    let a = shifted_jump_moments(&p.spec, shift - beta2, p.lambda, maturity, nmax, TimeScale::Calendar, cfg)?;
    let coef = sqrt1p_coefficients(nmax);

    // Sensitivity of the price to each central moment of Y.
    let scale: Vec<f64> = (0..=nmax).map(|n| libm::pow(beta2, -(n as f64))).collect();
    let sens: Vec<f64> = (0..=nmax)
        .map(|k| beta * (k..=nmax).map(|n| (coef[n] * binomial(n, k) * a[n - k] * scale[n]).abs()).sum::<f64>())
        .collect();

    let mut central = alloc::vec![0.0; nmax + 1];
    let mut central_err = alloc::vec![0.0; nmax + 1];
    central[0] = 1.0;
    let mut qmc_short = None;
    if p.fou.nu > 0.0 {
        let inner = cfg.tightened(0.1);
        for k in 2..=nmax.min(3) {
            central[k] = tensor_central(k, maturity, &p.fou, &inner)?;
            if k == 2 {
                // Cheap early exit: E[x²] > 1 already rules out convergence.
                let mu2 = a[2] + 2.0 * a[1] * central[1] + central[2];
                if mu2 * scale[2] > 1.0 {
                    return Err(Error::SeriesDivergence { term: 2 });
                }
            }
        }
        if nmax >= 4 {
            let model = QmcModel::new(maturity, &p.fou, &series.qmc, &inner)?;
            let goal = 0.1 * target;
            let res = qmc_moments(&model, shift, nmax, &series.qmc, |m| {
                (4..=nmax).map(|k| sens[k] * m.errors[k]).sum::<f64>() <= goal
            })?;
            central[4..=nmax].copy_from_slice(&res.values[4..=nmax]);
            central_err[4..=nmax].copy_from_slice(&res.errors[4..=nmax]);
            let err: f64 = (4..=nmax).map(|k| sens[k] * res.errors[k]).sum();
            if err > goal {
                qmc_short = Some(Error::QmcBudget { points: res.points, estimate: res.values[nmax], error: err });
            }
        }
    }

    let mut x_moments = alloc::vec![0.0; nmax + 1];
    for n in 0..=nmax {
        let mu: f64 = (0..=n).map(|k| binomial(n, k) * a[n - k] * central[k]).sum();
        x_moments[n] = mu * scale[n];
    }
    for j in (2..=nmax).step_by(2) {
        if x_moments[j] > x_moments[j - 2] {
            return Err(Error::SeriesDivergence { term: j });
        }
    }
    if let Some(e) = qmc_short {
        return Err(e);
    }

    let terms: Vec<f64> = (0..=nmax).map(|n| beta * coef[n] * x_moments[n]).collect();
    let mut n_terms = series.max_terms;
    for n in 1..=series.max_terms {
        if vol_series_error_bound(beta, n) <= target && terms[n - 1].abs() <= target {
            n_terms = n;
            break;
        }
    }
    let qmc_error = (4..=nmax.min(n_terms.saturating_sub(1)))
        .map(|k| {
            beta * (k..n_terms).map(|n| (coef[n] * binomial(n, k) * a[n - k] * scale[n]).abs()).sum::<f64>()
                * central_err[k]
        })
        .sum();
    let value = terms[..n_terms].iter().sum();
    Ok(VolSeries { beta, terms, x_moments, n_terms, value, bound: vol_series_error_bound(beta, n_terms), qmc_error })
}

/// Quote of a volatility swap.
#[derive(Clone, Debug, PartialEq)]
pub struct VolSwapQuote {
    pub price: f64,
    /// Series estimate of `E[σ_R]`.
    pub expected_vol: f64,
    pub n_terms: usize,
    pub bound: f64,
    pub series: VolSeries,
}

/// `e^{−rT} (E[σ_R] − K_Vol)` per unit notional with `E[σ_R]` from the series.
pub fn frac_bns_volatility_swap_price(
    p: &ModelParams,
    contract: &SwapContract,
    series: &SeriesConfig,
    cfg: &QuadConfig,
) -> Result<VolSwapQuote> {
    contract.validate()?;
    if contract.kind != SwapKind::Volatility {
        return Err(crate::error::invalid("contract is not a volatility swap"));
    }
    let s = volatility_series(p, contract.maturity, series, cfg)?;
    let price = contract.notional * contract.discount() * (s.value - contract.strike);
    Ok(VolSwapQuote { price, expected_vol: s.value, n_terms: s.n_terms, bound: s.bound, series: s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{FamilyKind, SubordinatorSpec};

    fn fou(nu: f64) -> FouParams {
        let m = libm::log(400.0);
        FouParams::new(1.0 / 30.0, m, nu, 0.75, m).unwrap()
    }

    fn model(nu: f64, spec: SubordinatorSpec) -> ModelParams {
        ModelParams { fou: fou(nu), lambda: 0.05, rho: 0.0, c1: 0.0, c2: 0.0, sigma0_sq: 400.0, s0: 100.0, spec }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(vol_series_error_bound(1.0, 1), 0.5);
        assert!((vol_series_error_bound(1.0, 13) - 1.0 / (25.0 * libm::sqrt(40.0))).abs() < 1e-15);
        assert!((vol_series_error_bound(1.0, 13) - 0.006325).abs() < 1e-6);
        for n in 1..100 {
            assert!(vol_series_error_bound(1.0, n + 1) < vol_series_error_bound(1.0, n));
        }
    }

    #[test]
    fn b_moment_low_orders() {
        let p = fou(0.1);
        let cfg = QuadConfig::default();
        assert_eq!(b_moment(&p, 0, 10.0, BIntegrator::Qmc, &cfg).unwrap(), 1.0);
        let b1 = expected_exp_integral(10.0, &p, &cfg).unwrap();
        let t1 = b_moment(&p, 1, 10.0, BIntegrator::TensorQuad, &cfg).unwrap();
        assert!((t1 - b1).abs() < 1e-8 * b1);
        let q1 = b_moment(&p, 1, 10.0, BIntegrator::Qmc, &cfg).unwrap();
        assert!((q1 - b1).abs() < 1e-5 * b1, "{q1} {b1}");
        assert!(b_moment(&p, 4, 10.0, BIntegrator::TensorQuad, &cfg).is_err());
    }

    #[test]
    fn tensor_and_qmc_agree() {
        let p = fou(0.2);
        let cfg = QuadConfig::default();
        for k in 2..=3 {
            let t = b_moment(&p, k, 10.0, BIntegrator::TensorQuad, &cfg).unwrap();
            let q = b_moment_qmc(&p, k, 10.0, &QmcConfig::default(), &cfg).unwrap();
            assert!((t - q.value).abs() < 4.0 * q.error, "k={k}: {t} vs {q:?}");
            assert!(q.error < 5e-3 * t);
        }
    }

    #[test]
    fn degenerate_series_collapses() {
        let p = model(0.0, SubordinatorSpec::none());
        let cfg = QuadConfig::default();
        let s = volatility_series(&p, 10.0, &SeriesConfig::default(), &cfg).unwrap();
        assert!((s.value - 20.0).abs() < 1e-12);
        let cfg9 = SeriesConfig { beta2: Some(360.0), ..SeriesConfig::default() };
        let s = volatility_series(&p, 10.0, &cfg9, &cfg).unwrap();
        assert!((s.value - 20.0).abs() <= s.bound, "{} bound {}", s.value, s.bound);
        assert!((s.value - 20.0).abs() < 1e-6);
    }

    #[test]
    fn precondition_and_divergence() {
        let mut p = model(0.1, SubordinatorSpec::none());
        p.sigma0_sq = 500.0;
        assert!(volatility_series(&p, 10.0, &SeriesConfig::default(), &QuadConfig::default()).is_err());
        let spec = SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, 30.0, 25.0).unwrap();
        let p = model(1.0 / 3.0, spec);
        let err = volatility_series(&p, 10.0, &SeriesConfig::default(), &QuadConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SeriesDivergence { .. }), "{err:?}");
    }

    #[test]
    fn small_noise_series_is_jensen_consistent() {
        let spec = SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, 1.0, 2.0).unwrap();
        let p = model(0.05, spec);
        let cfg = QuadConfig::default();
        let s = volatility_series(&p, 10.0, &SeriesConfig::default(), &cfg).unwrap();
        let e = frac_bns_expected_rv(&p, 10.0, &cfg).unwrap();
        assert!(s.value <= libm::sqrt(e));
        assert!(s.value > 0.95 * libm::sqrt(e));
        let again = volatility_series(&p, 10.0, &SeriesConfig::default(), &cfg).unwrap();
        assert_eq!(s.value.to_bits(), again.value.to_bits());
    }
}
