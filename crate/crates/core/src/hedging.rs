//! Conditional law of the log-variance factor given its past, the split of
//! the variance swap price into a continuous and a jump part, and the
//! quadratic hedge ratio.
//!
//! With `a = H − ½`, the fractional operators are
//!
//! ```text
//! (I^a_{T−} f)(τ) = (1/Γ(a)) ∫_τ^T f(s) (s − τ)^{a−1} ds
//! ⟨f, g⟩          = C(H) ∫_0^T s^{−2a} I^a_{T−}[u^a f](s) I^a_{T−}[u^a g](s) ds
//! C(H)            = π a 2H / (Γ(2 − 2H) sin(π a))
//! Φ_c(s, t, v)    = (sin(π a)/π) v^{−a} (s − v)^{−a} ∫_s^t z^a (z − s)^a c(z) / (z − v) dz
//! ```
//!
//! For `τ > t` the future noise of `X_τ` is `∫_t^τ c(z) dW^H_z` with
//! `c(z) = ν e^{−α(τ−z)}`. Its prediction from `F_t` is `∫_0^t Φ_c(t, τ, s) dW^H_s`,
//! so
//!
//! ```text
//! M(τ, t) = X_t e^{−α(τ−t)} + m (1 − e^{−α(τ−t)}) + ∫_0^t Φ_c(t, τ, s) dW^H_s
//! V(τ, t) = ‖c 1_{[t,τ]}‖² − ‖Φ_c 1_{[0,t]}‖²
//! ```
//!
//! The first norm is the unconditional fOU variance `v(τ − t)`. The second
//! equals the covariance of the future noise with its prediction,
//! `H(2H − 1) ∫_0^t Φ_c(u) ∫_t^τ c(z) (z − u)^{2H−2} dz du`, whose supports are
//! disjoint; that form is used for evaluation and the operator form above
//! is kept as a cross-check.

use alloc::vec::Vec;

use crate::fou::{fou_mean, fou_variance_v, FouParams, EXPONENT_CAP};
use crate::gaussian::SamplePath;
use crate::pricing::{ModelParams, SwapContract, SwapKind};
use crate::quad::{self, GaussLegendre, QuadConfig};
use crate::special::gamma;
use crate::{Error, Result};

/// Settings of the fractional-operator quadratures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOpConfig {
    pub quad: QuadConfig,
    /// Length of Brownian history used for `N_t(τ)`; `None` means four
    /// maturities.
    pub t_hist: Option<f64>,
    /// Gauss–Legendre nodes per history cell for the cell averages of `Φ_c`.
    pub cell_nodes: usize,
    /// Nodes of the rule over `[t, T]` in the continuous price leg.
    pub price_nodes: usize,
    /// Scaled tolerance below which a negative `V` is clipped to 0.
    pub variance_tol: f64,
}

impl Default for FracOpConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig { abs_tol: 1e-12, rel_tol: 1e-9, max_depth: 40 },
            t_hist: None,
            cell_nodes: 4,
            price_nodes: 24,
            variance_tol: 1e-8,
        }
    }
}

/// `C(H)` of the inner product.
pub fn inner_product_constant(h: f64) -> f64 {
    let a = h - 0.5;
    core::f64::consts::PI * a * 2.0 * h / (gamma(2.0 - 2.0 * h) * libm::sin(core::f64::consts::PI * a))
}

/// `C_H` of the Mandelbrot–Van Ness representation.
pub fn mvn_constant(h: f64) -> f64 {
    libm::sqrt(2.0 * h * gamma(1.5 - h) / (gamma(h + 0.5) * gamma(2.0 - 2.0 * h)))
}

fn check_h(h: f64) -> Result<f64> {
    if h > 0.5 && h < 1.0 {
        Ok(h - 0.5)
    } else {
        Err(crate::error::invalid("fractional operators need H in (1/2, 1)"))
    }
}

/// Right-sided Riemann–Liouville integral of order `H − ½` at `τ`.
///
/// `u = (s − τ)^a` turns it into `(1/Γ(H + ½)) ∫_0^{(T−τ)^a} f(τ + u^{1/a}) du`.
pub fn riemann_liouville_right<F>(mut f: F, tau: f64, maturity: f64, h: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let a = check_h(h)?;
    if !(tau < maturity) {
        return Err(crate::error::invalid("need tau < T"));
    }
    let top = libm::pow(maturity - tau, a);
    let inv = 1.0 / a;
    let v = quad::integrate(|u| f((tau + libm::pow(u, inv)).min(maturity)), 0.0, top, cfg)?;
    Ok(v / gamma(h + 0.5))
}

/// `⟨f, g⟩_{H−½,T}` in operator form.
pub fn frac_inner_product<F, G>(f: F, g: G, maturity: f64, h: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let a = check_h(h)?;
    let inner = cfg.tightened(0.1);
    let weight = |s: f64| -> Result<f64> {
        if s >= maturity {
            return Ok(0.0);
        }
        let fs = riemann_liouville_right(|u| libm::pow(u, a) * f(u), s, maturity, h, &inner)?;
        let gs = riemann_liouville_right(|u| libm::pow(u, a) * g(u), s, maturity, h, &inner)?;
        Ok(libm::pow(s, -2.0 * a) * fs * gs)
    };
    let v = quad::try_integrate_singular(weight, 0.0, maturity, -2.0 * a, 0.0, cfg)?;
    Ok(inner_product_constant(h) * v)
}

/// `Φ_c(s, t, v)` for `0 < v < s < t`.
pub fn phi_c_kernel<C>(s: f64, t: f64, v: f64, c: C, h: f64, cfg: &QuadConfig) -> Result<f64>
where
    C: Fn(f64) -> f64,
{
    let a = check_h(h)?;
    if !(0.0 < v && v < s && s < t) {
        return Err(Error::Domain(alloc::format!("phi_c needs 0 < v < s < t, got v={v}, s={s}, t={t}")));
    }
    phi_c_split(s, t, v, s - v, &c, a, cfg)
}

/// `Φ_c` with the point given both as `v` and as its offset `gap = s − v`;
/// whichever is small must be the accurate one.
fn phi_c_split<C: Fn(f64) -> f64>(s: f64, t: f64, v: f64, gap: f64, c: &C, a: f64, cfg: &QuadConfig) -> Result<f64> {
    let body = phi_c_integral(s, t, gap, c, a, cfg)?;
    Ok(libm::sin(core::f64::consts::PI * a) / core::f64::consts::PI * libm::pow(v, -a) * libm::pow(gap, -a) * body)
}

/// `∫_s^t z^a (z − s)^a c(z) / (z − v) dz`, written in the offset
/// `y = z − s` so that nothing cancels when `v` is close to `s`.
fn phi_c_integral<C: Fn(f64) -> f64>(s: f64, t: f64, gap: f64, c: &C, a: f64, cfg: &QuadConfig) -> Result<f64> {
    let g = |y: f64| Ok(libm::pow(s + y, a) * libm::pow(y, a) * c(s + y) / (y + gap));
    // The integrand peaks in a layer of width `gap`; grade panels into it.
    let span = t - s;
    let mut edges = alloc::vec![0.0];
    let mut w = gap;
    while w < span {
        edges.push(w);
        w *= 4.0;
    }
    edges.push(span);
    let mut sum = 0.0;
    for e in edges.windows(2) {
        sum += if e[0] == 0.0 {
            quad::try_integrate_singular(g, 0.0, e[1], a, 0.0, cfg)?
        } else {
            quad::try_integrate(g, e[0], e[1], cfg)?
        };
    }
    Ok(sum)
}

/// A path observed at absolute times `origin + grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedPath {
    pub origin: f64,
    pub path: SamplePath,
}

impl ObservedPath {
    pub fn new(origin: f64, path: SamplePath) -> Self {
        Self { origin, path }
    }

    pub fn start(&self) -> f64 {
        self.origin
    }

    pub fn end(&self) -> f64 {
        self.origin + self.path.grid.last()
    }

    fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.path.grid.points().iter().map(move |p| self.origin + p)
    }
}

/// Information available at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketState {
    pub t: f64,
    pub x_t: f64,
    pub sigma_t_sq: f64,
    pub s_t: f64,
    /// `W^H` on `[0, t]`.
    pub fbm_history: Option<ObservedPath>,
    /// Driving Brownian motion of the Mandelbrot–Van Ness representation,
    /// on a window ending at `t` (may start before 0).
    pub bm_history: Option<ObservedPath>,
    /// Cumulative `Z` on `[0, t]`.
    pub z_history: Option<ObservedPath>,
}

impl MarketState {
    /// State at inception: no history needed.
    pub fn initial(x0: f64, sigma0_sq: f64, s0: f64) -> Self {
        Self { t: 0.0, x_t: x0, sigma_t_sq: sigma0_sq, s_t: s0, fbm_history: None, bm_history: None, z_history: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.sigma_t_sq > 0.0 && self.s_t > 0.0 && self.x_t.is_finite()) {
            return Err(crate::error::invalid("market state needs t >= 0, sigma_t_sq > 0, s_t > 0"));
        }
        for p in [&self.fbm_history, &self.bm_history, &self.z_history].into_iter().flatten() {
            if (p.end() - self.t).abs() > 1e-9 * self.t.max(1.0) {
                return Err(Error::MissingHistory { from: p.end(), to: self.t });
            }
        }
        Ok(())
    }

    fn fbm(&self) -> Result<Option<&ObservedPath>> {
        if self.t == 0.0 {
            return Ok(None);
        }
        match &self.fbm_history {
            Some(p) if p.start().abs() <= 1e-12 => Ok(Some(p)),
            Some(p) => Err(Error::MissingHistory { from: 0.0, to: p.start() }),
            None => Err(Error::MissingHistory { from: 0.0, to: self.t }),
        }
    }
}

/// Context for the conditional law at a fixed conditioning time.
struct Conditional<'a> {
    p: &'a FouParams,
    t: f64,
    a: f64,
    cfg: &'a FracOpConfig,
}

impl Conditional<'_> {
    fn c(&self, tau: f64) -> impl Fn(f64) -> f64 + '_ {
        let (nu, al) = (self.p.nu, self.p.alpha);
        move |z| nu * libm::exp(-al * (tau - z))
    }

    /// `Φ_c(t, τ, u)` at `u = t − d`, for `u, d > 0`.
    fn phi(&self, tau: f64, u: f64, d: f64) -> Result<f64> {
        let (u, d) = (u.max(f64::MIN_POSITIVE), d.max(f64::MIN_POSITIVE));
        phi_c_split(self.t, tau, u, d, &self.c(tau), self.a, &self.cfg.quad.tightened(0.01))
    }

    /// `Φ_c(t, τ, u)` from `u` alone, for nodes away from `t`.
    fn phi_at(&self, tau: f64, u: f64) -> Result<f64> {
        self.phi(tau, u, self.t - u)
    }

    /// `∫_lo^t f(u, t − u) du` for `f ~ (u − lo)^pa` at `lo` and
    /// `f ~ (t − u)^{−a}` at `t`, where `f` varies on the scale `τ − t`
    /// next to `t`. Panels are graded into that layer, which is integrated
    /// in the offset `t − u` so nodes there never round onto `t`.
    fn integrate_to_t<F: Fn(f64, f64) -> Result<f64>>(&self, f: &F, lo: f64, tau: f64, pa: f64) -> Result<f64> {
        let t = self.t;
        let cfg = &self.cfg.quad;
        let by_u = |u: f64| f(u, t - u);
        let (mut sum, start) = if pa < 0.0 {
            let mid = 0.5 * (lo + t);
            (quad::try_integrate_singular(by_u, lo, mid, pa, 0.0, cfg)?, mid)
        } else {
            (0.0, lo)
        };
        let layer = (tau - t).min(t - start);
        let mut edges = alloc::vec![t - layer];
        let mut w = 4.0 * layer;
        while t - w > start {
            edges.push(t - w);
            w *= 4.0;
        }
        edges.push(start);
        for e in edges.windows(2) {
            sum += quad::try_integrate(by_u, e[1], e[0], cfg)?;
        }
        Ok(sum + quad::try_integrate_singular(|d: f64| f(t - d, d), 0.0, layer, -self.a, 0.0, cfg)?)
    }

    /// Cell averages of `Φ_c(t, τ, ·)` over consecutive `times`.
    fn cell_weights(&self, tau: f64, times: &[f64]) -> Result<Vec<f64>> {
        let gl = GaussLegendre::new(self.cfg.cell_nodes.max(1));
        let last = times.len() - 1;
        let mut out = Vec::with_capacity(last);
        for i in 0..last {
            let (lo, hi) = (times[i], times[i + 1]);
            let avg = if i + 1 == last {
                let pa = if i == 0 { -self.a } else { 0.0 };
                self.integrate_to_t(&|u, d| self.phi(tau, u, d), lo, tau, pa)? / (hi - lo)
            } else if i == 0 {
                quad::try_integrate_singular(|u| self.phi_at(tau, u), lo, hi, -self.a, 0.0, &self.cfg.quad)? / (hi - lo)
            } else {
                let (xs, ws) = gl.composite(lo, hi, 1);
                let mut s = 0.0;
                for (x, wt) in xs.iter().zip(&ws) {
                    s += wt * self.phi_at(tau, *x)?;
                }
                s / (hi - lo)
            };
            out.push(avg);
        }
        Ok(out)
    }

    /// `∫_0^t Φ_c(t, τ, s) dW^H_s` with `Φ_c` averaged over each cell.
    fn predicted_noise(&self, tau: f64, w: &ObservedPath) -> Result<f64> {
        let times: Vec<f64> = w.times().collect();
        let weights = self.cell_weights(tau, &times)?;
        Ok(weights.iter().zip(w.path.values.windows(2)).map(|(k, v)| k * (v[1] - v[0])).sum())
    }

    /// `‖Φ_c 1_{[0,t]}‖²` through the disjoint-support cross form.
    fn explained_variance(&self, tau: f64) -> Result<f64> {
        let h = self.a + 0.5;
        let e = 2.0 * h - 2.0;
        let t = self.t;
        let (nu, al) = (self.p.nu, self.p.alpha);
        let kernel = |u: f64, d: f64| -> Result<f64> {
            let phi = self.phi(tau, u, d)?;
            let far = (tau - t) + d;
            let near = d;
            let g = nu * (damped_power_integral(al, e, far, far)? - damped_power_integral(al, e, near, far)?);
            Ok(phi * g)
        };
        let v = self.integrate_to_t(&kernel, 0.0, tau, -self.a)?;
        Ok(h * (2.0 * h - 1.0) * v)
    }
}

/// `e^{−α L} ∫_0^x e^{α y} y^p dy` for `p > −1`, summed as the positive series
/// `Σ_k α^k x^{k+p+1} / (k! (k+p+1))` in log space.
fn damped_power_integral(alpha: f64, p: f64, x: f64, damp: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let ax = alpha * x;
    let lx = libm::log(x);
    let base = (p + 1.0) * lx - alpha * damp;
    let mut sum = 0.0;
    let mut log_fact = 0.0;
    for k in 0..10_000usize {
        let kf = k as f64;
        if k > 0 {
            log_fact += libm::log(kf);
        }
        let log_pow = if k == 0 { 0.0 } else { kf * libm::log(ax) };
        let term = libm::exp(base + log_pow - log_fact) / (kf + p + 1.0);
        sum += term;
        if kf > ax && term <= 1e-17 * sum {
            return Ok(sum);
        }
    }
    Err(Error::Domain(alloc::format!("series for alpha x = {ax} did not converge")))
}

/// Mean `M(τ, t)` and variance `V(τ, t)` of `X_τ` given `F_t`.
pub fn conditional_moments(state: &MarketState, tau: f64, p: &FouParams, cfg: &FracOpConfig) -> Result<(f64, f64)> {
    state.validate()?;
    p.validate()?;
    let t = state.t;
    if !(tau > t) {
        return Err(crate::error::invalid("tau must exceed the conditioning time"));
    }
    let decay = libm::exp(-p.alpha * (tau - t));
    let base = state.x_t * decay + p.m * (1.0 - decay);
    let future = fou_variance_v(tau - t, p, &cfg.quad)?;
    let hist = match state.fbm()? {
        None => return Ok((base, future)),
        Some(w) => w,
    };
    if p.nu == 0.0 || p.h.is_brownian() {
        // Markov cases: the past adds nothing beyond X_t.
        return Ok((base, future));
    }
    let cond = Conditional { p, t, a: p.h.value() - 0.5, cfg };
    let mean = base + cond.predicted_noise(tau, hist)?;
    let explained = cond.explained_variance(tau)?;
    let var = future - explained;
    let scale = future.max(1e-300);
    if var < -cfg.variance_tol * scale {
        return Err(Error::NegativeVariance(var));
    }
    Ok((mean, var.max(0.0)))
}

/// `E[e^{X_τ} | F_t] = e^{M + V/2}`.
pub fn conditional_exp_moment(state: &MarketState, tau: f64, p: &FouParams, cfg: &FracOpConfig) -> Result<f64> {
    let (m, v) = conditional_moments(state, tau, p, cfg)?;
    capped_exp(m + 0.5 * v)
}

/// Weights `k_i` with `M(τ, t) = X_t e^{−α(τ−t)} + m (1 − e^{−α(τ−t)}) + Σ k_i ΔW^H_i`
/// for an fBm history observed at `times` (from 0 to `t`).
pub fn prediction_weights(times: &[f64], tau: f64, p: &FouParams, cfg: &FracOpConfig) -> Result<Vec<f64>> {
    p.validate()?;
    if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("history times must start at 0 and increase"));
    }
    let t = times[times.len() - 1];
    if !(tau > t) {
        return Err(crate::error::invalid("tau must exceed the conditioning time"));
    }
    if p.nu == 0.0 || p.h.is_brownian() {
        return Ok(alloc::vec![0.0; times.len() - 1]);
    }
    Conditional { p, t, a: p.h.value() - 0.5, cfg }.cell_weights(tau, times)
}

fn capped_exp(x: f64) -> Result<f64> {
    if x > EXPONENT_CAP {
        Err(Error::Overflow { exponent: x, cap: EXPONENT_CAP })
    } else {
        Ok(libm::exp(x))
    }
}

/// `N_t(τ)` truncated to the observed Brownian window, with the standard
/// deviation of the omitted part.
pub fn mvn_history_term(state: &MarketState, tau: f64, h: f64, t_hist: f64) -> Result<(f64, f64)> {
    let a = check_h(h)?;
    let t = state.t;
    let bm = state.bm_history.as_ref().ok_or(Error::MissingHistory { from: t - t_hist, to: t })?;
    if bm.start() > t - t_hist + 1e-9 * t_hist {
        return Err(Error::MissingHistory { from: t - t_hist, to: bm.start() });
    }
    let times: Vec<f64> = bm.times().collect();
    let vals = &bm.path.values;
    let lo = t - t_hist;
    let mut sum = 0.0;
    for i in 0..times.len() - 1 {
        if times[i] < lo - 1e-12 {
            continue;
        }
        let s = times[i];
        let k = libm::pow(tau - s, a) - libm::pow(t - s, a);
        sum += k * (vals[i + 1] - vals[i]);
    }
    let delta = tau - t;
    let tail = a * delta * libm::sqrt(libm::pow(t_hist, 2.0 * a - 1.0) / (1.0 - 2.0 * a));
    Ok((sum, tail))
}

/// `Λ(τ, t) = exp(M + V/2 − X_t − α m (τ − t) − ν C_H N_t(τ))` and the
/// standard deviation of the exponent lost by truncating `N_t`.
pub fn lambda_factor(state: &MarketState, tau: f64, p: &FouParams, cfg: &FracOpConfig) -> Result<(f64, f64)> {
    let (m, v) = conditional_moments(state, tau, p, cfg)?;
    let h = p.h.value();
    let t_hist = cfg.t_hist.unwrap_or(4.0 * tau);
    let (n, tail) =
        if p.nu == 0.0 || p.h.is_brownian() { (0.0, 0.0) } else { mvn_history_term(state, tau, h, t_hist)? };
    let ch = if p.h.is_brownian() { 1.0 } else { mvn_constant(h) };
    let e = m + 0.5 * v - state.x_t - p.alpha * p.m * (tau - state.t) - p.nu * ch * n;
    Ok((capped_exp(e)?, p.nu * ch * tail))
}

/// Continuous (`P₁`) and jump (`P₂`) legs of the variance swap value at `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriceDecomposition {
    pub p1: f64,
    pub p2: f64,
}

/// `Σ (1 − e^{−λ(T−u)}) ΔZ_u` over the observed jumps (cell midpoints).
fn observed_jump_sum(state: &MarketState, lambda: f64, maturity: f64) -> Result<f64> {
    if state.t == 0.0 {
        return Ok(0.0);
    }
    let z = state.z_history.as_ref().ok_or(Error::MissingHistory { from: 0.0, to: state.t })?;
    if z.start().abs() > 1e-12 {
        return Err(Error::MissingHistory { from: 0.0, to: z.start() });
    }
    let times: Vec<f64> = z.times().collect();
    let vals = &z.path.values;
    let mut sum = 0.0;
    for i in 0..times.len() - 1 {
        let dz = vals[i + 1] - vals[i];
        if dz != 0.0 {
            let u = 0.5 * (times[i] + times[i + 1]);
            sum += -libm::expm1(-lambda * (maturity - u)) * dz;
        }
    }
    Ok(sum)
}

/// `P = P₁ + P₂` at the state's time.
pub fn price_decomposition(
    state: &MarketState,
    p: &ModelParams,
    contract: &SwapContract,
    cfg: &FracOpConfig,
) -> Result<PriceDecomposition> {
    contract.validate()?;
    if contract.kind != SwapKind::Variance {
        return Err(crate::error::invalid("price decomposition is for variance swaps"));
    }
    p.validate()?;
    state.validate()?;
    let big_t = contract.maturity;
    let t = state.t;
    if t > big_t {
        return Err(crate::error::invalid("state time is past maturity"));
    }
    let df = libm::exp(-contract.rate * (big_t - t));

    // Continuous leg.
    let unconditional =
        |s: f64| -> Result<f64> { capped_exp(fou_mean(s, &p.fou) + 0.5 * fou_variance_v(s, &p.fou, &cfg.quad)?) };
    let past = if t > 0.0 { quad::try_integrate(unconditional, 0.0, t, &cfg.quad)? } else { 0.0 };
    let future = if t < big_t {
        let n = cfg.price_nodes.max(2);
        let (us, wu) = GaussLegendre::new(n).composite(0.0, 1.0, 1);
        let span = big_t - t;
        let mut s = 0.0;
        // s = t + span u², which resolves the √ onset of V near τ = t.
        for (u, w) in us.iter().zip(&wu) {
            let tau = t + span * u * u;
            s += w * 2.0 * span * u * conditional_exp_moment(state, tau, &p.fou, cfg)?;
        }
        s
    } else {
        0.0
    };
    let p1 = df * (past + future) / big_t;

    // Jump leg.
    let lam = p.lambda;
    let rest = big_t - t;
    let k1 = p.kappa1();
    let gap_leg = p.initial_gap() * (-libm::expm1(-lam * big_t)) / lam;
    let jumps = observed_jump_sum(state, lam, big_t)?;
    let expected = k1 * (rest + libm::expm1(-lam * rest) / lam);
    let p2 = df * ((jumps + expected) / (lam * big_t) + gap_leg / big_t - contract.strike);
    Ok(PriceDecomposition { p1: contract.notional * p1, p2: contract.notional * p2 })
}

/// Change of the discounted jump leg when `Z` jumps by `x` at `t`, per unit `x`.
pub fn p2_jump_sensitivity(p: &ModelParams, contract: &SwapContract, t: f64) -> f64 {
    let big_t = contract.maturity;
    contract.notional * libm::exp(-contract.rate * big_t) * (-libm::expm1(-p.lambda * (big_t - t))) / (p.lambda * big_t)
}

/// Quadratic-risk-minimizing stock position for the variance swap.
pub fn optimal_hedge_delta(
    state: &MarketState,
    p: &ModelParams,
    contract: &SwapContract,
    cfg: &FracOpConfig,
) -> Result<f64> {
    contract.validate()?;
    if contract.kind != SwapKind::Variance {
        return Err(crate::error::invalid("hedge ratio is for variance swaps"));
    }
    p.validate()?;
    state.validate()?;
    if p.rho > 0.0 {
        return Err(crate::error::invalid("rho must be <= 0"));
    }
    if p.rho == 0.0 || p.spec.is_zero() {
        return Ok(0.0);
    }
    let rho = p.rho;
    let num = p.spec.levy_integral(|x| x * libm::expm1(rho * x), 2.0, &cfg.quad)?;
    let den = p.spec.levy_integral(|x| libm::expm1(rho * x) * libm::expm1(rho * x), 2.0, &cfg.quad)?;
    if !(num.is_finite() && den.is_finite()) {
        return Err(Error::Domain("divergent Lévy integral".into()));
    }
    let spot = libm::exp(-contract.rate * state.t) * state.s_t;
    let sens = p2_jump_sensitivity(p, contract, state.t);
    Ok(sens * num / (spot * (state.sigma_t_sq + den)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::TimeGrid;
    use crate::levy::{FamilyKind, SubordinatorSpec};

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn damped_power_series_matches_quadrature() {
        for (al, p, x, l) in [(1.0 / 30.0, -0.5, 3.0, 4.0), (0.7, -0.2, 12.0, 12.0), (2.0, -0.9, 0.01, 1.0)] {
            let want = quad::integrate_singular(|y| libm::exp(al * (y - l)) * libm::pow(y, p), 0.0, x, p, 0.0, &cfg())
                .unwrap();
            let got = damped_power_integral(al, p, x, l).unwrap();
            assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn riemann_liouville_of_constants() {
        for h in [0.6, 0.75, 0.9] {
            let v = riemann_liouville_right(|_| 1.0, 0.3, 2.0, h, &cfg()).unwrap();
            let want = libm::pow(1.7, h - 0.5) / ((h - 0.5) * gamma(h - 0.5));
            assert!((v - want).abs() < 1e-10 * want, "h={h}");
        }
        assert_eq!(riemann_liouville_right(|_| 0.0, 0.3, 2.0, 0.75, &cfg()).unwrap(), 0.0);
        let near = riemann_liouville_right(|_| 1.0, 0.3, 2.0, 0.5001, &cfg()).unwrap();
        assert!((near - 1.0).abs() < 0.01);
    }

    #[test]
    fn inner_product_matches_kernel_form() {
        // ‖1_{[0,T]}‖² = T^{2H}.
        for h in [0.6, 0.75] {
            let n = frac_inner_product(|_| 1.0, |_| 1.0, 2.0, h, &cfg()).unwrap();
            assert!((n - libm::pow(2.0, 2.0 * h)).abs() < 1e-6, "h={h}: {n}");
        }
        let f = |x: f64| 1.0 + 0.5 * x - 0.2 * x * x;
        let g = |x: f64| 0.3 - x * x * x;
        let fg = frac_inner_product(f, g, 1.5, 0.7, &cfg()).unwrap();
        let gf = frac_inner_product(g, f, 1.5, 0.7, &cfg()).unwrap();
        assert!((fg - gf).abs() < 1e-8 * fg.abs().max(1.0));
        assert_eq!(frac_inner_product(f, |_| 0.0, 1.5, 0.7, &cfg()).unwrap(), 0.0);
        let near = frac_inner_product(|_| 1.0, |_| 1.0, 2.0, 0.5001, &cfg()).unwrap();
        assert!((near - 2.0).abs() < 0.02, "{near}");
    }

    #[test]
    fn phi_kernel_against_dense_riemann_sum() {
        let (s, t, v, h) = (1.0, 2.5, 0.6, 0.75);
        let al = 1.0 / 30.0;
        let c = |z: f64| (1.0 - libm::exp(-al * (z - s))) / al;
        let got = phi_c_kernel(s, t, v, c, h, &cfg()).unwrap();
        let n = 1_000_000;
        let dz = (t - s) / n as f64;
        let a = h - 0.5;
        let mut sum = 0.0;
        for i in 0..n {
            let z = s + (i as f64 + 0.5) * dz;
            sum += libm::pow(z, a) * libm::pow(z - s, a) * c(z) / (z - v) * dz;
        }
        let want = libm::sin(core::f64::consts::PI * a) / core::f64::consts::PI
            * libm::pow(v, -a)
            * libm::pow(s - v, -a)
            * sum;
        assert!((got - want).abs() < 1e-5 * want.abs(), "{got} vs {want}");
        let scaled = phi_c_kernel(s, t, v, |z| 3.0 * c(z), h, &cfg()).unwrap();
        assert!((scaled - 3.0 * got).abs() < 1e-12 * got.abs());
        assert_eq!(phi_c_kernel(s, t, v, |_| 0.0, h, &cfg()).unwrap(), 0.0);
        assert!(phi_c_kernel(s, t, 1.2, c, h, &cfg()).is_err());
    }

    fn fou() -> FouParams {
        FouParams::new(1.0 / 30.0, libm::log(400.0), 1.0 / 3.0, 0.75, libm::log(400.0)).unwrap()
    }

    fn state_with_history(t: f64) -> MarketState {
        let n = 40;
        let grid = TimeGrid::uniform(n, t / n as f64).unwrap();
        let w: Vec<f64> = grid.points().iter().map(|s| 0.3 * libm::sin(1.3 * s) + 0.1 * s).collect();
        let path = SamplePath::new(grid, w, 0).unwrap();
        MarketState {
            t,
            x_t: libm::log(380.0),
            sigma_t_sq: 380.0,
            s_t: 100.0,
            fbm_history: Some(ObservedPath::new(0.0, path)),
            bm_history: None,
            z_history: None,
        }
    }

    #[test]
    fn unconditional_law_at_inception() {
        let p = fou().with_x0(libm::log(500.0));
        let st = MarketState::initial(p.x0, 500.0, 100.0);
        let fc = FracOpConfig::default();
        let (m, v) = conditional_moments(&st, 7.0, &p, &fc).unwrap();
        assert!((m - fou_mean(7.0, &p)).abs() < 1e-12);
        assert!((v - fou_variance_v(7.0, &p, &cfg()).unwrap()).abs() < 1e-9);
        let e = conditional_exp_moment(&st, 7.0, &p, &fc).unwrap();
        assert!((e - libm::exp(m + 0.5 * v)).abs() < 1e-12 * e);
    }

    #[test]
    fn conditioning_reduces_variance_and_vanishes_at_tau_t() {
        let p = fou();
        let st = state_with_history(5.0);
        let fc = FracOpConfig::default();
        let (m, v) = conditional_moments(&st, 5.001, &p, &fc).unwrap();
        assert!((m - st.x_t).abs() < 1e-2);
        assert!((0.0..1e-2).contains(&v));
        let (_, v) = conditional_moments(&st, 9.0, &p, &fc).unwrap();
        let free = fou_variance_v(4.0, &p, &cfg()).unwrap();
        assert!(v > 0.0 && v < free, "{v} {free}");
    }

    #[test]
    fn explained_variance_matches_operator_norm() {
        let p = fou();
        let fc = FracOpConfig::default();
        let (t, tau) = (1.0, 1.6);
        let cond = Conditional { p: &p, t, a: 0.25, cfg: &fc };
        let fast = cond.explained_variance(tau).unwrap();
        let loose = QuadConfig { abs_tol: 1e-7, rel_tol: 1e-5, max_depth: 40 };
        // Tabulate the kernel on a grid clustered at both ends, then
        // interpolate with local cubics.
        let n = 400;
        let grid: Vec<f64> =
            (0..=n).map(|i| 0.5 * t * (1.0 - libm::cos(core::f64::consts::PI * i as f64 / n as f64))).collect();
        let table: Vec<f64> = grid[1..n].iter().map(|&u| cond.phi_at(tau, u).unwrap()).collect();
        let phi = |u: f64| {
            if !(u > 0.0 && u < t) {
                return 0.0;
            }
            let w = libm::acos(1.0 - 2.0 * u / t) / core::f64::consts::PI * n as f64;
            let j = (w as usize).clamp(2, n - 3) - 1;
            let (xs, ys) = (&grid[j..j + 4], &table[j - 1..j + 3]);
            let mut v = 0.0;
            for k in 0..4 {
                let mut l = ys[k];
                for m in 0..4 {
                    if m != k {
                        l *= (u - xs[m]) / (xs[k] - xs[m]);
                    }
                }
                v += l;
            }
            v
        };
        let slow = frac_inner_product(phi, phi, t, 0.75, &loose).unwrap();
        assert!((fast - slow).abs() < 1e-3 * slow, "{fast} vs {slow}");
    }

    #[test]
    fn lambda_identity_and_limits() {
        let p = fou();
        let mut st = state_with_history(5.0);
        let fc = FracOpConfig { t_hist: Some(20.0), ..FracOpConfig::default() };
        let grid = TimeGrid::uniform(250, 0.1).unwrap();
        let w: Vec<f64> = grid.points().iter().map(|s| 0.2 * libm::cos(0.7 * s)).collect();
        st.bm_history = Some(ObservedPath::new(-20.0, SamplePath::new(grid, w, 0).unwrap()));
        let tau = 8.0;
        let (lam, tail) = lambda_factor(&st, tau, &p, &fc).unwrap();
        assert!(tail > 0.0);
        let (n, _) = mvn_history_term(&st, tau, 0.75, 20.0).unwrap();
        let lhs = conditional_exp_moment(&st, tau, &p, &fc).unwrap();
        let rhs = libm::exp(st.x_t + p.alpha * p.m * (tau - st.t) + p.nu * mvn_constant(0.75) * n) * lam;
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
        let (near, _) = lambda_factor(&st, 5.001, &p, &fc).unwrap();
        assert!((near - 1.0).abs() < 1e-2);
        let flat = p.with_nu(0.0);
        let (l0, _) = lambda_factor(&st, tau, &flat, &fc).unwrap();
        let d = libm::exp(-flat.alpha * 3.0);
        let m0 = st.x_t * d + flat.m * (1.0 - d);
        assert!((l0 - libm::exp(m0 - st.x_t - flat.alpha * flat.m * 3.0)).abs() < 1e-12 * l0);
    }

    fn model(rho: f64) -> ModelParams {
        ModelParams {
            fou: fou(),
            lambda: 0.05,
            rho,
            c1: 0.0,
            c2: 0.0,
            sigma0_sq: 400.0,
            s0: 100.0,
            spec: SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, 30.0, 25.0).unwrap(),
        }
    }

    #[test]
    fn decomposition_at_inception_is_the_swap_price() {
        let p = model(-0.05);
        let c = SwapContract::variance(10.0, 410.0, 0.0002);
        let st = MarketState::initial(p.fou.x0, p.sigma0_sq, p.s0);
        let d = price_decomposition(&st, &p, &c, &FracOpConfig::default()).unwrap();
        let want = crate::pricing::frac_bns_variance_swap_price(&p, &c, &cfg()).unwrap();
        assert!((d.p1 + d.p2 - want).abs() < 1e-7 * 400.0, "{} vs {want}", d.p1 + d.p2);
        let none = ModelParams { spec: SubordinatorSpec::none(), ..p };
        let d = price_decomposition(&st, &none, &c, &FracOpConfig::default()).unwrap();
        assert!((d.p2 + libm::exp(-0.002) * 410.0).abs() < 1e-12);
    }

    #[test]
    fn hedge_delta_sign_and_zero_cases() {
        let c = SwapContract::variance(20.0, 400.0, 0.0);
        let st = MarketState::initial(libm::log(400.0), 400.0, 100.0);
        let fc = FracOpConfig::default();
        assert_eq!(optimal_hedge_delta(&st, &model(0.0), &c, &fc).unwrap(), 0.0);
        let none = ModelParams { spec: SubordinatorSpec::none(), ..model(-0.05) };
        assert_eq!(optimal_hedge_delta(&st, &none, &c, &fc).unwrap(), 0.0);
        let d = optimal_hedge_delta(&st, &model(-0.05), &c, &fc).unwrap();
        assert!(d < 0.0);
        assert!(optimal_hedge_delta(&st, &ModelParams { rho: 0.1, ..model(0.0) }, &c, &fc).is_err());
    }
}
