//! Full-model path simulation and Monte Carlo estimators.
//!
//! A path carries the log-variance factor `X`, the spot variance
//!
//! ```text
//! σ²_t = m_t + e^{X_t} + Σ_{s_j ≤ t} e^{−λ(t − s_j)} ΔZ_j
//! ```
//!
//! the subordinator `Z` and the price `S = S₀ e^Y` with
//! `dY = (c₁ − c₂ σ²) dt + σ dW + ρ dZ`. Jumps keep their exact times, so
//! the jump leg of every time integral is exact; only `∫ e^{X}` is
//! discretized (trapezoid). Conditionally on the variance path the Brownian
//! increment of `Y` over a cell is drawn from its exact law
//! `N(0, ∫_cell σ²)`.
//!
//! Paths are generated in streams: stream `k` draws from `path_rng(seed, k)`
//! and, with antithetics on, yields a pair whose Gaussian legs have opposite
//! signs and whose jumps coincide.

use alloc::vec::Vec;

use rand::Rng;

use crate::fou::{fou_covariance, fou_mean, fou_path_from_fbm, fou_variance_v, FouExactSampler, FouParams};
use crate::gaussian::{FbmSampler, SamplePath, TimeGrid};
use crate::levy::{Family, SubordinatorSpec};
use crate::linalg::{Cholesky, SymMatrix};
use crate::pricing::{HestonParams, ModelParams};
use crate::quad::{self, QuadConfig};
use crate::rng::{fill_normal, normal, path_rng};
use crate::{Error, Result};

/// Largest grid on which exact-law sampling of `X` is used.
pub const EXACT_LAW_MAX_STEPS: usize = 2048;

/// How `X` is sampled on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum XMode {
    /// Cholesky factor of the fOU Gram matrix: exact finite-dimensional law.
    #[default]
    ExactLaw,
    /// Exact fBm path pushed through the explicit solution, with a trapezoid
    /// rule for the memory integral (O(Δt) bias).
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub steps_per_day: usize,
    pub seed: u64,
    pub x_mode: XMode,
    pub antithetic: bool,
    pub quad: QuadConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            steps_per_day: 8,
            seed: 0x5eed,
            x_mode: XMode::ExactLaw,
            antithetic: true,
            quad: QuadConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.steps_per_day == 0 {
            return Err(crate::error::invalid("n_paths and steps_per_day must be at least 1"));
        }
        self.quad.validate()
    }

    /// Independent sampling units: pairs with antithetics, single paths otherwise.
    pub fn n_streams(&self) -> usize {
        if self.antithetic {
            self.n_paths.div_ceil(2)
        } else {
            self.n_paths
        }
    }
}

/// Non-fatal conditions noticed while setting up a simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimWarning {
    /// `max(α, λ) Δt` exceeds 0.1; the trapezoid leg may be visibly biased.
    CoarseGrid { rate_times_step: f64 },
    /// Exact-law sampling was requested on more than [`EXACT_LAW_MAX_STEPS`]
    /// steps; the explicit solution is used instead.
    ExplicitFallback { steps: usize },
}

/// One simulated path on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPath {
    pub grid: TimeGrid,
    pub s: SamplePath,
    pub x: SamplePath,
    pub sigma_sq: SamplePath,
    pub z: SamplePath,
    /// Jump times and sizes of `Z` (cell-uniform times for infinite activity).
    pub jumps: Vec<(f64, f64)>,
    pub lambda: f64,
}

impl ModelPath {
    /// Assembles a path from explicit parts and checks the invariants.
    pub fn from_parts(
        grid: TimeGrid,
        s: Vec<f64>,
        x: Vec<f64>,
        sigma_sq: Vec<f64>,
        jumps: Vec<(f64, f64)>,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        if sigma_sq.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Domain("spot variance must be positive on the whole path".into()));
        }
        if jumps.iter().any(|j| !(j.1 >= 0.0)) {
            return Err(Error::Domain("jump sizes must be non-negative".into()));
        }
        if !(lambda > 0.0) {
            return Err(crate::error::invalid("lambda must be positive"));
        }
        let mut z = Vec::with_capacity(grid.len());
        let (mut acc, mut j) = (0.0, 0);
        for &t in grid.points() {
            while j < jumps.len() && jumps[j].0 <= t {
                acc += jumps[j].1;
                j += 1;
            }
            z.push(acc);
        }
        Ok(Self {
            s: SamplePath::new(grid.clone(), s, seed)?,
            x: SamplePath::new(grid.clone(), x, seed)?,
            sigma_sq: SamplePath::new(grid.clone(), sigma_sq, seed)?,
            z: SamplePath::new(grid.clone(), z, seed)?,
            grid,
            jumps,
            lambda,
        })
    }

    pub fn maturity(&self) -> f64 {
        self.grid.last()
    }
}

/// `Σ_{s_j ≤ t} e^{−λ(t − s_j)} x_j` on the grid, for time-sorted jumps.
fn jump_leg_on_grid(grid: &[f64], jumps: &[(f64, f64)], lambda: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let (mut acc, mut j, mut prev) = (0.0, 0, 0.0);
    for &t in grid {
        acc *= libm::exp(-lambda * (t - prev));
        while j < jumps.len() && jumps[j].0 <= t {
            acc += libm::exp(-lambda * (t - jumps[j].0)) * jumps[j].1;
            j += 1;
        }
        out.push(acc);
        prev = t;
    }
    out
}

/// Trapezoid integral of grid values.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    let parts: Vec<f64> =
        grid.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).collect();
    pairwise_sum(&parts)
}

/// `σ_R² = (1/T) ∫_0^T σ²_t dt`: trapezoid on the continuous part, exact on
/// the jump leg.
pub fn realized_variance(path: &ModelPath) -> f64 {
    let grid = path.grid.points();
    let big_t = path.maturity();
    let leg = jump_leg_on_grid(grid, &path.jumps, path.lambda);
    let cont: Vec<f64> = path.sigma_sq.values.iter().zip(&leg).map(|(s, l)| s - l).collect();
    let jumps: f64 = path
        .jumps
        .iter()
        .filter(|j| j.0 <= big_t)
        .map(|&(s, x)| -libm::expm1(-path.lambda * (big_t - s)) * x / path.lambda)
        .sum();
    (trapezoid(grid, &cont) + jumps) / big_t
}

/// Sum with pairwise (tree) association: the result depends only on the
/// order of `xs`, never on how work was split.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Number of independent samples.
    pub n: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(crate::error::invalid("need at least two samples"));
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Ok(Self { mean, std_error: libm::sqrt(var / n as f64), n })
    }

    /// `|mean − target| / SE` (infinite when SE is 0 and they differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Sample variance of i.i.d. draws with the standard error
/// `√((m₄ − s⁴)/n)` of the variance estimator.
pub fn variance_estimate(xs: &[f64]) -> Result<McEstimate> {
    let n = xs.len();
    if n < 4 {
        return Err(crate::error::invalid("need at least four samples"));
    }
    let mean = pairwise_sum(xs) / n as f64;
    let d2: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let d4: Vec<f64> = d2.iter().map(|d| d * d).collect();
    let var = pairwise_sum(&d2) / (n - 1) as f64;
    let m4 = pairwise_sum(&d4) / n as f64;
    Ok(McEstimate { mean: var, std_error: libm::sqrt((m4 - var * var).max(0.0) / n as f64), n })
}

/// Random inputs of one stream; both antithetic partners are built from it.
struct Draws {
    /// Centered Gaussian part of `X` on the grid.
    x_dev: Vec<f64>,
    /// Standard normals driving `W` per cell.
    xi: Vec<f64>,
    jumps: Vec<(f64, f64)>,
}

enum XGen {
    Deterministic,
    Exact(FouExactSampler),
    Explicit(FbmSampler),
}

/// Precomputed full-model path generator for a fixed maturity and grid.
pub struct Simulator {
    p: ModelParams,
    cfg: SimConfig,
    grid: TimeGrid,
    x_mean: Vec<f64>,
    x_gen: XGen,
    warnings: Vec<SimWarning>,
}

impl Simulator {
    pub fn new(p: &ModelParams, maturity: f64, cfg: &SimConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(crate::error::invalid("maturity must be positive"));
        }
        let steps = libm::ceil(maturity * cfg.steps_per_day as f64).max(1.0) as usize;
        let grid = TimeGrid::uniform(steps, maturity / steps as f64)?;
        Self::on_grid(p, grid, cfg)
    }

    /// Generator on a caller-supplied grid starting at 0.
    pub fn on_grid(p: &ModelParams, grid: TimeGrid, cfg: &SimConfig) -> Result<Self> {
        p.validate()?;
        cfg.validate()?;
        let steps = grid.len() - 1;
        let mut warnings = Vec::new();
        let max_dt = grid.points().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let stiff = p.fou.alpha.max(p.lambda) * max_dt;
        if stiff > 0.1 {
            warnings.push(SimWarning::CoarseGrid { rate_times_step: stiff });
        }
        let x_mean: Vec<f64> = grid.points().iter().map(|&t| fou_mean(t, &p.fou)).collect();
        let x_gen = if p.fou.nu == 0.0 {
            XGen::Deterministic
        } else if cfg.x_mode == XMode::ExactLaw && steps <= EXACT_LAW_MAX_STEPS {
            XGen::Exact(FouExactSampler::new(&p.fou, &grid, &cfg.quad)?)
        } else {
            if cfg.x_mode == XMode::ExactLaw {
                warnings.push(SimWarning::ExplicitFallback { steps });
            }
            XGen::Explicit(FbmSampler::auto(p.fou.h, &grid)?)
        };
        Ok(Self { p: *p, cfg: *cfg, grid, x_mean, x_gen, warnings })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn warnings(&self) -> &[SimWarning] {
        &self.warnings
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn n_streams(&self) -> usize {
        self.cfg.n_streams()
    }

    fn draws(&self, stream: u64) -> Draws {
        let mut rng = path_rng(self.cfg.seed, stream);
        let n = self.grid.len();
        let mut x_dev = alloc::vec![0.0; n];
        match &self.x_gen {
            XGen::Deterministic => {}
            XGen::Exact(s) => {
                let mut z = alloc::vec![0.0; s.dim()];
                fill_normal(&mut rng, &mut z);
                s.transform(&z, &mut x_dev);
                for (d, m) in x_dev.iter_mut().zip(&self.x_mean) {
                    *d -= m;
                }
            }
            XGen::Explicit(s) => {
                let mut w = alloc::vec![0.0; n];
                s.sample_into(&mut rng, &mut w);
                let x = fou_path_from_fbm(&self.p.fou, &self.grid, &w);
                for ((d, x), m) in x_dev.iter_mut().zip(&x).zip(&self.x_mean) {
                    *d = x - m;
                }
            }
        }
        let mut xi = alloc::vec![0.0; n - 1];
        fill_normal(&mut rng, &mut xi);
        let jumps = sample_jump_list(&self.p.spec, self.grid.points(), &mut rng);
        Draws { x_dev, xi, jumps }
    }

    fn assemble(&self, d: &Draws, sign: f64, jumps: &[(f64, f64)], seed: u64) -> Result<ModelPath> {
        let p = &self.p;
        let t = self.grid.points();
        let n = t.len();
        let gap = p.initial_gap();
        let x: Vec<f64> = self.x_mean.iter().zip(&d.x_dev).map(|(m, e)| m + sign * e).collect();
        let cont: Vec<f64> = t.iter().zip(&x).map(|(&s, &xv)| gap * libm::exp(-p.lambda * s) + libm::exp(xv)).collect();
        let leg = jump_leg_on_grid(t, jumps, p.lambda);
        let sigma_sq: Vec<f64> = cont.iter().zip(&leg).map(|(c, l)| c + l).collect();
        let mut y = libm::log(p.s0);
        let mut s = Vec::with_capacity(n);
        s.push(p.s0);
        // Jumps at time 0 are already in `leg[0]`.
        let mut j = jumps.iter().take_while(|jp| jp.0 <= t[0]).count();
        for k in 0..n - 1 {
            let dt = t[k + 1] - t[k];
            let decay = libm::exp(-p.lambda * dt);
            // Exact integral of the jump leg over the cell.
            let mut jump_int = leg[k] * (1.0 - decay) / p.lambda;
            let mut dz = 0.0;
            while j < jumps.len() && jumps[j].0 <= t[k + 1] {
                let (sj, xj) = jumps[j];
                jump_int += -libm::expm1(-p.lambda * (t[k + 1] - sj)) * xj / p.lambda;
                dz += xj;
                j += 1;
            }
            let iv = 0.5 * dt * (cont[k] + cont[k + 1]) + jump_int;
            y += p.c1 * dt - p.c2 * iv + sign * libm::sqrt(iv.max(0.0)) * d.xi[k] + p.rho * dz;
            s.push(libm::exp(y));
        }
        ModelPath::from_parts(self.grid.clone(), s, x, sigma_sq, jumps.to_vec(), p.lambda, seed)
    }

    /// Paths of one stream (two with antithetics).
    pub fn stream_paths(&self, stream: u64) -> Result<Vec<ModelPath>> {
        let d = self.draws(stream);
        let mut out = Vec::with_capacity(2);
        out.push(self.assemble(&d, 1.0, &d.jumps, stream)?);
        if self.cfg.antithetic {
            out.push(self.assemble(&d, -1.0, &d.jumps, stream)?);
        }
        Ok(out)
    }

    /// Path number `index` (stream `index / 2`, partner `index % 2` with antithetics).
    pub fn path(&self, index: u64) -> Result<ModelPath> {
        if self.cfg.antithetic {
            let d = self.draws(index / 2);
            let sign = if index % 2 == 0 { 1.0 } else { -1.0 };
            self.assemble(&d, sign, &d.jumps, index / 2)
        } else {
            let d = self.draws(index);
            self.assemble(&d, 1.0, &d.jumps, index)
        }
    }

    /// Path of stream `stream` with the jump list replaced by `jumps`
    /// (sorted by time, inside `[0, T]`).
    pub fn path_with_jumps(&self, stream: u64, jumps: &[(f64, f64)]) -> Result<ModelPath> {
        if jumps.windows(2).any(|w| w[1].0 < w[0].0) || jumps.iter().any(|j| j.0 < 0.0 || j.0 > self.grid.last()) {
            return Err(crate::error::invalid("injected jumps must be sorted and inside the horizon"));
        }
        let d = self.draws(stream);
        self.assemble(&d, 1.0, jumps, stream)
    }

    /// Mean of `f` over the paths of one stream: the independent sample.
    pub fn stream_value<F: Fn(&ModelPath) -> f64>(&self, stream: u64, f: &F) -> Result<f64> {
        let paths = self.stream_paths(stream)?;
        Ok(paths.iter().map(f).sum::<f64>() / paths.len() as f64)
    }

    /// Serial estimate of `E[f(path)]` over all streams.
    pub fn estimate<F: Fn(&ModelPath) -> f64>(&self, f: F) -> Result<McEstimate> {
        let xs: Vec<f64> = (0..self.n_streams() as u64).map(|k| self.stream_value(k, &f)).collect::<Result<_>>()?;
        McEstimate::from_samples(&xs)
    }
}

/// Jumps on `[0, T]`: exact for compound Poisson; otherwise one increment per
/// cell placed at a uniform time inside it.
fn sample_jump_list<R: Rng + ?Sized>(spec: &SubordinatorSpec, grid: &[f64], rng: &mut R) -> Vec<(f64, f64)> {
    let big_t = grid[grid.len() - 1];
    if let Some(j) = spec.sample_jumps(big_t, rng) {
        return j;
    }
    let mut out = Vec::with_capacity(grid.len() - 1);
    for w in grid.windows(2) {
        let inc = spec.sample_increment(w[1] - w[0], rng);
        let u: f64 = rng.random();
        if inc > 0.0 {
            out.push((w[0] + u * (w[1] - w[0]), inc));
        }
    }
    out
}

/// MC estimate of `E[σ_R²]`.
pub fn mc_expected_rv(p: &ModelParams, maturity: f64, cfg: &SimConfig) -> Result<McEstimate> {
    Simulator::new(p, maturity, cfg)?.estimate(realized_variance)
}

/// MC estimate of `E[σ_R]`.
pub fn mc_expected_vol(p: &ModelParams, maturity: f64, cfg: &SimConfig) -> Result<McEstimate> {
    Simulator::new(p, maturity, cfg)?.estimate(|path| libm::sqrt(realized_variance(path)))
}

/// Realized variance of Heston paths by full-truncation Euler:
/// `v ← v + k(θ² − v⁺)Δt + γ √(v⁺ Δt) ξ`, `σ_R² = (1/T) ∫ v⁺` (trapezoid).
/// Returns one value per stream (the pair average with antithetics).
pub fn heston_rv_stream(
    hp: &HestonParams,
    maturity: f64,
    steps: usize,
    seed: u64,
    stream: u64,
    antithetic: bool,
) -> f64 {
    let mut rng = path_rng(seed, stream);
    let mut xi = alloc::vec![0.0; steps];
    fill_normal(&mut rng, &mut xi);
    let dt = maturity / steps as f64;
    let run = |sign: f64| {
        let mut v = hp.sigma0_sq;
        let mut acc = 0.0;
        for z in &xi {
            let vp = v.max(0.0);
            let next = v + hp.k * (hp.theta_sq - vp) * dt + hp.gamma * libm::sqrt(vp * dt) * sign * z;
            acc += 0.5 * dt * (vp + next.max(0.0));
            v = next;
        }
        acc / maturity
    };
    if antithetic {
        0.5 * (run(1.0) + run(-1.0))
    } else {
        run(1.0)
    }
}

/// Heston realized variances for streams `0..n`.
pub fn heston_rv_samples(
    hp: &HestonParams,
    maturity: f64,
    steps: usize,
    seed: u64,
    n: usize,
    antithetic: bool,
) -> Result<Vec<f64>> {
    hp.validate()?;
    if steps == 0 || !(maturity > 0.0) {
        return Err(crate::error::invalid("need steps >= 1 and a positive maturity"));
    }
    Ok((0..n as u64).map(|k| heston_rv_stream(hp, maturity, steps, seed, k, antithetic)).collect())
}

/// Classical BN-S model `dσ² = −λσ² dt + dZ_{λt}`, `dY ∋ ρ dZ_{λt}`, with
/// realized variance taken as the quadratic variation of `Y` per unit time:
/// `(1/T)(∫σ² dt + ρ² Σ ΔZ²)`. Compound Poisson only, which makes it exact.
pub fn classical_bns_rv_stream(
    sigma0_sq: f64,
    spec: &SubordinatorSpec,
    lambda: f64,
    rho: f64,
    maturity: f64,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let Family::CompoundPoissonExp { rate, mean_jump } = spec.family() else {
        return Err(crate::error::invalid("classical BN-S simulation needs a compound Poisson subordinator"));
    };
    let mut rng = path_rng(seed, stream);
    // Jumps of Z on the clock λt arrive at rate λ·rate in calendar time.
    let clocked = SubordinatorSpec::compound_poisson_exp(lambda * rate, mean_jump)?;
    let jumps = clocked.sample_jumps(maturity, &mut rng).unwrap_or_default();
    let mut int = sigma0_sq * (-libm::expm1(-lambda * maturity)) / lambda;
    let mut qv = 0.0;
    for (s, x) in jumps {
        int += x * (-libm::expm1(-lambda * (maturity - s))) / lambda;
        qv += x * x;
    }
    Ok((int + rho * rho * qv) / maturity)
}

/// Joint sampler of an fBm history on `(0, t]`, `X_t` and `X_τ`, built from
/// one Gram matrix:
///
/// ```text
/// X_t = μ(t) + Y,   Y = ∫_0^t ν e^{−α(t−z)} dW^H_z
/// X_τ = e^{−α(τ−t)} X_t + m (1 − e^{−α(τ−t)}) + F,   F = ∫_t^τ ν e^{−α(τ−z)} dW^H_z
/// Cov(W^H_s, ∫_a^b c dW^H) = ∫_a^b c(z) ∂_z ρ_H(z, s) dz
/// ```
pub struct ConditionalLawSampler {
    p: FouParams,
    t: f64,
    tau: f64,
    times: Vec<f64>,
    factor: Cholesky,
}

/// One joint draw.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDraw {
    /// `W^H` at the history times (first entry 0 at time 0).
    pub fbm: Vec<f64>,
    pub x_t: f64,
    pub x_tau: f64,
}

/// `∂_z ρ_H(z, s) = H (z^{2H−1} − sign(z − s) |z − s|^{2H−1})`.
fn d_fbm_cov(z: f64, s: f64, h: f64) -> f64 {
    let e = 2.0 * h - 1.0;
    let d = z - s;
    let sg = if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    };
    h * (libm::pow(z, e) - sg * libm::pow(d.abs(), e))
}

impl ConditionalLawSampler {
    /// History on `steps` equal cells of `[0, t]`.
    pub fn new(p: &FouParams, t: f64, tau: f64, steps: usize, cfg: &QuadConfig) -> Result<Self> {
        p.validate()?;
        if !(t > 0.0 && tau > t) || steps == 0 {
            return Err(crate::error::invalid("need 0 < t < tau and at least one history step"));
        }
        if p.h.is_brownian() {
            return Err(crate::error::invalid("the joint sampler needs H > 1/2"));
        }
        let h = p.h.value();
        let times: Vec<f64> = (0..=steps).map(|i| t * i as f64 / steps as f64).collect();
        let hist = &times[1..];
        let n = hist.len();
        let (nu, al) = (p.nu, p.alpha);
        let cross = |s: f64, a: f64, b: f64, end: f64| -> Result<f64> {
            let f = |z: f64| nu * libm::exp(-al * (end - z)) * d_fbm_cov(z, s, h);
            let breaks: Vec<f64> = if s > a && s < b { alloc::vec![s] } else { Vec::new() };
            quad::try_integrate_pieces(|z| Ok(f(z)), a, b, &breaks, cfg)
        };
        let vt = fou_variance_v(t, p, cfg)?;
        let vf = fou_variance_v(tau - t, p, cfg)?;
        let decay = libm::exp(-al * (tau - t));
        let centered = p.with_x0(0.0);
        let cyf = fou_covariance(t, tau, &centered, cfg)? - decay * vt;
        let mut cov_y = Vec::with_capacity(n);
        let mut cov_f = Vec::with_capacity(n);
        for &s in hist {
            cov_y.push(cross(s, 0.0, t, t)?);
            cov_f.push(cross(s, t, tau, tau)?);
        }
        let gram = SymMatrix::from_fn(n + 2, |i, j| {
            let (i, j) = if i >= j { (i, j) } else { (j, i) };
            Ok(match (i, j) {
                (i, j) if i < n => crate::gaussian::fbm_covariance(hist[i], hist[j], h),
                (i, j) if i == n && j < n => cov_y[j],
                (i, j) if i == n && j == n => vt,
                (_, j) if j < n => cov_f[j],
                (_, j) if j == n => cyf,
                _ => vf,
            })
        })?;
        let factor = Cholesky::factor(&gram)?;
        Ok(Self { p: *p, t, tau, times, factor })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ConditionalDraw {
        let n = self.factor.n;
        let mut z = alloc::vec![0.0; n];
        for v in z.iter_mut() {
            *v = normal(rng);
        }
        let mut out = alloc::vec![0.0; n];
        self.factor.mul_into(&z, &mut out);
        let k = n - 2;
        let mut fbm = Vec::with_capacity(k + 1);
        fbm.push(0.0);
        fbm.extend_from_slice(&out[..k]);
        let x_t = fou_mean(self.t, &self.p) + out[k];
        let decay = libm::exp(-self.p.alpha * (self.tau - self.t));
        let x_tau = decay * x_t + self.p.m * (1.0 - decay) + out[k + 1];
        ConditionalDraw { fbm, x_t, x_tau }
    }
}
