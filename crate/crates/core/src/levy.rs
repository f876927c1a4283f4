//! Subordinator families and moments of OU-weighted jump integrals.
//!
//! ```text
//! family                  κ(θ) = log E e^{θ Z₁}        κ_k
//! compound Poisson-exp    a b θ / (1 − b θ)            a k! b^k
//! gamma                   −a log(1 − θ/β)              a (k−1)! / β^k
//! inverse Gaussian        δ (γ − √(γ² − 2θ))           δ (2k−3)!! γ^{1−2k}
//! ```
//!
//! The jump contribution to realized variance is `J = ∫ f(s) dZ_s` with a
//! deterministic weight `f`, so its cumulants are `κ_j ∫ f^j`. Moments of
//! `J + shift` follow from the recursion `g₁ = K'`, `g_{k+1} = g₁ g_k + g_k'`
//! (`g_k = M^{(k)} / M` for the moment generating function `M = e^K`),
//! evaluated on truncated Taylor jets at `θ = 0`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, InverseGaussian};

use crate::gaussian::{SamplePath, TimeGrid};
use crate::quad::{self, QuadConfig};
use crate::rng::path_rng;
use crate::special::{factorial, pascal};
use crate::{Error, Result};

/// Largest cumulant order served by [`SubordinatorSpec::cumulant`].
pub const MAX_CUMULANT: usize = 60;
/// Default cap on the moment order of [`a_moment`].
pub const MAX_A_ORDER: usize = 20;

/// Supported subordinator families with their raw parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Jumps at `rate` per day with exponential sizes of mean `mean_jump`.
    CompoundPoissonExp { rate: f64, mean_jump: f64 },
    /// Gamma process: shape `shape` per day, rate `rate`.
    Gamma { shape: f64, rate: f64 },
    /// Inverse Gaussian process with parameters `(delta, gamma)`.
    InverseGaussian { delta: f64, gamma: f64 },
}

/// Family names, used when calibrating from cumulants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    CompoundPoissonExp,
    Gamma,
    InverseGaussian,
}

/// A Lévy subordinator `Z` (non-decreasing, no Gaussian part).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubordinatorSpec {
    family: Family,
}

/// Convention for the time argument of the jump integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TimeScale {
    /// `J = (1/(λT)) ∫_0^T (1 − e^{−λ(T−s)}) dZ_s`, the jump part of the
    /// realized variance when `Z` drives the variance on calendar time.
    #[default]
    Calendar,
    /// `J = (1/(λT)) ∫_0^{λT} (1 − e^{−s}) dZ_s`, the integral on the
    /// intrinsic clock `λt`. Its `j`-th cumulant is `λ` times the calendar one.
    Intrinsic,
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(crate::error::invalid(alloc::format!("{what} must be positive and finite, got {x}")))
    }
}

impl SubordinatorSpec {
    pub fn new(family: Family) -> Result<Self> {
        match family {
            Family::CompoundPoissonExp { rate, mean_jump } => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(crate::error::invalid("compound Poisson rate must be non-negative"));
                }
                positive(mean_jump, "mean jump size")?;
            }
            Family::Gamma { shape, rate } => {
                positive(shape, "gamma shape")?;
                positive(rate, "gamma rate")?;
            }
            Family::InverseGaussian { delta, gamma } => {
                positive(delta, "inverse Gaussian delta")?;
                positive(gamma, "inverse Gaussian gamma")?;
            }
        }
        Ok(Self { family })
    }

    pub fn compound_poisson_exp(rate: f64, mean_jump: f64) -> Result<Self> {
        Self::new(Family::CompoundPoissonExp { rate, mean_jump })
    }

    /// The zero subordinator (no jumps at all).
    pub fn none() -> Self {
        Self { family: Family::CompoundPoissonExp { rate: 0.0, mean_jump: 1.0 } }
    }

    /// Calibrates a family to the first two cumulants of `Z₁`.
    pub fn from_cumulants(kind: FamilyKind, kappa1: f64, kappa2: f64) -> Result<Self> {
        positive(kappa1, "kappa1")?;
        positive(kappa2, "kappa2")?;
        let family = match kind {
            FamilyKind::CompoundPoissonExp => {
                let b = kappa2 / (2.0 * kappa1);
                Family::CompoundPoissonExp { rate: kappa1 / b, mean_jump: b }
            }
            FamilyKind::Gamma => Family::Gamma { shape: kappa1 * kappa1 / kappa2, rate: kappa1 / kappa2 },
            FamilyKind::InverseGaussian => {
                let g = libm::sqrt(kappa1 / kappa2);
                Family::InverseGaussian { delta: kappa1 * g, gamma: g }
            }
        };
        Self::new(family)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// True when the Lévy measure is identically zero.
    pub fn is_zero(&self) -> bool {
        matches!(self.family, Family::CompoundPoissonExp { rate, .. } if rate == 0.0)
    }

    /// Supremum of the domain of `κ`.
    pub fn theta_max(&self) -> f64 {
        match self.family {
            Family::CompoundPoissonExp { mean_jump, .. } => 1.0 / mean_jump,
            Family::Gamma { rate, .. } => rate,
            Family::InverseGaussian { gamma, .. } => 0.5 * gamma * gamma,
        }
    }

    /// Cumulant generating function `κ(θ) = log E e^{θ Z₁}`.
    pub fn cgf(&self, theta: f64) -> Result<f64> {
        if !(theta < self.theta_max()) {
            return Err(Error::Domain(alloc::format!(
                "theta {theta} at or beyond the CGF boundary {}",
                self.theta_max()
            )));
        }
        Ok(match self.family {
            Family::CompoundPoissonExp { rate, mean_jump } => rate * mean_jump * theta / (1.0 - mean_jump * theta),
            Family::Gamma { shape, rate } => -shape * libm::log1p(-theta / rate),
            Family::InverseGaussian { delta, gamma } => {
                let root = libm::sqrt(gamma * gamma - 2.0 * theta);
                delta * 2.0 * theta / (gamma + root)
            }
        })
    }

    /// `k`-th cumulant of `Z₁`, `1 <= k <= MAX_CUMULANT`.
    pub fn cumulant(&self, k: usize) -> Result<f64> {
        if k == 0 || k > MAX_CUMULANT {
            return Err(Error::Domain(alloc::format!("cumulant order {k} outside 1..={MAX_CUMULANT}")));
        }
        Ok(match self.family {
            Family::CompoundPoissonExp { rate, mean_jump } => rate * factorial(k) * libm::pow(mean_jump, k as f64),
            Family::Gamma { shape, rate } => shape * factorial(k - 1) / libm::pow(rate, k as f64),
            Family::InverseGaussian { delta, gamma } => {
                // (2k−3)!! = 1·3·…·(2k−3), with (−1)!! = 1.
                let dfact = (1..k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64);
                delta * dfact * libm::pow(gamma, 1.0 - 2.0 * k as f64)
            }
        })
    }

    /// Lévy density `ν_Z(x)` for `x > 0`.
    pub fn levy_density(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        match self.family {
            Family::CompoundPoissonExp { rate, mean_jump } => rate / mean_jump * libm::exp(-x / mean_jump),
            Family::Gamma { shape, rate } => shape * libm::exp(-rate * x) / x,
            Family::InverseGaussian { delta, gamma } => {
                delta / libm::sqrt(2.0 * core::f64::consts::PI)
                    * libm::pow(x, -1.5)
                    * libm::exp(-0.5 * gamma * gamma * x)
            }
        }
    }

    /// Exponent of the density's power behaviour at 0 and its tail scale.
    fn density_shape(&self) -> (f64, f64) {
        match self.family {
            Family::CompoundPoissonExp { mean_jump, .. } => (0.0, mean_jump),
            Family::Gamma { rate, .. } => (-1.0, 1.0 / rate),
            Family::InverseGaussian { gamma, .. } => (-1.5, 2.0 / (gamma * gamma)),
        }
    }

    /// `∫_0^∞ f(x) ν_Z(dx)` where `f(x) = O(x^order)` as `x → 0` and grows
    /// at most like `e^{x/(2·scale)}`.
    ///
    /// The range is cut at 60 tail scales, where the exponential tail of the
    /// density leaves a relative remainder far below 1e-10.
    pub fn levy_integral<F: FnMut(f64) -> f64>(&self, mut f: F, order: f64, cfg: &QuadConfig) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let (d0, scale) = self.density_shape();
        let p = order + d0;
        if p <= -1.0 {
            return Err(Error::Domain(alloc::format!("Lévy integral diverges at 0 (exponent {p})")));
        }
        let mut g = |x: f64| if x > 0.0 { f(x) * self.levy_density(x) } else { 0.0 };
        let head = quad::integrate_singular(&mut g, 0.0, scale, p.min(0.0), 0.0, cfg)?;
        let tail = quad::integrate(&mut g, scale, 60.0 * scale, cfg)?;
        Ok(head + tail)
    }

    /// Jump times and sizes on `[0, horizon]` for compound Poisson specs;
    /// `None` for infinite-activity families.
    pub fn sample_jumps<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Option<Vec<(f64, f64)>> {
        match self.family {
            Family::CompoundPoissonExp { rate, mean_jump } => {
                let mut jumps = Vec::new();
                if rate == 0.0 {
                    return Some(jumps);
                }
                let mut t = 0.0;
                loop {
                    let e: f64 = Exp1.sample(rng);
                    t += e / rate;
                    if t > horizon {
                        break;
                    }
                    let size: f64 = Exp1.sample(rng);
                    jumps.push((t, size * mean_jump));
                }
                Some(jumps)
            }
            _ => None,
        }
    }

    /// One increment `Z_{t+dt} − Z_t`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        match self.family {
            Family::CompoundPoissonExp { .. } => {
                self.sample_jumps(dt, rng).unwrap_or_default().iter().map(|j| j.1).sum()
            }
            Family::Gamma { shape, rate } => {
                Gamma::new(shape * dt, 1.0 / rate).expect("validated gamma parameters").sample(rng)
            }
            Family::InverseGaussian { delta, gamma } => {
                let mean = delta * dt / gamma;
                InverseGaussian::new(mean, (delta * dt) * (delta * dt))
                    .expect("validated inverse Gaussian parameters")
                    .sample(rng)
            }
        }
    }
}

/// Subordinator path on `grid` from stream `(seed, 0)`; `Z₀ = 0`.
pub fn sample_subordinator(spec: &SubordinatorSpec, grid: &TimeGrid, seed: u64) -> Result<SamplePath> {
    let mut rng = path_rng(seed, 0);
    let t = grid.points();
    let mut values = alloc::vec![0.0; t.len()];
    if let Some(jumps) = spec.sample_jumps(grid.last(), &mut rng) {
        let mut j = 0;
        let mut acc = 0.0;
        for (k, &tk) in t.iter().enumerate() {
            while j < jumps.len() && jumps[j].0 <= tk {
                acc += jumps[j].1;
                j += 1;
            }
            values[k] = acc;
        }
    } else {
        for k in 1..t.len() {
            values[k] = values[k - 1] + spec.sample_increment(t[k] - t[k - 1], &mut rng);
        }
    }
    SamplePath::new(grid.clone(), values, seed)
}

/// Moment request for `A_n = E[(−β² + J)^n]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AMomentRequest {
    pub n: usize,
    pub beta2: f64,
    pub lambda: f64,
    pub maturity: f64,
}

/// `F_j = ∫ f(s)^j ds` for the jump weight `f` of the chosen time scale,
/// `j = 0..=jmax`.
pub fn jump_weight_integrals(
    lambda: f64,
    maturity: f64,
    jmax: usize,
    scale: TimeScale,
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    positive(lambda, "lambda")?;
    positive(maturity, "maturity")?;
    let lt = lambda * maturity;
    let clock = match scale {
        TimeScale::Calendar => 1.0 / lambda,
        TimeScale::Intrinsic => 1.0,
    };
    let mut out = Vec::with_capacity(jmax + 1);
    for j in 0..=jmax {
        let fj = quad::integrate(|u| libm::pow(-libm::expm1(-u) / lt, j as f64), 0.0, lt, cfg)?;
        out.push(clock * fj);
    }
    Ok(out)
}

/// Cumulants `c_j = κ_j F_j` (`j = 1..=n`, index 0 unused) of the jump integral.
pub fn jump_integral_cumulants(
    spec: &SubordinatorSpec,
    lambda: f64,
    maturity: f64,
    n: usize,
    scale: TimeScale,
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    let f = jump_weight_integrals(lambda, maturity, n, scale, cfg)?;
    let mut c = alloc::vec![0.0; n + 1];
    if spec.is_zero() {
        return Ok(c);
    }
    for j in 1..=n {
        c[j] = spec.cumulant(j)? * f[j];
    }
    Ok(c)
}

/// Raw moments `E[Y^k]`, `k = 0..=n`, of a variable with cumulants
/// `cumulants[1..=n]`, by the jet form of the `g`-recursion.
pub fn moments_from_cumulants(cumulants: &[f64], n: usize) -> Vec<f64> {
    assert!(cumulants.len() > n, "need cumulants up to order n");
    let binom = pascal(n);
    // g1[i] = i-th derivative of K' at 0.
    let g1: Vec<f64> = (0..n).map(|i| cumulants[i + 1]).collect();
    let mut moments = alloc::vec![1.0; n + 1];
    if n == 0 {
        return moments;
    }
    let mut g = g1.clone();
    moments[1] = g[0];
    for k in 1..n {
        // g has derivatives 0..=n-k; the next one keeps 0..=n-k-1.
        let len = n - k;
        let mut next = alloc::vec![0.0; len];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut s = g[i + 1];
            for j in 0..=i {
                s += binom[i][j] * g1[j] * g[i - j];
            }
            *slot = s;
        }
        g = next;
        moments[k + 1] = g[0];
    }
    moments
}

/// `A_k = E[(shift + J)^k]` for `k = 0..=n`.
pub fn shifted_jump_moments(
    spec: &SubordinatorSpec,
    shift: f64,
    lambda: f64,
    maturity: f64,
    n: usize,
    scale: TimeScale,
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    let mut c = jump_integral_cumulants(spec, lambda, maturity, n.max(1), scale, cfg)?;
    c[1] += shift;
    let mut m = moments_from_cumulants(&c, n.max(1));
    m.truncate(n + 1);
    Ok(m)
}

/// `A_n = E[(−β² + J)^n]` on the calendar time scale.
pub fn a_moment(spec: &SubordinatorSpec, req: &AMomentRequest, cfg: &QuadConfig) -> Result<f64> {
    a_moment_scaled(spec, req, TimeScale::Calendar, cfg)
}

/// `A_n` on an explicit time scale.
pub fn a_moment_scaled(
    spec: &SubordinatorSpec,
    req: &AMomentRequest,
    scale: TimeScale,
    cfg: &QuadConfig,
) -> Result<f64> {
    if req.n > MAX_A_ORDER {
        return Err(Error::Domain(alloc::format!("moment order {} exceeds the cap {MAX_A_ORDER}", req.n)));
    }
    positive(req.beta2, "beta2")?;
    let m = shifted_jump_moments(spec, -req.beta2, req.lambda, req.maturity, req.n, scale, cfg)?;
    Ok(m[req.n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_to_sec5_cumulants() {
        let s = SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, 30.0, 25.0).unwrap();
        match s.family() {
            Family::CompoundPoissonExp { rate, mean_jump } => {
                assert!((mean_jump - 5.0 / 12.0).abs() < 1e-15);
                assert!((rate - 72.0).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
        for kind in [FamilyKind::CompoundPoissonExp, FamilyKind::Gamma, FamilyKind::InverseGaussian] {
            let s = SubordinatorSpec::from_cumulants(kind, 30.0, 25.0).unwrap();
            assert!((s.cumulant(1).unwrap() - 30.0).abs() < 1e-12, "{kind:?}");
            assert!((s.cumulant(2).unwrap() - 25.0).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn cgf_examples() {
        let s = SubordinatorSpec::compound_poisson_exp(1.0, 1.0).unwrap();
        assert_eq!(s.cgf(0.0).unwrap(), 0.0);
        assert!((s.cgf(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(s.cgf(1.0).is_err());
        assert!(s.cumulant(0).is_err());
    }

    #[test]
    fn inverse_gaussian_cumulants() {
        let s = SubordinatorSpec::new(Family::InverseGaussian { delta: 2.0, gamma: 1.5 }).unwrap();
        // κ_k = δ (2k−3)!! γ^{1−2k}
        let want =
            [2.0 / 1.5, 2.0 / libm::pow(1.5, 3.0), 2.0 * 3.0 / libm::pow(1.5, 5.0), 2.0 * 15.0 / libm::pow(1.5, 7.0)];
        for (k, w) in want.iter().enumerate() {
            let got = s.cumulant(k + 1).unwrap();
            assert!((got - w).abs() < 1e-13 * w, "k={} {got} {w}", k + 1);
        }
    }

    #[test]
    fn moments_of_poisson_from_cumulants() {
        // Poisson(2): all cumulants 2; moments 1, 2, 6, 22, 94.
        let m = moments_from_cumulants(&[0.0, 2.0, 2.0, 2.0, 2.0], 4);
        assert_eq!(m, alloc::vec![1.0, 2.0, 6.0, 22.0, 94.0]);
    }

    #[test]
    fn zero_spec_has_no_jumps() {
        let s = SubordinatorSpec::none();
        let cfg = QuadConfig::default();
        assert_eq!(s.levy_integral(|x| x, 1.0, &cfg).unwrap(), 0.0);
        let grid = TimeGrid::uniform(10, 1.0).unwrap();
        assert!(sample_subordinator(&s, &grid, 3).unwrap().values.iter().all(|&v| v == 0.0));
    }
}
