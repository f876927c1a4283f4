//! Fractional Brownian motion and Gaussian-process calculus.
//!
//! ```text
//! fbm covariance   ρ_H(s, t) = ½ (s^{2H} + t^{2H} − |t − s|^{2H})
//! ∫ law            Y_t = ∫_0^t X_s ds ~ N(∫ μ, ∬ ρ)
//! cross moment     Cov(X_s, Y_t) = ∫_0^t ρ(s, x) dx
//! ```

mod fft;
mod sample;

use alloc::vec::Vec;

use crate::linalg::SymMatrix;
use crate::quad::{self, QuadConfig};
use crate::{Error, Result};

pub use fft::fft_in_place;
pub use sample::{sample_fbm, FbmMethod, FbmSampler, CIRCULANT_THRESHOLD};

/// Hurst exponent `h` with `1/2 < h <= 1`; `h = 1/2` is admitted for
/// Brownian reduction checks.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct HurstParameter(f64);

impl HurstParameter {
    pub fn new(h: f64) -> Result<Self> {
        if h == 0.5 || (h > 0.5 && h <= 1.0) {
            Ok(Self(h))
        } else {
            Err(crate::error::invalid(alloc::format!("Hurst parameter must lie in (1/2, 1] (or equal 1/2), got {h}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }
}

/// `ρ_H(s, t)` for `s, t >= 0`.
pub fn fbm_covariance(s: f64, t: f64, h: f64) -> f64 {
    if h == 0.5 {
        return s.min(t);
    }
    let e = 2.0 * h;
    0.5 * (libm::pow(s, e) + libm::pow(t, e) - libm::pow((t - s).abs(), e))
}

/// Strictly increasing sample times starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.first() != Some(&0.0) {
            return Err(Error::Grid("first grid point must be 0"));
        }
        if points.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Grid("grid points must be finite and strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `n` equal steps of width `dt`: `0, dt, ..., n dt`.
    pub fn uniform(n: usize, dt: f64) -> Result<Self> {
        if n == 0 || !(dt > 0.0) {
            return Err(Error::Grid("uniform grid needs n >= 1 and dt > 0"));
        }
        Self::new((0..=n).map(|i| i as f64 * dt).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }

    /// Step width if the grid is uniform to 1e-10 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.points.len() - 1;
        if n == 0 {
            return None;
        }
        let dt = self.last() / n as f64;
        let ok = self.points.iter().enumerate().all(|(i, &p)| (p - i as f64 * dt).abs() <= 1e-10 * self.last());
        ok.then_some(dt)
    }
}

/// A sampled path on a grid, tagged with the seed that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid("path length differs from grid length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("path values must be finite"));
        }
        Ok(Self { grid, values, seed })
    }
}

/// A Gaussian process described by its mean and covariance functions.
pub trait GaussianLaw {
    fn mean(&self, t: f64) -> f64;
    fn cov(&self, s: f64, t: f64) -> Result<f64>;
    /// Interior points where `x ↦ cov(s, x)` may have a kink.
    fn kinks(&self, s: f64) -> Vec<f64> {
        alloc::vec![s]
    }
}

/// Law built from two closures.
pub struct FnLaw<M, C> {
    pub mean_fn: M,
    pub cov_fn: C,
}

impl<M: Fn(f64) -> f64, C: Fn(f64, f64) -> f64> GaussianLaw for FnLaw<M, C> {
    fn mean(&self, t: f64) -> f64 {
        (self.mean_fn)(t)
    }
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        Ok((self.cov_fn)(s, t))
    }
}

/// Centered fractional Brownian motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FbmLaw {
    pub h: HurstParameter,
}

impl GaussianLaw for FbmLaw {
    fn mean(&self, _t: f64) -> f64 {
        0.0
    }
    fn cov(&self, s: f64, t: f64) -> Result<f64> {
        Ok(fbm_covariance(s, t, self.h.value()))
    }
}

/// Mean and variance of `∫_0^t X_s ds`.
pub fn integrated_gaussian_law<L: GaussianLaw + ?Sized>(law: &L, t: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(crate::error::invalid("integration horizon must be positive"));
    }
    let mean = quad::integrate(|x| law.mean(x), 0.0, t, cfg)?;
    let var = quad::try_integrate_symmetric_square(|x, y| law.cov(x, y), t, cfg)?;
    Ok((mean, var))
}

/// Centered `Cov(X_s, ∫_0^t X_r dr) = ∫_0^t ρ(s, x) dx`.
pub fn cross_covariance_with_integral<L: GaussianLaw + ?Sized>(
    law: &L,
    s: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(crate::error::invalid("times must be non-negative"));
    }
    quad::try_integrate_pieces(|x| law.cov(s, x), 0.0, t, &law.kinks(s), cfg)
}

/// Gram matrix of the law's covariance on the grid.
pub fn gram_matrix<L: GaussianLaw + ?Sized>(law: &L, times: &[f64]) -> Result<SymMatrix> {
    SymMatrix::from_fn(times.len(), |i, j| law.cov(times[i], times[j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        assert_eq!(fbm_covariance(1.0, 2.0, 0.5), 1.0);
        assert_eq!(fbm_covariance(4.0, 4.0, 0.75), 8.0);
        // Frozen from a 50-digit evaluation of ½(1 + 3^{1.5} − 2^{1.5}).
        let want = 1.683_862_648_980_220_9;
        assert!((fbm_covariance(1.0, 3.0, 0.75) - want).abs() < 1e-15);
    }

    #[test]
    fn hurst_validation() {
        assert!(HurstParameter::new(0.5).is_ok());
        assert!(HurstParameter::new(0.49).is_err());
        assert!(HurstParameter::new(1.0).is_ok());
        assert!(HurstParameter::new(1.01).is_err());
        assert!(HurstParameter::new(f64::NAN).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(alloc::vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(alloc::vec![0.5, 1.0]).is_err());
        let g = TimeGrid::uniform(10, 0.1).unwrap();
        assert!((g.uniform_step().unwrap() - 0.1).abs() < 1e-15);
        let g = TimeGrid::new(alloc::vec![0.0, 0.1, 0.3]).unwrap();
        assert!(g.uniform_step().is_none());
    }

    #[test]
    fn integrated_law_examples() {
        let cfg = QuadConfig::default();
        let det = FnLaw { mean_fn: |_t: f64| 2.5, cov_fn: |_s: f64, _t: f64| 0.0 };
        assert_eq!(integrated_gaussian_law(&det, 3.0, &cfg).unwrap(), (7.5, 0.0));
        let bm = FnLaw { mean_fn: |_t: f64| 0.0, cov_fn: |s: f64, t: f64| s.min(t) };
        let (m, v) = integrated_gaussian_law(&bm, 1.0, &cfg).unwrap();
        assert_eq!(m, 0.0);
        assert!((v - 1.0 / 3.0).abs() < 1e-10);
        assert!((cross_covariance_with_integral(&bm, 1.0, 1.0, &cfg).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(cross_covariance_with_integral(&det, 0.3, 1.0, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn fbm_integrated_variance_closed_form() {
        // Var ∫_0^1 W^H = ∬ ρ_H = 1/(2H+2) for fBm.
        let cfg = QuadConfig::default();
        for h in [0.55, 0.75, 0.95] {
            let law = FbmLaw { h: HurstParameter::new(h).unwrap() };
            let (_, v) = integrated_gaussian_law(&law, 1.0, &cfg).unwrap();
            assert!((v - 1.0 / (2.0 * h + 2.0)).abs() < 1e-9, "h={h}: {v}");
        }
    }
}
