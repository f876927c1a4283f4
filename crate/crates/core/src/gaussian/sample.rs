use alloc::vec::Vec;

use rand::Rng;

use super::fft::fft_in_place;
use super::{gram_matrix, FbmLaw, HurstParameter, SamplePath, TimeGrid};
use crate::linalg::{Cholesky, PSD_TOL};
use crate::rng::{fill_normal, path_rng};
use crate::{Error, Result};

/// Grids with more steps than this default to circulant embedding.
pub const CIRCULANT_THRESHOLD: usize = 512;

/// Exact fBm sampling strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FbmMethod {
    /// Cholesky factor of the full Gram matrix; any grid, O(n³) setup.
    Cholesky,
    /// Circulant embedding of fractional Gaussian noise; uniform grids only.
    Circulant,
}

#[derive(Clone, Debug)]
enum Factor {
    Cholesky(Cholesky),
    Circulant { steps: usize, scale: f64, sqrt_eig: Vec<f64> },
}

/// Precomputed exact sampler for fBm on a fixed grid.
#[derive(Clone, Debug)]
pub struct FbmSampler {
    grid: TimeGrid,
    factor: Factor,
}

impl FbmSampler {
    pub fn new(h: HurstParameter, grid: &TimeGrid, method: FbmMethod) -> Result<Self> {
        let factor = match method {
            FbmMethod::Cholesky => {
                let gram = gram_matrix(&FbmLaw { h }, grid.points())?;
                Factor::Cholesky(Cholesky::factor(&gram)?)
            }
            FbmMethod::Circulant => {
                let dt = grid.uniform_step().ok_or(Error::Grid("circulant embedding needs a uniform grid"))?;
                circulant_factor(h.value(), grid.len() - 1, dt)?
            }
        };
        Ok(Self { grid: grid.clone(), factor })
    }

    /// Circulant for uniform grids above [`CIRCULANT_THRESHOLD`] steps, else Cholesky.
    pub fn auto(h: HurstParameter, grid: &TimeGrid) -> Result<Self> {
        let method = if grid.len() - 1 > CIRCULANT_THRESHOLD && grid.uniform_step().is_some() {
            FbmMethod::Circulant
        } else {
            FbmMethod::Cholesky
        };
        Self::new(h, grid, method)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Draws one path into `out` (length = grid length); `out[0] = 0`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.factor {
            Factor::Cholesky(c) => {
                let mut z = alloc::vec![0.0; c.n];
                fill_normal(rng, &mut z);
                c.mul_into(&z, out);
            }
            Factor::Circulant { steps, scale, sqrt_eig } => {
                let m = sqrt_eig.len();
                let mut re = alloc::vec![0.0; m];
                let mut im = alloc::vec![0.0; m];
                fill_normal(rng, &mut re);
                fill_normal(rng, &mut im);
                for k in 0..m {
                    re[k] *= sqrt_eig[k];
                    im[k] *= sqrt_eig[k];
                }
                fft_in_place(&mut re, &mut im);
                out[0] = 0.0;
                let mut acc = 0.0;
                for i in 0..*steps {
                    acc += scale * re[i];
                    out[i + 1] = acc;
                }
            }
        }
        out[0] = 0.0;
    }
}

fn circulant_factor(h: f64, steps: usize, dt: f64) -> Result<Factor> {
    let m = steps.next_power_of_two();
    let big = 2 * m;
    let gamma = |k: usize| {
        let k = k as f64;
        let e = 2.0 * h;
        0.5 * (libm::pow(k + 1.0, e) - 2.0 * libm::pow(k, e) + libm::pow((k - 1.0).abs(), e))
    };
    let mut re = alloc::vec![0.0; big];
    let mut im = alloc::vec![0.0; big];
    for k in 0..=m {
        re[k] = gamma(k);
    }
    for k in 1..m {
        re[big - k] = gamma(k);
    }
    fft_in_place(&mut re, &mut im);
    let top = re.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut sqrt_eig = Vec::with_capacity(big);
    for (k, &lam) in re.iter().enumerate() {
        if lam < -PSD_TOL * top {
            return Err(Error::NotPositiveSemidefinite { index: k, value: lam });
        }
        sqrt_eig.push(libm::sqrt(lam.max(0.0) / big as f64));
    }
    Ok(Factor::Circulant { steps, scale: libm::pow(dt, h), sqrt_eig })
}

/// Exact fBm path on `grid` drawn from stream `(seed, 0)`.
pub fn sample_fbm(h: HurstParameter, grid: &TimeGrid, seed: u64, method: FbmMethod) -> Result<SamplePath> {
    let sampler = FbmSampler::new(h, grid, method)?;
    let mut rng = path_rng(seed, 0);
    let mut values = alloc::vec![0.0; grid.len()];
    sampler.sample_into(&mut rng, &mut values);
    SamplePath::new(grid.clone(), values, seed)
}
