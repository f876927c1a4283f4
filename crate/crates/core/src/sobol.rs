//! Sobol low-discrepancy points (Joe–Kuo direction numbers, up to 256
//! dimensions) with optional linear matrix scrambling and digital shift.
//! Points are produced in Gray-code order starting from the origin.

use alloc::vec::Vec;

use rand::Rng;

use crate::rng::path_rng;
use crate::sobol_table::{DIMS, POLY, VINIT};
use crate::{Error, Result};

const BITS: usize = 32;

/// Sequential Sobol generator.
#[derive(Clone, Debug)]
pub struct Sobol {
    dim: usize,
    v: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

fn direction_numbers(j: usize) -> [u32; BITS] {
    let mut m = [0u32; BITS];
    if j == 0 {
        m = [1; BITS];
    } else {
        let poly = POLY[j];
        let s = (32 - poly.leading_zeros() - 1) as usize;
        m[..s].copy_from_slice(&VINIT[j][..s]);
        for i in s..BITS {
            let mut x = m[i - s] ^ (m[i - s] << s);
            for k in 1..s {
                if (poly >> (s - k)) & 1 == 1 {
                    x ^= m[i - k] << k;
                }
            }
            m[i] = x;
        }
    }
    let mut v = [0u32; BITS];
    for i in 0..BITS {
        v[i] = m[i] << (BITS - 1 - i);
    }
    v
}

impl Sobol {
    /// Unscrambled sequence in `dim` dimensions.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > DIMS {
            return Err(Error::Domain(alloc::format!("Sobol dimension must be in 1..={DIMS}, got {dim}")));
        }
        let v = (0..dim).map(direction_numbers).collect();
        Ok(Self { dim, v, state: alloc::vec![0; dim], index: 0 })
    }

    /// Randomized sequence: linear matrix scramble plus digital shift, both
    /// drawn from stream `(seed, replicate)`.
    pub fn scrambled(dim: usize, seed: u64, replicate: u64) -> Result<Self> {
        let mut s = Self::new(dim)?;
        let mut rng = path_rng(seed, replicate);
        for d in 0..dim {
            let mut rows = [0u32; BITS];
            for (k, row) in rows.iter_mut().enumerate() {
                // Row k acts on digits 0..=k (digit 0 = most significant bit).
                let below: u32 = if k == 0 { 0 } else { rng.random::<u32>() & !(u32::MAX >> k) };
                *row = below | (1u32 << (BITS - 1 - k));
            }
            for i in 0..BITS {
                let x = s.v[d][i];
                let mut y = 0u32;
                for (k, row) in rows.iter().enumerate() {
                    if (row & x).count_ones() & 1 == 1 {
                        y |= 1u32 << (BITS - 1 - k);
                    }
                }
                s.v[d][i] = y;
            }
            s.state[d] = rng.random::<u32>();
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Next point as raw 32-bit digits.
    pub fn next_raw(&mut self) -> &[u32] {
        if self.index > 0 {
            let c = (self.index - 1).trailing_ones() as usize;
            for d in 0..self.dim {
                self.state[d] ^= self.v[d][c.min(BITS - 1)];
            }
        }
        self.index += 1;
        &self.state
    }

    /// Next point in `(0, 1)^dim` (cell midpoints, never exactly 0 or 1).
    pub fn next_point(&mut self, out: &mut [f64]) {
        let scale = 1.0 / 4_294_967_296.0;
        let raw = self.next_raw();
        for (o, &x) in out.iter_mut().zip(raw) {
            *o = (x as f64 + 0.5) * scale;
        }
    }
}
