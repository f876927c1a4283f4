//! In-place radix-2 complex FFT (forward transform, `e^{-2πi jk/n}` kernel).

use core::f64::consts::PI;

/// Forward DFT of `(re, im)` in place. The length must be a power of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    assert_eq!(n, im.len(), "real and imaginary parts differ in length");
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let (s, c) = libm::sincos(ang * k as f64);
                let (a, b) = (start + k, start + k + half);
                let tr = re[b] * c - im[b] * s;
                let ti = re[b] * s + im[b] * c;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn matches_naive_dft() {
        let n = 16;
        let xr: Vec<f64> = (0..n).map(|i| libm::sin(i as f64 * 0.7) + 0.1 * i as f64).collect();
        let xi: Vec<f64> = (0..n).map(|i| libm::cos(i as f64 * 1.3)).collect();
        let (mut re, mut im) = (xr.clone(), xi.clone());
        fft_in_place(&mut re, &mut im);
        for k in 0..n {
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..n {
                let (s, c) = libm::sincos(-2.0 * PI * (j * k) as f64 / n as f64);
                sr += xr[j] * c - xi[j] * s;
                si += xr[j] * s + xi[j] * c;
            }
            assert!((sr - re[k]).abs() < 1e-12 && (si - im[k]).abs() < 1e-12);
        }
    }
}
