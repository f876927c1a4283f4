//! One- and two-dimensional quadrature.
//!
//! The workhorse is a globally adaptive Gauss–Kronrod (7, 15) rule: the
//! interval with the largest error estimate is bisected until the summed
//! error meets `max(abs_tol, rel_tol * |I|)`. Integrable power singularities
//! at interval ends are removed by the substitution
//! `x = a + (b - a) w^{1/(1+p)}` before integrating.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Tolerances for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_depth: 40 }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(crate::error::invalid("quadrature tolerances must be non-negative and not both zero"));
        }
        if self.max_depth == 0 {
            return Err(crate::error::invalid("quad.max_depth must be positive"));
        }
        Ok(())
    }

    /// Same config with both tolerances scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }
}

/// Integral estimate with its error bound and evaluation count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    rabs: f64,
    depth: u32,
}

/// Panel budget of one adaptive integral; exceeding it is reported as a
/// convergence failure rather than left to run.
const MAX_PANELS: usize = 50_000;

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn check(y: f64, x: f64) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Domain(alloc::format!("integrand is not finite at x = {x:e}")))
    }
}

/// One G7/K15 panel: (kronrod value, error estimate, |f| integral).
fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = check(f(c)?, c)?;
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut rabs = rk.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = check(f(c - x)?, c - x)?;
        let f2 = check(f(c + x)?, c + x)?;
        fv[j] = (f1, f2);
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut rasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        rasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let ah = h.abs();
    let mut err = ((rk - rg) * h).abs();
    let rasc = rasc * ah;
    if rasc != 0.0 && err != 0.0 {
        err = rasc * libm::pow(200.0 * err / rasc, 1.5).min(1.0);
    }
    let rabs = rabs * ah;
    let floor = 50.0 * f64::EPSILON * rabs;
    Ok((rk * h, err.max(floor), rabs))
}

/// Adaptive integral of a fallible integrand over `[a, b]`.
pub fn try_integrate_estimate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, evals: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(alloc::format!("integration limits must be finite: [{a}, {b}]")));
    }
    let (v, e, mut abs_sum) = gk15(&mut f, a, b)?;
    let mut evals = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e, rabs: abs_sum, depth: 0 });
    let mut total = v;
    let mut total_err = e;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs()).max(100.0 * f64::EPSILON * abs_sum);
        if total_err <= tol {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        if worst.depth >= cfg.max_depth || heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature { estimate: total, error: total_err });
        }
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1, r1) = gk15(&mut f, worst.a, m)?;
        let (v2, e2, r2) = gk15(&mut f, m, worst.b)?;
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        abs_sum += r1 + r2 - worst.rabs;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1, rabs: r1, depth: worst.depth + 1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2, rabs: r2, depth: worst.depth + 1 });
        if heap.len() % 64 == 0 {
            // Re-sum to stop drift from the running updates.
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error, evals })
}

/// Adaptive integral of a fallible integrand.
pub fn try_integrate<F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_estimate(f, a, b, cfg).map(|e| e.value)
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    try_integrate(|x| Ok(f(x)), a, b, cfg)
}

/// Integral over `[a, b]` split at the given interior breakpoints (kinks).
pub fn try_integrate_pieces<F>(mut f: F, a: f64, b: f64, breaks: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    for &x in breaks {
        if x > lo && x < hi {
            pts.push(x);
        }
    }
    pts.push(b);
    let n = pts.len();
    if a <= b {
        pts[1..n - 1].sort_by(f64::total_cmp);
    } else {
        pts[1..n - 1].sort_by(|x, y| y.total_cmp(x));
    }
    let mut sum = 0.0;
    for w in pts.windows(2) {
        sum += try_integrate(&mut f, w[0], w[1], cfg)?;
    }
    Ok(sum)
}

/// Integral of `f` over `[a, b]` where `f(x) ~ (x - a)^pa` near `a` and
/// `f(x) ~ (b - x)^pb` near `b`, with `pa, pb > -1`.
///
/// Each half of the interval is mapped so that the power factor becomes
/// bounded: on `[a, mid]`, `x = a + (mid - a) w^q` with `q = 1 / (1 + pa)`.
/// Exponents `>= 0` leave the half untouched.
pub fn try_integrate_singular<F>(mut f: F, a: f64, b: f64, pa: f64, pb: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(pa > -1.0 && pb > -1.0) {
        return Err(Error::Domain(alloc::format!("endpoint exponents must exceed -1: {pa}, {pb}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mid = 0.5 * (a + b);
    let left = if pa < 0.0 {
        let q = 1.0 / (1.0 + pa);
        let len = mid - a;
        try_integrate(
            |w| {
                if w <= 0.0 {
                    return Ok(0.0);
                }
                let x = a + len * libm::pow(w, q);
                Ok(f(x)? * len * q * libm::pow(w, q - 1.0))
            },
            0.0,
            1.0,
            cfg,
        )?
    } else {
        try_integrate(&mut f, a, mid, cfg)?
    };
    let right = if pb < 0.0 {
        let q = 1.0 / (1.0 + pb);
        let len = b - mid;
        try_integrate(
            |w| {
                if w <= 0.0 {
                    return Ok(0.0);
                }
                let x = b - len * libm::pow(w, q);
                Ok(f(x)? * len * q * libm::pow(w, q - 1.0))
            },
            0.0,
            1.0,
            cfg,
        )?
    } else {
        try_integrate(&mut f, mid, b, cfg)?
    };
    Ok(left + right)
}

/// Infallible wrapper of [`try_integrate_singular`].
pub fn integrate_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    try_integrate_singular(|x| Ok(f(x)), a, b, pa, pb, cfg)
}

/// Nested adaptive integral `∫_a^b ∫_{lo(x)}^{hi(x)} f(x, y) dy dx`.
pub fn try_integrate_2d<F, L, H>(mut f: F, a: f64, b: f64, lo: L, hi: H, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
    L: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let inner_cfg = cfg.tightened(0.1);
    try_integrate(|x| try_integrate(|y| f(x, y), lo(x), hi(x), &inner_cfg), a, b, cfg)
}

/// `∫_0^t ∫_0^t k(x, y) dy dx` for a symmetric kernel, folded onto the
/// triangle `y < x` so a kink on the diagonal sits on a panel edge.
pub fn try_integrate_symmetric_square<F>(k: F, t: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    Ok(2.0 * try_integrate_2d(k, 0.0, t, |_| 0.0, |x| x, cfg)?)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights of the composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(lo + 0.5 * h * (x + 1.0));
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    /// Composite rule applied to `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let (xs, ws) = self.composite(a, b, panels);
        xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
