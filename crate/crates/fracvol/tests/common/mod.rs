//! Oracles shared by the integration tests and the acceptance harness.

#![allow(dead_code)]

use fracvol::parallel::map_streams;
use fracvol_core::fou::FouParams;
use fracvol_core::gaussian::TimeGrid;
use fracvol_core::levy::{Family, FamilyKind, SubordinatorSpec};
use fracvol_core::montecarlo::{pairwise_sum, realized_variance, McEstimate, SimConfig, Simulator};
use fracvol_core::pricing::{ModelParams, SwapContract};
use fracvol_core::rng::path_rng;
use rand::Rng;
use rand_distr::{Distribution, Exp};

pub const LOG_400: f64 = 5.991464547107982;

pub fn cp_spec(kappa1: f64, kappa2: f64) -> SubordinatorSpec {
    SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, kappa1, kappa2).unwrap()
}

/// Published VIX calibration with leverage `rho` and a martingale drift at zero rate.
pub fn sec5_model(rho: f64) -> ModelParams {
    ModelParams {
        fou: FouParams::new(1.0 / 30.0, LOG_400, 1.0 / 3.0, 0.75, LOG_400).unwrap(),
        lambda: 0.05,
        rho,
        c1: 0.0,
        c2: 0.0,
        sigma0_sq: 400.0,
        s0: 100.0,
        spec: cp_spec(30.0, 25.0),
    }
    .with_martingale_drift(0.0)
    .unwrap()
}

pub fn pool(threads: usize) -> rayon::ThreadPool {
    fracvol::parallel::pool(Some(threads)).unwrap()
}

/// Per-path realized variances, in path order.
pub fn rv_samples(sim: &Simulator, pool: &rayon::ThreadPool) -> Vec<f64> {
    let per_stream = map_streams(pool, sim.n_streams(), |k| {
        Ok(sim.stream_paths(k)?.iter().map(realized_variance).collect::<Vec<_>>())
    })
    .unwrap();
    per_stream.into_iter().flatten().collect()
}

/// Stream-level estimate of `E[g(σ_R²)]` from per-path values (pairs averaged).
pub fn stream_estimate(per_path: &[f64], antithetic: bool, g: impl Fn(f64) -> f64) -> McEstimate {
    let xs: Vec<f64> = if antithetic {
        per_path.chunks(2).map(|c| c.iter().map(|&v| g(v)).sum::<f64>() / c.len() as f64).collect()
    } else {
        per_path.iter().map(|&v| g(v)).collect()
    };
    McEstimate::from_samples(&xs).unwrap()
}

pub fn sim_config(n_paths: usize, seed: u64) -> SimConfig {
    SimConfig { n_paths, seed, ..SimConfig::default() }
}

/// Result of the brute-force hedge search.
#[derive(Clone, Copy, Debug)]
pub struct HedgeSearch {
    /// Grid point minimizing the simulated quadratic error.
    pub phi: f64,
    pub step: f64,
    /// Standard error of the unconstrained minimizer.
    pub std_error: f64,
    /// Probability mass of the jump counts left out.
    pub tail_mass: f64,
}

/// Constant position `φ` minimizing `E[(ΔP − φ ΔŜ)²]` over a short horizon
/// `h` from inception, found by scanning a grid of step `step`.
///
/// The horizon is stratified on the number of jumps of `Z` in `[0, h]`
/// (0..=`max_jumps`); within a stratum the variance path is simulated with
/// the jumps injected, and the price Brownian motion is integrated out:
///
/// ```text
/// a = ρ Z_h − κ(ρ) h,   I = ∫_0^h σ²
/// E[ΔŜ | Z, σ]  = S₀ (e^a − 1)
/// E[ΔŜ² | Z, σ] = S₀² ((e^a − 1)² + e^{2a} (e^I − 1))
/// ```
///
/// `ΔP` is the change of the jump leg of the swap value. The continuous
/// leg depends on the volatility noise only, whose increments are
/// independent of the stock's, so it does not move the minimizer.
#[allow(clippy::too_many_arguments)]
pub fn hedge_bruteforce(
    p: &ModelParams,
    contract: &SwapContract,
    horizon: f64,
    samples: &[usize],
    step: f64,
    span: usize,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> HedgeSearch {
    let Family::CompoundPoissonExp { rate, mean_jump } = p.spec.family() else {
        panic!("brute-force hedge needs compound Poisson jumps");
    };
    let h = horizon;
    let lam = p.lambda;
    let big_t = contract.maturity;
    let df = contract.notional * (-contract.rate * big_t).exp();
    let kappa1 = p.kappa1();
    let cgf = p.spec.cgf(p.rho).unwrap();
    let drift_int = h - ((-lam * (big_t - h)).exp() - (-lam * big_t).exp()) / lam;
    let cfg = SimConfig { n_paths: 1, antithetic: false, seed, ..SimConfig::default() };
    let sim = Simulator::on_grid(p, TimeGrid::uniform(1, h).unwrap(), &cfg).unwrap();
    let exp = Exp::new(1.0 / mean_jump).unwrap();

    let mut pois = (-rate * h).exp();
    let mut covered = 0.0;
    // Per stratum: weight and per-sample (ΔP², ΔP·E[ΔŜ], E[ΔŜ²]).
    let mut strata = Vec::new();
    for (n, &count) in samples.iter().enumerate() {
        if n > 0 {
            pois *= rate * h / n as f64;
        }
        covered += pois;
        let rows = map_streams(pool, count, |i| {
            let stream = ((n as u64) << 40) | i;
            let mut rng = path_rng(seed ^ 0x6a09e667f3bcc909, stream);
            let mut jumps: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>() * h, exp.sample(&mut rng))).collect();
            jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
            let path = sim.path_with_jumps(stream, &jumps)?;
            let iv = realized_variance(&path) * h;
            let zh: f64 = jumps.iter().map(|j| j.1).sum();
            let a = p.rho * zh - cgf * h;
            let m1 = p.s0 * a.exp_m1();
            let m2 = p.s0 * p.s0 * (a.exp_m1().powi(2) + (2.0 * a).exp() * iv.exp_m1());
            let weighted: f64 = jumps.iter().map(|&(u, x)| -(-lam * (big_t - u)).exp_m1() * x).sum();
            let dp = df / (lam * big_t) * (weighted - kappa1 * drift_int);
            Ok([dp * dp, dp * m1, m2])
        })
        .unwrap();
        strata.push((pois, rows));
    }

    let mean_of =
        |rows: &[[f64; 3]], k: usize| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()) / rows.len() as f64;
    let total = |k: usize| strata.iter().map(|(w, rows)| w * mean_of(rows, k)).sum::<f64>();
    let (aa, bb, cc) = (total(0), total(1), total(2));

    let objective = |phi: f64| aa - 2.0 * phi * bb + phi * phi * cc;
    let mut best = (0.0, f64::INFINITY);
    for k in -(span as i64)..=(span as i64) {
        let phi = k as f64 * step;
        let q = objective(phi);
        if q < best.1 {
            best = (phi, q);
        }
    }

    let phi_star = bb / cc;
    let var: f64 = strata
        .iter()
        .map(|(w, rows)| {
            let r: Vec<f64> = rows.iter().map(|r| r[1] - phi_star * r[2]).collect();
            let n = r.len() as f64;
            let m = r.iter().sum::<f64>() / n;
            let s2 = r.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
            w * w * s2 / n
        })
        .sum();
    HedgeSearch { phi: best.0, step, std_error: var.sqrt() / cc, tail_mass: 1.0 - covered }
}
