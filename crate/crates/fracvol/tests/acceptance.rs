//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! `FRACVOL_ACCEPTANCE_ONLY=1,5` runs a subset. `FRACVOL_VIX_CSV` points at
//! a real daily close file for criterion 6. The process exits non-zero on a
//! failure only when `FRACVOL_ACCEPTANCE_STRICT=1`, so an unavailable data
//! file does not break `cargo test`; the verdict lines are the record.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use common::*;
use fracvol::io::load_vix_csv;
use fracvol::parallel;
use fracvol_core::backtest::{compare_models, BacktestConfig, ErrorMetrics, Model};
use fracvol_core::fou::{fou_gram, fou_mean, fou_variance_v, FouParams};
use fracvol_core::gaussian::{fbm_covariance, gram_matrix, FbmLaw, HurstParameter, SamplePath, TimeGrid};
use fracvol_core::hedging::{
    conditional_moments, optimal_hedge_delta, prediction_weights, FracOpConfig, MarketState, ObservedPath,
};
use fracvol_core::levy::{FamilyKind, SubordinatorSpec};
use fracvol_core::montecarlo::{
    classical_bns_rv_stream, heston_rv_samples, realized_variance, variance_estimate, ConditionalLawSampler,
    McEstimate, SimConfig, Simulator,
};
use fracvol_core::pricing::{
    classical_bns_variance_swap_price, frac_bns_expected_rv, heston_expected_rv, heston_var_rv, volatility_series,
    HestonParams, ModelParams, SeriesConfig, SwapContract,
};
use fracvol_core::quad::QuadConfig;
use fracvol_core::rng::path_rng;
use fracvol_core::Error;

struct Verdict {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: Vec<String>,
}

impl Verdict {
    fn new(id: usize, name: &'static str) -> Self {
        Self { id, name, pass: true, detail: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.detail.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.detail.push(format!("     {line}"));
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn z(est: &McEstimate, target: f64) -> f64 {
    (est.mean - target) / est.std_error
}

// 1. Closed-form E[σ_R²] against path simulation.
fn variance_swap(v: &mut Verdict) {
    let pool = pool(threads());
    let base = sec5_model(-0.02);
    let slow_rough = ModelParams {
        fou: FouParams::new(0.05, LOG_400, 0.25, 0.65, LOG_400 + 0.2).unwrap(),
        sigma0_sq: 520.0,
        ..base
    };
    let gamma_jumps = ModelParams {
        fou: FouParams::new(0.02, 300f64.ln(), 0.2, 0.85, 300f64.ln() - 0.3).unwrap(),
        lambda: 0.1,
        sigma0_sq: 260.0,
        spec: SubordinatorSpec::from_cumulants(FamilyKind::Gamma, 20.0, 30.0).unwrap(),
        ..base
    };
    for (name, p, maturity) in
        [("published", base, 10.0), ("H=0.65, gap", slow_rough, 20.0), ("gamma jumps", gamma_jumps, 15.0)]
    {
        let start = Instant::now();
        let closed = frac_bns_expected_rv(&p, maturity, &QuadConfig::default()).unwrap();
        let sim = Simulator::new(&p, maturity, &sim_config(100_000, 11)).unwrap();
        let est = parallel::estimate(&pool, &sim, realized_variance).unwrap();
        let secs = start.elapsed().as_secs_f64();
        v.check(
            z(&est, closed).abs() <= 3.0 && secs <= 300.0,
            format!(
                "{name}, T={maturity}: closed {closed:.4} MC {:.4} ± {:.4} (z = {:+.2}), {} paths, {secs:.1}s",
                est.mean,
                est.std_error,
                z(&est, closed),
                sim.config().n_paths
            ),
        );
    }
}

// 2. Volatility series against simulation, and partial-sum stability.
fn volatility_swap(v: &mut Verdict) {
    let pool = pool(threads());
    let quad = QuadConfig::default();
    let published = sec5_model(-0.02);
    match volatility_series(&published, 10.0, &SeriesConfig::default(), &quad) {
        Err(Error::SeriesDivergence { term }) => v.note(format!(
            "published parameters, T=10: series diverges (normalized moment of order {term} exceeds 1); checked on low-noise sets"
        )),
        other => v.note(format!("published parameters, T=10: {other:?}")),
    }
    let quiet = ModelParams { fou: published.fou.with_nu(0.05), ..published };
    let longer = ModelParams {
        fou: FouParams::new(0.05, LOG_400, 0.05, 0.6, LOG_400).unwrap(),
        spec: cp_spec(15.0, 10.0),
        ..published
    };
    for (name, p, maturity) in [("nu=0.05", quiet, 10.0), ("nu=0.05, H=0.6", longer, 20.0)] {
        let start = Instant::now();
        let sim = Simulator::new(&p, maturity, &sim_config(100_000, 23)).unwrap();
        let rv = rv_samples(&sim, &pool);
        let mc = stream_estimate(&rv, true, f64::sqrt);
        match volatility_series(&p, maturity, &SeriesConfig::default(), &quad) {
            Ok(s) => {
                let tol = (2.0 * s.bound).max(3.0 * mc.std_error);
                v.check(
                    (s.value - mc.mean).abs() <= tol,
                    format!(
                        "{name}, T={maturity}: series {:.5} ({} terms, bound {:.2e}) MC {:.5} ± {:.5}, tolerance {tol:.2e}",
                        s.value, s.n_terms, s.bound, mc.mean, mc.std_error
                    ),
                );
            }
            Err(e) => v.check(false, format!("{name}: series failed: {e}")),
        }

        // Expansion point below the 0.05% quantile so the region holds.
        let mut sorted = rv.clone();
        sorted.sort_by(f64::total_cmp);
        let beta2 = sorted[sorted.len() / 2000] * 0.999;
        let inside = rv.iter().filter(|&&x| x > beta2 && x < 2.0 * beta2).count() as f64 / rv.len() as f64;
        v.check(
            inside >= 0.999,
            format!("{name}: {:.4}% of paths inside (β², 2β²) with β² = {beta2:.3}", 100.0 * inside),
        );
        // Jump laws are unbounded, so the paths outside the region dominate
        // E[x^n] from order ~18 on; the check stops at 16 terms.
        let cfg = SeriesConfig { beta2: Some(beta2), max_terms: 16, ..SeriesConfig::default() };
        match volatility_series(&p, maturity, &cfg, &quad) {
            Ok(s) => {
                let worst = (1..=s.terms.len() - 5)
                    .map(|n| {
                        let gap = (s.partial_sum(n) - s.partial_sum(n + 5)).abs();
                        (gap / fracvol_core::pricing::vol_series_error_bound(s.beta, n), n)
                    })
                    .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
                v.check(
                    worst.0 <= 1.0,
                    format!(
                        "{name}: max |S_N − S_(N+5)| / bound = {:.3e} (at N = {}), N = 1..={}",
                        worst.0,
                        worst.1,
                        s.terms.len() - 5
                    ),
                );
            }
            Err(e) => v.check(false, format!("{name}: series at β² = {beta2}: {e}")),
        }
        v.note(format!("{name}: {:.1}s", start.elapsed().as_secs_f64()));
    }
}

// 3. Reductions to Brownian, deterministic, Heston and classical BN-S cases.
fn reductions(v: &mut Verdict) {
    let quad = QuadConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        for j in 0..=40 {
            let (s, t) = (0.37 * i as f64, 0.53 * j as f64);
            worst = worst.max((fbm_covariance(s, t, 0.5) - s.min(t)).abs());
        }
    }
    v.check(worst <= 1e-12, format!("fbm covariance at H=1/2 vs min(s,t): max error {worst:.1e}"));

    let det = ModelParams {
        fou: FouParams::new(0.04, LOG_400, 0.0, 0.75, LOG_400 - 0.5).unwrap(),
        spec: SubordinatorSpec::none(),
        sigma0_sq: 300.0,
        ..sec5_model(0.0)
    };
    let vmax = (1..=50).map(|k| fou_variance_v(0.4 * k as f64, &det.fou, &quad).unwrap().abs()).fold(0.0, f64::max);
    v.check(vmax == 0.0, format!("nu=0: max |v(t)| = {vmax:e}"));
    let maturity = 12.0;
    // Deterministic σ² by composite Simpson on a fine grid.
    let n = 20_000;
    let sig2 = |t: f64| det.initial_gap() * (-det.lambda * t).exp() + fou_mean(t, &det.fou).exp();
    let h = maturity / n as f64;
    let simpson: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * sig2(k as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0
        / maturity;
    let closed = frac_bns_expected_rv(&det, maturity, &quad).unwrap();
    v.check(
        (closed - simpson).abs() <= 1e-9 * simpson,
        format!("nu=0: E[σ_R²] {closed:.12} vs quadrature {simpson:.12}"),
    );
    let det_eq = ModelParams { sigma0_sq: det.fou.x0.exp(), ..det };
    let rv = frac_bns_expected_rv(&det_eq, maturity, &quad).unwrap();
    match volatility_series(&det_eq, maturity, &SeriesConfig::default(), &quad) {
        Ok(s) => v.check(
            (s.value - rv.sqrt()).abs() <= 1e-9 * rv.sqrt(),
            format!("nu=0: series E[σ_R] {:.12} vs sqrt(E[σ_R²]) {:.12}", s.value, rv.sqrt()),
        ),
        Err(e) => v.check(false, format!("nu=0 series: {e}")),
    }

    let hp = HestonParams { sigma0_sq: 400.0, theta_sq: 350.0, k: 1.0 / 30.0, gamma: 2.0 };
    let (t, steps, n) = (10.0, 2000, 100_000);
    let start = Instant::now();
    let anti = heston_rv_samples(&hp, t, steps, 5, n / 2, true).unwrap();
    let mean = McEstimate::from_samples(&anti).unwrap();
    let plain = heston_rv_samples(&hp, t, steps, 6, n, false).unwrap();
    let var = variance_estimate(&plain).unwrap();
    let (em, ev) = (heston_expected_rv(&hp, t), heston_var_rv(&hp, t));
    v.check(
        z(&mean, em).abs() <= 3.0,
        format!(
            "Heston E[σ_R²]: closed {em:.4} MC {:.4} ± {:.4} (z = {:+.2})",
            mean.mean,
            mean.std_error,
            z(&mean, em)
        ),
    );
    v.check(
        z(&var, ev).abs() <= 3.0,
        format!(
            "Heston Var[σ_R²]: closed {ev:.4} MC {:.4} ± {:.4} (z = {:+.2}), {:.1}s",
            var.mean,
            var.std_error,
            z(&var, ev),
            start.elapsed().as_secs_f64()
        ),
    );

    let spec = cp_spec(30.0, 25.0);
    for (rho, t) in [(-0.02, 10.0), (-0.5, 20.0)] {
        let contract = SwapContract::variance(t, 0.0, 0.0);
        let closed = classical_bns_variance_swap_price(400.0, &spec, 0.05, rho, &contract).unwrap();
        let xs = parallel::map_streams(&pool(threads()), 100_000, |k| {
            classical_bns_rv_stream(400.0, &spec, 0.05, rho, t, 9, k)
        })
        .unwrap();
        let est = McEstimate::from_samples(&xs).unwrap();
        v.check(
            z(&est, closed).abs() <= 3.0,
            format!(
                "classical BN-S rho={rho}, T={t}: closed {closed:.4} MC {:.4} ± {:.4} (z = {:+.2})",
                est.mean,
                est.std_error,
                z(&est, closed)
            ),
        );
    }
}

fn history_state(times: &[f64], fbm: &[f64], x_t: f64) -> MarketState {
    let t = *times.last().unwrap();
    let path = SamplePath::new(TimeGrid::new(times.to_vec()).unwrap(), fbm.to_vec(), 0).unwrap();
    MarketState {
        t,
        x_t,
        sigma_t_sq: x_t.exp(),
        s_t: 100.0,
        fbm_history: Some(ObservedPath::new(0.0, path)),
        bm_history: None,
        z_history: None,
    }
}

// 4. Conditional law of X_τ given the past.
fn conditional_law(v: &mut Verdict) {
    let start = Instant::now();
    let quad = QuadConfig::default();
    let fc = FracOpConfig::default();
    let published = FouParams::new(1.0 / 30.0, LOG_400, 1.0 / 3.0, 0.75, LOG_400).unwrap();
    let sharp = FouParams::new(0.1, 3.0, 0.8, 0.9, 3.4).unwrap();
    for (name, p, t, tau) in [("published", published, 5.0, 10.0), ("H=0.9", sharp, 8.0, 9.0)] {
        let steps = 200;
        let sampler = ConditionalLawSampler::new(&p, t, tau, steps, &quad).unwrap();
        let times = sampler.times().to_vec();
        let w = prediction_weights(&times, tau, &p, &fc).unwrap();
        let decay = (-p.alpha * (tau - t)).exp();
        let predict = |fbm: &[f64], x_t: f64| {
            x_t * decay
                + p.m * (1.0 - decay)
                + w.iter().zip(fbm.windows(2)).map(|(k, d)| k * (d[1] - d[0])).sum::<f64>()
        };
        let n = 200_000;
        let draws = parallel::map_streams(&pool(threads()), n, |i| {
            let d = sampler.sample(&mut path_rng(31, i));
            Ok((predict(&d.fbm, d.x_t), d.x_tau, d.fbm, d.x_t))
        })
        .unwrap();

        // The weights reproduce conditional_moments on sample histories.
        let mut var_cm = f64::NAN;
        let mut agree = true;
        for d in draws.iter().take(3) {
            let (m, var) = conditional_moments(&history_state(&times, &d.2, d.3), tau, &p, &fc).unwrap();
            agree &= (m - d.0).abs() <= 1e-10 * m.abs().max(1.0);
            var_cm = var;
        }
        v.check(agree, format!("{name}: prediction weights reproduce conditional_moments mean"));

        let mut pairs: Vec<(f64, f64)> = draws.iter().map(|d| (d.0, d.1 - d.0)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut worst_mean, mut worst_var): (f64, f64) = (0.0, 0.0);
        for bucket in pairs.chunks(n / 10) {
            let r: Vec<f64> = bucket.iter().map(|x| x.1).collect();
            let m = McEstimate::from_samples(&r).unwrap();
            worst_mean = worst_mean.max(z(&m, 0.0).abs());
            worst_var = worst_var.max(z(&variance_estimate(&r).unwrap(), var_cm).abs());
        }
        v.check(worst_mean <= 4.0 && worst_var <= 4.0, format!(
            "{name}, t={t}, τ={tau}: over 10 deciles of M, max |z| of residual mean {worst_mean:.2}, of residual variance vs V = {var_cm:.5}: {worst_var:.2}"
        ));

        let ms: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let mean_m = McEstimate::from_samples(&ms).unwrap();
        let var_m = variance_estimate(&ms).unwrap();
        let (mu, vt) = (fou_mean(tau, &p), fou_variance_v(tau, &p, &quad).unwrap());
        let tower = McEstimate { mean: var_m.mean + var_cm, ..var_m };
        v.check(
            z(&mean_m, mu).abs() <= 4.0 && z(&tower, vt).abs() <= 4.0,
            format!(
                "{name}: tower E[M] {:.5} vs {mu:.5} (z = {:+.2}); Var M + V {:.5} vs v(τ) {vt:.5} (z = {:+.2})",
                mean_m.mean,
                z(&mean_m, mu),
                tower.mean,
                z(&tower, vt)
            ),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    v.check(secs <= 600.0, format!("runtime {secs:.1}s"));
}

// 5. Hedge ratio against a brute-force minimizer.
fn hedge(v: &mut Verdict) {
    let pool = pool(threads());
    let fc = FracOpConfig::default();
    let contract = SwapContract::variance(10.0, 400.0, 0.0);
    for rho in [-0.02, -0.05] {
        let start = Instant::now();
        let p = sec5_model(rho);
        let state = MarketState::initial(p.fou.x0, p.sigma0_sq, p.s0);
        let delta = optimal_hedge_delta(&state, &p, &contract, &fc).unwrap();
        let sens = fracvol_core::hedging::p2_jump_sensitivity(&p, &contract, 0.0);
        let step = 1e-5 * sens / p.s0;
        let found = hedge_bruteforce(&p, &contract, 1e-6, &[20_000, 2_000_000, 200_000, 20_000], step, 2000, 41, &pool);
        v.check(
            (found.phi - delta).abs() <= step,
            format!(
                "rho={rho}: Δ {delta:.6e}, grid minimizer {:.6e} (step {step:.2e}, minimizer SE {:.2e}, omitted jump mass {:.1e}), {:.1}s",
                found.phi,
                found.std_error,
                found.tail_mass,
                start.elapsed().as_secs_f64()
            ),
        );
    }
    let state = MarketState::initial(LOG_400, 400.0, 100.0);
    let no_lev = optimal_hedge_delta(&state, &sec5_model(0.0), &contract, &fc).unwrap();
    let no_jumps = optimal_hedge_delta(
        &state,
        &ModelParams { spec: SubordinatorSpec::none(), ..sec5_model(-0.05) },
        &contract,
        &fc,
    )
    .unwrap();
    v.check(no_lev == 0.0 && no_jumps == 0.0, format!("Δ with rho=0: {no_lev:e}; Δ without jumps: {no_jumps:e}"));
}

// 6. Model ranking on market data.
fn market_backtest(v: &mut Verdict) {
    let path = std::env::var_os("FRACVOL_VIX_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/VIX_History.csv"));
    if !path.exists() {
        v.check(
            false,
            format!("no market data: set FRACVOL_VIX_CSV or place the daily close file at {}", path.display()),
        );
        return;
    }
    let series = match load_vix_csv(&path) {
        Ok(s) => s,
        Err(e) => return v.check(false, format!("{}: {e}", path.display())),
    };
    // Printed (APE, AAE, ARPE, RMSE) for Heston, BN-S, fractional BN-S.
    let printed: [(i32, usize, [[f64; 4]; 3]); 4] = [
        (2008, 10, [[2.17, 866.89, 3.70, 1312.38], [2.39, 952.86, 4.07, 1392.71], [1.12, 448.84, 1.91, 824.41]]),
        (2008, 20, [[2.76, 1101.33, 5.14, 1660.11], [3.06, 1221.49, 5.70, 1758.76], [1.63, 651.74, 3.04, 743.99]]),
        (2020, 10, [[1.64, 659.78, 2.83, 984.54], [1.84, 739.25, 3.17, 1049.34], [0.74, 296.23, 1.27, 665.81]]),
        (2020, 20, [[2.20, 881.49, 4.13, 1190.60], [2.49, 999.63, 4.69, 1285.62], [1.82, 729.25, 3.42, 858.36]]),
    ];
    for (year, window, table) in printed {
        let start = Instant::now();
        let cfg = BacktestConfig::new(window).year(year);
        match compare_models(&series, &cfg) {
            Ok((_, rep)) => {
                let secs = start.elapsed().as_secs_f64();
                let f = rep.fracbns;
                v.check(
                    rep.fractional_wins() && secs <= 120.0,
                    format!(
                        "{year}, T={window}: RMSE H/B/F {:.1}/{:.1}/{:.1}, AAE {:.1}/{:.1}/{:.1}, APE {:.3}/{:.3}/{:.3} ({} rows, {secs:.1}s)",
                        rep.heston.rmse, rep.bns.rmse, f.rmse, rep.heston.aae, rep.bns.aae, f.aae, rep.heston.ape, rep.bns.ape, f.ape, rep.rows
                    ),
                );
                for (model, row) in Model::ALL.iter().zip(table) {
                    let m: &ErrorMetrics = rep.get(*model);
                    let ours = [m.ape, m.aae, m.arpe, m.rmse];
                    let within: Vec<String> = ours
                        .iter()
                        .zip(row)
                        .zip(["APE", "AAE", "ARPE", "RMSE"])
                        .map(|((o, t), k)| {
                            format!("{k} {o:.2}/{t} {}", if (o - t).abs() <= 0.1 * t { "in ±10%" } else { "off" })
                        })
                        .collect();
                    v.note(format!("  {}: {}", model.name(), within.join(", ")));
                }
            }
            Err(e) => v.check(false, format!("{year}, T={window}: {e}")),
        }
    }
}

// 7. PSD Gram matrices, V ≥ 0, thread-independent results.
fn hygiene(v: &mut Verdict) {
    let quad = QuadConfig::default();
    let mut ratios = Vec::new();
    for h in [0.51, 0.75, 0.95] {
        let hp = HurstParameter::new(h).unwrap();
        for times in [
            (1..=300).map(|k| k as f64 / 30.0).collect::<Vec<_>>(),
            (1..=200).map(|k| (k as f64 / 20.0).powi(2)).collect(),
        ] {
            let g = gram_matrix(&FbmLaw { h: hp }, &times).unwrap();
            ratios.push((format!("fBm H={h}, n={}", times.len()), g.is_psd(), g.min_eigen_ratio()));
        }
        let p = FouParams::new(1.0 / 30.0, LOG_400, 1.0 / 3.0, h, LOG_400).unwrap();
        let times: Vec<f64> = (1..=120).map(|k| k as f64 / 6.0).collect();
        let g = fou_gram(&times, &p, &quad).unwrap();
        ratios.push((format!("fOU H={h}, n=120"), g.is_psd(), g.min_eigen_ratio()));
        let ok = ConditionalLawSampler::new(&p, 5.0, 7.0, 150, &quad).is_ok();
        ratios.push((format!("joint history/X_t/X_τ H={h}, n=152"), ok, f64::NAN));
    }
    let bad: Vec<_> = ratios.iter().filter(|r| !r.1).collect();
    let min = ratios.iter().map(|r| r.2).filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    v.check(
        bad.is_empty(),
        format!("{} Gram matrices PSD within tolerance (min eigen ratio {min:.2e}); failures: {bad:?}", ratios.len()),
    );

    let fc = FracOpConfig::default();
    let mut min_v = f64::INFINITY;
    let mut errors = Vec::new();
    for h in [0.55, 0.75, 0.95] {
        for nu in [0.1, 1.0 / 3.0, 2.0] {
            let p = FouParams::new(1.0 / 30.0, LOG_400, nu, h, LOG_400).unwrap();
            for t in [0.5, 5.0, 20.0] {
                let times: Vec<f64> = (0..=50).map(|k| t * k as f64 / 50.0).collect();
                let state = history_state(&times, &vec![0.0; 51], LOG_400);
                for gap in [1e-3, 0.1, 1.0, 10.0, 60.0] {
                    match conditional_moments(&state, t + gap, &p, &fc) {
                        Ok((_, var)) => min_v = min_v.min(var),
                        Err(e) => errors.push(format!("H={h} nu={nu} t={t} gap={gap}: {e}")),
                    }
                }
            }
        }
    }
    v.check(errors.is_empty() && min_v >= 0.0, format!("V(τ, t) over 135 cases: min {min_v:.3e}; errors {errors:?}"));

    let p = sec5_model(-0.02);
    let sim = Simulator::new(&p, 10.0, &SimConfig { n_paths: 4000, seed: 3, ..SimConfig::default() }).unwrap();
    let bits: Vec<(usize, u64, u64)> = [1, 2, 4, 7]
        .iter()
        .map(|&n| {
            let e = parallel::estimate(&pool(n), &sim, realized_variance).unwrap();
            (n, e.mean.to_bits(), e.std_error.to_bits())
        })
        .collect();
    let serial = sim.estimate(realized_variance).unwrap();
    let same = bits.iter().all(|b| b.1 == serial.mean.to_bits() && b.2 == serial.std_error.to_bits());
    v.check(same, format!("MC estimate bits for 1/2/4/7 threads and serial equal: {same}"));

    // Same relative path in separate directories, since stdout echoes it.
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .zip(&dirs)
        .map(|(t, dir)| {
            let status = Command::new(env!("CARGO_BIN_EXE_fracvol"))
                .current_dir(dir.path())
                .args([
                    "--seed",
                    "7",
                    "--threads",
                    t,
                    "simulate",
                    "--maturity",
                    "5",
                    "--paths",
                    "300",
                    "--out",
                    "paths.bin",
                ])
                .output()
                .unwrap();
            assert!(status.status.success());
            let mut bytes = std::fs::read(dir.path().join("paths.bin")).unwrap();
            bytes.extend_from_slice(&status.stdout);
            bytes
        })
        .collect();
    v.check(
        outputs[0] == outputs[1],
        format!("CLI simulate output with 1 vs 3 threads byte-identical ({} bytes)", outputs[0].len()),
    );
}

type Criterion = (usize, &'static str, fn(&mut Verdict));

fn main() {
    let only: Option<Vec<usize>> = std::env::var("FRACVOL_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("FRACVOL_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let all: [Criterion; 7] = [
        (1, "variance swap closed form vs Monte Carlo", variance_swap),
        (2, "volatility swap series vs Monte Carlo", volatility_swap),
        (3, "reductions (Brownian, deterministic, Heston, classical BN-S)", reductions),
        (4, "conditional law of X_τ given the past", conditional_law),
        (5, "hedge ratio vs brute-force minimizer", hedge),
        (6, "model ranking on market VIX data", market_backtest),
        (7, "numerical hygiene and reproducibility", hygiene),
    ];
    let mut results = Vec::new();
    for (id, name, run) in all {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let mut v = Verdict::new(id, name);
        run(&mut v);
        println!(
            "ACCEPTANCE {} {}: {} ({:.1}s)",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            start.elapsed().as_secs_f64()
        );
        for d in &v.detail {
            println!("    {d}");
        }
        results.push(v.pass);
    }
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if strict && passed < results.len() {
        std::process::exit(1);
    }
}
