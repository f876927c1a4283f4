//! Swap pricing under the fractional BN-S model, plus the Heston and
//! classical BN-S benchmarks.
//!
//! Realized variance splits into three independent legs:
//!
//! ```text
//! σ_R² = (1/T) ∫_0^T m_t dt + (1/T) ∫_0^T e^{X_t} dt + J
//! m_t  = e^{−λt} (σ₀² − e^{X₀})
//! J    = (1/(λT)) ∫_0^T (1 − e^{−λ(T−s)}) dZ_s
//! ```
//!
//! Rates are quoted per day and maturities in days.

mod volatility;

use crate::fou::{expected_exp_integral, FouParams};
use crate::levy::SubordinatorSpec;
use crate::quad::QuadConfig;
use crate::{Error, Result};

pub use volatility::{
    b_moment, b_moment_qmc, b_moment_with, frac_bns_volatility_swap_price, vol_series_error_bound, volatility_series,
    BIntegrator, QmcConfig, QmcEstimate, SeriesConfig, VolSeries, VolSwapQuote, MAX_SERIES_TERMS,
};

/// Contract type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapKind {
    Variance,
    Volatility,
}

/// A variance or volatility swap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapContract {
    /// Maturity `T` in days.
    pub maturity: f64,
    /// `K_Var` (variance points) or `K_Vol` (volatility points).
    pub strike: f64,
    pub notional: f64,
    /// Continuously compounded rate per day.
    pub rate: f64,
    pub kind: SwapKind,
}

impl SwapContract {
    pub fn variance(maturity: f64, strike: f64, rate: f64) -> Self {
        Self { maturity, strike, notional: 1.0, rate, kind: SwapKind::Variance }
    }

    pub fn volatility(maturity: f64, strike: f64, rate: f64) -> Self {
        Self { maturity, strike, notional: 1.0, rate, kind: SwapKind::Volatility }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(crate::error::invalid("maturity must be positive"));
        }
        if !(self.notional > 0.0) {
            return Err(crate::error::invalid("notional must be positive"));
        }
        if !(self.strike.is_finite() && self.rate.is_finite()) {
            return Err(crate::error::invalid("strike and rate must be finite"));
        }
        Ok(())
    }

    pub fn discount(&self) -> f64 {
        libm::exp(-self.rate * self.maturity)
    }
}

/// Annual rate to per-day rate under a trading-day year.
pub fn per_day_rate(annual_rate: f64, days_per_year: f64) -> f64 {
    annual_rate / days_per_year
}

/// Full parameter set of the fractional BN-S model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub fou: FouParams,
    /// Jump decay rate `λ` of the variance (per day).
    pub lambda: f64,
    /// Leverage `ρ <= 0` of jumps on the log-price.
    pub rho: f64,
    /// Log-price drift `b_t = c₁ − c₂ σ_t²`.
    pub c1: f64,
    pub c2: f64,
    pub sigma0_sq: f64,
    pub s0: f64,
    pub spec: SubordinatorSpec,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.fou.validate()?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(crate::error::invalid("lambda must be positive"));
        }
        if !(self.rho <= 0.0) {
            return Err(crate::error::invalid("rho must be <= 0"));
        }
        if !(self.sigma0_sq > 0.0 && self.s0 > 0.0) {
            return Err(crate::error::invalid("sigma0_sq and s0 must be positive"));
        }
        if !(self.c1.is_finite() && self.c2.is_finite()) {
            return Err(crate::error::invalid("c1 and c2 must be finite"));
        }
        Ok(())
    }

    /// `σ₀² − e^{X₀}`, the initial gap that decays at rate `λ`.
    pub fn initial_gap(&self) -> f64 {
        self.sigma0_sq - libm::exp(self.fou.x0)
    }

    /// `κ₁` of the subordinator (0 for the zero spec).
    pub fn kappa1(&self) -> f64 {
        if self.spec.is_zero() {
            0.0
        } else {
            self.spec.cumulant(1).unwrap_or(0.0)
        }
    }

    /// `c₁ = r − κ(ρ)`, `c₂ = 1/2`: the drift making `e^{−rt} S_t` a martingale.
    pub fn with_martingale_drift(self, rate: f64) -> Result<Self> {
        let comp = if self.spec.is_zero() { 0.0 } else { self.spec.cgf(self.rho)? };
        Ok(Self { c1: rate - comp, c2: 0.5, ..self })
    }
}

/// `(1/(λT)) (1 − e^{−λT})`.
fn decay_average(lambda: f64, maturity: f64) -> f64 {
    -libm::expm1(-lambda * maturity) / (lambda * maturity)
}

/// `v₁(T) = λ⁻¹ ((1 − e^{−λT})(σ₀² − e^{X₀}) + (T − λ⁻¹(1 − e^{−λT})) κ₁)`.
pub fn v1(p: &ModelParams, maturity: f64) -> f64 {
    let lt = p.lambda * maturity;
    let decay = -libm::expm1(-lt);
    (decay * p.initial_gap() + (maturity - decay / p.lambda) * p.kappa1()) / p.lambda
}

/// Expected jump leg `E[J] = κ₁ (T − λ⁻¹(1 − e^{−λT})) / (λT)`.
pub fn expected_jump_leg(p: &ModelParams, maturity: f64) -> f64 {
    p.kappa1() * (1.0 - decay_average(p.lambda, maturity)) / p.lambda
}

/// `E[σ_R²] = v₁(T)/T + (1/T) ∫_0^T exp(μ(t) + v(t)/2) dt`.
pub fn frac_bns_expected_rv(p: &ModelParams, maturity: f64, cfg: &QuadConfig) -> Result<f64> {
    p.validate()?;
    if !(maturity > 0.0) {
        return Err(crate::error::invalid("maturity must be positive"));
    }
    Ok(v1(p, maturity) / maturity + expected_exp_integral(maturity, &p.fou, cfg)?)
}

/// Variance swap value per unit notional, `e^{−rT} K(T) + μ₁(T)` with
/// `μ₁(T) = e^{−rT} (v₁(T)/T − K_Var)`.
pub fn frac_bns_variance_swap_price(p: &ModelParams, contract: &SwapContract, cfg: &QuadConfig) -> Result<f64> {
    contract.validate()?;
    if contract.kind != SwapKind::Variance {
        return Err(crate::error::invalid("contract is not a variance swap"));
    }
    p.validate()?;
    let t = contract.maturity;
    let df = contract.discount();
    let mu1 = df * (v1(p, t) / t - contract.strike);
    Ok(contract.notional * (df * expected_exp_integral(t, &p.fou, cfg)? + mu1))
}

/// Heston variance parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HestonParams {
    pub sigma0_sq: f64,
    /// Long-run variance `θ²`.
    pub theta_sq: f64,
    /// Reversion speed `k`.
    pub k: f64,
    /// Volatility of variance `γ`.
    pub gamma: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        if [self.sigma0_sq, self.theta_sq, self.k, self.gamma].iter().all(|x| *x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(crate::error::invalid("Heston parameters must be positive"))
        }
    }
}

/// `E[σ_R²] = (1 − e^{−kT})/(kT) (σ₀² − θ²) + θ²`.
pub fn heston_expected_rv(hp: &HestonParams, maturity: f64) -> f64 {
    decay_average(hp.k, maturity) * (hp.sigma0_sq - hp.theta_sq) + hp.theta_sq
}

/// `Var(σ_R²)` in closed form.
pub fn heston_var_rv(hp: &HestonParams, maturity: f64) -> f64 {
    let (k, g, t) = (hp.k, hp.gamma, maturity);
    let kt = k * t;
    let e1 = libm::exp(kt);
    let e2 = libm::exp(2.0 * kt);
    let a = (2.0 * e2 - 4.0 * e1 * kt - 2.0) * (hp.sigma0_sq - hp.theta_sq);
    let b = (2.0 * e2 * kt - 3.0 * e2 + 4.0 * e1 - 1.0) * hp.theta_sq;
    g * g * libm::exp(-2.0 * kt) / (2.0 * k * k * k * t * t) * (a + b)
}

/// Second-order estimate `√E − Var / (8 E^{3/2})` of `E[σ_R]`.
pub fn vol_approx_from_moments(mean: f64, var: f64) -> f64 {
    libm::sqrt(mean) - var / (8.0 * libm::pow(mean, 1.5))
}

/// Heston volatility estimate from the two closed-form moments.
pub fn heston_vol_approx(hp: &HestonParams, maturity: f64) -> f64 {
    vol_approx_from_moments(heston_expected_rv(hp, maturity), heston_var_rv(hp, maturity))
}

/// Classical BN-S variance swap:
/// `e^{−rT} [(1/T)(λ⁻¹(1 − e^{−λT})(σ₀² − κ₁) + κ₁T) + ρ²λκ₂ − K_Var]`.
pub fn classical_bns_variance_swap_price(
    sigma0_sq: f64,
    spec: &SubordinatorSpec,
    lambda: f64,
    rho: f64,
    contract: &SwapContract,
) -> Result<f64> {
    contract.validate()?;
    if contract.kind != SwapKind::Variance {
        return Err(crate::error::invalid("contract is not a variance swap"));
    }
    if !(lambda > 0.0) {
        return Err(crate::error::invalid("lambda must be positive"));
    }
    let (k1, k2) = if spec.is_zero() { (0.0, 0.0) } else { (spec.cumulant(1)?, spec.cumulant(2)?) };
    let t = contract.maturity;
    let mean = decay_average(lambda, t) * (sigma0_sq - k1) + k1;
    Ok(contract.notional * contract.discount() * (mean + rho * rho * lambda * k2 - contract.strike))
}

pub(crate) fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::FamilyKind;

    fn sec5(nu: f64) -> ModelParams {
        let m = libm::log(400.0);
        ModelParams {
            fou: FouParams::new(1.0 / 30.0, m, nu, 0.75, m).unwrap(),
            lambda: 0.05,
            rho: -0.05,
            c1: 0.0,
            c2: 0.0,
            sigma0_sq: 400.0,
            s0: 100.0,
            spec: SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, 30.0, 25.0).unwrap(),
        }
    }

    #[test]
    fn degenerate_expected_rv_is_constant_level() {
        let p = ModelParams { spec: SubordinatorSpec::none(), ..sec5(0.0) };
        let e = frac_bns_expected_rv(&p, 10.0, &QuadConfig::default()).unwrap();
        assert!((e - 400.0).abs() < 1e-9 * 400.0);
    }

    #[test]
    fn expected_rv_matches_displayed_form() {
        let p = sec5(1.0 / 3.0);
        let cfg = QuadConfig::default();
        let t = 10.0;
        let lt = p.lambda * t;
        let display =
            30.0 / lt * (t - (1.0 - libm::exp(-lt)) / p.lambda) + expected_exp_integral(t, &p.fou, &cfg).unwrap();
        let got = frac_bns_expected_rv(&p, t, &cfg).unwrap();
        assert!((got - display).abs() < 1e-12 * display);
    }

    #[test]
    fn variance_swap_identities() {
        let p = sec5(1.0 / 3.0);
        let cfg = QuadConfig::default();
        let e = frac_bns_expected_rv(&p, 20.0, &cfg).unwrap();
        let atm = frac_bns_variance_swap_price(&p, &SwapContract::variance(20.0, e, 0.0003), &cfg).unwrap();
        assert!(atm.abs() < 1e-12 * e);
        for r in [0.0, 1e-4, 0.01] {
            let c = SwapContract::variance(20.0, 400.0, r);
            let price = frac_bns_variance_swap_price(&p, &c, &cfg).unwrap();
            let want = libm::exp(-r * 20.0) * (e - 400.0);
            assert!((price - want).abs() <= 1e-12 * e, "r={r}");
        }
        assert!(frac_bns_variance_swap_price(&p, &SwapContract::volatility(20.0, 20.0, 0.0), &cfg).is_err());
    }

    #[test]
    fn heston_examples() {
        let hp = HestonParams { sigma0_sq: 400.0, theta_sq: 400.0, k: 1.0 / 30.0, gamma: 2.0 };
        assert!((heston_expected_rv(&hp, 10.0) - 400.0).abs() < 1e-12);
        let hp = HestonParams { sigma0_sq: 900.0, ..hp };
        let far = heston_expected_rv(&hp, 1e4 * 30.0);
        assert!((far - 400.0).abs() < 1e-3 * 400.0);
        assert_eq!(vol_approx_from_moments(4.0, 8.0), 1.875);
        assert_eq!(vol_approx_from_moments(9.0, 0.0), 3.0);
    }

    #[test]
    fn classical_bns_examples() {
        let spec = SubordinatorSpec::from_cumulants(FamilyKind::CompoundPoissonExp, 30.0, 25.0).unwrap();
        let c = SwapContract::variance(10.0, 12.0, 0.0);
        let v = classical_bns_variance_swap_price(30.0, &spec, 0.05, 0.0, &c).unwrap();
        assert!((v - (30.0 - 12.0)).abs() < 1e-12);
        let c0 = SwapContract::variance(10.0, 0.0, 0.0);
        let c1 = SwapContract::variance(10.0, 0.0, 0.002);
        let p0 = classical_bns_variance_swap_price(400.0, &spec, 0.05, -0.1, &c0).unwrap();
        let p1 = classical_bns_variance_swap_price(400.0, &spec, 0.05, -0.1, &c1).unwrap();
        assert_eq!(p1, libm::exp(-0.02) * p0);
    }
}
