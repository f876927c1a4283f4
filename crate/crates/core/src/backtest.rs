//! Rolling-window realized-variance forecasts on a daily volatility index and
//! the error metrics used to compare models.
//!
//! Units: closes are index points (annualized volatility), variances are
//! squared points, time is in trading days. The realized variance of a
//! window is the mean of squared closes over it; each forecast starts from
//! `σ₀²` computed on the `T` closes immediately before the window.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fou::{FouParams, VTable};
use crate::quad::QuadConfig;
use crate::{Error, Result};

/// Calendar date (proleptic Gregorian), ordered chronologically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    pub year: i32,
    pub month: u8,
    pub day: u8,
}

impl Date {
    pub fn new(year: i32, month: u8, day: u8) -> Result<Self> {
        let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        let days = match month {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            2 if leap => 29,
            2 => 28,
            _ => return Err(Error::Data(alloc::format!("month {month} out of range"))),
        };
        if day == 0 || day > days {
            return Err(Error::Data(alloc::format!("day {day} out of range for {year}-{month:02}")));
        }
        Ok(Self { year, month, day })
    }

    /// Parses `YYYY-MM-DD`.
    pub fn parse_iso(s: &str) -> Result<Self> {
        let bad = || Error::Data(alloc::format!("expected YYYY-MM-DD, got {s:?}"));
        let mut it = s.trim().splitn(3, '-');
        let y = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let m = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let d = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        Self::new(y, m, d)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

/// Daily closes of a volatility index.
#[derive(Clone, Debug, PartialEq)]
pub struct VixSeries {
    dates: Vec<Date>,
    close: Vec<f64>,
}

impl VixSeries {
    pub fn new(dates: Vec<Date>, close: Vec<f64>) -> Result<Self> {
        if dates.len() != close.len() {
            return Err(Error::Data("dates and closes differ in length".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Data(alloc::format!("dates not strictly increasing at {}", w[1])));
        }
        if let Some(i) = close.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Data(alloc::format!("non-positive close {} on {}", close[i], dates[i])));
        }
        Ok(Self { dates, close })
    }

    pub fn dates(&self) -> &[Date] {
        &self.dates
    }

    pub fn close(&self) -> &[f64] {
        &self.close
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Sub-series with `from <= date <= to`.
    pub fn between(&self, from: Option<Date>, to: Option<Date>) -> Self {
        let keep = |d: &Date| from.map_or(true, |f| *d >= f) && to.map_or(true, |t| *d <= t);
        let (dates, close) = self.dates.iter().zip(&self.close).filter(|(d, _)| keep(d)).map(|(d, c)| (*d, *c)).unzip();
        Self { dates, close }
    }
}

/// Model parameters of the comparison (per trading day).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BacktestParams {
    pub alpha: f64,
    pub m: f64,
    pub nu: f64,
    pub h: f64,
    pub lambda: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Default for BacktestParams {
    fn default() -> Self {
        Self {
            alpha: 1.0 / 30.0,
            m: libm::log(400.0),
            nu: 1.0 / 3.0,
            h: 0.75,
            lambda: 1.0 / 20.0,
            kappa1: 30.0,
            kappa2: 25.0,
        }
    }
}

impl BacktestParams {
    pub fn fou(&self, x0: f64) -> Result<FouParams> {
        FouParams::new(self.alpha, self.m, self.nu, self.h, x0)
    }

    pub fn validate(&self) -> Result<()> {
        self.fou(self.m)?;
        if !(self.lambda > 0.0 && self.kappa1 >= 0.0 && self.kappa2 >= 0.0) {
            return Err(crate::error::invalid("need lambda > 0 and non-negative cumulants"));
        }
        Ok(())
    }
}

/// How the starting variance is taken from the trailing window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sigma0Rule {
    /// Mean of squared closes.
    #[default]
    MeanOfSquares,
    /// Square of the mean close.
    SquareOfMean,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BacktestConfig {
    /// Window length `T` in trading days.
    pub window: usize,
    pub from: Option<Date>,
    pub to: Option<Date>,
    pub params: BacktestParams,
    pub sigma0_rule: Sigma0Rule,
    pub quad: QuadConfig,
}

impl BacktestConfig {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            from: None,
            to: None,
            params: BacktestParams::default(),
            sigma0_rule: Sigma0Rule::default(),
            quad: QuadConfig::default(),
        }
    }

    /// Restricts the data to one calendar year.
    pub fn year(self, year: i32) -> Self {
        Self { from: Some(Date { year, month: 1, day: 1 }), to: Some(Date { year, month: 12, day: 31 }), ..self }
    }
}

/// The three compared models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Model {
    Heston,
    Bns,
    FracBns,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Heston, Model::Bns, Model::FracBns];

    pub fn name(self) -> &'static str {
        match self {
            Model::Heston => "heston",
            Model::Bns => "bns",
            Model::FracBns => "fracbns",
        }
    }
}

/// One sliding position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForecastRow {
    /// Index of the first close of the window within the filtered series.
    pub index: usize,
    pub window_start: Date,
    pub sigma0_sq: f64,
    pub realized: f64,
    pub heston: f64,
    pub bns: f64,
    pub fracbns: f64,
}

impl ForecastRow {
    pub fn forecast(&self, model: Model) -> f64 {
        match model {
            Model::Heston => self.heston,
            Model::Bns => self.bns,
            Model::FracBns => self.fracbns,
        }
    }
}

/// `(1 − e^{−xT})/(xT)`.
fn decay_average(x: f64, t: f64) -> f64 {
    -libm::expm1(-x * t) / (x * t)
}

/// Closed-form expected realized variance of each model over `T` days.
pub struct Forecaster {
    params: BacktestParams,
    window: f64,
    table: VTable,
}

impl Forecaster {
    pub fn new(params: &BacktestParams, window: usize, quad: &QuadConfig) -> Result<Self> {
        params.validate()?;
        if window < 2 {
            return Err(crate::error::invalid("window must be at least 2 days"));
        }
        let t = window as f64;
        let table = VTable::new(t, &params.fou(params.m)?, quad)?;
        Ok(Self { params: *params, window: t, table })
    }

    /// `(1 − e^{−αT})/(αT) (σ₀² − e^m) + e^m`.
    pub fn heston(&self, sigma0_sq: f64) -> f64 {
        let p = &self.params;
        let lr = libm::exp(p.m);
        decay_average(p.alpha, self.window) * (sigma0_sq - lr) + lr
    }

    /// `(1/T)(λ⁻¹(1 − e^{−λT}) σ₀² + κ₁(T − λ⁻¹(1 − e^{−λT}))) + λ κ₂`.
    pub fn bns(&self, sigma0_sq: f64) -> f64 {
        let p = &self.params;
        let d = decay_average(p.lambda, self.window);
        d * sigma0_sq + p.kappa1 * (1.0 - d) + p.lambda * p.kappa2
    }

    /// `κ₁/(λT) (T − λ⁻¹(1 − e^{−λT})) + (1/T) ∫ exp(e^{−αt}(X₀ − m) + m + v(t)/2) dt`
    /// with `X₀ = log σ₀²`.
    pub fn fracbns(&self, sigma0_sq: f64) -> Result<f64> {
        let p = &self.params;
        let jump = p.kappa1 * (1.0 - decay_average(p.lambda, self.window)) / p.lambda;
        Ok(jump + self.table.expected_exp_integral(&p.fou(libm::log(sigma0_sq))?)?)
    }
}

/// Forecast table: one row per window start `i` with `T <= i <= len − T`.
pub fn rolling_forecast(series: &VixSeries, cfg: &BacktestConfig) -> Result<Vec<ForecastRow>> {
    let data = series.between(cfg.from, cfg.to);
    let t = cfg.window;
    if t < 2 {
        return Err(crate::error::invalid("window must be at least 2 days"));
    }
    if data.len() < 2 * t {
        return Err(Error::Data(alloc::format!(
            "{} closes in range, need at least {} for a window of {t}",
            data.len(),
            2 * t
        )));
    }
    let fc = Forecaster::new(&cfg.params, t, &cfg.quad)?;
    let sq: Vec<f64> = data.close.iter().map(|c| c * c).collect();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mut rows = Vec::with_capacity(data.len() - 2 * t + 1);
    for i in t..=data.len() - t {
        let sigma0_sq = match cfg.sigma0_rule {
            Sigma0Rule::MeanOfSquares => mean(&sq[i - t..i]),
            Sigma0Rule::SquareOfMean => {
                let m = mean(&data.close[i - t..i]);
                m * m
            }
        };
        rows.push(ForecastRow {
            index: i,
            window_start: data.dates[i],
            sigma0_sq,
            realized: mean(&sq[i..i + t]),
            heston: fc.heston(sigma0_sq),
            bns: fc.bns(sigma0_sq),
            fracbns: fc.fracbns(sigma0_sq)?,
        });
    }
    Ok(rows)
}

/// Goodness-of-fit measures of one model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorMetrics {
    /// AAE divided by the mean data value.
    pub ape: f64,
    /// Mean absolute error.
    pub aae: f64,
    /// Mean absolute error divided by the number of points once more, as
    /// the formula is printed.
    pub arpe: f64,
    pub rmse: f64,
    /// Mean of `|error| / |data|`.
    pub arpe_standard: f64,
}

/// Metrics of a model series against data.
pub fn error_metrics(data: &[f64], model: &[f64]) -> Result<ErrorMetrics> {
    if data.is_empty() || data.len() != model.len() {
        return Err(Error::Data("metrics need equal-length, non-empty series".into()));
    }
    let n = data.len() as f64;
    let (mut abs, mut sq, mut rel, mut level) = (0.0, 0.0, 0.0, 0.0);
    for (d, m) in data.iter().zip(model) {
        let e = (d - m).abs();
        abs += e;
        sq += e * e;
        rel += e / d.abs();
        level += d;
    }
    let aae = abs / n;
    Ok(ErrorMetrics { ape: aae / (level / n), aae, arpe: aae / n, rmse: libm::sqrt(sq / n), arpe_standard: rel / n })
}

/// Metrics for all three models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub rows: usize,
    pub heston: ErrorMetrics,
    pub bns: ErrorMetrics,
    pub fracbns: ErrorMetrics,
}

impl ErrorReport {
    pub fn get(&self, model: Model) -> &ErrorMetrics {
        match model {
            Model::Heston => &self.heston,
            Model::Bns => &self.bns,
            Model::FracBns => &self.fracbns,
        }
    }

    /// True when the fractional model beats both others on RMSE, AAE and APE.
    pub fn fractional_wins(&self) -> bool {
        let f = &self.fracbns;
        [&self.heston, &self.bns].iter().all(|o| f.rmse < o.rmse && f.aae < o.aae && f.ape < o.ape)
    }
}

pub fn report_from_rows(rows: &[ForecastRow]) -> Result<ErrorReport> {
    let data: Vec<f64> = rows.iter().map(|r| r.realized).collect();
    let col = |m: Model| -> Vec<f64> { rows.iter().map(|r| r.forecast(m)).collect() };
    Ok(ErrorReport {
        rows: rows.len(),
        heston: error_metrics(&data, &col(Model::Heston))?,
        bns: error_metrics(&data, &col(Model::Bns))?,
        fracbns: error_metrics(&data, &col(Model::FracBns))?,
    })
}

/// Forecast table and error report.
pub fn compare_models(series: &VixSeries, cfg: &BacktestConfig) -> Result<(Vec<ForecastRow>, ErrorReport)> {
    let rows = rolling_forecast(series, cfg)?;
    let report = report_from_rows(&rows)?;
    Ok((rows, report))
}

/// Plot-ready CSV text with header `time,realized,heston,bns,fracbns`.
pub fn plot_csv(rows: &[ForecastRow]) -> String {
    use core::fmt::Write;
    let mut out = String::from("time,realized,heston,bns,fracbns\n");
    for r in rows {
        let _ =
            writeln!(out, "{},{:.17e},{:.17e},{:.17e},{:.17e}", r.window_start, r.realized, r.heston, r.bns, r.fracbns);
    }
    out
}
