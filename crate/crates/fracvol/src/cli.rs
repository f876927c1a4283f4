//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid configuration or input,
//! 4 computation failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracvol_core::backtest::{compare_models, plot_csv, BacktestConfig, Date, ErrorMetrics, Sigma0Rule};
use fracvol_core::hedging::{optimal_hedge_delta, price_decomposition, FracOpConfig, MarketState};
use fracvol_core::montecarlo::{realized_variance, McEstimate, SimConfig, SimWarning, Simulator, XMode};
use fracvol_core::pricing::{
    frac_bns_expected_rv, frac_bns_variance_swap_price, frac_bns_volatility_swap_price, SwapContract,
};
use serde::Serialize;

use crate::config::ParamsFile;
use crate::error::{AppError, AppResult};
use crate::io::{load_vix_csv, ser_f64, ser_opt_f64, PathFormat, PathWriter};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(
    name = "fracvol",
    version,
    about = "Fractional BN-S volatility model: simulation, swap pricing, hedging and backtests"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo (default: all cores).
    #[arg(long, global = true, env = "FRACVOL_THREADS")]
    pub threads: Option<usize>,
    /// Seed of all random streams.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Validate inputs and exit without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// More diagnostics on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate full-model paths.
    Simulate(SimulateArgs),
    /// Price a swap.
    #[command(subcommand)]
    Price(PriceCommand),
    /// Hedge ratios.
    #[command(subcommand)]
    Hedge(HedgeCommand),
    /// Rolling-window model comparison on daily index closes.
    Backtest(BacktestArgs),
}

#[derive(Debug, Args)]
pub struct ParamsArg {
    /// JSON parameter file, or `defaults`.
    #[arg(long, default_value = "defaults")]
    pub params: String,
}

impl ParamsArg {
    fn load(&self) -> AppResult<ParamsFile> {
        if self.params == "defaults" {
            Ok(ParamsFile::default())
        } else {
            ParamsFile::load(Path::new(&self.params))
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum XModeArg {
    Exact,
    Explicit,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Horizon in days.
    #[arg(long)]
    pub maturity: f64,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 8)]
    pub steps_per_day: usize,
    #[arg(long, value_enum, default_value_t = XModeArg::Exact)]
    pub x_mode: XModeArg,
    #[arg(long)]
    pub no_antithetic: bool,
    /// Output file; `.bin` writes the binary format, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Maturity in days.
    #[arg(long)]
    pub maturity: f64,
    #[arg(long)]
    pub strike: f64,
    /// Rate per day; overrides the parameter file.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub notional: f64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PriceCommand {
    #[command(allow_negative_numbers = true)]
    VarianceSwap {
        #[command(flatten)]
        contract: ContractArgs,
        /// Also report a Monte Carlo estimate of E[σ_R²] with this many paths.
        #[arg(long)]
        mc_paths: Option<usize>,
    },
    #[command(allow_negative_numbers = true)]
    VolatilitySwap {
        #[command(flatten)]
        contract: ContractArgs,
        /// Expansion point of the series (default: E[σ_R²]).
        #[arg(long)]
        beta2: Option<f64>,
        #[arg(long)]
        target_error: Option<f64>,
        #[arg(long)]
        max_terms: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HedgeCommand {
    /// Stock position at inception.
    #[command(allow_negative_numbers = true)]
    Delta {
        #[command(flatten)]
        contract: ContractArgs,
        /// Spot price (default: s0 of the parameter file).
        #[arg(long)]
        spot: Option<f64>,
        /// Spot variance (default: sigma0_sq of the parameter file).
        #[arg(long)]
        sigma_sq: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Sigma0Arg {
    MeanOfSquares,
    SquareOfMean,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// CSV with `date` and `close` columns.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub window: usize,
    /// Calendar year to use.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    pub year: Option<i32>,
    /// First date (YYYY-MM-DD).
    #[arg(long)]
    pub from: Option<String>,
    /// Last date (YYYY-MM-DD).
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long, value_enum, default_value_t = Sigma0Arg::MeanOfSquares)]
    pub sigma0_rule: Sigma0Arg,
    /// Also report the conventional ARPE.
    #[arg(long)]
    pub standard_arpe: bool,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for the plot-ready CSV.
    #[arg(long)]
    pub plots: Option<PathBuf>,
}

#[derive(Serialize)]
struct Estimate {
    #[serde(serialize_with = "ser_f64")]
    mean: f64,
    #[serde(serialize_with = "ser_f64")]
    std_error: f64,
    samples: usize,
}

impl From<McEstimate> for Estimate {
    fn from(e: McEstimate) -> Self {
        Self { mean: e.mean, std_error: e.std_error, samples: e.n }
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> AppResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AppError::Compute(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn contract(args: &ContractArgs, file: &ParamsFile, vol: bool) -> AppResult<SwapContract> {
    let rate = args.rate.unwrap_or(file.rate);
    let mut c = if vol {
        SwapContract::volatility(args.maturity, args.strike, rate)
    } else {
        SwapContract::variance(args.maturity, args.strike, rate)
    };
    c.notional = args.notional;
    c.validate()?;
    Ok(c)
}

/// Applies a rate override before the martingale drift is derived.
fn with_rate(mut file: ParamsFile, rate: Option<f64>) -> ParamsFile {
    if let Some(r) = rate {
        file.rate = r;
    }
    file
}

fn warn(w: &SimWarning) {
    match w {
        SimWarning::CoarseGrid { rate_times_step } => {
            eprintln!("warning: rate × step = {rate_times_step:.3}; refine --steps-per-day")
        }
        SimWarning::ExplicitFallback { steps } => {
            eprintln!("warning: {steps} steps exceed the exact-law limit; using the explicit solution")
        }
    }
}

#[derive(Serialize)]
struct DryRun<'a> {
    dry_run: bool,
    command: &'a str,
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> AppResult<()> {
    let file = a.params.load()?;
    let p = file.model()?;
    let cfg = SimConfig {
        n_paths: a.paths,
        steps_per_day: a.steps_per_day,
        seed: cli.seed,
        x_mode: match a.x_mode {
            XModeArg::Exact => XMode::ExactLaw,
            XModeArg::Explicit => XMode::Explicit,
        },
        antithetic: !a.no_antithetic,
        quad: file.quad()?,
    };
    cfg.validate()?;
    if a.maturity.is_nan() || a.maturity <= 0.0 {
        return Err(AppError::Config("maturity must be positive".into()));
    }
    if cli.dry_run {
        return emit(&DryRun { dry_run: true, command: "simulate" }, None);
    }
    let sim = Simulator::new(&p, a.maturity, &cfg)?;
    sim.warnings().iter().for_each(warn);
    let pool = parallel::pool(cli.threads)?;
    let file_out =
        File::create(&a.out).map_err(|e| AppError::Config(format!("cannot create {}: {e}", a.out.display())))?;
    let mut writer =
        PathWriter::new(BufWriter::new(file_out), PathFormat::from_path(&a.out), a.paths as u64, sim.grid().points())?;
    let mut rv = Vec::with_capacity(a.paths);
    const CHUNK: usize = 256;
    let mut start = 0;
    while start < a.paths {
        let end = (start + CHUNK).min(a.paths);
        let paths = pool.install(|| {
            use rayon::prelude::*;
            (start as u64..end as u64).into_par_iter().map(|k| sim.path(k)).collect::<fracvol_core::Result<Vec<_>>>()
        })?;
        for path in &paths {
            writer.write(path)?;
            rv.push(realized_variance(path));
        }
        start = end;
    }
    writer.finish()?;
    #[derive(Serialize)]
    struct Summary {
        paths: usize,
        points: usize,
        #[serde(serialize_with = "ser_f64")]
        maturity: f64,
        out: String,
        realized_variance_mean: Estimate,
    }
    let est = McEstimate::from_samples(&rv)?;
    emit(
        &Summary {
            paths: a.paths,
            points: sim.grid().len(),
            maturity: a.maturity,
            out: a.out.display().to_string(),
            realized_variance_mean: est.into(),
        },
        None,
    )
}

fn price(cli: &Cli, cmd: &PriceCommand) -> AppResult<()> {
    match cmd {
        PriceCommand::VarianceSwap { contract: ca, mc_paths } => {
            let file = with_rate(ca.params.load()?, ca.rate);
            let p = file.model()?;
            let c = contract(ca, &file, false)?;
            let quad = file.quad()?;
            if cli.dry_run {
                return emit(&DryRun { dry_run: true, command: "price variance-swap" }, None);
            }
            let price = frac_bns_variance_swap_price(&p, &c, &quad)?;
            let expected_rv = frac_bns_expected_rv(&p, c.maturity, &quad)?;
            let mc = match mc_paths {
                Some(n) => {
                    let cfg = SimConfig { n_paths: *n, seed: cli.seed, quad, ..SimConfig::default() };
                    let sim = Simulator::new(&p, c.maturity, &cfg)?;
                    sim.warnings().iter().for_each(warn);
                    Some(Estimate::from(parallel::estimate(&parallel::pool(cli.threads)?, &sim, realized_variance)?))
                }
                None => None,
            };
            #[derive(Serialize)]
            struct Out {
                kind: &'static str,
                #[serde(serialize_with = "ser_f64")]
                price: f64,
                #[serde(serialize_with = "ser_f64")]
                expected_rv: f64,
                #[serde(serialize_with = "ser_f64")]
                maturity: f64,
                #[serde(serialize_with = "ser_f64")]
                strike: f64,
                #[serde(serialize_with = "ser_f64")]
                rate: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                monte_carlo: Option<Estimate>,
            }
            let out = Out {
                kind: "variance_swap",
                price,
                expected_rv,
                maturity: c.maturity,
                strike: c.strike,
                rate: c.rate,
                monte_carlo: mc,
            };
            emit(&out, ca.out.as_deref())
        }
        PriceCommand::VolatilitySwap { contract: ca, beta2, target_error, max_terms } => {
            let file = with_rate(ca.params.load()?, ca.rate);
            let p = file.model()?;
            let c = contract(ca, &file, true)?;
            let quad = file.quad()?;
            let mut series = file.series();
            series.beta2 = beta2.or(series.beta2);
            series.target_abs_error = target_error.or(series.target_abs_error);
            if let Some(n) = max_terms {
                series.max_terms = *n;
            }
            if cli.dry_run {
                return emit(&DryRun { dry_run: true, command: "price volatility-swap" }, None);
            }
            let q = frac_bns_volatility_swap_price(&p, &c, &series, &quad)?;
            #[derive(Serialize)]
            struct Out {
                kind: &'static str,
                #[serde(serialize_with = "ser_f64")]
                price: f64,
                #[serde(serialize_with = "ser_f64")]
                expected_vol: f64,
                #[serde(serialize_with = "ser_f64")]
                beta: f64,
                n_terms: usize,
                #[serde(serialize_with = "ser_f64")]
                error_bound: f64,
                #[serde(serialize_with = "ser_f64")]
                qmc_error: f64,
                #[serde(serialize_with = "ser_f64")]
                maturity: f64,
                #[serde(serialize_with = "ser_f64")]
                strike: f64,
            }
            let out = Out {
                kind: "volatility_swap",
                price: q.price,
                expected_vol: q.expected_vol,
                beta: q.series.beta,
                n_terms: q.n_terms,
                error_bound: q.bound,
                qmc_error: q.series.qmc_error,
                maturity: c.maturity,
                strike: c.strike,
            };
            emit(&out, ca.out.as_deref())
        }
    }
}

fn hedge(cli: &Cli, cmd: &HedgeCommand) -> AppResult<()> {
    let HedgeCommand::Delta { contract: ca, spot, sigma_sq } = cmd;
    let file = with_rate(ca.params.load()?, ca.rate);
    let p = file.model()?;
    let c = contract(ca, &file, false)?;
    let fc = FracOpConfig { quad: file.quad()?, ..FracOpConfig::default() };
    let state = MarketState::initial(p.fou.x0, sigma_sq.unwrap_or(p.sigma0_sq), spot.unwrap_or(p.s0));
    state.validate()?;
    if cli.dry_run {
        return emit(&DryRun { dry_run: true, command: "hedge delta" }, None);
    }
    let delta = optimal_hedge_delta(&state, &p, &c, &fc)?;
    let parts = price_decomposition(&state, &p, &c, &fc)?;
    #[derive(Serialize)]
    struct Out {
        #[serde(serialize_with = "ser_f64")]
        delta: f64,
        #[serde(serialize_with = "ser_f64")]
        continuous_leg: f64,
        #[serde(serialize_with = "ser_f64")]
        jump_leg: f64,
        #[serde(serialize_with = "ser_f64")]
        spot: f64,
        #[serde(serialize_with = "ser_f64")]
        sigma_sq: f64,
    }
    emit(
        &Out { delta, continuous_leg: parts.p1, jump_leg: parts.p2, spot: state.s_t, sigma_sq: state.sigma_t_sq },
        ca.out.as_deref(),
    )
}

#[derive(Serialize)]
struct MetricsOut {
    #[serde(serialize_with = "ser_f64")]
    ape: f64,
    #[serde(serialize_with = "ser_f64")]
    aae: f64,
    #[serde(serialize_with = "ser_f64")]
    arpe: f64,
    #[serde(serialize_with = "ser_f64")]
    rmse: f64,
    #[serde(serialize_with = "ser_opt_f64", skip_serializing_if = "Option::is_none")]
    arpe_standard: Option<f64>,
}

fn metrics(m: &ErrorMetrics, standard: bool) -> MetricsOut {
    MetricsOut {
        ape: m.ape,
        aae: m.aae,
        arpe: m.arpe,
        rmse: m.rmse,
        arpe_standard: standard.then_some(m.arpe_standard),
    }
}

fn parse_date(s: &Option<String>) -> AppResult<Option<Date>> {
    s.as_deref().map(Date::parse_iso).transpose().map_err(AppError::from)
}

fn backtest(cli: &Cli, a: &BacktestArgs) -> AppResult<()> {
    let file = a.params.load()?;
    let params = file.backtest()?;
    let series = load_vix_csv(&a.data)?;
    let mut cfg = BacktestConfig::new(a.window);
    cfg.params = params;
    cfg.quad = file.quad()?;
    cfg.sigma0_rule = match a.sigma0_rule {
        Sigma0Arg::MeanOfSquares => Sigma0Rule::MeanOfSquares,
        Sigma0Arg::SquareOfMean => Sigma0Rule::SquareOfMean,
    };
    cfg = match a.year {
        Some(y) => cfg.year(y),
        None => BacktestConfig { from: parse_date(&a.from)?, to: parse_date(&a.to)?, ..cfg },
    };
    if a.window < 2 {
        return Err(AppError::Config("window must be at least 2".into()));
    }
    if cli.dry_run {
        return emit(&DryRun { dry_run: true, command: "backtest" }, None);
    }
    let (rows, report) = compare_models(&series, &cfg)?;
    if let Some(dir) = &a.plots {
        std::fs::create_dir_all(dir)?;
        let name = match a.year {
            Some(y) => format!("realized_{y}_w{}.csv", a.window),
            None => format!("realized_w{}.csv", a.window),
        };
        let mut f = BufWriter::new(File::create(dir.join(name))?);
        f.write_all(plot_csv(&rows).as_bytes())?;
        f.flush()?;
    }
    #[derive(Serialize)]
    struct Models {
        heston: MetricsOut,
        bns: MetricsOut,
        fracbns: MetricsOut,
    }
    #[derive(Serialize)]
    struct Out {
        window: usize,
        from: Option<String>,
        to: Option<String>,
        first_window: String,
        last_window: String,
        rows: usize,
        sigma0_rule: &'static str,
        models: Models,
        fractional_lowest_rmse_aae_ape: bool,
    }
    let s = a.standard_arpe;
    let out = Out {
        window: a.window,
        from: cfg.from.map(|d| d.to_string()),
        to: cfg.to.map(|d| d.to_string()),
        first_window: rows[0].window_start.to_string(),
        last_window: rows[rows.len() - 1].window_start.to_string(),
        rows: report.rows,
        sigma0_rule: match cfg.sigma0_rule {
            Sigma0Rule::MeanOfSquares => "mean_of_squares",
            Sigma0Rule::SquareOfMean => "square_of_mean",
        },
        models: Models {
            heston: metrics(&report.heston, s),
            bns: metrics(&report.bns, s),
            fracbns: metrics(&report.fracbns, s),
        },
        fractional_lowest_rmse_aae_ape: report.fractional_wins(),
    };
    emit(&out, a.out.as_deref())
}

fn dispatch(cli: &Cli) -> AppResult<()> {
    if cli.verbose > 0 {
        eprintln!("seed {} threads {:?}", cli.seed, cli.threads);
    }
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Price(c) => price(cli, c),
        Command::Hedge(c) => hedge(cli, c),
        Command::Backtest(a) => backtest(cli, a),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
