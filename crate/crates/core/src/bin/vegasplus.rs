use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vegasplus::bench::{self, NamedConfig, Overrides, SweepPlan};
use vegasplus::integrands::{self, IntegrandSpec};
use vegasplus::VegasError;

#[derive(Parser)]
#[command(name = "vegasplus", version, about = "Adaptive Monte Carlo integration (VEGAS+)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one built-in integrand.
    Run {
        #[command(flatten)]
        common: Common,
        /// Evaluations per iteration, e.g. 1e6.
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        n_eval: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a grid of integrations and emit one row per point.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated evaluation budgets.
        #[arg(long, value_parser = parse_count, value_delimiter = ',', conflicts_with = "doubling")]
        n_eval: Vec<u64>,
        /// Doubling schedule START:STOP.
        #[arg(long, value_parser = parse_doubling)]
        doubling: Option<Schedule>,
        /// Comma-separated worker counts; more than one adds a scaling table.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers: Vec<usize>,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds per point.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    integrand: String,
    /// Dimension, for integrands where it is variable.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_parser = parse_named, default_value = "def")]
    config: NamedConfig,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    skip: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    n_intervals: Option<usize>,
    #[arg(long)]
    n_strat: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Measured repetitions; timings are averaged.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Discarded runs before measuring.
    #[arg(long, default_value_t = 0)]
    warmup: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

fn parse_named(s: &str) -> Result<NamedConfig, String> {
    s.parse()
}

/// Non-negative integer, also written as `1e6` or `1.5e3`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15) {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

#[derive(Clone)]
struct Schedule(Vec<u64>);

fn parse_doubling(s: &str) -> Result<Schedule, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("'{s}' is not START:STOP"))?;
    let v = bench::doubling(parse_count(a)?, parse_count(b)?);
    if v.is_empty() {
        return Err(format!("'{s}' is an empty schedule"));
    }
    Ok(Schedule(v))
}

enum Failure {
    Usage(String),
    Integration(String),
}

impl From<VegasError> for Failure {
    fn from(e: VegasError) -> Self {
        match e {
            VegasError::InvalidConfig(_)
            | VegasError::InvalidDomain { .. }
            | VegasError::UnknownIntegrand { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Integration(e.to_string()),
        }
    }
}

impl Common {
    fn spec(&self) -> Result<IntegrandSpec, Failure> {
        if self.repeats == 0 {
            return Err(Failure::Usage("--repeats must be at least 1".into()));
        }
        Ok(integrands::build(&self.integrand, self.dim)?)
    }

    fn overrides(&self) -> Overrides {
        Overrides {
            iterations: self.iterations,
            skip: self.skip,
            alpha: self.alpha,
            beta: self.beta,
            n_intervals: self.n_intervals,
            n_strat: self.n_strat,
            batch_size: self.batch_size,
            ..Overrides::default()
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Failure::Integration(format!("writing {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            common,
            n_eval,
            workers,
            seed,
        } => {
            let spec = common.spec()?;
            let mut o = common.overrides();
            o.workers = Some(workers);
            o.seed = Some(seed);
            let cfg = o.resolve(common.config, n_eval, spec.dims());
            cfg.validate()?;
            let rep = bench::run(&spec, common.config, &cfg, common.repeats, common.warmup)?;
            let text = match common.format {
                Format::Text => rep.to_text(),
                Format::Json => rep.to_json() + "\n",
                Format::Csv => bench::rows_to_csv(std::slice::from_ref(&rep.row)),
            };
            common.emit(&text)
        }
        Command::Sweep {
            common,
            n_eval,
            doubling,
            workers,
            seed,
            seeds,
        } => {
            let spec = common.spec()?;
            let n_evals = doubling.map_or(n_eval, |s| s.0);
            if n_evals.is_empty() {
                return Err(Failure::Usage("sweep needs --n-eval or --doubling".into()));
            }
            if seeds == 0 {
                return Err(Failure::Usage("--seeds must be at least 1".into()));
            }
            let plan = SweepPlan {
                named: common.config,
                n_evals,
                workers,
                seeds: (seed..seed + seeds).collect(),
                overrides: common.overrides(),
                repeats: common.repeats,
                warmup: common.warmup,
            };
            for &n in &plan.n_evals {
                for &w in &plan.workers {
                    let mut o = plan.overrides.clone();
                    o.workers = Some(w);
                    o.resolve(plan.named, n, spec.dims()).validate()?;
                }
            }
            let rep = bench::sweep(&spec, &plan)?;
            let text = match common.format {
                Format::Json => rep.to_json() + "\n",
                Format::Csv => rep.to_csv(),
                Format::Text => {
                    let mut t = rep.to_csv();
                    if !rep.scaling.is_empty() {
                        t.push('\n');
                        t.push_str(&rep.scaling_text());
                    }
                    t
                }
            };
            common.emit(&text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Integration(m)) => {
            eprintln!("integration failed: {m}");
            ExitCode::from(1)
        }
    }
}
