//! Benchmark driver: named configurations, repeated runs, sweeps and their
//! JSON/CSV encodings.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::VegasError;
use crate::integrands::IntegrandSpec;
use crate::integrator::{integrate, IntegralOutcome, IntegratorConfig, IterationResult};

/// Version tag written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of every CSV file this module writes.
pub const CSV_HEADER: &str =
    "integrand,config,n_eval,workers,beta,seed,mean,sigma,rel_stderr,wall_ms,fill_fraction";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedConfig {
    Def,
    Vf,
    Tq,
}

impl NamedConfig {
    pub fn name(self) -> &'static str {
        match self {
            NamedConfig::Def => "def",
            NamedConfig::Vf => "vf",
            NamedConfig::Tq => "tq",
        }
    }

    /// Base parameters for an integration of `dims` dimensions at `n_eval`.
    pub fn config(self, n_eval: u64, dims: usize) -> IntegratorConfig {
        let (n_intervals, alpha) = match self {
            NamedConfig::Def => (1024, 0.5),
            NamedConfig::Vf => (50, 1.5),
            NamedConfig::Tq => (tq_intervals(n_eval, dims), 0.5),
        };
        IntegratorConfig {
            max_it: 20,
            skip: 0,
            batch_size: 1_048_576,
            n_intervals,
            alpha,
            beta: 0.75,
            n_eval,
            ..IntegratorConfig::default()
        }
    }
}

impl FromStr for NamedConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "def" => Ok(NamedConfig::Def),
            "vf" => Ok(NamedConfig::Vf),
            "tq" => Ok(NamedConfig::Tq),
            _ => Err(format!("unknown config '{s}' (expected def, vf or tq)")),
        }
    }
}

/// `clamp(floor(10 * n_eval^(1/(2d))), 10, 1024)`.
pub fn tq_intervals(n_eval: u64, dims: usize) -> usize {
    let g = 10.0 * (n_eval as f64).powf(1.0 / (2.0 * dims.max(1) as f64));
    // exact roots such as 1e8^(1/8) come out a few ulps low
    ((g * (1.0 + 1e-12)).floor() as usize).clamp(10, 1024)
}

/// `start, 2 start, 4 start, ...` up to and including `stop`.
pub fn doubling(start: u64, stop: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = start.max(1);
    while n <= stop {
        out.push(n);
        match n.checked_mul(2) {
            Some(m) => n = m,
            None => break,
        }
    }
    out
}

/// Per-run parameter overrides on top of a [`NamedConfig`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub iterations: Option<usize>,
    pub skip: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n_intervals: Option<usize>,
    pub n_strat: Option<usize>,
    pub batch_size: Option<usize>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn resolve(&self, named: NamedConfig, n_eval: u64, dims: usize) -> IntegratorConfig {
        let mut cfg = named.config(n_eval, dims);
        if let Some(v) = self.iterations {
            cfg.max_it = v;
        }
        if let Some(v) = self.skip {
            cfg.skip = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.n_intervals {
            cfg.n_intervals = v;
        }
        if self.n_strat.is_some() {
            cfg.n_strat_override = self.n_strat;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePercent {
    pub init: f64,
    pub map: f64,
    pub fill: f64,
    pub update: f64,
    pub clear: f64,
}

impl PhasePercent {
    pub fn total(&self) -> f64 {
        self.init + self.map + self.fill + self.update + self.clear
    }
}

impl From<[f64; 5]> for PhasePercent {
    fn from(p: [f64; 5]) -> Self {
        PhasePercent {
            init: p[0],
            map: p[1],
            fill: p[2],
            update: p[3],
            clear: p[4],
        }
    }
}

/// One measured configuration; the summary fields are the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub integrand: String,
    pub config: String,
    pub n_eval: u64,
    pub workers: usize,
    pub beta: f64,
    pub seed: u64,
    pub mean: f64,
    pub sigma: f64,
    pub rel_stderr: f64,
    /// Mean over the measured repeats.
    pub wall_ms: f64,
    pub fill_fraction: f64,
}

impl Row {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.integrand,
            self.config,
            self.n_eval,
            self.workers,
            self.beta,
            self.seed,
            self.mean,
            self.sigma,
            self.rel_stderr,
            self.wall_ms,
            self.fill_fraction
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Row, String> {
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 11 {
            return Err(format!("expected 11 fields, got {}", f.len()));
        }
        fn num<T: FromStr>(s: &str, col: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {col}: '{s}'"))
        }
        Ok(Row {
            integrand: f[0].to_string(),
            config: f[1].to_string(),
            n_eval: num(f[2], "n_eval")?,
            workers: num(f[3], "workers")?,
            beta: num(f[4], "beta")?,
            seed: num(f[5], "seed")?,
            mean: num(f[6], "mean")?,
            sigma: num(f[7], "sigma")?,
            rel_stderr: num(f[8], "rel_stderr")?,
            wall_ms: num(f[9], "wall_ms")?,
            fill_fraction: num(f[10], "fill_fraction")?,
        })
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

pub fn rows_from_csv(text: &str) -> Result<Vec<Row>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        other => return Err(format!("unexpected CSV header {other:?}")),
    }
    lines.filter(|l| !l.trim().is_empty()).map(Row::parse_csv_line).collect()
}

/// Full report of a single `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub kind: String,
    #[serde(flatten)]
    pub row: Row,
    pub dims: usize,
    pub chi2_dof: f64,
    pub reference: Option<f64>,
    pub n_intervals: usize,
    pub n_strat: usize,
    pub alpha: f64,
    pub max_it: usize,
    pub skip: usize,
    pub batch_size: usize,
    pub repeats: usize,
    pub warmup: usize,
    pub phase_percent: PhasePercent,
    pub iterations: Vec<IterationResult>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses and checks the schema version and kind.
    pub fn from_json(text: &str) -> Result<RunReport, String> {
        let r: RunReport = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if r.schema != SCHEMA_VERSION || r.kind != "run" {
            return Err(format!("unsupported schema {} / kind {}", r.schema, r.kind));
        }
        Ok(r)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let r = &self.row;
        let _ = writeln!(
            s,
            "{} ({}D, config {}, n_eval {}, workers {}, seed {})",
            r.integrand, self.dims, r.config, r.n_eval, r.workers, r.seed
        );
        let _ = writeln!(
            s,
            "N_g {}  N_st {}  alpha {}  beta {}  iterations {} (skip {})",
            self.n_intervals, self.n_strat, self.alpha, r.beta, self.max_it, self.skip
        );
        let _ = writeln!(s, "{:>4} {:>22} {:>14} {:>12}", "it", "estimate", "sigma", "evals");
        for it in &self.iterations {
            let _ = writeln!(
                s,
                "{:>4} {:>22.15e} {:>14.6e} {:>12}{}",
                it.index,
                it.estimate,
                it.sigma(),
                it.evaluations,
                if it.included { "" } else { "  (skipped)" }
            );
        }
        let _ = writeln!(
            s,
            "result   {:.15e} +- {:.6e}  (rel {:.3e}, chi2/dof {:.3})",
            r.mean, r.sigma, r.rel_stderr, self.chi2_dof
        );
        if let Some(truth) = self.reference {
            let pull = if r.sigma > 0.0 { (r.mean - truth) / r.sigma } else { 0.0 };
            let _ = writeln!(s, "reference {truth:.15e}  pull {pull:+.2}");
        }
        let p = &self.phase_percent;
        let _ = writeln!(
            s,
            "wall {:.3} ms   init {:.1}%  map {:.1}%  fill {:.1}%  update {:.1}%  clear {:.1}%",
            r.wall_ms, p.init, p.map, p.fill, p.update, p.clear
        );
        s
    }
}

/// Runs `warmup` discarded integrations followed by `repeats` measured ones
/// with identical parameters and reports the last outcome with averaged
/// timings.
pub fn run(
    spec: &IntegrandSpec,
    named: NamedConfig,
    cfg: &IntegratorConfig,
    repeats: usize,
    warmup: usize,
) -> Result<RunReport, VegasError> {
    if repeats == 0 {
        return Err(VegasError::InvalidConfig("repeats must be at least 1".into()));
    }
    for _ in 0..warmup {
        integrate(spec.integrand.as_ref(), &spec.bounds, cfg)?;
    }
    let mut wall = 0.0;
    let mut pct = [0.0; 5];
    let mut fill = 0.0;
    let mut last: Option<IntegralOutcome> = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let out = integrate(spec.integrand.as_ref(), &spec.bounds, cfg)?;
        wall += t.elapsed().as_secs_f64() * 1e3;
        for (acc, p) in pct.iter_mut().zip(out.timing.percentages()) {
            *acc += p;
        }
        fill += out.timing.fill_fraction();
        last = Some(out);
    }
    let out = last.expect("repeats >= 1");
    let k = repeats as f64;
    Ok(RunReport {
        schema: SCHEMA_VERSION,
        kind: "run".into(),
        row: Row {
            integrand: spec.name.to_string(),
            config: named.name().to_string(),
            n_eval: cfg.n_eval,
            workers: cfg.workers,
            beta: cfg.beta,
            seed: cfg.seed,
            mean: out.mean,
            sigma: out.sigma,
            rel_stderr: rel_stderr(out.mean, out.sigma),
            wall_ms: wall / k,
            fill_fraction: fill / k,
        },
        dims: spec.dims(),
        chi2_dof: out.chi2_dof,
        reference: spec.reference.as_ref().map(|r| r.value),
        n_intervals: cfg.n_intervals,
        n_strat: out.n_strat,
        alpha: cfg.alpha,
        max_it: cfg.max_it,
        skip: cfg.skip,
        batch_size: cfg.batch_size,
        repeats,
        warmup,
        phase_percent: pct.map(|p| p / k).into(),
        iterations: out.iterations,
    })
}

fn rel_stderr(mean: f64, sigma: f64) -> f64 {
    if mean == 0.0 {
        if sigma == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        sigma / mean.abs()
    }
}

/// Grid of a sweep: every combination of `n_evals x workers x seeds`.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub named: NamedConfig,
    pub n_evals: Vec<u64>,
    pub workers: Vec<usize>,
    pub seeds: Vec<u64>,
    pub overrides: Overrides,
    pub repeats: usize,
    pub warmup: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_eval: u64,
    pub workers: usize,
    pub wall_ms: f64,
    pub speedup: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: u32,
    pub kind: String,
    pub rows: Vec<Row>,
    pub scaling: Vec<ScalingRow>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<SweepReport, String> {
        let r: SweepReport = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if r.schema != SCHEMA_VERSION || r.kind != "sweep" {
            return Err(format!("unsupported schema {} / kind {}", r.schema, r.kind));
        }
        Ok(r)
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn scaling_text(&self) -> String {
        let mut s = String::from("n_eval,workers,wall_ms,speedup,efficiency\n");
        for r in &self.scaling {
            let _ = writeln!(
                s,
                "{},{},{:.3},{:.2}x,{:.2}",
                r.n_eval, r.workers, r.wall_ms, r.speedup, r.efficiency
            );
        }
        s
    }
}

pub fn sweep(spec: &IntegrandSpec, plan: &SweepPlan) -> Result<SweepReport, VegasError> {
    if plan.n_evals.is_empty() || plan.workers.is_empty() || plan.seeds.is_empty() {
        return Err(VegasError::InvalidConfig("sweep needs at least one point".into()));
    }
    let mut rows = Vec::new();
    for &n_eval in &plan.n_evals {
        for &workers in &plan.workers {
            for &seed in &plan.seeds {
                let mut o = plan.overrides.clone();
                o.workers = Some(workers);
                o.seed = Some(seed);
                let cfg = o.resolve(plan.named, n_eval, spec.dims());
                rows.push(run(spec, plan.named, &cfg, plan.repeats, plan.warmup)?.row);
            }
        }
    }
    let scaling = if plan.workers.len() > 1 {
        scaling_table(&rows)
    } else {
        Vec::new()
    };
    Ok(SweepReport {
        schema: SCHEMA_VERSION,
        kind: "sweep".into(),
        rows,
        scaling,
    })
}

/// Speedup and efficiency per `(n_eval, workers)` relative to the smallest
/// worker count at the same `n_eval`, wall times averaged over seeds.
pub fn scaling_table(rows: &[Row]) -> Vec<ScalingRow> {
    let mut keys: Vec<(u64, usize)> = rows.iter().map(|r| (r.n_eval, r.workers)).collect();
    keys.sort_unstable();
    keys.dedup();
    let avg = |n: u64, w: usize| {
        let sel: Vec<f64> = rows
            .iter()
            .filter(|r| r.n_eval == n && r.workers == w)
            .map(|r| r.wall_ms)
            .collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    };
    let mut out = Vec::new();
    for &(n, w) in &keys {
        let base_w = keys.iter().find(|k| k.0 == n).expect("present").1;
        let base = avg(n, base_w);
        let t = avg(n, w);
        let speedup = base / t;
        out.push(ScalingRow {
            n_eval: n,
            workers: w,
            wall_ms: t,
            speedup,
            efficiency: speedup * base_w as f64 / w as f64,
        });
    }
    out
}
