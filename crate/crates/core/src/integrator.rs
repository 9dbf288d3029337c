//! The VEGAS+ iteration loop and the combination of iteration results.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::VegasError;
use crate::executor::{parallel_fill, FillContext};
use crate::integrand::Integrand;
use crate::map::VegasMap;
use crate::rng::{RunStreams, MAX_BATCH_SIZE};
use crate::strat::{compute_n_strat, compute_results, RunPlan, StratGrid, DEFAULT_CUBE_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub max_it: usize,
    /// Iterations `1..=skip` adapt the map but are left out of the result.
    pub skip: usize,
    pub batch_size: usize,
    pub n_intervals: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub workers: usize,
    pub cube_cap: usize,
    pub n_eval: u64,
    pub n_strat_override: Option<usize>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            max_it: 20,
            skip: 0,
            batch_size: 1 << 20,
            n_intervals: 1024,
            alpha: 0.5,
            beta: 0.75,
            seed: 0,
            workers: 1,
            cube_cap: DEFAULT_CUBE_CAP,
            n_eval: 1_000_000,
            n_strat_override: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), VegasError> {
        let bad = |m: String| Err(VegasError::InvalidConfig(m));
        if self.max_it <= self.skip {
            return bad(format!(
                "max_it ({}) must exceed skip ({})",
                self.max_it, self.skip
            ));
        }
        if self.batch_size == 0 || self.batch_size as u64 > MAX_BATCH_SIZE {
            return bad(format!("batch_size must be in 1..=2^32, got {}", self.batch_size));
        }
        if self.max_it > u32::MAX as usize {
            return bad("max_it must fit in 32 bits".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.n_eval < 4 {
            return bad(format!("n_eval must be at least 4, got {}", self.n_eval));
        }
        if self.n_intervals < 2 {
            return bad("n_intervals must be at least 2".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        if self.cube_cap == 0 {
            return bad("cube_cap must be at least 1".into());
        }
        if self.n_strat_override == Some(0) {
            return bad("n_strat must be at least 1".into());
        }
        Ok(())
    }

    pub fn n_strat(&self, dims: usize) -> usize {
        self.n_strat_override
            .unwrap_or_else(|| compute_n_strat(self.n_eval, dims, self.cube_cap))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    /// 1-based.
    pub index: usize,
    pub estimate: f64,
    pub variance: f64,
    pub included: bool,
    /// Evaluations actually performed (`sum n_h`).
    pub evaluations: u64,
}

impl IterationResult {
    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Wall time per phase of [`integrate`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimes {
    /// Validation, allocation, initial map and grid.
    pub init: Duration,
    /// Building the run plan.
    pub map: Duration,
    /// Sampling, evaluation and accumulation, including the merge.
    pub fill: Duration,
    /// Allocation, map refinement, results and combination.
    pub update: Duration,
    /// Releasing state.
    pub clear: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.init + self.map + self.fill + self.update + self.clear
    }

    /// `[init, map, fill, update, clear]` as percentages of the total.
    pub fn percentages(&self) -> [f64; 5] {
        let t = self.total().as_secs_f64();
        let parts = [self.init, self.map, self.fill, self.update, self.clear];
        if t == 0.0 {
            return [0.0; 5];
        }
        parts.map(|p| 100.0 * p.as_secs_f64() / t)
    }

    pub fn fill_fraction(&self) -> f64 {
        let t = self.total().as_secs_f64();
        if t == 0.0 {
            0.0
        } else {
            self.fill.as_secs_f64() / t
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegralOutcome {
    pub mean: f64,
    pub sigma: f64,
    pub chi2_dof: f64,
    pub iterations: Vec<IterationResult>,
    pub n_strat: usize,
    pub timing: PhaseTimes,
}

/// Same numbers, timing ignored.
impl PartialEq for IntegralOutcome {
    fn eq(&self, other: &Self) -> bool {
        self.mean.to_bits() == other.mean.to_bits()
            && self.sigma.to_bits() == other.sigma.to_bits()
            && self.chi2_dof.to_bits() == other.chi2_dof.to_bits()
            && self.n_strat == other.n_strat
            && self.iterations.len() == other.iterations.len()
            && self.iterations.iter().zip(&other.iterations).all(|(a, b)| {
                a.index == b.index
                    && a.included == b.included
                    && a.evaluations == b.evaluations
                    && a.estimate.to_bits() == b.estimate.to_bits()
                    && a.variance.to_bits() == b.variance.to_bits()
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combined {
    pub mean: f64,
    pub variance: f64,
    pub chi2_dof: f64,
}

/// Inverse-variance weighted mean of the included iterations.
///
/// Zero-variance iterations are exact: if present they are the answer
/// (all of them must agree), with variance 0.
pub fn combine_iterations(results: &[IterationResult]) -> Result<Combined, VegasError> {
    let included: Vec<&IterationResult> = results.iter().filter(|r| r.included).collect();
    if included.is_empty() {
        return Err(VegasError::NoIncludedIterations);
    }

    let mut exact: Option<f64> = None;
    for r in included.iter().filter(|r| r.variance == 0.0) {
        match exact {
            None => exact = Some(r.estimate),
            Some(e) => {
                let scale = e.abs().max(r.estimate.abs()).max(f64::MIN_POSITIVE);
                if (e - r.estimate).abs() > 1e-12 * scale {
                    return Err(VegasError::ConflictingExactEstimates {
                        first: e,
                        second: r.estimate,
                    });
                }
            }
        }
    }
    if let Some(mean) = exact {
        return Ok(Combined {
            mean,
            variance: 0.0,
            chi2_dof: 0.0,
        });
    }

    let mut wsum = 0.0;
    let mut wisum = 0.0;
    for r in &included {
        let w = 1.0 / r.variance;
        wsum += w;
        wisum += w * r.estimate;
    }
    let mean = wisum / wsum;
    let chi2: f64 = included
        .iter()
        .map(|r| (r.estimate - mean).powi(2) / r.variance)
        .sum();
    let dof = (included.len().max(2) - 1) as f64;
    // 1/(1/v) can round one ulp above v
    let min_var = included.iter().map(|r| r.variance).fold(f64::INFINITY, f64::min);
    Ok(Combined {
        mean,
        variance: (1.0 / wsum).min(min_var),
        chi2_dof: chi2 / dof,
    })
}

/// Integrates `f` over the box `domain`.
pub fn integrate<F: Integrand + ?Sized>(
    f: &F,
    domain: &[(f64, f64)],
    cfg: &IntegratorConfig,
) -> Result<IntegralOutcome, VegasError> {
    let mut timing = PhaseTimes::default();
    let t = Instant::now();

    cfg.validate()?;
    let dims = domain.len();
    if f.dims() != dims {
        return Err(VegasError::DimensionMismatch {
            expected: f.dims(),
            got: dims,
        });
    }
    let mut map = VegasMap::new_uniform(dims, cfg.n_intervals, domain)?;
    let n_strat = cfg.n_strat(dims);
    let mut grid = StratGrid::new(dims, n_strat, cfg.n_eval, cfg.cube_cap)?;
    let streams = RunStreams::new(cfg.seed, cfg.batch_size, dims);
    let mut iterations = Vec::with_capacity(cfg.max_it);
    timing.init += t.elapsed();

    for index in 1..=cfg.max_it {
        let t = Instant::now();
        let plan = RunPlan::build(&grid.n_h);
        timing.map += t.elapsed();

        let t = Instant::now();
        let ctx = FillContext {
            plan: &plan,
            map: &map,
            grid: &grid,
            streams: streams.for_iteration(index as u32),
        };
        let filled = parallel_fill(&ctx, f, cfg.workers)?;
        timing.fill += t.elapsed();

        let t = Instant::now();
        let est = compute_results(&filled.cubes)?;
        grid.reallocate(&est.d_h, cfg.beta, cfg.n_eval);
        let damped = filled.map.smooth_and_damp(cfg.alpha);
        map.update_grid(&damped)?;
        iterations.push(IterationResult {
            index,
            estimate: est.estimate,
            variance: est.variance,
            included: index > cfg.skip,
            evaluations: plan.total_runs(),
        });
        let t_update = t.elapsed();
        timing.update += t_update;

        let t = Instant::now();
        drop(filled);
        drop(est);
        drop(plan);
        timing.clear += t.elapsed();
    }

    let t = Instant::now();
    let combined = combine_iterations(&iterations)?;
    timing.update += t.elapsed();

    let t = Instant::now();
    drop(map);
    drop(grid);
    timing.clear += t.elapsed();

    Ok(IntegralOutcome {
        mean: combined.mean,
        sigma: combined.variance.sqrt(),
        chi2_dof: combined.chi2_dof,
        iterations,
        n_strat,
        timing,
    })
}
