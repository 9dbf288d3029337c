//! Parallel fill: even partitioning of runs over workers, private
//! accumulators per worker, and a fixed-shape pairwise merge.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::VegasError;
use crate::integrand::Integrand;
use crate::map::{MapWeights, VegasMap};
use crate::rng::{RunSampler, RunStreams};
use crate::strat::{cube_digits, CubeAccumulators, RunPlan, StratGrid};

/// Runs evaluated per integrand batch call.
pub const CHUNK_RUNS: usize = 256;

/// Largest y strictly below 1.
const Y_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Splits `[0, total)` into `k` contiguous ranges whose sizes differ by at
/// most one; the larger ranges come first.
pub fn partition_runs(total: u64, k: usize) -> Vec<Range<u64>> {
    let k = k.max(1) as u64;
    let base = total / k;
    let extra = total % k;
    let mut start = 0;
    (0..k)
        .map(|w| {
            let len = base + u64::from(w < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Map and cube accumulators produced by one fill.
#[derive(Debug, Clone, PartialEq)]
pub struct FillBuffers {
    pub map: MapWeights,
    pub cubes: CubeAccumulators,
}

impl FillBuffers {
    pub fn new(dims: usize, n_intervals: usize, n_cubes: usize) -> Self {
        FillBuffers {
            map: MapWeights::new(dims, n_intervals),
            cubes: CubeAccumulators::new(n_cubes),
        }
    }
}

/// Elementwise merge of two equally shaped buffers.
pub trait Accumulate: Sized {
    fn merge_from(&mut self, other: &Self) -> Result<(), VegasError>;
}

impl Accumulate for FillBuffers {
    fn merge_from(&mut self, other: &Self) -> Result<(), VegasError> {
        self.map.merge_from(&other.map)?;
        self.cubes.merge_from(&other.cubes)
    }
}

impl Accumulate for Vec<f64> {
    fn merge_from(&mut self, other: &Self) -> Result<(), VegasError> {
        if self.len() != other.len() {
            return Err(VegasError::ShapeMismatch);
        }
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
        Ok(())
    }
}

/// Number of pairwise levels `tree_reduce` uses for `n` buffers.
pub fn tree_levels(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Merges buffers level by level: `(0,1) (2,3) ...`, an odd last buffer
/// passes through unchanged. The order is fixed, so the result does not
/// depend on when the workers finished.
pub fn tree_reduce<T: Accumulate>(mut buffers: Vec<T>) -> Result<T, VegasError> {
    if buffers.is_empty() {
        return Err(VegasError::ShapeMismatch);
    }
    while buffers.len() > 1 {
        let mut next = Vec::with_capacity(buffers.len().div_ceil(2));
        let mut it = buffers.into_iter();
        while let Some(mut left) = it.next() {
            if let Some(right) = it.next() {
                left.merge_from(&right)?;
            }
            next.push(left);
        }
        buffers = next;
    }
    Ok(buffers.pop().expect("one buffer left"))
}

/// Read-only inputs of a fill.
pub struct FillContext<'a> {
    pub plan: &'a RunPlan,
    pub map: &'a VegasMap,
    pub grid: &'a StratGrid,
    pub streams: RunStreams,
}

/// A worker's slice of the plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerShard {
    pub worker: usize,
    pub runs: Range<u64>,
}

pub fn shards(total: u64, workers: usize) -> Vec<WorkerShard> {
    partition_runs(total, workers)
        .into_iter()
        .enumerate()
        .map(|(worker, runs)| WorkerShard { worker, runs })
        .collect()
}

/// Sequential fill of one run range into `out`.
pub fn fill_range<F: Integrand + ?Sized>(
    ctx: &FillContext<'_>,
    f: &F,
    runs: Range<u64>,
    out: &mut FillBuffers,
    abort: &AtomicBool,
) -> Result<(), VegasError> {
    if runs.is_empty() {
        return Ok(());
    }
    let d = ctx.map.dims();
    let n_strat = ctx.grid.n_strat();
    let inv_strat = 1.0 / n_strat as f64;
    let offsets = ctx.plan.offsets();
    let mut sampler = RunSampler::new(ctx.streams);

    let mut cube = ctx.plan.run_to_cube(runs.start)?;
    let mut digits = vec![0usize; d];
    cube_digits(cube, n_strat, &mut digits);

    let mut u = vec![0.0; d];
    let mut xs = vec![0.0; CHUNK_RUNS * d];
    let mut ids = vec![0u32; CHUNK_RUNS * d];
    let mut jacs = vec![0.0; CHUNK_RUNS];
    let mut cubes = vec![0usize; CHUNK_RUNS];
    let mut vals = vec![0.0; CHUNK_RUNS];
    let mut y = vec![0.0; d];

    let mut run = runs.start;
    while run < runs.end {
        if abort.load(Ordering::Relaxed) {
            return Err(VegasError::Cancelled);
        }
        let len = ((runs.end - run) as usize).min(CHUNK_RUNS);
        for k in 0..len {
            let r = run + k as u64;
            while r >= offsets[cube + 1] {
                cube += 1;
                cube_digits(cube, n_strat, &mut digits);
            }
            sampler.draw(r, &mut u);
            for j in 0..d {
                y[j] = ((digits[j] as f64 + u[j]) * inv_strat).min(Y_MAX);
            }
            jacs[k] = ctx.map.transform_unchecked(
                &y,
                &mut xs[k * d..(k + 1) * d],
                &mut ids[k * d..(k + 1) * d],
            );
            cubes[k] = cube;
        }

        let points = &xs[..len * d];
        if let Err(message) = f.eval_batch(points, &mut vals[..len]) {
            return Err(VegasError::IntegrandFailed {
                point: points[..d].to_vec(),
                message,
            });
        }

        for k in 0..len {
            let v = vals[k];
            if !v.is_finite() {
                return Err(VegasError::NonFiniteIntegrand {
                    point: xs[k * d..(k + 1) * d].to_vec(),
                    value: v,
                });
            }
            let jf = jacs[k] * v;
            out.cubes.add(cubes[k], jf);
            out.map.accumulate(&ids[k * d..(k + 1) * d], jf);
        }
        run += len as u64;
    }
    Ok(())
}

/// Fills every planned run on `workers` threads.
///
/// Each worker owns a private [`FillBuffers`]; they are combined with
/// [`tree_reduce`]. Sample values depend only on the run index, so changing
/// `workers` only reorders floating-point sums. The first failing worker (in
/// shard order) determines the reported error; the others are cancelled.
pub fn parallel_fill<F: Integrand + ?Sized>(
    ctx: &FillContext<'_>,
    f: &F,
    workers: usize,
) -> Result<FillBuffers, VegasError> {
    let dims = ctx.map.dims();
    let n_intervals = ctx.map.n_intervals();
    let n_cubes = ctx.grid.n_cubes();
    if ctx.plan.n_cubes() != n_cubes {
        return Err(VegasError::ShapeMismatch);
    }
    let abort = AtomicBool::new(false);
    let shards = shards(ctx.plan.total_runs(), workers.max(1));

    let run_shard = |shard: &WorkerShard| {
        let mut buf = FillBuffers::new(dims, n_intervals, n_cubes);
        let res = fill_range(ctx, f, shard.runs.clone(), &mut buf, &abort);
        if res.is_err() {
            abort.store(true, Ordering::Relaxed);
        }
        res.map(|_| buf)
    };

    let results: Vec<Result<FillBuffers, VegasError>> = if shards.len() == 1 {
        vec![run_shard(&shards[0])]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = shards[1..]
                .iter()
                .map(|s| scope.spawn(|| run_shard(s)))
                .collect();
            let mut out = vec![run_shard(&shards[0])];
            out.extend(
                handles
                    .into_iter()
                    .map(|h| h.join().expect("fill worker panicked")),
            );
            out
        })
    };

    let mut buffers = Vec::with_capacity(results.len());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(b) => buffers.push(b),
            Err(VegasError::Cancelled) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    tree_reduce(buffers)
}
