//! Adaptive stratification of y-space.
//!
//! The unit cube is split into `n_strat^dims` equal hypercubes. Each gets a
//! planned number of evaluations `n_h`; after a fill the per-cube spread of
//! `J f` decides the next allocation.

use crate::error::VegasError;

/// Default upper bound on the number of hypercubes.
pub const DEFAULT_CUBE_CAP: usize = 1 << 20;

/// Smallest allocation per cube; a sample variance needs two points.
pub const MIN_EVALS_PER_CUBE: u64 = 2;

/// Largest `n` with `n^dims <= limit`, at least 1.
fn integer_root(limit: u64, dims: u32) -> u64 {
    let fits = |n: u64| n.checked_pow(dims).is_some_and(|p| p <= limit);
    let mut n = (limit as f64).powf(1.0 / f64::from(dims)).floor().max(1.0) as u64;
    while n > 1 && !fits(n) {
        n -= 1;
    }
    while fits(n + 1) {
        n += 1;
    }
    n
}

/// Strata per axis for a budget of `n_eval` evaluations.
///
/// `floor((n_eval / 2)^(1/dims))`, lowered until the cube count fits both
/// `cube_cap` and `n_eval / 2`.
pub fn compute_n_strat(n_eval: u64, dims: usize, cube_cap: usize) -> usize {
    let dims = dims.max(1) as u32;
    let half = (n_eval / 2).max(1);
    let limit = half.min(cube_cap.max(1) as u64);
    integer_root(limit, dims) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratGrid {
    dims: usize,
    n_strat: usize,
    n_cubes: usize,
    /// Planned evaluations per cube.
    pub n_h: Vec<u64>,
}

impl StratGrid {
    /// Grid with a uniform allocation of `n_eval`.
    pub fn new(dims: usize, n_strat: usize, n_eval: u64, cube_cap: usize) -> Result<Self, VegasError> {
        if dims == 0 || n_strat == 0 {
            return Err(VegasError::InvalidConfig(
                "dims and n_strat must be positive".into(),
            ));
        }
        let n_cubes = (n_strat as u64)
            .checked_pow(dims as u32)
            .filter(|&c| c <= cube_cap as u64)
            .ok_or_else(|| {
                VegasError::InvalidConfig(format!(
                    "{n_strat}^{dims} hypercubes exceed the cap of {cube_cap}"
                ))
            })? as usize;
        let n_h = update_evals_per_cube(&vec![0.0; n_cubes], 0.0, n_eval);
        Ok(StratGrid {
            dims,
            n_strat,
            n_cubes,
            n_h,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_strat(&self) -> usize {
        self.n_strat
    }

    pub fn n_cubes(&self) -> usize {
        self.n_cubes
    }

    /// Volume of one cube in y-space.
    pub fn cube_volume(&self) -> f64 {
        1.0 / self.n_cubes as f64
    }

    pub fn total_evals(&self) -> u64 {
        self.n_h.iter().sum()
    }

    pub fn reallocate(&mut self, d_h: &[f64], beta: f64, n_eval: u64) {
        self.n_h = update_evals_per_cube(d_h, beta, n_eval);
    }
}

/// Allocation `n_h` proportional to `d_h^beta`, at least two per cube.
///
/// The floors of `n_eval * p_h` are topped up by largest remainder so that
/// they sum to `n_eval` before the per-cube minimum is applied. Zero total
/// weight, or `beta == 0`, gives the uniform allocation.
pub fn update_evals_per_cube(d_h: &[f64], beta: f64, n_eval: u64) -> Vec<u64> {
    let n = d_h.len();
    if n == 0 {
        return Vec::new();
    }
    if beta == 0.0 {
        return uniform_allocation(n, n_eval);
    }
    let powered: Vec<f64> = d_h
        .iter()
        .map(|&d| if d > 0.0 { d.powf(beta) } else { 0.0 })
        .collect();
    let total: f64 = powered.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return uniform_allocation(n, n_eval);
    }

    let budget = n_eval as f64;
    let mut floors = Vec::with_capacity(n);
    let mut fracs = Vec::with_capacity(n);
    for &p in &powered {
        let share = budget * (p / total);
        let nearest = share.round();
        // snap values within rounding noise of an integer
        let share = if (share - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            share
        };
        let fl = share.floor();
        floors.push(fl as u64);
        fracs.push(share - fl);
    }

    let assigned: u64 = floors.iter().sum();
    let mut missing = n_eval.saturating_sub(assigned);
    let whole = missing / n as u64;
    if whole > 0 {
        for v in &mut floors {
            *v += whole;
        }
        missing -= whole * n as u64;
    }
    if missing > 0 {
        // the `missing` largest remainders, ties to the lower index
        let k = missing as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.select_nth_unstable_by(k - 1, |&a, &b| fracs[b].total_cmp(&fracs[a]).then(a.cmp(&b)));
        for &h in &order[..k] {
            floors[h] += 1;
        }
    }
    for v in &mut floors {
        *v = (*v).max(MIN_EVALS_PER_CUBE);
    }
    floors
}

/// `n_eval / n` each, the remainder to the lowest indices.
fn uniform_allocation(n: usize, n_eval: u64) -> Vec<u64> {
    let base = n_eval / n as u64;
    let extra = (n_eval % n as u64) as usize;
    (0..n)
        .map(|h| (base + u64::from(h < extra)).max(MIN_EVALS_PER_CUBE))
        .collect()
}

/// Exclusive prefix sum over `n_h`: run `r` belongs to cube `h` iff
/// `offsets[h] <= r < offsets[h + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPlan {
    offsets: Vec<u64>,
}

impl RunPlan {
    pub fn build(n_h: &[u64]) -> Self {
        let mut offsets = Vec::with_capacity(n_h.len() + 1);
        let mut acc = 0u64;
        offsets.push(0);
        for &c in n_h {
            acc += c;
            offsets.push(acc);
        }
        RunPlan { offsets }
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn n_cubes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_runs(&self) -> u64 {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn run_to_cube(&self, run: u64) -> Result<usize, VegasError> {
        if run >= self.total_runs() {
            return Err(VegasError::RunOutOfRange {
                run,
                total: self.total_runs(),
            });
        }
        Ok(self.offsets.partition_point(|&o| o <= run) - 1)
    }
}

/// Mixed-radix digits of cube `h` in base `n_strat`, axis 0 least significant.
pub fn cube_digits(mut h: usize, n_strat: usize, digits: &mut [usize]) {
    for d in digits.iter_mut() {
        *d = h % n_strat;
        h /= n_strat;
    }
}

/// Lower corner of cube `h` in y-space.
pub fn cube_origin(h: usize, n_strat: usize, dims: usize) -> Vec<f64> {
    let mut digits = vec![0; dims];
    cube_digits(h, n_strat, &mut digits);
    digits.iter().map(|&k| k as f64 / n_strat as f64).collect()
}

/// Per-cube sums of `J f`, `(J f)^2` and sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeAccumulators {
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub count: Vec<u64>,
}

impl CubeAccumulators {
    pub fn new(n_cubes: usize) -> Self {
        CubeAccumulators {
            s1: vec![0.0; n_cubes],
            s2: vec![0.0; n_cubes],
            count: vec![0; n_cubes],
        }
    }

    pub fn len(&self) -> usize {
        self.count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count.is_empty()
    }

    #[inline]
    pub fn add(&mut self, cube: usize, jf: f64) {
        self.s1[cube] += jf;
        self.s2[cube] += jf * jf;
        self.count[cube] += 1;
    }

    pub(crate) fn merge_from(&mut self, other: &CubeAccumulators) -> Result<(), VegasError> {
        if self.len() != other.len() {
            return Err(VegasError::ShapeMismatch);
        }
        for (a, b) in self.s1.iter_mut().zip(&other.s1) {
            *a += b;
        }
        for (a, b) in self.s2.iter_mut().zip(&other.s2) {
            *a += b;
        }
        for (a, b) in self.count.iter_mut().zip(&other.count) {
            *a += b;
        }
        Ok(())
    }
}

/// Estimate, variance and per-cube allocation statistic of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationEstimate {
    pub estimate: f64,
    pub variance: f64,
    /// `sigma_h(J f) * V_h`, the input to the next allocation.
    pub d_h: Vec<f64>,
}

/// Sums the cube contributions. Every cube has volume `1 / n_cubes`.
pub fn compute_results(acc: &CubeAccumulators) -> Result<IterationEstimate, VegasError> {
    let n_cubes = acc.len();
    let volume = 1.0 / n_cubes as f64;
    let mut mean_sum = 0.0;
    let mut var_sum = 0.0;
    let mut d_h = Vec::with_capacity(n_cubes);
    for h in 0..n_cubes {
        let count = acc.count[h];
        if count < MIN_EVALS_PER_CUBE {
            return Err(VegasError::UndersampledCube { cube: h, count });
        }
        let c = count as f64;
        let mean = acc.s1[h] / c;
        let raw_var = (acc.s2[h] / c - mean * mean).max(0.0);
        mean_sum += mean;
        var_sum += raw_var / c;
        d_h.push(raw_var.sqrt() * volume);
    }
    let cubes = n_cubes as f64;
    Ok(IterationEstimate {
        estimate: mean_sum / cubes,
        variance: var_sum / (cubes * cubes),
        d_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_strat_examples() {
        assert_eq!(compute_n_strat(2, 10, DEFAULT_CUBE_CAP), 1);
        assert_eq!(compute_n_strat(20_000, 2, DEFAULT_CUBE_CAP), 100);
        // 8^(1/3) must not round down to 1
        assert_eq!(compute_n_strat(16, 3, DEFAULT_CUBE_CAP), 2);
        assert_eq!(compute_n_strat(100_000_000, 10, DEFAULT_CUBE_CAP), 4);
        assert_eq!(compute_n_strat(1_000_000, 10, DEFAULT_CUBE_CAP), 3);
        assert_eq!(compute_n_strat(1_000_000, 4, DEFAULT_CUBE_CAP), 26);
        assert_eq!(compute_n_strat(10_000, 2, 49), 7);
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(update_evals_per_cube(&[1.0, 3.0], 1.0, 8), vec![2, 6]);
        assert_eq!(update_evals_per_cube(&[5.0, 1.0, 2.0, 9.0], 0.0, 40), vec![10; 4]);
        assert_eq!(update_evals_per_cube(&[0.3; 5], 0.75, 50), vec![10; 5]);
        assert_eq!(update_evals_per_cube(&[0.0; 3], 0.75, 10), vec![4, 3, 3]);
        // clamped to the minimum
        assert_eq!(update_evals_per_cube(&[1.0, 1000.0], 1.0, 10), vec![2, 10]);
    }

    #[test]
    fn plan_offsets_and_lookup() {
        let plan = RunPlan::build(&[2, 3, 2]);
        assert_eq!(plan.offsets(), &[0, 2, 5, 7]);
        assert_eq!(plan.run_to_cube(4).unwrap(), 1);
        assert_eq!(plan.run_to_cube(2).unwrap(), 1);
        assert_eq!(plan.run_to_cube(0).unwrap(), 0);
        assert_eq!(plan.run_to_cube(6).unwrap(), 2);
        assert!(plan.run_to_cube(7).is_err());

        assert_eq!(RunPlan::build(&[2; 4]).offsets(), &[0, 2, 4, 6, 8]);
        let single = RunPlan::build(&[10]);
        assert!((0..10).all(|r| single.run_to_cube(r).unwrap() == 0));
    }

    #[test]
    fn origins() {
        assert_eq!(cube_origin(0, 1, 3), vec![0.0; 3]);
        assert_eq!(cube_origin(3, 2, 2), vec![0.5, 0.5]);
        assert_eq!(cube_origin(1, 2, 2), vec![0.5, 0.0]);
        assert_eq!(cube_origin(5, 3, 2), vec![2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn results_examples() {
        let mut acc = CubeAccumulators::new(4);
        for h in 0..4 {
            for _ in 0..3 {
                acc.add(h, 2.5);
            }
        }
        let r = compute_results(&acc).unwrap();
        assert_eq!(r.estimate, 2.5);
        assert_eq!(r.variance, 0.0);

        let mut acc = CubeAccumulators::new(1);
        acc.add(0, 0.0);
        acc.add(0, 2.0);
        let r = compute_results(&acc).unwrap();
        assert_eq!((r.estimate, r.variance, r.d_h[0]), (1.0, 0.5, 1.0));
    }

    #[test]
    fn undersampled_cube_is_an_error() {
        let mut acc = CubeAccumulators::new(2);
        acc.add(0, 1.0);
        acc.add(0, 1.0);
        acc.add(1, 1.0);
        assert!(matches!(
            compute_results(&acc),
            Err(VegasError::UndersampledCube { cube: 1, count: 1 })
        ));
    }

    #[test]
    fn brute_force_one_dimension_two_strata() {
        // samples (cube, jf)
        let samples = [(0usize, 0.3), (0, 0.9), (1, 1.7), (1, 0.2)];
        let mut acc = CubeAccumulators::new(2);
        for &(h, jf) in &samples {
            acc.add(h, jf);
        }
        let r = compute_results(&acc).unwrap();

        let vh = 0.5;
        let mut integral = 0.0;
        let mut variance = 0.0;
        for h in 0..2 {
            let vals: Vec<f64> = samples.iter().filter(|s| s.0 == h).map(|s| s.1).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let sq = vals.iter().map(|v| v * v).sum::<f64>() / n;
            integral += vh * mean;
            variance += vh * vh * (sq - mean * mean) / n;
        }
        assert_eq!(r.estimate, integral);
        assert_eq!(r.variance, variance);
    }

    #[test]
    fn new_grid_respects_cap() {
        assert!(StratGrid::new(10, 5, 1 << 24, DEFAULT_CUBE_CAP).is_err());
        let g = StratGrid::new(2, 4, 100, DEFAULT_CUBE_CAP).unwrap();
        assert_eq!(g.n_cubes(), 16);
        assert!(g.n_h.iter().all(|&n| n >= 6));
        assert_eq!(g.total_evals(), 100);
    }
}
