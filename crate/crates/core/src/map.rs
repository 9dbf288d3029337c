//! The per-axis VEGAS importance-sampling map.
//!
//! Each axis of the unit y-cube is cut into `n_intervals` equal pieces, and
//! piece `i` is stretched linearly onto `[edges[i], edges[i + 1]]` of the
//! integration domain. Refinement moves the edges so that every interval
//! carries an equal share of the (smoothed, damped) weight `(J f)^2`.

use crate::error::VegasError;

/// Damped weights below this are treated as zero before taking the log.
const DAMP_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct VegasMap {
    dims: usize,
    n_intervals: usize,
    /// `dims * (n_intervals + 1)` edges, one row per axis.
    edges: Vec<f64>,
}

impl VegasMap {
    /// Uniform map over the box `bounds`.
    pub fn new_uniform(
        dims: usize,
        n_intervals: usize,
        bounds: &[(f64, f64)],
    ) -> Result<Self, VegasError> {
        if dims == 0 {
            return Err(VegasError::InvalidConfig("dims must be at least 1".into()));
        }
        if n_intervals < 2 {
            return Err(VegasError::InvalidConfig(format!(
                "n_intervals must be at least 2, got {n_intervals}"
            )));
        }
        if bounds.len() != dims {
            return Err(VegasError::DimensionMismatch {
                expected: dims,
                got: bounds.len(),
            });
        }
        let mut edges = Vec::with_capacity(dims * (n_intervals + 1));
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(VegasError::InvalidDomain { axis, lo, hi });
            }
            let width = hi - lo;
            edges.extend((0..=n_intervals).map(|i| {
                if i == n_intervals {
                    hi
                } else {
                    lo + width * i as f64 / n_intervals as f64
                }
            }));
        }
        Ok(VegasMap {
            dims,
            n_intervals,
            edges,
        })
    }

    /// Builds a map from explicit edges, one `n_intervals + 1` row per axis.
    pub fn from_edges(rows: &[Vec<f64>]) -> Result<Self, VegasError> {
        let dims = rows.len();
        if dims == 0 {
            return Err(VegasError::InvalidConfig("dims must be at least 1".into()));
        }
        let n_intervals = rows[0].len().saturating_sub(1);
        if n_intervals < 2 {
            return Err(VegasError::InvalidConfig(
                "each axis needs at least 3 edges".into(),
            ));
        }
        let mut edges = Vec::with_capacity(dims * (n_intervals + 1));
        for (axis, row) in rows.iter().enumerate() {
            if row.len() != n_intervals + 1 {
                return Err(VegasError::DimensionMismatch {
                    expected: n_intervals + 1,
                    got: row.len(),
                });
            }
            let ok = row.iter().all(|e| e.is_finite()) && row.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(VegasError::InvalidDomain {
                    axis,
                    lo: row[0],
                    hi: row[n_intervals],
                });
            }
            edges.extend_from_slice(row);
        }
        Ok(VegasMap {
            dims,
            n_intervals,
            edges,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn edges(&self, axis: usize) -> &[f64] {
        let n = self.n_intervals + 1;
        &self.edges[axis * n..(axis + 1) * n]
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dims)
            .map(|j| {
                let e = self.edges(j);
                (e[0], e[self.n_intervals])
            })
            .collect()
    }

    /// Maps `y` in `[0,1)^d` to the domain, writing `x` and the interval index
    /// per axis, and returns the Jacobian.
    pub fn transform(&self, y: &[f64], x: &mut [f64], idx: &mut [u32]) -> Result<f64, VegasError> {
        if y.len() != self.dims || x.len() != self.dims || idx.len() != self.dims {
            return Err(VegasError::DimensionMismatch {
                expected: self.dims,
                got: y.len(),
            });
        }
        for (axis, &v) in y.iter().enumerate() {
            if !(0.0..1.0).contains(&v) {
                return Err(VegasError::PointOutOfRange { axis, value: v });
            }
        }
        Ok(self.transform_unchecked(y, x, idx))
    }

    /// As [`transform`](Self::transform) without argument checks.
    #[inline]
    pub fn transform_unchecked(&self, y: &[f64], x: &mut [f64], idx: &mut [u32]) -> f64 {
        let n = self.n_intervals;
        let ng = n as f64;
        let mut jac = 1.0;
        for axis in 0..self.dims {
            let scaled = y[axis] * ng;
            let i = (scaled as usize).min(n - 1);
            let frac = scaled - i as f64;
            let row = &self.edges[axis * (n + 1)..];
            let lo = row[i];
            let width = row[i + 1] - lo;
            x[axis] = lo + frac * width;
            idx[axis] = i as u32;
            jac *= ng * width;
        }
        jac
    }

    /// Inverse of the piecewise-linear map, `x -> y`.
    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n_intervals;
        (0..self.dims)
            .map(|axis| {
                let e = self.edges(axis);
                let i = match e.partition_point(|&v| v <= x[axis]) {
                    0 => 0,
                    p => (p - 1).min(n - 1),
                };
                (i as f64 + (x[axis] - e[i]) / (e[i + 1] - e[i])) / n as f64
            })
            .collect()
    }

    /// Moves the edges so that every new interval holds an equal share of
    /// `damped`. Axes whose weights are all zero (or all equal) keep their
    /// edges.
    pub fn update_grid(&mut self, damped: &DampedWeights) -> Result<(), VegasError> {
        if damped.dims != self.dims || damped.n_intervals != self.n_intervals {
            return Err(VegasError::ShapeMismatch);
        }
        let n = self.n_intervals;
        let mut new_row = vec![0.0; n + 1];
        for axis in 0..self.dims {
            let w = damped.axis(axis);
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(VegasError::InvalidConfig(format!(
                    "damped weights on axis {axis} must be finite and nonnegative"
                )));
            }
            let total: f64 = w.iter().sum();
            if total <= 0.0 || w.iter().all(|&v| v == w[0]) {
                continue;
            }
            let row = &mut self.edges[axis * (n + 1)..(axis + 1) * (n + 1)];
            redistribute(row, w, total, &mut new_row);
            if new_row.windows(2).all(|p| p[0] < p[1]) {
                row.copy_from_slice(&new_row);
            }
        }
        Ok(())
    }
}

/// Equal-share placement of new edges along one axis.
fn redistribute(old: &[f64], w: &[f64], total: f64, new: &mut [f64]) {
    let n = w.len();
    let share = total / n as f64;
    new[0] = old[0];
    new[n] = old[n];
    let mut acc = 0.0;
    let mut j = 0;
    for (k, slot) in new.iter_mut().enumerate().take(n).skip(1) {
        let target = k as f64 * share;
        while j < n - 1 && acc + w[j] < target {
            acc += w[j];
            j += 1;
        }
        *slot = if w[j] > 0.0 {
            let frac = ((target - acc) / w[j]).clamp(0.0, 1.0);
            old[j] + frac * (old[j + 1] - old[j])
        } else {
            old[j]
        };
    }
}

/// Per-interval accumulators for one fill: `sum` of `(J f)^2` and sample
/// `count`, flattened as `axis * n_intervals + interval`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapWeights {
    dims: usize,
    n_intervals: usize,
    pub sum: Vec<f64>,
    pub count: Vec<u64>,
}

impl MapWeights {
    pub fn new(dims: usize, n_intervals: usize) -> Self {
        MapWeights {
            dims,
            n_intervals,
            sum: vec![0.0; dims * n_intervals],
            count: vec![0; dims * n_intervals],
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn reset(&mut self) {
        self.sum.fill(0.0);
        self.count.fill(0);
    }

    #[inline]
    pub fn accumulate(&mut self, idx: &[u32], jf: f64) {
        let w = jf * jf;
        for (axis, &i) in idx.iter().enumerate() {
            let k = axis * self.n_intervals + i as usize;
            self.sum[k] += w;
            self.count[k] += 1;
        }
    }

    /// Count-average, smooth, normalize and damp every axis.
    pub fn smooth_and_damp(&self, alpha: f64) -> DampedWeights {
        let n = self.n_intervals;
        let mut values = Vec::with_capacity(self.dims * n);
        for axis in 0..self.dims {
            let range = axis * n..(axis + 1) * n;
            let averaged: Vec<f64> = self.sum[range.clone()]
                .iter()
                .zip(&self.count[range])
                .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
                .collect();
            values.extend(smooth_and_damp_axis(&averaged, alpha));
        }
        DampedWeights {
            dims: self.dims,
            n_intervals: n,
            values,
        }
    }

    pub(crate) fn merge_from(&mut self, other: &MapWeights) -> Result<(), VegasError> {
        if self.dims != other.dims || self.n_intervals != other.n_intervals {
            return Err(VegasError::ShapeMismatch);
        }
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.count.iter_mut().zip(&other.count) {
            *a += b;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DampedWeights {
    dims: usize,
    n_intervals: usize,
    values: Vec<f64>,
}

impl DampedWeights {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        DampedWeights {
            dims: rows.len(),
            n_intervals: rows.first().map_or(0, Vec::len),
            values: rows.concat(),
        }
    }

    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.values[axis * self.n_intervals..(axis + 1) * self.n_intervals]
    }
}

/// Smoothing with the (1,6,1)/8 kernel ((7,1)/8 at the ends), normalization
/// to unit sum, then `d -> ((d - 1) / ln d)^alpha`.
///
/// An all-zero input yields all zeros.
pub fn smooth_and_damp_axis(weights: &[f64], alpha: f64) -> Vec<f64> {
    let n = weights.len();
    let mut smoothed = vec![0.0; n];
    match n {
        0 => return smoothed,
        1 => smoothed[0] = weights[0],
        _ => {
            smoothed[0] = (7.0 * weights[0] + weights[1]) / 8.0;
            smoothed[n - 1] = (weights[n - 2] + 7.0 * weights[n - 1]) / 8.0;
            for i in 1..n - 1 {
                smoothed[i] = (weights[i - 1] + 6.0 * weights[i] + weights[i + 1]) / 8.0;
            }
        }
    }
    let total: f64 = smoothed.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return vec![0.0; n];
    }
    smoothed.iter().map(|&d| damp(d / total, alpha)).collect()
}

#[inline]
fn damp(d: f64, alpha: f64) -> f64 {
    if d < DAMP_FLOOR {
        0.0
    } else if (d - 1.0).abs() < 1e-12 {
        1.0
    } else {
        ((d - 1.0) / d.ln()).powf(alpha)
    }
}
