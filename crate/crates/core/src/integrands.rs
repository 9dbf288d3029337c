//! Built-in integrands with reference values.
//!
//! Eight standard test functions on the unit cube, an Asian-style option
//! payoff and a harmonic-oscillator lattice path integral.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::VegasError;
use crate::integrand::Integrand;
use crate::special::{erf, erfinv, normal_cdf};

/// Stable registry names.
pub const NAMES: [&str; 10] = [
    "sinexp",
    "linear",
    "cosine",
    "exponential",
    "roos_arnold",
    "morokoff",
    "gaussian",
    "ridge",
    "asian_option",
    "path_integral",
];

/// Integral of `exp(x^2)` over `[0, 1]`.
const EXP_SQUARE_INTEGRAL: f64 = 1.462_651_745_907_181_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub value: f64,
    pub method: ReferenceMethod,
    pub note: &'static str,
}

pub struct IntegrandSpec {
    pub name: &'static str,
    pub bounds: Vec<(f64, f64)>,
    pub reference: Option<Reference>,
    pub integrand: Box<dyn Integrand + Send>,
}

impl IntegrandSpec {
    pub fn dims(&self) -> usize {
        self.bounds.len()
    }
}

impl std::fmt::Debug for IntegrandSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegrandSpec")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .field("reference", &self.reference)
            .finish()
    }
}

/// Registry entry at its default size and parameters.
pub fn lookup(name: &str) -> Result<IntegrandSpec, VegasError> {
    build(name, None)
}

/// Registry entry with an optional dimension override.
///
/// For `asian_option` the dimension is the number of averaging dates, for
/// `path_integral` it is the number of interior lattice points (`N - 1`).
pub fn build(name: &str, dims: Option<usize>) -> Result<IntegrandSpec, VegasError> {
    if dims == Some(0) {
        return Err(VegasError::InvalidConfig("dimension must be at least 1".into()));
    }
    let unit = |d: usize| vec![(0.0, 1.0); d];
    let closed = |value: f64, note: &'static str| {
        Some(Reference {
            value,
            method: ReferenceMethod::ClosedForm,
            note,
        })
    };
    let spec = match name {
        "sinexp" => {
            if dims.is_some_and(|d| d != 2) {
                return Err(VegasError::InvalidConfig("sinexp is two-dimensional".into()));
            }
            IntegrandSpec {
                name: "sinexp",
                bounds: unit(2),
                reference: closed((1.0 - 1f64.cos()) + (1f64.exp() - 1.0), "(1 - cos 1) + (e - 1)"),
                integrand: Box::new(SinExp),
            }
        }
        "linear" => {
            let d = dims.unwrap_or(10);
            IntegrandSpec {
                name: "linear",
                bounds: unit(d),
                reference: closed(d as f64 / 2.0, "d / 2"),
                integrand: Box::new(Linear { dims: d }),
            }
        }
        "cosine" => {
            let d = dims.unwrap_or(10);
            IntegrandSpec {
                name: "cosine",
                bounds: unit(d),
                reference: closed(1f64.sin().powi(d as i32), "sin(1)^d"),
                integrand: Box::new(Cosine { dims: d }),
            }
        }
        "exponential" => {
            let d = dims.unwrap_or(10);
            IntegrandSpec {
                name: "exponential",
                bounds: unit(d),
                reference: closed(
                    EXP_SQUARE_INTEGRAL.powi(d as i32),
                    "(integral of exp(x^2) over [0,1])^d",
                ),
                integrand: Box::new(Exponential { dims: d }),
            }
        }
        "roos_arnold" => {
            let d = dims.unwrap_or(10);
            IntegrandSpec {
                name: "roos_arnold",
                bounds: unit(d),
                reference: closed(1.0, "each axis integrates |4x - 2| to 1"),
                integrand: Box::new(RoosArnold { dims: d }),
            }
        }
        "morokoff" => {
            let d = dims.unwrap_or(8);
            IntegrandSpec {
                name: "morokoff",
                bounds: unit(d),
                reference: closed(1.0, "(1 + 1/d)^d (d / (d + 1))^d"),
                integrand: Box::new(Morokoff::new(d)),
            }
        }
        "gaussian" => {
            let g = Gaussian::new(dims.unwrap_or(4), 0.5, 0.01);
            IntegrandSpec {
                name: "gaussian",
                bounds: unit(g.dims),
                reference: closed(g.reference(), "product of per-axis error functions"),
                integrand: Box::new(g),
            }
        }
        "ridge" => {
            let r = Ridge::new(dims.unwrap_or(4), 1000);
            IntegrandSpec {
                name: "ridge",
                bounds: unit(r.dims),
                reference: closed(r.reference(), "sum over centres of per-axis error functions"),
                integrand: Box::new(r),
            }
        }
        "asian_option" => {
            let params = AsianOption {
                n: dims.unwrap_or(16),
                ..AsianOption::default()
            };
            IntegrandSpec {
                name: "asian_option",
                bounds: unit(params.n),
                reference: closed(params.reference(), "lognormal closed form of the payoff"),
                integrand: Box::new(params),
            }
        }
        "path_integral" => {
            let mut p = PathIntegral::default();
            if let Some(d) = dims {
                p.n_slices = d + 1;
            }
            IntegrandSpec {
                name: "path_integral",
                bounds: p.bounds(),
                reference: Some(Reference {
                    value: p.lattice_reference(),
                    method: ReferenceMethod::Oracle,
                    note: "exact Gaussian integral of the lattice action over the real line",
                }),
                integrand: Box::new(p),
            }
        }
        _ => {
            return Err(VegasError::UnknownIntegrand {
                name: name.to_string(),
                available: NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(spec)
}

pub struct SinExp;

impl Integrand for SinExp {
    fn dims(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x[0].sin() + x[1].exp()
    }
}

pub struct Linear {
    pub dims: usize,
}

impl Integrand for Linear {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().sum()
    }
}

pub struct Cosine {
    pub dims: usize,
}

impl Integrand for Cosine {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.cos()).product()
    }
}

pub struct Exponential {
    pub dims: usize,
}

impl Integrand for Exponential {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().exp()
    }
}

pub struct RoosArnold {
    pub dims: usize,
}

impl Integrand for RoosArnold {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| (4.0 * v - 2.0).abs()).product()
    }
}

pub struct Morokoff {
    dims: usize,
    scale: f64,
    exponent: f64,
}

impl Morokoff {
    pub fn new(dims: usize) -> Self {
        let d = dims as f64;
        Morokoff {
            dims,
            scale: (1.0 + 1.0 / d).powi(dims as i32),
            exponent: 1.0 / d,
        }
    }
}

impl Integrand for Morokoff {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.scale * x.iter().map(|v| v.powf(self.exponent)).product::<f64>()
    }
}

/// Normal density centred at `mu` in every coordinate.
pub struct Gaussian {
    dims: usize,
    mu: f64,
    sigma: f64,
    norm: f64,
}

impl Gaussian {
    pub fn new(dims: usize, mu: f64, sigma: f64) -> Self {
        Gaussian {
            dims,
            mu,
            sigma,
            norm: (2.0 * PI * sigma * sigma).powf(-(dims as f64) / 2.0),
        }
    }

    pub fn reference(&self) -> f64 {
        let s = self.sigma * SQRT_2;
        let axis = 0.5 * (erf((1.0 - self.mu) / s) + erf(self.mu / s));
        axis.powi(self.dims as i32)
    }
}

impl Integrand for Gaussian {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| (v - self.mu) * (v - self.mu)).sum();
        self.norm * (-r2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// `N` Gaussian bumps of width 0.1/sqrt(2) along the main diagonal.
pub struct Ridge {
    dims: usize,
    n_peaks: usize,
    scale: f64,
}

/// Peaks whose exponent falls below `-RIDGE_CUTOFF` are dropped; the
/// nearest peak contributes at least ~1, so the omitted sum is below 1e-19
/// relative.
const RIDGE_CUTOFF: f64 = 50.0;

impl Ridge {
    pub fn new(dims: usize, n_peaks: usize) -> Self {
        Ridge {
            dims,
            n_peaks,
            scale: 10_000.0 / (PI * PI * n_peaks as f64),
        }
    }

    fn centre(&self, i: usize) -> f64 {
        i as f64 / (self.n_peaks - 1) as f64
    }

    pub fn reference(&self) -> f64 {
        let axis_factor = PI.sqrt() / 20.0;
        let sum: f64 = (0..self.n_peaks)
            .map(|i| {
                let c = self.centre(i);
                (axis_factor * (erf(10.0 * (1.0 - c)) + erf(10.0 * c))).powi(self.dims as i32)
            })
            .sum();
        self.scale * sum
    }

    /// Direct evaluation, one exponential per peak.
    pub fn eval_direct(&self, x: &[f64]) -> f64 {
        let sum: f64 = (0..self.n_peaks)
            .map(|i| {
                let c = self.centre(i);
                let r2: f64 = x.iter().map(|v| (v - c) * (v - c)).sum();
                (-100.0 * r2).exp()
            })
            .sum();
        self.scale * sum
    }
}

impl Integrand for Ridge {
    fn dims(&self) -> usize {
        self.dims
    }

    // sum_j (x_j - c)^2 = d (c - m)^2 + sum_j (x_j - m)^2 with m the mean
    // of x, which reduces the peak sum to one dimension. Coordinates are
    // sorted first so the value is exactly symmetric under permutations.
    fn eval(&self, x: &[f64]) -> f64 {
        let mut xs = x.to_vec();
        xs.sort_by(f64::total_cmp);
        let d = self.dims as f64;
        let m = xs.iter().sum::<f64>() / d;
        let spread: f64 = xs.iter().map(|v| (v - m) * (v - m)).sum();
        let outer = (-100.0 * spread).exp();
        if outer == 0.0 {
            return 0.0;
        }
        // walk outward from the nearest peak; consecutive terms differ by
        // exp(-a (2 h dc + h^2)) and those ratios by exp(-2 a h^2)
        let a = 100.0 * d;
        let last = self.n_peaks - 1;
        let h = 1.0 / last as f64;
        let steps = ((RIDGE_CUTOFF / a).sqrt() / h).ceil() as usize;
        let step_ratio = (-2.0 * a * h * h).exp();
        let i0 = ((m / h).round().max(0.0) as usize).min(last);
        let dc = self.centre(i0) - m;
        let e0 = (-a * dc * dc).exp();
        let mut sum = e0;
        let (mut e, mut t) = (e0, (-a * (2.0 * h * dc + h * h)).exp());
        for _ in i0 + 1..=(i0 + steps).min(last) {
            e *= t;
            t *= step_ratio;
            sum += e;
        }
        let (mut e, mut t) = (e0, (-a * (h * h - 2.0 * h * dc)).exp());
        for _ in i0.saturating_sub(steps)..i0 {
            e *= t;
            t *= step_ratio;
            sum += e;
        }
        self.scale * outer * sum
    }
}

/// Discounted call on `S0 exp((r - sigma^2/2) T + sigma sqrt(T) sum_i z_i)`
/// with `z_i = sqrt(2) erfinv(2 x_i - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsianOption {
    pub s0: f64,
    pub strike: f64,
    pub rate: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub n: usize,
}

impl Default for AsianOption {
    fn default() -> Self {
        AsianOption {
            s0: 100.0,
            strike: 100.0,
            rate: 0.05,
            sigma: 0.2,
            maturity: 1.0,
            n: 16,
        }
    }
}

/// Coordinates are clamped to `[eps, 1 - eps]` before inverting.
pub const ASIAN_CLAMP: f64 = 1e-12;

impl AsianOption {
    pub fn price_level(&self, x: &[f64]) -> f64 {
        let z: f64 = x
            .iter()
            .map(|&v| {
                let v = v.clamp(ASIAN_CLAMP, 1.0 - ASIAN_CLAMP);
                erfinv(2.0 * v - 1.0) * SQRT_2
            })
            .sum();
        self.s0
            * ((self.rate - 0.5 * self.sigma * self.sigma) * self.maturity
                + self.sigma * self.maturity.sqrt() * z)
                .exp()
    }

    /// The sum of `n` independent standard normals is `N(0, n)`, so the
    /// payoff expectation is a Black-Scholes call with volatility
    /// `sigma * sqrt(n)`.
    pub fn reference(&self) -> f64 {
        let discount = (-self.rate * self.maturity).exp();
        let m = self.s0.ln() + (self.rate - 0.5 * self.sigma * self.sigma) * self.maturity;
        let s = self.sigma * (self.n as f64 * self.maturity).sqrt();
        let forward = (m + 0.5 * s * s).exp();
        if self.strike <= 0.0 {
            return discount * forward;
        }
        let d2 = (m - self.strike.ln()) / s;
        let d1 = d2 + s;
        discount * (forward * normal_cdf(d1) - self.strike * normal_cdf(d2))
    }
}

impl Integrand for AsianOption {
    fn dims(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (-self.rate * self.maturity).exp() * (self.price_level(x) - self.strike).max(0.0)
    }
}

/// `A exp(-S_lat[x])` for a particle of mass `m` in `V(x) = x^2 / 2`,
/// endpoints pinned at `x_end`, `N` time slices of width `a = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathIntegral {
    pub mass: f64,
    pub total_time: f64,
    pub n_slices: usize,
    pub x_end: f64,
    /// Interior coordinates are integrated over `[-half_width, half_width]`.
    pub half_width: f64,
}

impl Default for PathIntegral {
    fn default() -> Self {
        PathIntegral {
            mass: 1.0,
            total_time: 4.0,
            n_slices: 8,
            x_end: 0.0,
            half_width: 5.0,
        }
    }
}

impl PathIntegral {
    pub fn spacing(&self) -> f64 {
        self.total_time / self.n_slices as f64
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-self.half_width, self.half_width); self.n_slices.saturating_sub(1)]
    }

    pub fn prefactor(&self) -> f64 {
        (self.mass / (2.0 * PI * self.spacing())).powf(self.n_slices as f64 / 2.0)
    }

    pub fn action(&self, interior: &[f64]) -> f64 {
        let a = self.spacing();
        let kinetic = self.mass / (2.0 * a);
        let at = |j: usize| {
            if j == 0 || j == self.n_slices {
                self.x_end
            } else {
                interior[j - 1]
            }
        };
        (0..self.n_slices)
            .map(|j| {
                let (xj, xn) = (at(j), at(j + 1));
                kinetic * (xn - xj) * (xn - xj) + a * 0.5 * xj * xj
            })
            .sum()
    }

    /// Integrand value; for `N = 1` there are no interior points and this is
    /// the whole lattice amplitude.
    pub fn weight(&self, interior: &[f64]) -> f64 {
        self.prefactor() * (-self.action(interior)).exp()
    }

    /// Exact integral of [`weight`](Self::weight) over the real line in
    /// every interior coordinate (the action is a quadratic form).
    pub fn lattice_reference(&self) -> f64 {
        let n = self.n_slices.saturating_sub(1);
        if n == 0 {
            return self.weight(&[]);
        }
        let a = self.spacing();
        let k = self.mass / a;
        let diag = 2.0 * k + a;
        // b_j: linear coefficients from the pinned endpoints
        let mut b = vec![0.0; n];
        b[0] += k * self.x_end;
        b[n - 1] += k * self.x_end;
        let c = k * self.x_end * self.x_end + 0.5 * a * self.x_end * self.x_end;

        // Thomas algorithm on the tridiagonal form, tracking the determinant.
        let mut cprime = vec![0.0; n];
        let mut dprime = vec![0.0; n];
        let mut log_det = 0.0;
        let mut pivot = diag;
        log_det += pivot.ln();
        cprime[0] = -k / pivot;
        dprime[0] = b[0] / pivot;
        for j in 1..n {
            pivot = diag + k * cprime[j - 1];
            log_det += pivot.ln();
            cprime[j] = -k / pivot;
            dprime[j] = (b[j] + k * dprime[j - 1]) / pivot;
        }
        let mut sol = vec![0.0; n];
        sol[n - 1] = dprime[n - 1];
        for j in (0..n - 1).rev() {
            sol[j] = dprime[j] - cprime[j] * sol[j + 1];
        }
        let quad: f64 = b.iter().zip(&sol).map(|(x, y)| x * y).sum();
        let log_gauss = 0.5 * n as f64 * (2.0 * PI).ln() - 0.5 * log_det + 0.5 * quad - c;
        self.prefactor() * log_gauss.exp()
    }

    /// Continuum `<x|exp(-H T)|x>` for unit frequency.
    pub fn continuum_reference(&self) -> f64 {
        let w = 1.0;
        let m = self.mass;
        let t = self.total_time;
        (m * w / (2.0 * PI * (w * t).sinh())).sqrt()
            * (-m * w * self.x_end * self.x_end * (0.5 * w * t).tanh()).exp()
    }
}

impl Integrand for PathIntegral {
    fn dims(&self) -> usize {
        self.n_slices.saturating_sub(1)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.weight(x)
    }
}
