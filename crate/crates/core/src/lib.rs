//! Adaptive multidimensional Monte Carlo integration (VEGAS+) on CPU
//! worker threads.
//!
//! ```
//! use vegasplus::{integrate, FnIntegrand, IntegratorConfig};
//!
//! let f = FnIntegrand::new(2, |x: &[f64]| x[0] * x[1]);
//! let cfg = IntegratorConfig { n_eval: 20_000, max_it: 5, ..Default::default() };
//! let out = integrate(&f, &[(0.0, 1.0), (0.0, 1.0)], &cfg).unwrap();
//! assert!((out.mean - 0.25).abs() < 5.0 * out.sigma + 1e-12);
//! ```

pub mod bench;
pub mod error;
pub mod executor;
pub mod integrand;
pub mod integrands;
pub mod integrator;
pub mod map;
pub mod rng;
pub mod special;
pub mod strat;

pub use error::VegasError;
pub use integrand::{FnIntegrand, Integrand};
pub use integrator::{
    combine_iterations, integrate, Combined, IntegralOutcome, IntegratorConfig, IterationResult,
    PhaseTimes,
};
pub use map::{DampedWeights, MapWeights, VegasMap};
pub use rng::{RngStream, RunStreams};
pub use strat::{compute_n_strat, update_evals_per_cube, RunPlan, StratGrid};
