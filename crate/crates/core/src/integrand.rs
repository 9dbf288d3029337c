//! What the integrator evaluates.

/// A real function on a box in `dims()` dimensions.
///
/// Implementations are called from several worker threads at once.
pub trait Integrand: Sync {
    fn dims(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// Evaluates `out.len()` points stored row-major in `points`.
    ///
    /// Returning `Err` aborts the integration; the message is reported with
    /// the first point of the batch.
    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<(), String> {
        let d = self.dims();
        for (x, v) in points.chunks_exact(d).zip(out.iter_mut()) {
            *v = self.eval(x);
        }
        Ok(())
    }
}

/// Adapts a closure.
pub struct FnIntegrand<F> {
    dims: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(dims: usize, f: F) -> Self {
        FnIntegrand { dims, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dims(&self) -> usize {
        self.dims
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl<T: Integrand + ?Sized> Integrand for Box<T> {
    fn dims(&self) -> usize {
        (**self).dims()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }

    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<(), String> {
        (**self).eval_batch(points, out)
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn dims(&self) -> usize {
        (**self).dims()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }

    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<(), String> {
        (**self).eval_batch(points, out)
    }
}
