//! Objective-function interface shared by every optimizer in this crate.

use std::cell::Cell;

/// A smooth function `f: R^n -> R` with an analytic gradient.
///
/// Implementations must return finite values on their natural domain and may
/// return `NAN`/`inf` outside it; the line searches treat non-finite trial
/// values as "too far" and back off.
pub trait ObjectiveOracle {
    fn dimension(&self) -> usize;

    fn value_at(&self, x: &[f64]) -> f64;

    fn gradient_at(&self, x: &[f64]) -> Vec<f64>;

    /// Exact minimizer of `t -> f(x + t d)` when one is available in closed
    /// form (quadratics). `None` means callers must fall back to an iterative
    /// search.
    fn exact_step(&self, _x: &[f64], _d: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: ObjectiveOracle + ?Sized> ObjectiveOracle for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        (**self).value_at(x)
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient_at(x)
    }

    fn exact_step(&self, x: &[f64], d: &[f64]) -> Option<f64> {
        (**self).exact_step(x, d)
    }
}

impl<T: ObjectiveOracle + ?Sized> ObjectiveOracle for Box<T> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        (**self).value_at(x)
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient_at(x)
    }

    fn exact_step(&self, x: &[f64], d: &[f64]) -> Option<f64> {
        (**self).exact_step(x, d)
    }
}

/// Wraps an oracle and counts value/gradient evaluations.
pub struct CountingOracle<O> {
    inner: O,
    value_calls: Cell<u64>,
    gradient_calls: Cell<u64>,
}

impl<O: ObjectiveOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            value_calls: Cell::new(0),
            gradient_calls: Cell::new(0),
        }
    }

    pub fn value_calls(&self) -> u64 {
        self.value_calls.get()
    }

    pub fn gradient_calls(&self) -> u64 {
        self.gradient_calls.get()
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: ObjectiveOracle> ObjectiveOracle for CountingOracle<O> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        self.value_calls.set(self.value_calls.get() + 1);
        self.inner.value_at(x)
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        self.gradient_calls.set(self.gradient_calls.get() + 1);
        self.inner.gradient_at(x)
    }

    fn exact_step(&self, x: &[f64], d: &[f64]) -> Option<f64> {
        self.inner.exact_step(x, d)
    }
}

/// Central-difference gradient at `x`, step `1e-6 * (1 + ||x||)` per
/// coordinate. Used only to cross-check analytic gradients in tests.
pub fn finite_difference_gradient<O: ObjectiveOracle>(oracle: &O, x: &[f64]) -> Vec<f64> {
    let h = 1e-6 * (1.0 + crate::transform::norm(x));
    let mut xp = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = oracle.value_at(&xp);
        xp[i] = orig - h;
        let fm = oracle.value_at(&xp);
        xp[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    grad
}

/// Largest relative gradient error `|g_i - fd_i| / max(1, |fd_i|)` over all
/// coordinates; the standard acceptance threshold is `1e-6`.
pub fn max_gradient_deviation<O: ObjectiveOracle>(oracle: &O, x: &[f64]) -> f64 {
    let analytic = oracle.gradient_at(x);
    let fd = finite_difference_gradient(oracle, x);
    analytic
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}
