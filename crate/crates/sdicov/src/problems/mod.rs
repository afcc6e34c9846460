//! Test objectives: planar distance geometry with generated ground-truth
//! instances, plus standard smooth functions for regression.

mod distgeom;

pub use distgeom::{
    generate_distg, DistanceGeometryInstance, Edge, ProblemError, DIM_SPACE,
};

use crate::objective::ObjectiveOracle;
use crate::quadratic::QuadraticObjective;

/// Chained Rosenbrock function,
/// `f(x) = sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`,
/// minimized at the all-ones vector with value 0.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    dimension: usize,
}

impl Rosenbrock {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 2, "Rosenbrock needs at least two variables");
        Self { dimension }
    }

    /// The classical start: (-1.2, 1) repeated across the coordinates.
    pub fn standard_start(&self) -> Vec<f64> {
        (0..self.dimension)
            .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
            .collect()
    }
}

impl ObjectiveOracle for Rosenbrock {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| {
                let t = w[1] - w[0] * w[0];
                let u = 1.0 - w[0];
                100.0 * t * t + u * u
            })
            .sum()
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut grad = vec![0.0; n];
        for i in 0..n - 1 {
            let t = x[i + 1] - x[i] * x[i];
            grad[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
            grad[i + 1] += 200.0 * t;
        }
        grad
    }
}

/// A named objective with a start point and, when known, its minimizer.
pub struct ProblemBundle {
    pub name: String,
    pub oracle: Box<dyn ObjectiveOracle>,
    pub x0: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
}

impl ProblemBundle {
    fn new(
        name: &str,
        oracle: Box<dyn ObjectiveOracle>,
        x0: Vec<f64>,
        x_star: Option<Vec<f64>>,
    ) -> Self {
        Self {
            name: name.to_string(),
            oracle,
            x0,
            x_star,
        }
    }
}

/// Fixed regression set: Rosenbrock in 2 and 10 dimensions, an
/// ill-conditioned quadratic, and a moderately conditioned random one.
pub fn standard_suite() -> Vec<ProblemBundle> {
    let mut bundles = Vec::new();

    let r2 = Rosenbrock::new(2);
    let x0 = r2.standard_start();
    bundles.push(ProblemBundle::new(
        "rosenbrock-2d",
        Box::new(r2),
        x0,
        Some(vec![1.0; 2]),
    ));

    let r10 = Rosenbrock::new(10);
    let x0 = r10.standard_start();
    bundles.push(ProblemBundle::new(
        "rosenbrock-10d",
        Box::new(r10),
        x0,
        Some(vec![1.0; 10]),
    ));

    let ill = QuadraticObjective::random_spd(12, 1e4, 2024)
        .expect("constructed SPD spectrum is valid");
    let x_star = ill.minimizer();
    bundles.push(ProblemBundle::new(
        "quadratic-ill-1e4",
        Box::new(ill),
        vec![0.0; 12],
        Some(x_star),
    ));

    let random = QuadraticObjective::random_spd(10, 1e3, 4096)
        .expect("constructed SPD spectrum is valid");
    let x_star = random.minimizer();
    bundles.push(ProblemBundle::new(
        "quadratic-random-1e3",
        Box::new(random),
        vec![1.0; 10],
        Some(x_star),
    ));

    bundles
}
