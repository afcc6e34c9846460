//! Steepest descent with iterated change of variables (SDICOV).
//!
//! After every line-search step the method composes a rank-one linear change
//! of basis `l_k = I + p_k g_k^T / ||p_k||^2` into the objective, so that each
//! new iteration is a plain steepest-descent step in the transformed
//! coordinates. The transforms are never formed as matrices: the chain
//! `l_1, ..., l_k` is stored as vector pairs and applied in `O(kn)`.
//!
//! The crate ships:
//!
//! - [`transform`]: rank-one transforms, adjoints, inverses, and chains;
//! - [`line_search`]: exact steps for quadratics and a derivative-shrinking
//!   bisection search for general objectives;
//! - [`optimizers`]: the SDICOV driver plus product-form BFGS, product-form
//!   DFP, CG-PR+ and CG-FR comparators sharing one trace format;
//! - [`quadratic`]: a dense convex-quadratic lab holding the explicit
//!   change-of-variables algorithm, a reference linear conjugate gradient,
//!   and verifiers for finite termination, Krylov shrinkage, CG equivalence
//!   and the secant condition;
//! - [`problems`]: planar distance-geometry instances with a known global
//!   minimizer and a small regression suite of smooth test functions.
//!
//! All randomness is drawn from explicitly seeded ChaCha8 streams
//! ([`rand_chacha::ChaCha8Rng`]), so every instance, start point and
//! benchmark row is reproducible from its seed.

pub mod line_search;
pub mod objective;
pub mod optimizers;
pub mod problems;
pub mod quadratic;
pub mod rng;
pub mod transform;

pub use line_search::{LineSearchResult, LineSearchSpec, LineSearchStatus};
pub use objective::ObjectiveOracle;
pub use optimizers::{
    bfgs_minimize, cg_fr_minimize, cg_pr_minimize, dfp_minimize, minimize, sdicov_minimize,
    IterationRecord, LineSearchMethod, OptimizerKind, RunOptions, RunReport, RunStatus,
    StepEvent, TerminationPolicy,
};
pub use problems::{generate_distg, standard_suite, DistanceGeometryInstance, Rosenbrock};
pub use quadratic::QuadraticObjective;
pub use transform::{RankOneTransform, TransformChain, TransformError};
