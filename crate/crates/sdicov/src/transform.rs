//! Rank-one linear transforms `l = I + p g^T / ||p||^2` and chains thereof.
//!
//! A transform is stored as the vector pair `(p, g)` plus the cached value of
//! `||p||^2`; it is never materialized as a matrix. Applying the transform,
//! its adjoint, or its inverse costs `O(n)` each, so a chain of `k` members
//! costs `O(kn)`, the whole point of the method.

use thiserror::Error;

/// Default invertibility margin: construction fails when `|mu| < EPS_INV`
/// with `mu = 1 + (g . p) / ||p||^2`.
pub const EPS_INV: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    /// `||p||^2` underflowed to zero; the transform direction is undefined.
    #[error("zero direction: ||p||^2 underflowed to zero")]
    ZeroDirection,
    /// `|1 + (g.p)/||p||^2|` fell below the invertibility margin.
    #[error("near-singular transform: |mu| = {mu:e} is below eps_inv = {eps_inv:e}")]
    NearSingular { mu: f64, eps_inv: f64 },
    #[error("dimension mismatch: transform has length {expected}, argument has length {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One change of basis `l(x) = x + p (g . x) / ||p||^2`.
///
/// `p` is the steepest-descent direction of the transformed objective and
/// `g` the transformed negative gradient at the accepted line-search point.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneTransform {
    p: Vec<f64>,
    g: Vec<f64>,
    p_norm_sq: f64,
    mu: f64,
}

impl RankOneTransform {
    /// Builds the transform, caching `||p||^2` and the invertibility margin
    /// `mu = 1 + (g . p) / ||p||^2`.
    pub fn new(p: Vec<f64>, g: Vec<f64>, eps_inv: f64) -> Result<Self, TransformError> {
        if p.len() != g.len() {
            return Err(TransformError::DimensionMismatch {
                expected: p.len(),
                got: g.len(),
            });
        }
        let p_norm_sq = dot(&p, &p);
        if p_norm_sq == 0.0 || !p_norm_sq.is_finite() {
            return Err(TransformError::ZeroDirection);
        }
        let mu = 1.0 + dot(&g, &p) / p_norm_sq;
        if !(mu.abs() >= eps_inv) {
            return Err(TransformError::NearSingular { mu, eps_inv });
        }
        Ok(Self { p, g, p_norm_sq, mu })
    }

    pub fn dimension(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn p_norm_sq(&self) -> f64 {
        self.p_norm_sq
    }

    /// Invertibility margin `mu = 1 + (g . p) / ||p||^2`; the transform's
    /// determinant.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), TransformError> {
        if x.len() != self.p.len() {
            return Err(TransformError::DimensionMismatch {
                expected: self.p.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `l(x) = x + p (g . x) / ||p||^2`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_dim(x)?;
        let mut out = x.to_vec();
        self.apply_in_place(&mut out);
        Ok(out)
    }

    /// `l^T(x) = x + g (p . x) / ||p||^2`.
    pub fn apply_adjoint(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_dim(x)?;
        let mut out = x.to_vec();
        self.apply_adjoint_in_place(&mut out);
        Ok(out)
    }

    /// `l^{-1}(x) = x - p (g . x) / (||p||^2 + g . p)`, by Sherman-Morrison.
    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_dim(x)?;
        let mut out = x.to_vec();
        self.apply_inverse_in_place(&mut out);
        Ok(out)
    }

    pub(crate) fn apply_in_place(&self, x: &mut [f64]) {
        let scale = dot(&self.g, x) / self.p_norm_sq;
        for (xi, pi) in x.iter_mut().zip(&self.p) {
            *xi += pi * scale;
        }
    }

    pub(crate) fn apply_adjoint_in_place(&self, x: &mut [f64]) {
        let scale = dot(&self.p, x) / self.p_norm_sq;
        for (xi, gi) in x.iter_mut().zip(&self.g) {
            *xi += gi * scale;
        }
    }

    pub(crate) fn apply_inverse_in_place(&self, x: &mut [f64]) {
        // denominator = ||p||^2 + g.p = mu ||p||^2, nonzero by construction
        let scale = dot(&self.g, x) / (self.mu * self.p_norm_sq);
        for (xi, pi) in x.iter_mut().zip(&self.p) {
            *xi -= pi * scale;
        }
    }
}

/// Ordered transforms `l_1, ..., l_k`; implicitly represents the operator
/// `H = l_1 ... l_k l_k^T ... l_1^T` via [`TransformChain::h_apply`].
#[derive(Debug, Clone, Default)]
pub struct TransformChain {
    transforms: Vec<RankOneTransform>,
    dimension: usize,
}

impl TransformChain {
    pub fn new(dimension: usize) -> Self {
        Self {
            transforms: Vec::new(),
            dimension,
        }
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn members(&self) -> &[RankOneTransform] {
        &self.transforms
    }

    pub fn last(&self) -> Option<&RankOneTransform> {
        self.transforms.last()
    }

    /// Appends `l` built from `(p, g)`; the chain takes ownership only if the
    /// transform is constructible (nonzero `p`, margin above `eps_inv`).
    pub fn try_append(
        &mut self,
        p: Vec<f64>,
        g: Vec<f64>,
        eps_inv: f64,
    ) -> Result<&RankOneTransform, TransformError> {
        if p.len() != self.dimension {
            return Err(TransformError::DimensionMismatch {
                expected: self.dimension,
                got: p.len(),
            });
        }
        let t = RankOneTransform::new(p, g, eps_inv)?;
        self.transforms.push(t);
        Ok(self.transforms.last().expect("just pushed"))
    }

    pub fn push(&mut self, t: RankOneTransform) -> Result<(), TransformError> {
        if t.dimension() != self.dimension {
            return Err(TransformError::DimensionMismatch {
                expected: self.dimension,
                got: t.dimension(),
            });
        }
        self.transforms.push(t);
        Ok(())
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), TransformError> {
        if x.len() != self.dimension {
            return Err(TransformError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `l_1 o ... o l_k (x)`: members applied in descending index order
    /// (`l_k` first, `l_1` last). The empty chain is the identity.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_dim(x)?;
        let mut out = x.to_vec();
        for t in self.transforms.iter().rev() {
            t.apply_in_place(&mut out);
        }
        Ok(out)
    }

    /// `l_k^T o ... o l_1^T (x)`: adjoints applied in ascending index order
    /// (`l_1^T` first, `l_k^T` last).
    pub fn adjoint(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_dim(x)?;
        let mut out = x.to_vec();
        for t in &self.transforms {
            t.apply_adjoint_in_place(&mut out);
        }
        Ok(out)
    }

    /// `(l_1 o ... o l_k)^{-1} (x)`: member inverses applied in ascending
    /// index order (`l_1^{-1}` first, `l_k^{-1}` last).
    pub fn inverse(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_dim(x)?;
        let mut out = x.to_vec();
        for t in &self.transforms {
            t.apply_inverse_in_place(&mut out);
        }
        Ok(out)
    }

    /// `H v = l_1 ... l_k l_k^T ... l_1^T v`; symmetric positive semidefinite
    /// by construction, positive definite when all members are invertible.
    pub fn h_apply(&self, v: &[f64]) -> Result<Vec<f64>, TransformError> {
        let tmp = self.adjoint(v)?;
        self.forward(&tmp)
    }
}
