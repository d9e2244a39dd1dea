use std::sync::Arc;

use nalgebra::base::storage::Storage;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix, U1};

use crate::bases::argmax_first;
use crate::contract::{BaseAlgorithm, Context};
use crate::error::{Error, Result};

type ColumnVector<S> = Matrix<f64, Dyn, U1, S>;

/// How the ridge system `M mu = b` is kept solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Refactorize `M` from scratch after every update.
    Direct,
    /// Rank-one Cholesky updates, with a full refactorization every
    /// `refactor_every` updates.
    RankOne { refactor_every: usize },
}

impl Default for SolveMode {
    fn default() -> Self {
        SolveMode::RankOne {
            refactor_every: 256,
        }
    }
}

// Slack on the unit-norm feature assumption.
const NORM_TOLERANCE: f64 = 1e-6;

/// Regularized least-squares state shared by linUCB and the ellipsoid
/// combiner: `M = lambda I + sum a a^T`, `b = sum y a`, `mu_hat = M^{-1} b`.
#[derive(Debug, Clone)]
pub struct LinUcbState {
    lambda: f64,
    beta: f64,
    m: DMatrix<f64>,
    b: DVector<f64>,
    mu_hat: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    mode: SolveMode,
    since_refactor: usize,
    updates: u64,
}

impl LinUcbState {
    pub fn new(dim: usize, lambda: f64, beta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("linUCB dimension must be >= 1"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::invalid(format!("beta must be >= 0, got {beta}")));
        }
        let m = DMatrix::identity(dim, dim) * lambda;
        let chol = Cholesky::new(m.clone())
            .ok_or_else(|| Error::Numerical("initial ridge matrix not positive definite".into()))?;
        Ok(Self {
            lambda,
            beta,
            m,
            b: DVector::zeros(dim),
            mu_hat: DVector::zeros(dim),
            chol,
            mode: SolveMode::default(),
            since_refactor: 0,
            updates: 0,
        })
    }

    /// State with an explicit Gram matrix `m` (symmetric positive definite)
    /// and response vector `b`.
    pub fn from_parts(lambda: f64, beta: f64, m: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let mut s = Self::new(b.len(), lambda, beta)?;
        if m.shape() != (b.len(), b.len()) {
            return Err(Error::DimensionMismatch {
                expected: b.len(),
                got: m.nrows(),
            });
        }
        s.m = m;
        s.b = b;
        s.refactor()?;
        s.mu_hat = s.chol.solve(&s.b);
        Ok(s)
    }

    pub fn with_solve_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta;
    }

    /// Regularized covariance `M`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.b
    }

    /// Ridge estimate `mu_hat`.
    pub fn estimate(&self) -> &DVector<f64> {
        &self.mu_hat
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: n,
            })
        }
    }

    /// `M^{-1} a`.
    pub fn inverse_apply<S: Storage<f64, Dyn>>(&self, a: &ColumnVector<S>) -> Result<DVector<f64>> {
        self.check_dim(a.len())?;
        Ok(self.chol.solve(a))
    }

    /// Ellipsoid width `sqrt(a^T M^{-1} a)`.
    pub fn width<S: Storage<f64, Dyn>>(&self, a: &ColumnVector<S>) -> Result<f64> {
        let v = self.inverse_apply(a)?;
        Ok(a.dot(&v).max(0.0).sqrt())
    }

    /// Optimistic score `<a, mu_hat> + beta * width(a)`.
    pub fn score<S: Storage<f64, Dyn>>(&self, a: &ColumnVector<S>) -> Result<f64> {
        Ok(a.dot(&self.mu_hat) + self.beta * self.width(a)?)
    }

    /// Argmax of [`score`](Self::score) over the columns of `features`
    /// (`dim x arms`); ties go to the lowest column.
    pub fn select<S: Storage<f64, Dyn, Dyn>>(
        &self,
        features: &Matrix<f64, Dyn, Dyn, S>,
    ) -> Result<usize> {
        self.check_dim(features.nrows())?;
        if features.ncols() == 0 {
            return Err(Error::EmptyArmSet);
        }
        let v = self.chol.solve(features);
        let est = features.tr_mul(&self.mu_hat);
        let scores = (0..features.ncols()).map(|j| {
            let w = features.column(j).dot(&v.column(j)).max(0.0).sqrt();
            est[j] + self.beta * w
        });
        argmax_first(scores).ok_or(Error::EmptyArmSet)
    }

    /// Adds the observation `(a, y)`: `M += a a^T`, `b += y a`, re-solves
    /// for `mu_hat`.
    pub fn ridge_update<S: Storage<f64, Dyn>>(
        &mut self,
        a: &ColumnVector<S>,
        y: f64,
    ) -> Result<()> {
        self.check_dim(a.len())?;
        if !y.is_finite() {
            return Err(Error::NonFinite("ridge response"));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("ridge feature"));
        }
        let norm = a.norm();
        if norm > 1.0 + NORM_TOLERANCE {
            return Err(Error::invalid(format!("feature norm {norm} exceeds 1")));
        }
        self.m.ger(1.0, a, a, 1.0);
        self.b.axpy(y, a, 1.0);
        self.updates += 1;
        self.since_refactor += 1;
        let refactor = match self.mode {
            SolveMode::Direct => true,
            SolveMode::RankOne { refactor_every } => self.since_refactor >= refactor_every.max(1),
        };
        if refactor {
            self.refactor()?;
        } else {
            self.chol.rank_one_update(a, 1.0);
        }
        self.mu_hat = self.chol.solve(&self.b);
        Ok(())
    }

    fn refactor(&mut self) -> Result<()> {
        self.chol = Cholesky::new(self.m.clone())
            .ok_or_else(|| Error::Numerical("ridge matrix lost positive definiteness".into()))?;
        self.since_refactor = 0;
        Ok(())
    }

    pub fn reset(&mut self) {
        let dim = self.dim();
        self.m = DMatrix::identity(dim, dim) * self.lambda;
        self.b = DVector::zeros(dim);
        self.mu_hat = DVector::zeros(dim);
        self.chol = Cholesky::new(self.m.clone()).expect("lambda I is positive definite");
        self.since_refactor = 0;
        self.updates = 0;
    }
}

/// Self-normalized confidence radius for a ridge estimate with unit-norm
/// features, `noise`-subgaussian observations and `||theta|| <= norm_bound`:
/// `noise * sqrt(2 ln(1/delta) + d ln(1 + T/(lambda d))) + sqrt(lambda) * norm_bound`.
pub fn oful_beta(
    dim: usize,
    lambda: f64,
    horizon: u64,
    delta: f64,
    noise: f64,
    norm_bound: f64,
) -> f64 {
    let d = dim as f64;
    let log_det = d * (1.0 + horizon as f64 / (lambda * d)).ln();
    noise * (2.0 * (1.0 / delta).ln() + log_det).sqrt() + lambda.sqrt() * norm_bound
}

// Widths are recomputed from the factorization this often to stop the
// rank-one downdates from drifting.
const CACHE_REFRESH: usize = 256;

/// Per-arm quantities for a fixed feature matrix, reused across rounds while
/// the context hands out the same allocation.
#[derive(Debug, Clone)]
struct ArmCache {
    source: Arc<DMatrix<f64>>,
    projected: DMatrix<f64>,
    width_sq: DVector<f64>,
    age: usize,
}

/// linUCB that only looks at the first `d_hat` coordinates of each arm's
/// feature vector.
#[derive(Debug, Clone)]
pub struct LinUcb {
    state: LinUcbState,
    cache: Option<ArmCache>,
}

pub fn make_restricted_linucb(d_hat: usize, lambda: f64, beta: f64) -> Result<LinUcb> {
    Ok(LinUcb {
        state: LinUcbState::new(d_hat, lambda, beta)?,
        cache: None,
    })
}

impl LinUcb {
    pub fn with_solve_mode(mut self, mode: SolveMode) -> Self {
        self.state = self.state.with_solve_mode(mode);
        self
    }

    pub fn d_hat(&self) -> usize {
        self.state.dim()
    }

    pub fn state(&self) -> &LinUcbState {
        &self.state
    }

    fn project(&self, context: &Context) -> Result<(Arc<DMatrix<f64>>, DMatrix<f64>)> {
        let features = context.require_features()?;
        let d_hat = self.d_hat();
        if features.nrows() < d_hat {
            return Err(Error::DimensionMismatch {
                expected: d_hat,
                got: features.nrows(),
            });
        }
        Ok((features.clone(), features.rows(0, d_hat).into_owned()))
    }

    fn cache_for(&mut self, context: &Context) -> Result<&ArmCache> {
        let fresh = match (&self.cache, context.features()) {
            (Some(c), Some(f)) => !Arc::ptr_eq(&c.source, f),
            _ => true,
        };
        if fresh {
            let (source, projected) = self.project(context)?;
            let width_sq = self.full_widths(&projected);
            self.cache = Some(ArmCache {
                source,
                projected,
                width_sq,
                age: 0,
            });
        }
        Ok(self.cache.as_ref().expect("cache populated above"))
    }

    fn full_widths(&self, projected: &DMatrix<f64>) -> DVector<f64> {
        let v = self.state.chol.solve(projected);
        DVector::from_iterator(
            projected.ncols(),
            (0..projected.ncols()).map(|j| projected.column(j).dot(&v.column(j))),
        )
    }
}

impl BaseAlgorithm for LinUcb {
    fn propose(&mut self, context: &Context) -> Result<usize> {
        let beta = self.state.beta;
        let mu = self.state.mu_hat.clone();
        let cache = self.cache_for(context)?;
        if cache.projected.ncols() == 0 {
            return Err(Error::EmptyArmSet);
        }
        let est = cache.projected.tr_mul(&mu);
        let scores = est
            .iter()
            .zip(cache.width_sq.iter())
            .map(|(e, w)| e + beta * w.max(0.0).sqrt());
        argmax_first(scores).ok_or(Error::EmptyArmSet)
    }

    fn feedback(&mut self, context: &Context, action: usize, reward: f64) -> Result<()> {
        context.check_arm(action)?;
        let cached = matches!(
            (&self.cache, context.features()),
            (Some(c), Some(f)) if Arc::ptr_eq(&c.source, f)
        );
        if !cached {
            self.cache = None;
            let (_, projected) = self.project(context)?;
            return self.state.ridge_update(&projected.column(action), reward);
        }
        let cache = self.cache.as_mut().expect("checked above");
        let a = cache.projected.column(action).into_owned();
        // Sherman-Morrison on the quadratic forms: w_j -= (x_j^T M^{-1} a)^2 / (1 + a^T M^{-1} a).
        let v = self.state.chol.solve(&a);
        let denom = 1.0 + a.dot(&v);
        self.state.ridge_update(&a, reward)?;
        cache.age += 1;
        if cache.age >= CACHE_REFRESH {
            let projected = std::mem::take(&mut cache.projected);
            let widths = self.full_widths(&projected);
            let cache = self.cache.as_mut().expect("checked above");
            cache.projected = projected;
            cache.width_sq = widths;
            cache.age = 0;
        } else {
            let proj = cache.projected.tr_mul(&v);
            for (w, p) in cache.width_sq.iter_mut().zip(proj.iter()) {
                *w -= p * p / denom;
            }
        }
        Ok(())
    }

    fn reset(&mut self) {
        self.state.reset();
        self.cache = None;
    }

    fn name(&self) -> String {
        format!("linucb[d={}]", self.d_hat())
    }
}
