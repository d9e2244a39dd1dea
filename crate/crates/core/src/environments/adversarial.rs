use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sphere_columns;
use crate::contract::{Context, EnvDescription, Environment};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// How fresh action features are produced each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSchedule {
    /// Independent unit-sphere vectors every round.
    Spherical,
    /// Columns of a fixed random orthonormal basis, shifted by one each round:
    /// action `a` at round `t` gets column `(a + t) mod d`.
    Rotating,
}

/// Linear environment with a new feature map each round. Learners restricted
/// to a coordinate prefix see the first `d_i` rows of the feature matrix.
///
/// Observation noise is symmetric uniform with half-width
/// `min(noise, 1 - |mean|)`, so observations stay in `[-1, 1]` and their mean
/// is exactly the linear score.
#[derive(Debug, Clone)]
pub struct AdversarialLinearEnv {
    theta: DVector<f64>,
    d_star: usize,
    actions: usize,
    schedule: FeatureSchedule,
    basis: Option<DMatrix<f64>>,
    noise: f64,
    round: u64,
}

/// `theta_star` has length `d_star` and is zero-padded to `dim`.
pub fn make_adversarial_linear_env(
    dim: usize,
    d_star: usize,
    actions: usize,
    theta_star: &DVector<f64>,
    schedule: FeatureSchedule,
    rng: &mut SimRng,
) -> Result<AdversarialLinearEnv> {
    if dim == 0 || d_star == 0 || d_star > dim {
        return Err(Error::invalid(format!(
            "need 1 <= d_star <= d, got d_star = {d_star}, d = {dim}"
        )));
    }
    if actions == 0 {
        return Err(Error::EmptyArmSet);
    }
    if theta_star.len() != d_star {
        return Err(Error::DimensionMismatch {
            expected: d_star,
            got: theta_star.len(),
        });
    }
    if !(theta_star.norm() <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "parameter norm must be <= 1, got {}",
            theta_star.norm()
        )));
    }
    let mut theta = DVector::zeros(dim);
    theta.rows_mut(0, d_star).copy_from(theta_star);
    let basis = match schedule {
        FeatureSchedule::Spherical => None,
        FeatureSchedule::Rotating => {
            let g: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
            Some(g.qr().q())
        }
    };
    Ok(AdversarialLinearEnv {
        theta,
        d_star,
        actions,
        schedule,
        basis,
        noise: 0.1,
        round: 0,
    })
}

impl AdversarialLinearEnv {
    /// Sets the noise half-width cap.
    pub fn with_noise(mut self, noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(Error::invalid(format!(
                "noise half-width must lie in [0, 1], got {noise}"
            )));
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn d_star(&self) -> usize {
        self.d_star
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn schedule(&self) -> FeatureSchedule {
        self.schedule
    }

    fn next_features(&mut self, rng: &mut SimRng) -> DMatrix<f64> {
        let d = self.dim();
        let t = self.round;
        self.round += 1;
        match &self.basis {
            None => sphere_columns(d, self.actions, rng),
            Some(q) => DMatrix::from_fn(d, self.actions, |r, a| {
                q[(r, ((a as u64 + t) % d as u64) as usize)]
            }),
        }
    }
}

impl Environment for AdversarialLinearEnv {
    fn arms(&self) -> usize {
        self.actions
    }

    fn draw_context(&mut self, rng: &mut SimRng) -> Context {
        Context::with_features(Arc::new(self.next_features(rng)))
    }

    fn reward(&self, context: &Context, action: usize, rng: &mut SimRng) -> Result<f64> {
        let m = self.expected_reward(context, action)?;
        let w = self.noise.min(1.0 - m.abs()).max(0.0);
        if w == 0.0 {
            return Ok(m);
        }
        Ok(m + rng.random_range(-w..=w))
    }

    fn expected_reward(&self, context: &Context, action: usize) -> Result<f64> {
        context.check_arm(action)?;
        let x = context
            .feature(action)
            .ok_or_else(|| Error::invalid("context has no features"))?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.dot(&self.theta))
    }

    fn optimal_expected_reward(&self, context: &Context) -> f64 {
        context
            .features()
            .map(|f| f.tr_mul(&self.theta).max())
            .unwrap_or(0.0)
    }

    fn describe(&self) -> EnvDescription {
        let kind = match self.schedule {
            FeatureSchedule::Spherical => 0.0,
            FeatureSchedule::Rotating => 1.0,
        };
        EnvDescription::new("adversarial", self.actions, Some(self.dim()))
            .param("d_star", self.d_star as f64)
            .param("noise", self.noise)
            .param("rotating", kind)
    }
}
