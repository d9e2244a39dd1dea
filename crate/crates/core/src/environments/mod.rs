//! Synthetic test beds.

mod adversarial;
mod karmed;
mod linear;

pub use adversarial::{make_adversarial_linear_env, AdversarialLinearEnv, FeatureSchedule};
pub use karmed::{KArmedEnv, Noise};
pub use linear::{
    make_misspecified_env, make_model_selection_env, MisspecifiedLinearEnv, ModelSelectionEnv,
};

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::rng::SimRng;

/// Uniform draw from the unit sphere in `R^dim` (normalised Gaussian).
pub fn unit_sphere(dim: usize, rng: &mut SimRng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// `dim x count` matrix of independent unit-sphere columns.
pub fn sphere_columns(dim: usize, count: usize, rng: &mut SimRng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, count);
    for j in 0..count {
        m.set_column(j, &unit_sphere(dim, rng));
    }
    m
}

fn gaussian(sigma: f64, rng: &mut SimRng) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    }
}

fn best_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
