use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::{best_of, gaussian, sphere_columns, unit_sphere};
use crate::contract::{Context, EnvDescription, Environment};
use crate::error::{Error, Result};
use crate::rng::SimRng;

const MAX_REJECTIONS: u32 = 100_000;

/// Fixed-context linear test bed whose rewards mix per-arm offsets with a
/// linear model: `alpha_mix mu_a + (1 - alpha_mix) sqrt(d) <beta, x_a>`.
///
/// The arm with the smallest linear score is given offset 1; every other
/// arm gets `0.25 sqrt(d) <beta, x_a>`.
#[derive(Debug, Clone)]
pub struct MisspecifiedLinearEnv {
    features: Arc<DMatrix<f64>>,
    beta: DVector<f64>,
    alpha_mix: f64,
    sigma: f64,
    offsets: Vec<f64>,
    worst_linear: usize,
    expected: Vec<f64>,
    best: f64,
    rejections: u32,
}

impl MisspecifiedLinearEnv {
    /// Builds the instance from given features (`d x K`) and parameter.
    pub fn from_parts(
        features: DMatrix<f64>,
        beta: DVector<f64>,
        alpha_mix: f64,
        sigma: f64,
    ) -> Result<Self> {
        let (d, k) = features.shape();
        if k < 2 || d == 0 {
            return Err(Error::invalid(
                "misspecified environment needs K >= 2 and d >= 1",
            ));
        }
        if beta.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: beta.len(),
            });
        }
        if !(0.0..=1.0).contains(&alpha_mix) {
            return Err(Error::invalid(format!(
                "mixing weight must lie in [0, 1], got {alpha_mix}"
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "noise scale must be >= 0, got {sigma}"
            )));
        }
        let scores: Vec<f64> = features.column_iter().map(|x| x.dot(&beta)).collect();
        let worst_linear = scores
            .iter()
            .enumerate()
            .fold(0, |w, (a, &s)| if s < scores[w] { a } else { w });
        let root_d = (d as f64).sqrt();
        let offsets: Vec<f64> = scores
            .iter()
            .enumerate()
            .map(|(a, &s)| {
                if a == worst_linear {
                    1.0
                } else {
                    0.25 * root_d * s
                }
            })
            .collect();
        let expected: Vec<f64> = scores
            .iter()
            .zip(&offsets)
            .map(|(&s, &mu)| alpha_mix * mu + (1.0 - alpha_mix) * root_d * s)
            .collect();
        let best = best_of(&expected);
        Ok(Self {
            features: Arc::new(features),
            beta,
            alpha_mix,
            sigma,
            offsets,
            worst_linear,
            expected,
            best,
            rejections: 0,
        })
    }

    pub fn features(&self) -> &Arc<DMatrix<f64>> {
        &self.features
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn alpha_mix(&self) -> f64 {
        self.alpha_mix
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn worst_linear_arm(&self) -> usize {
        self.worst_linear
    }

    pub fn expected_rewards(&self) -> &[f64] {
        &self.expected
    }

    /// Instances discarded because the offset arm was not strictly optimal.
    pub fn rejections(&self) -> u32 {
        self.rejections
    }

    fn offset_arm_strictly_best(&self) -> bool {
        let top = self.expected[self.worst_linear];
        self.expected
            .iter()
            .enumerate()
            .all(|(a, &v)| a == self.worst_linear || v < top)
    }
}

/// Random instance: features and parameter uniform on the unit sphere. With
/// `alpha_mix = 1` instances are redrawn until the offset arm is strictly
/// optimal.
pub fn make_misspecified_env(
    arms: usize,
    dim: usize,
    alpha_mix: f64,
    sigma: f64,
    rng: &mut SimRng,
) -> Result<MisspecifiedLinearEnv> {
    if arms < 2 || dim == 0 {
        return Err(Error::invalid(
            "misspecified environment needs K >= 2 and d >= 1",
        ));
    }
    let mut rejections = 0;
    loop {
        let features = sphere_columns(dim, arms, rng);
        let beta = unit_sphere(dim, rng);
        let mut env = MisspecifiedLinearEnv::from_parts(features, beta, alpha_mix, sigma)?;
        if alpha_mix < 1.0 || env.offset_arm_strictly_best() {
            env.rejections = rejections;
            return Ok(env);
        }
        rejections += 1;
        if rejections >= MAX_REJECTIONS {
            return Err(Error::Numerical(format!(
                "no instance with a strictly optimal offset arm after {rejections} draws (d = {dim})"
            )));
        }
    }
}

fn check_arm(arms: usize, action: usize) -> Result<()> {
    if action < arms {
        Ok(())
    } else {
        Err(Error::InvalidArm { arm: action, arms })
    }
}

impl Environment for MisspecifiedLinearEnv {
    fn arms(&self) -> usize {
        self.expected.len()
    }

    fn draw_context(&mut self, _rng: &mut SimRng) -> Context {
        Context::with_features(Arc::clone(&self.features))
    }

    fn reward(&self, context: &Context, action: usize, rng: &mut SimRng) -> Result<f64> {
        Ok(self.expected_reward(context, action)? + gaussian(self.sigma, rng))
    }

    fn expected_reward(&self, _context: &Context, action: usize) -> Result<f64> {
        check_arm(self.expected.len(), action)?;
        Ok(self.expected[action])
    }

    fn optimal_expected_reward(&self, _context: &Context) -> f64 {
        self.best
    }

    fn describe(&self) -> EnvDescription {
        EnvDescription::new("misspecified", self.arms(), Some(self.dim()))
            .param("alpha_mix", self.alpha_mix)
            .param("sigma", self.sigma)
            .param("offset_arm", self.worst_linear as f64)
            .param("best_mean", self.best)
            .param("rejections", self.rejections as f64)
    }
}

/// Fixed-context linear bandit whose parameter lives on the first `d_star`
/// coordinates.
#[derive(Debug, Clone)]
pub struct ModelSelectionEnv {
    features: Arc<DMatrix<f64>>,
    beta: DVector<f64>,
    d_star: usize,
    sigma: f64,
    expected: Vec<f64>,
    best: f64,
}

impl ModelSelectionEnv {
    pub fn from_parts(
        features: DMatrix<f64>,
        beta: DVector<f64>,
        d_star: usize,
        sigma: f64,
    ) -> Result<Self> {
        let (d, k) = features.shape();
        if k == 0 {
            return Err(Error::EmptyArmSet);
        }
        if beta.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: beta.len(),
            });
        }
        if d_star == 0 || d_star > d {
            return Err(Error::invalid(format!(
                "need 1 <= d_star <= d, got d_star = {d_star}, d = {d}"
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "noise scale must be >= 0, got {sigma}"
            )));
        }
        let expected: Vec<f64> = features.column_iter().map(|x| x.dot(&beta)).collect();
        let best = best_of(&expected);
        Ok(Self {
            features: Arc::new(features),
            beta,
            d_star,
            sigma,
            expected,
            best,
        })
    }

    pub fn features(&self) -> &Arc<DMatrix<f64>> {
        &self.features
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn d_star(&self) -> usize {
        self.d_star
    }

    pub fn expected_rewards(&self) -> &[f64] {
        &self.expected
    }
}

/// Random instance: arm features on the unit sphere in `R^dim`, parameter
/// Gaussian on its first `d_star` coordinates, zero elsewhere, normalised.
pub fn make_model_selection_env(
    arms: usize,
    dim: usize,
    d_star: usize,
    sigma: f64,
    rng: &mut SimRng,
) -> Result<ModelSelectionEnv> {
    if d_star == 0 || d_star > dim {
        return Err(Error::invalid(format!(
            "need 1 <= d_star <= d, got d_star = {d_star}, d = {dim}"
        )));
    }
    if arms == 0 {
        return Err(Error::EmptyArmSet);
    }
    let features = sphere_columns(dim, arms, rng);
    let mut beta = DVector::zeros(dim);
    loop {
        for j in 0..d_star {
            beta[j] = StandardNormal.sample(rng);
        }
        let n = beta.norm();
        if n > 1e-12 {
            beta /= n;
            break;
        }
    }
    ModelSelectionEnv::from_parts(features, beta, d_star, sigma)
}

impl Environment for ModelSelectionEnv {
    fn arms(&self) -> usize {
        self.expected.len()
    }

    fn draw_context(&mut self, _rng: &mut SimRng) -> Context {
        Context::with_features(Arc::clone(&self.features))
    }

    fn reward(&self, context: &Context, action: usize, rng: &mut SimRng) -> Result<f64> {
        Ok(self.expected_reward(context, action)? + gaussian(self.sigma, rng))
    }

    fn expected_reward(&self, _context: &Context, action: usize) -> Result<f64> {
        check_arm(self.expected.len(), action)?;
        Ok(self.expected[action])
    }

    fn optimal_expected_reward(&self, _context: &Context) -> f64 {
        self.best
    }

    fn describe(&self) -> EnvDescription {
        EnvDescription::new("modelselection", self.arms(), Some(self.dim()))
            .param("d_star", self.d_star as f64)
            .param("sigma", self.sigma)
            .param("best_mean", self.best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::fork_rng;

    #[test]
    fn pure_linear_without_noise() {
        let mut rng = fork_rng(1, 0);
        let mut env = make_misspecified_env(30, 5, 0.0, 0.0, &mut rng).unwrap();
        let ctx = env.draw_context(&mut rng);
        for a in 0..30 {
            let x = env.features().column(a);
            let lin = 5f64.sqrt() * x.dot(env.beta());
            assert!((env.reward(&ctx, a, &mut rng).unwrap() - lin).abs() < 1e-12);
        }
    }

    #[test]
    fn instance_invariants() {
        let mut rng = fork_rng(2, 0);
        let env = make_misspecified_env(50, 10, 0.5, 0.1, &mut rng).unwrap();
        assert!((env.beta().norm() - 1.0).abs() < 1e-9);
        for x in env.features().column_iter() {
            assert!((x.norm() - 1.0).abs() < 1e-9);
        }
        let scores: Vec<f64> = env
            .features()
            .column_iter()
            .map(|x| x.dot(env.beta()))
            .collect();
        let argmin = (0..50)
            .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
            .unwrap();
        assert_eq!(env.worst_linear_arm(), argmin);
        assert_eq!(env.offsets()[argmin], 1.0);
        for a in (0..50).filter(|&a| a != argmin) {
            assert!((env.offsets()[a] - 0.25 * 10f64.sqrt() * scores[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_hand_example() {
        // Arm 0 = e1 (not the offset arm), arm 1 = -e1 (offset arm), d = 4.
        let mut f = DMatrix::zeros(4, 2);
        f[(0, 0)] = 1.0;
        f[(0, 1)] = -1.0;
        let beta = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let env = MisspecifiedLinearEnv::from_parts(f, beta, 0.5, 0.1).unwrap();
        assert_eq!(env.worst_linear_arm(), 1);
        let c = Context::token(2);
        assert!((env.expected_reward(&c, 0).unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn offset_arm_optimal_when_fully_misspecified() {
        for seed in 0..20 {
            let mut rng = fork_rng(seed, 0);
            let env = make_misspecified_env(20, 16, 1.0, 0.1, &mut rng).unwrap();
            let c = Context::token(20);
            let star = env.worst_linear_arm();
            assert_eq!(env.expected_reward(&c, star).unwrap(), 1.0);
            assert_eq!(env.optimal_expected_reward(&c), 1.0);
            for a in (0..20).filter(|&a| a != star) {
                assert!(env.expected_reward(&c, a).unwrap() < 1.0);
            }
        }
    }

    #[test]
    fn small_dim_instances_always_have_best_offset_arm() {
        let mut rng = fork_rng(4, 0);
        let env = make_misspecified_env(10, 1, 1.0, 0.0, &mut rng).unwrap();
        assert!(env.offset_arm_strictly_best());
        assert!(make_misspecified_env(1, 3, 0.0, 0.0, &mut rng).is_err());
        assert!(make_misspecified_env(3, 3, 1.5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn model_selection_support() {
        let mut rng = fork_rng(5, 0);
        let env = make_model_selection_env(200, 128, 8, 0.1, &mut rng).unwrap();
        assert!((env.beta().norm() - 1.0).abs() < 1e-9);
        assert!(env.beta().rows(8, 120).iter().all(|&b| b == 0.0));
        assert!(env.beta().rows(0, 8).iter().all(|&b| b != 0.0));
        let c = Context::token(200);
        for a in [0, 17, 199] {
            let direct: f64 = (0..128)
                .map(|j| env.features()[(j, a)] * env.beta()[j])
                .sum();
            assert!((env.expected_reward(&c, a).unwrap() - direct).abs() < 1e-12);
        }
        let dense = make_model_selection_env(5, 6, 6, 0.1, &mut rng).unwrap();
        assert!(dense.beta().iter().all(|&b| b != 0.0));
        assert!(make_model_selection_env(5, 6, 7, 0.1, &mut rng).is_err());
        assert!(make_model_selection_env(5, 6, 0, 0.1, &mut rng).is_err());
    }

    #[test]
    fn empirical_mean_matches() {
        let mut rng = fork_rng(6, 0);
        let mut env = make_misspecified_env(5, 3, 0.5, 0.1, &mut rng).unwrap();
        let ctx = env.draw_context(&mut rng);
        let n = 100_000;
        let avg: f64 = (0..n)
            .map(|_| env.reward(&ctx, 2, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(
            (avg - env.expected_reward(&ctx, 2).unwrap()).abs() < 4.0 * 0.1 / (n as f64).sqrt()
        );
    }
}
