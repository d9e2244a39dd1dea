//! Combiner for linUCB learners that see adversarially chosen feature maps.
//!
//! Every learner keeps its own ridge ellipsoid over a coordinate prefix of the
//! round's features. A learner is dropped once its residuals drift above the
//! optimistic predictions (the z-statistic) or once its accumulated
//! exploration bonus outgrows its claimed regret envelope.

use nalgebra::{DMatrix, DVector, Dyn, Matrix, Storage};

use crate::bases::{argmax_first, LinUcbState};
use crate::contract::{Environment, PutativeBound};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::trace::RegretTrace;

/// The confidence expression
/// `4160 ln((T log2(sqrt(T / ln(T/delta))) + 2) / delta) + 6 lambda + 16 d ln(1 + T/lambda)`.
pub fn beta_expression(horizon: u64, dim: usize, lambda: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if horizon < 2 {
        return Err(Error::invalid("confidence scale needs T >= 2"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    let t = horizon as f64;
    let inner = (t / (t / delta).ln()).sqrt().log2();
    let arg = (t * inner + 2.0) / delta;
    if !(arg > 0.0) {
        return Err(Error::invalid(format!(
            "confidence log argument is not positive (T = {horizon}, delta = {delta})"
        )));
    }
    Ok(4160.0 * arg.ln() + 6.0 * lambda + 16.0 * dim as f64 * (1.0 + t / lambda).ln())
}

/// Ellipsoid radius: the square root of [`beta_expression`].
pub fn beta_scale(horizon: u64, dim: usize, lambda: f64, delta: f64) -> Result<f64> {
    Ok(beta_expression(horizon, dim, lambda, delta)?.sqrt())
}

/// Default envelope for a learner of dimension `dim` under radius `beta`:
/// `2 beta sqrt(dim ln(1 + 2T/lambda)) t^(1/2)`.
pub fn default_bound(beta: f64, dim: usize, lambda: f64, horizon: u64) -> Result<PutativeBound> {
    let c = 2.0 * beta * (dim as f64 * (1.0 + 2.0 * horizon as f64 / lambda).ln()).sqrt();
    PutativeBound::new(c, 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvConfig {
    dims: Vec<usize>,
    bounds: Vec<PutativeBound>,
    targets: Vec<f64>,
    horizon: u64,
    delta: f64,
    lambda: f64,
    betas: Vec<f64>,
}

impl AdvConfig {
    /// Per-learner radius from [`beta_scale`] at each learner's own dimension
    /// and envelopes from [`default_bound`].
    pub fn new(
        dims: Vec<usize>,
        targets: Vec<f64>,
        horizon: u64,
        delta: f64,
        lambda: f64,
    ) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("combiner needs at least one base learner"));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("learner dimension must be >= 1"));
        }
        if targets.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                got: targets.len(),
            });
        }
        if targets.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid("target regrets must be finite and >= 0"));
        }
        if !(lambda >= 2.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be >= 2, got {lambda}")));
        }
        let betas = dims
            .iter()
            .map(|&d| beta_scale(horizon, d, lambda, delta))
            .collect::<Result<Vec<_>>>()?;
        let bounds = dims
            .iter()
            .zip(&betas)
            .map(|(&d, &b)| default_bound(b, d, lambda, horizon))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dims,
            bounds,
            targets,
            horizon,
            delta,
            lambda,
            betas,
        })
    }

    /// Uses the confidence expression itself, not its square root, as the
    /// radius. Envelopes are recomputed from the new radii.
    pub fn with_literal_beta(mut self) -> Result<Self> {
        for i in 0..self.dims.len() {
            self.betas[i] = beta_expression(self.horizon, self.dims[i], self.lambda, self.delta)?;
            self.bounds[i] = default_bound(self.betas[i], self.dims[i], self.lambda, self.horizon)?;
        }
        Ok(self)
    }

    pub fn with_bounds(mut self, bounds: Vec<PutativeBound>) -> Result<Self> {
        if bounds.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                got: bounds.len(),
            });
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn with_betas(mut self, betas: Vec<f64>) -> Result<Self> {
        if betas.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                got: betas.len(),
            });
        }
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::invalid("radius must be finite and >= 0"));
        }
        self.betas = betas;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn bounds(&self) -> &[PutativeBound] {
        &self.bounds
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_bases(&self) -> usize {
        self.dims.len()
    }
}

/// One learner's ellipsoid and elimination statistics.
#[derive(Debug, Clone)]
pub struct BaseEllipsoid {
    pub lin: LinUcbState,
    pub count: u64,
    /// Running sum of z-statistics.
    pub z_sum: f64,
    /// Running sum of `2 beta sqrt(a^T M^{-1} a)`.
    pub bonus_sum: f64,
    pub active: bool,
}

impl BaseEllipsoid {
    /// `(theta - mu_hat)^T M (theta - mu_hat)`.
    pub fn mahalanobis_sq(&self, theta: &DVector<f64>) -> Result<f64> {
        if theta.len() != self.lin.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.lin.dim(),
                got: theta.len(),
            });
        }
        let diff = theta - self.lin.estimate();
        Ok(diff.dot(&(self.lin.matrix() * &diff)))
    }

    /// Whether `theta` lies outside `{ (theta - mu_hat)^T M (theta - mu_hat) <= beta^2 }`.
    pub fn excludes(&self, theta: &DVector<f64>) -> Result<bool> {
        Ok(self.mahalanobis_sq(theta)? > self.lin.beta().powi(2))
    }
}

#[derive(Debug, Clone)]
pub struct EllipsoidState {
    bases: Vec<BaseEllipsoid>,
    round: u64,
    fallback_resets: u32,
}

impl EllipsoidState {
    pub fn new(cfg: &AdvConfig) -> Result<Self> {
        let bases = cfg
            .dims()
            .iter()
            .zip(cfg.betas())
            .map(|(&d, &b)| {
                Ok(BaseEllipsoid {
                    lin: LinUcbState::new(d, cfg.lambda(), b)?,
                    count: 0,
                    z_sum: 0.0,
                    bonus_sum: 0.0,
                    active: true,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bases,
            round: 0,
            fallback_resets: 0,
        })
    }

    pub fn base(&self, i: usize) -> &BaseEllipsoid {
        &self.bases[i]
    }

    pub fn bases(&self) -> &[BaseEllipsoid] {
        &self.bases
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn fallback_resets(&self) -> u32 {
        self.fallback_resets
    }

    pub fn active_count(&self) -> usize {
        self.bases.iter().filter(|b| b.active).count()
    }

    /// Plays feature `a` for learner `i` and observes `r_hat`: updates the
    /// z-sum and bonus-sum from the pre-update ellipsoid, then the ridge fit.
    pub fn record_feedback<S: Storage<f64, Dyn>>(
        &mut self,
        i: usize,
        a: &Matrix<f64, Dyn, nalgebra::U1, S>,
        r_hat: f64,
    ) -> Result<()> {
        let base = &mut self.bases[i];
        let z = z_statistic(&base.lin, a, r_hat)?;
        let w = base.lin.width(a)?;
        base.lin.ridge_update(a, r_hat)?;
        base.z_sum += z;
        base.bonus_sum += 2.0 * base.lin.beta() * w;
        base.count += 1;
        self.round += 1;
        Ok(())
    }

    fn ensure_nonempty(&mut self) -> bool {
        if self.bases.iter().any(|b| b.active) {
            return false;
        }
        self.bases.iter_mut().for_each(|b| b.active = true);
        self.fallback_resets += 1;
        true
    }
}

/// Learner's optimistic value and the action achieving it.
fn optimistic<S: Storage<f64, Dyn, Dyn>>(
    lin: &LinUcbState,
    features: &Matrix<f64, Dyn, Dyn, S>,
) -> Result<(f64, usize)> {
    let action = lin.select(features)?;
    Ok((lin.score(&features.column(action))?, action))
}

/// `max_a <a, mu_hat> + beta sqrt(a^T M^{-1} a) - R_i / T` over the columns of
/// `features` (already restricted to learner `i`'s dimension).
pub fn adv_ucb_index<S: Storage<f64, Dyn, Dyn>>(
    state: &EllipsoidState,
    i: usize,
    features: &Matrix<f64, Dyn, Dyn, S>,
    cfg: &AdvConfig,
) -> Result<f64> {
    let (u, _) = optimistic(&state.bases[i].lin, features)?;
    Ok(u - cfg.targets()[i] / cfg.horizon() as f64)
}

/// `<a, mu_hat> - r_hat - beta sqrt(a^T M^{-1} a)` under the given
/// (pre-update) ellipsoid.
pub fn z_statistic<S: Storage<f64, Dyn>>(
    lin: &LinUcbState,
    a: &Matrix<f64, Dyn, nalgebra::U1, S>,
    r_hat: f64,
) -> Result<f64> {
    Ok(a.dot(lin.estimate()) - r_hat - lin.beta() * lin.width(a)?)
}

/// True when learner `i`'s z-sum exceeds `2 sqrt(t ln(T/delta))` or its
/// bonus-sum exceeds `C_i t^alpha_i`, with `t` its play count.
pub fn adv_elimination_test(state: &EllipsoidState, i: usize, cfg: &AdvConfig) -> bool {
    let base = &state.bases[i];
    if base.count == 0 {
        return false;
    }
    let t = base.count as f64;
    let z_limit = 2.0 * (t * (cfg.horizon() as f64 / cfg.delta()).ln()).sqrt();
    base.z_sum > z_limit || base.bonus_sum > cfg.bounds()[i].at(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvStepOutcome {
    pub chosen: usize,
    pub action: usize,
    pub reward: f64,
    pub eliminated: bool,
    pub reinstated: bool,
}

pub struct AdversarialCombiner {
    cfg: AdvConfig,
    state: EllipsoidState,
    trace: RegretTrace,
}

impl AdversarialCombiner {
    pub fn new(cfg: AdvConfig) -> Result<Self> {
        let state = EllipsoidState::new(&cfg)?;
        Ok(Self {
            cfg,
            state,
            trace: RegretTrace::new(),
        })
    }

    pub fn config(&self) -> &AdvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EllipsoidState {
        &self.state
    }

    pub fn trace(&self) -> &RegretTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RegretTrace {
        self.trace
    }

    pub fn step<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        rng: &mut SimRng,
    ) -> Result<AdvStepOutcome> {
        let context = env.draw_context(rng);
        let features = context.require_features()?.clone();
        let max_dim = *self.cfg.dims().iter().max().expect("nonempty");
        if features.nrows() < max_dim {
            return Err(Error::DimensionMismatch {
                expected: max_dim,
                got: features.nrows(),
            });
        }
        let n = self.cfg.n_bases();
        let horizon = self.cfg.horizon() as f64;
        let candidates: Vec<usize> = match (0..n)
            .filter(|&i| self.state.bases[i].active)
            .collect::<Vec<_>>()
        {
            v if v.is_empty() => (0..n).collect(),
            v => v,
        };
        let mut picks = Vec::with_capacity(candidates.len());
        for &i in &candidates {
            let view = features.rows(0, self.cfg.dims()[i]);
            let (u, a) = optimistic(&self.state.bases[i].lin, &view)?;
            picks.push((u - self.cfg.targets()[i] / horizon, a));
        }
        let k = argmax_first(picks.iter().map(|p| p.0)).ok_or(Error::EmptyArmSet)?;
        let (i, action) = (candidates[k], picks[k].1);

        let reward = env.reward(&context, action, rng)?;
        let a: DVector<f64> = features
            .view((0, action), (self.cfg.dims()[i], 1))
            .column(0)
            .into_owned();
        self.state.record_feedback(i, &a, reward)?;
        let eliminated =
            self.state.bases[i].active && adv_elimination_test(&self.state, i, &self.cfg);
        if eliminated {
            self.state.bases[i].active = false;
        }
        let reinstated = self.state.ensure_nonempty();
        if reinstated {
            self.trace.fallback_resets += 1;
        }
        let best = env.optimal_expected_reward(&context);
        let got = env.expected_reward(&context, action)?;
        self.trace
            .accumulate(best, got, i, self.state.active_count());
        Ok(AdvStepOutcome {
            chosen: i,
            action,
            reward,
            eliminated,
            reinstated,
        })
    }

    pub fn run_rounds<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        rounds: u64,
        rng: &mut SimRng,
    ) -> Result<()> {
        for _ in 0..rounds {
            self.step(env, rng)?;
        }
        Ok(())
    }
}

/// Runs the adversarial combiner for the configured horizon.
pub fn run_adversarial<E: Environment + ?Sized>(
    env: &mut E,
    cfg: AdvConfig,
    rng: &mut SimRng,
) -> Result<RegretTrace> {
    let horizon = cfg.horizon();
    let mut c = AdversarialCombiner::new(cfg)?;
    c.run_rounds(env, horizon, rng)?;
    Ok(c.into_trace())
}

/// Helper for callers holding a plain matrix of features.
pub fn prefix(features: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    features.rows(0, dim).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::make_restricted_linucb;
    use crate::contract::BaseAlgorithm;
    use crate::environments::{make_adversarial_linear_env, FeatureSchedule};
    use crate::rng::fork_rng;

    #[test]
    fn beta_example() {
        // Term by term: ln((1000 log2(sqrt(1000 / ln 20000)) + 2) / 0.05), 6 * 2, 16 * 4 ln(501).
        let t = 1000f64;
        let l1 = ((t * (t / (t / 0.05).ln()).sqrt().log2() + 2.0) / 0.05).ln();
        let expect = 4160.0 * l1 + 12.0 + 64.0 * 501f64.ln();
        let got = beta_expression(1000, 4, 2.0, 0.05).unwrap();
        assert!((got - expect).abs() < 1e-9);
        assert!((got - 4.66e4).abs() < 100.0);
        assert!((beta_scale(1000, 4, 2.0, 0.05).unwrap() - 216.0).abs() < 0.5);
    }

    #[test]
    fn beta_monotone() {
        let b = |d, delta| beta_scale(1000, d, 2.0, delta).unwrap();
        assert!(b(8, 0.05) > b(4, 0.05));
        assert!(b(4, 0.05) > b(4, 0.5));
        assert!(beta_scale(1, 4, 2.0, 0.05).is_err());
        assert!(beta_scale(100, 4, 2.0, 1.0).is_err());
    }

    fn cfg1(d: usize, beta: f64) -> AdvConfig {
        AdvConfig::new(vec![d], vec![0.0], 1000, 0.05, 2.0)
            .unwrap()
            .with_betas(vec![beta])
            .unwrap()
    }

    #[test]
    fn index_fresh_state() {
        let cfg = cfg1(3, 1.0);
        let s = EllipsoidState::new(&cfg).unwrap();
        let one = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 0.0]);
        assert_eq!(adv_ucb_index(&s, 0, &one, &cfg).unwrap(), 0.0);

        let beta = 7.0;
        let cfg = AdvConfig::new(vec![2], vec![50.0], 1000, 0.05, 2.0)
            .unwrap()
            .with_betas(vec![beta])
            .unwrap();
        let s = EllipsoidState::new(&cfg).unwrap();
        let f = DMatrix::from_column_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
        let want = beta * 1.0 / 2f64.sqrt() - 50.0 / 1000.0;
        assert!((adv_ucb_index(&s, 0, &f, &cfg).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn index_greedy_at_zero_beta() {
        let cfg = cfg1(2, 0.0);
        let mut s = EllipsoidState::new(&cfg).unwrap();
        s.record_feedback(0, &DVector::from_vec(vec![1.0, 0.0]), 0.8)
            .unwrap();
        let f = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let mu = s.base(0).lin.estimate().clone();
        let want = mu[0].max(mu[1]);
        assert!((adv_ucb_index(&s, 0, &f, &cfg).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn target_shift_keeps_action() {
        let mut rng = fork_rng(8, 0);
        let f = crate::environments::sphere_columns(3, 9, &mut rng);
        let base = AdvConfig::new(vec![3], vec![0.0], 500, 0.1, 2.0).unwrap();
        let mut s = EllipsoidState::new(&base).unwrap();
        for j in 0..5 {
            s.record_feedback(0, &f.column(j), 0.1 * j as f64).unwrap();
        }
        let (_, a0) = optimistic(&s.base(0).lin, &f).unwrap();
        for r in [1.0, 100.0, 1e4] {
            let shifted = AdvConfig::new(vec![3], vec![r], 500, 0.1, 2.0).unwrap();
            let u0 = adv_ucb_index(&s, 0, &f, &base).unwrap();
            let u1 = adv_ucb_index(&s, 0, &f, &shifted).unwrap();
            assert!((u0 - u1 - r / 500.0).abs() < 1e-9);
            assert_eq!(optimistic(&s.base(0).lin, &f).unwrap().1, a0);
        }
    }

    #[test]
    fn z_statistic_cases() {
        let lin = LinUcbState::new(2, 2.0, 1.0).unwrap();
        let zero = DVector::zeros(2);
        assert_eq!(z_statistic(&lin, &zero, 0.3).unwrap(), -0.3);
        let a = DVector::from_vec(vec![0.6, 0.8]);
        assert!(z_statistic(&lin, &a, 0.0).unwrap() <= 0.0);

        // M = 2I, b = 2 e1, so mu_hat = e1.
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let lin =
            LinUcbState::from_parts(2.0, 1.0, DMatrix::identity(2, 2) * 2.0, &e1 * 2.0).unwrap();
        let want = 1.0 - 0.5 - 1.0 / 2f64.sqrt();
        assert!((want + 0.2071).abs() < 1e-4);
        assert!((z_statistic(&lin, &e1, 0.5).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn elimination_cases() {
        let cfg = AdvConfig::new(vec![2], vec![0.0], 1000, 0.05, 2.0)
            .unwrap()
            .with_bounds(vec![PutativeBound::new(0.0, 0.5).unwrap()])
            .unwrap();
        let mut s = EllipsoidState::new(&cfg).unwrap();
        assert!(!adv_elimination_test(&s, 0, &cfg));
        s.record_feedback(0, &DVector::from_vec(vec![1.0, 0.0]), 0.2)
            .unwrap();
        let beta = cfg.betas()[0];
        assert!((s.base(0).bonus_sum - 2.0 * beta / 2f64.sqrt()).abs() < 1e-9);
        assert!(adv_elimination_test(&s, 0, &cfg));

        let loose = cfg
            .clone()
            .with_bounds(vec![PutativeBound::new(1e9, 0.5).unwrap()])
            .unwrap();
        let mut s = EllipsoidState::new(&loose).unwrap();
        let mut rng = fork_rng(2, 0);
        for _ in 0..2000 {
            let a = crate::environments::unit_sphere(2, &mut rng);
            let r = a.dot(s.base(0).lin.estimate()) + 0.5;
            s.record_feedback(0, &a, r).unwrap();
            assert!(!adv_elimination_test(&s, 0, &loose));
        }
    }

    #[test]
    fn single_base_matches_plain_linucb() {
        let theta = DVector::from_vec(vec![0.6, -0.3, 0.2, 0.5]);
        let t = 400;
        let cfg = AdvConfig::new(vec![4], vec![10.0], t, 0.1, 2.0).unwrap();
        let beta = cfg.betas()[0];

        let mut env_rng = fork_rng(17, 0);
        let mut env =
            make_adversarial_linear_env(4, 4, 12, &theta, FeatureSchedule::Spherical, &mut env_rng)
                .unwrap();
        let mut rng = fork_rng(17, 1);
        let mut comb = AdversarialCombiner::new(cfg).unwrap();
        let mut comb_actions = Vec::new();
        for _ in 0..t {
            comb_actions.push(comb.step(&mut env, &mut rng).unwrap().action);
        }

        let mut env_rng = fork_rng(17, 0);
        let mut env =
            make_adversarial_linear_env(4, 4, 12, &theta, FeatureSchedule::Spherical, &mut env_rng)
                .unwrap();
        let mut rng = fork_rng(17, 1);
        let mut base = make_restricted_linucb(4, 2.0, beta).unwrap();
        let mut plain_actions = Vec::new();
        for _ in 0..t {
            let c = env.draw_context(&mut rng);
            let a = base.propose(&c).unwrap();
            let r = env.reward(&c, a, &mut rng).unwrap();
            base.feedback(&c, a, r).unwrap();
            plain_actions.push(a);
        }
        assert_eq!(comb_actions, plain_actions);
    }

    #[test]
    fn same_seed_same_trace_and_eliminated_not_replayed() {
        let theta = DVector::from_vec(vec![0.7, 0.1]);
        let go = || {
            let mut env_rng = fork_rng(4, 0);
            let mut env = make_adversarial_linear_env(
                6,
                2,
                10,
                &theta,
                FeatureSchedule::Rotating,
                &mut env_rng,
            )
            .unwrap();
            let cfg = AdvConfig::new(vec![2, 6], vec![0.0, 0.0], 300, 0.1, 2.0)
                .unwrap()
                .with_bounds(vec![
                    PutativeBound::new(1e6, 0.5).unwrap(),
                    PutativeBound::new(50.0, 0.5).unwrap(),
                ])
                .unwrap();
            let mut rng = fork_rng(4, 1);
            let mut c = AdversarialCombiner::new(cfg).unwrap();
            let mut dropped_at = None;
            for t in 0..300 {
                let o = c.step(&mut env, &mut rng).unwrap();
                if let Some(i) = dropped_at {
                    assert_ne!(o.chosen, i, "eliminated learner replayed at {t}");
                }
                if o.eliminated && !o.reinstated {
                    dropped_at = Some(o.chosen);
                }
            }
            assert!(dropped_at.is_some());
            c.into_trace()
        };
        let (a, b) = (go(), go());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn bonus_budget_along_trajectory() {
        let lambda = 2.0;
        let d = 4;
        let cfg = AdvConfig::new(vec![d], vec![0.0], 2000, 0.1, lambda).unwrap();
        let mut s = EllipsoidState::new(&cfg).unwrap();
        let beta = cfg.betas()[0];
        let mut rng = fork_rng(9, 0);
        for t in 1..=2000u64 {
            let a = crate::environments::unit_sphere(d, &mut rng);
            s.record_feedback(0, &a, 0.0).unwrap();
            let t = t as f64;
            let budget = beta * (d as f64 * t * (1.0 + 2.0 * t / lambda).ln()).sqrt();
            assert!(s.base(0).bonus_sum / 2.0 <= budget);
        }
    }
}
