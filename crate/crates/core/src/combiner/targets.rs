use crate::combiner::config::{log_term, CombinerConfig};
use crate::contract::PutativeBound;
use crate::error::{Error, Result};

/// Positive weights used to spread the regret budget across learners.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPrior(Vec<f64>);

impl EtaPrior {
    pub fn new(etas: Vec<f64>) -> Result<Self> {
        if let Some(e) = etas.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::invalid(format!(
                "eta must be finite and > 0, got {e}"
            )));
        }
        Ok(Self(etas))
    }

    pub fn uniform(n: usize, eta: f64) -> Result<Self> {
        Self::new(vec![eta; n])
    }

    pub fn etas(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `x^((1-a)/a)`, taken as 1 at `a = 1` (including `x = 0`).
fn pow_ratio(x: f64, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        1.0
    } else {
        x.powf((1.0 - alpha) / alpha)
    }
}

/// Leading constant of the `C^(1/alpha) T eta^((1-alpha)/alpha)` term.
fn lead_coefficient(alpha: f64) -> f64 {
    pow_ratio(1.0 - alpha, alpha) * (1.0 + alpha).powf(1.0 / alpha) / pow_ratio(alpha, alpha)
}

/// Target regrets
/// `R_i = C_i T^a_i + k(a_i) C_i^(1/a_i) T eta_i^((1-a_i)/a_i) + 288 L T eta_i + sum_{k != i} 1/eta_k`.
pub fn target_regrets_from_eta(
    bounds: &[PutativeBound],
    prior: &EtaPrior,
    horizon: u64,
    delta: f64,
) -> Result<Vec<f64>> {
    if bounds.len() != prior.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            got: prior.len(),
        });
    }
    if horizon == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("targets need T >= 1 and delta in (0, 1)"));
    }
    let n = bounds.len();
    let t = horizon as f64;
    let l = log_term(horizon, n, delta);
    let inv_sum: f64 = prior.etas().iter().map(|e| 1.0 / e).sum();
    Ok(bounds
        .iter()
        .zip(prior.etas())
        .map(|(b, &eta)| {
            let (c, a) = (b.coefficient(), b.exponent());
            b.at(t)
                + lead_coefficient(a) * c.powf(1.0 / a) * t * pow_ratio(eta, a)
                + 288.0 * l * t * eta
                + (inv_sum - 1.0 / eta)
        })
        .collect())
}

/// `R_i = (C_i^2 + N) sqrt(T)`, the choice used in the experiments.
pub fn sqrt_t_targets(bounds: &[PutativeBound], horizon: u64) -> Vec<f64> {
    let n = bounds.len() as f64;
    let root = (horizon as f64).sqrt();
    bounds
        .iter()
        .map(|b| (b.coefficient().powi(2) + n) * root)
        .collect()
}

/// First branch of the per-learner requirement, in log space:
/// `(1-a)(1+a)^(1/(1-a)) (2C)^(1/(1-a)) T^(a/(1-a)) / (a R^(a/(1-a)))`.
fn polynomial_branch(bound: &PutativeBound, target: f64, t: f64) -> f64 {
    let (c, a) = (bound.coefficient(), bound.exponent());
    if c == 0.0 {
        return 0.0;
    }
    let q = 1.0 / (1.0 - a);
    let ln = (1.0 - a).ln() + q * (1.0 + a).ln() + q * (2.0 * c).ln() + a * q * t.ln()
        - a.ln()
        - a * q * target.ln();
    ln.exp()
}

/// Whether the targets are large enough for the high-probability guarantee:
/// `R_i >= C_i T^a_i` and `R_i >= sum_{k != i} max(poly_k, 288 L T / R_k)`.
///
/// At `a_k = 1` only the `288 L T / R_k` branch is used. A relative slack of
/// 1e-12 absorbs rounding when targets were built to meet the bound exactly.
pub fn check_target_regret_conditions(cfg: &CombinerConfig) -> Result<bool> {
    let n = cfg.n_bases();
    let t = cfg.horizon() as f64;
    let l = cfg.log_term();
    let targets = cfg.targets();
    let bounds = cfg.bounds();
    if n > 1 && targets.contains(&0.0) {
        return Err(Error::invalid(
            "zero target regret with several learners; use gap mode",
        ));
    }
    let need: Vec<f64> = (0..n)
        .map(|k| {
            let log_branch = 288.0 * l * t / targets[k];
            if bounds[k].exponent() >= 1.0 {
                log_branch
            } else {
                polynomial_branch(&bounds[k], targets[k], t).max(log_branch)
            }
        })
        .collect();
    let total: f64 = need.iter().sum();
    let slack = 1.0 + 1e-12;
    Ok((0..n).all(|i| {
        let others = if n == 1 { 0.0 } else { total - need[i] };
        let r = targets[i] * slack;
        r >= bounds[i].at(t) && r >= others
    }))
}

/// `sup_{Z >= 0} A Z^alpha - B Z = alpha^(alpha/(1-alpha)) (1-alpha) A^(1/(1-alpha)) / B^(alpha/(1-alpha))`.
pub fn alphabound_sup(a: f64, b: f64, alpha: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!(
            "A must be finite and >= 0, got {a}"
        )));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("B must be finite and > 0, got {b}")));
    }
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [0.5, 1), got {alpha}"
        )));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let q = 1.0 / (1.0 - alpha);
    let ln = alpha * q * alpha.ln() + (1.0 - alpha).ln() + q * a.ln() - alpha * q * b.ln();
    Ok(ln.exp())
}
