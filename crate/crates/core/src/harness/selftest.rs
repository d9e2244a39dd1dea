//! Quick oracle checks runnable from the command line.

use rand::{Rng, SeedableRng};

use super::calibrate::calibrate_putative_bound;
use super::oracle::{bracketed_sup, brute_force_cover, check_times};
use crate::bases::make_fixed_arm;
use crate::combiner::{
    alphabound_sup, build_doubling_grid, check_target_regret_conditions, target_regrets_from_eta,
    ucb_index, CombinerConfig, CombinerState, EtaPrior, TargetMode,
};
use crate::contract::PutativeBound;
use crate::environments::KArmedEnv;
use crate::error::Result;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn closed_form_sup(rng: &mut SimRng) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = rng.random_range(0.0..10.0);
        let b = rng.random_range(0.1..10.0);
        let alpha = rng.random_range(0.5..0.99);
        let closed = alphabound_sup(a, b, alpha)?;
        let scanned = bracketed_sup(a, b, alpha, 20_000);
        worst = worst.max((closed - scanned).abs() / closed.max(1e-300));
    }
    Ok(check(
        "alphabound",
        worst <= 1e-3,
        format!("max relative error {worst:.2e}"),
    ))
}

fn eta_targets(rng: &mut SimRng) -> Result<CheckResult> {
    let mut failures = 0;
    for _ in 0..50 {
        let n = rng.random_range(1..=5);
        let bounds = (0..n)
            .map(|_| PutativeBound::new(rng.random_range(0.0..20.0), rng.random_range(0.5..=1.0)))
            .collect::<Result<Vec<_>>>()?;
        let prior = EtaPrior::new((0..n).map(|_| rng.random_range(1e-3..1.0)).collect())?;
        let horizon = 10f64.powf(rng.random_range(2.0..5.0)) as u64;
        let delta = rng.random_range(0.01..0.2);
        let targets = target_regrets_from_eta(&bounds, &prior, horizon, delta)?;
        if !check_target_regret_conditions(&CombinerConfig::new(bounds, targets, horizon, delta)?)?
        {
            failures += 1;
        }
    }
    Ok(check(
        "eta-targets",
        failures == 0,
        format!("{failures} of 50 infeasible"),
    ))
}

fn grid_cover(rng: &mut SimRng) -> Result<CheckResult> {
    let mut failures = 0;
    for _ in 0..20 {
        let horizon = 2f64.powf(rng.random_range(2.0..14.0)) as u64;
        let c_bar = rng.random_range(1.0..horizon as f64);
        let alpha_bar = rng.random_range(0.5..=1.0);
        let grid = build_doubling_grid(1, horizon, 0.1, &EtaPrior::uniform(1, 1.0)?)?;
        if !brute_force_cover(
            &grid,
            0,
            c_bar,
            alpha_bar,
            &check_times(horizon, 1 << 10, 64),
        ) {
            failures += 1;
        }
    }
    Ok(check(
        "grid-cover",
        failures == 0,
        format!("{failures} of 20 uncovered"),
    ))
}

fn index_examples() -> Result<CheckResult> {
    let bound = PutativeBound::new(1.0, 0.5)?;
    let cfg = CombinerConfig::new(vec![bound; 2], vec![0.0, 0.0], 100, 0.1)?
        .with_target_mode(TargetMode::Gap);
    let fresh = ucb_index(0, &CombinerState::new(2), &cfg);
    let state = CombinerState::from_parts(vec![4, 0], vec![0.45, 0.0])?;
    let capped = ucb_index(0, &state, &cfg);
    let ok = fresh == 1.0 && (capped - 1.45).abs() < 1e-12;
    Ok(check(
        "index",
        ok,
        format!("unplayed {fresh}, capped {capped}"),
    ))
}

fn linear_calibration() -> Result<CheckResult> {
    let fit = calibrate_putative_bound(
        "fixed",
        || Ok(make_fixed_arm(1)),
        |_| KArmedEnv::gaussian(vec![0.5, 0.3], 0.0),
        100,
        0.5,
        2,
        0,
    )?;
    let ok = (fit.coefficient - 2.0).abs() < 1e-9;
    Ok(check(
        "calibration",
        ok,
        format!("C = {:.6}", fit.coefficient),
    ))
}

/// Runs every check with a fixed seed.
pub fn selftest(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = SimRng::seed_from_u64(seed);
    Ok(vec![
        closed_form_sup(&mut rng)?,
        eta_targets(&mut rng)?,
        grid_cover(&mut rng)?,
        index_examples()?,
        linear_calibration()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in selftest(1).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
