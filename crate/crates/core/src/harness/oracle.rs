//! Brute-force references for closed forms.

use crate::combiner::DoublingGrid;

/// `max over Z in {0, step, 2 step, ..} <= z_max` of `A Z^alpha - B Z`.
pub fn brute_force_sup(a: f64, b: f64, alpha: f64, z_max: f64, step: f64) -> f64 {
    assert!(step > 0.0, "step must be positive");
    let n = (z_max / step).floor() as u64;
    (0..=n)
        .map(|k| {
            let z = k as f64 * step;
            a * z.powf(alpha) - b * z
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// [`brute_force_sup`] on a window found by doubling or halving from `Z = 1`
/// until the objective turns over, scanned with `points` grid points.
pub fn bracketed_sup(a: f64, b: f64, alpha: f64, points: u64) -> f64 {
    let f = |z: f64| a * z.powf(alpha) - b * z;
    let mut z = 1.0;
    for _ in 0..1100 {
        if f(2.0 * z) <= f(z) {
            break;
        }
        z *= 2.0;
    }
    for _ in 0..1100 {
        if f(z / 2.0) <= f(z) {
            break;
        }
        z /= 2.0;
    }
    let hi = 4.0 * z;
    brute_force_sup(a, b, alpha, hi, hi / points as f64)
}

/// Whether some cell of `grid` for `original` satisfies
/// `c_bar t^alpha_bar <= C t^alpha <= 4 c_bar t^alpha_bar` at every `t` in
/// `ts`, checking every cell rather than the one the grid would pick.
pub fn brute_force_cover(
    grid: &DoublingGrid,
    original: usize,
    c_bar: f64,
    alpha_bar: f64,
    ts: &[f64],
) -> bool {
    let slack = 1e-12;
    grid.cells
        .iter()
        .filter(|c| c.original == original)
        .any(|cell| {
            ts.iter().all(|&t| {
                let truth = c_bar * t.powf(alpha_bar);
                let guess = cell.bound.at(t);
                guess >= truth * (1.0 - slack) && guess <= 4.0 * truth * (1.0 + slack)
            })
        })
}

/// `1..=horizon` when `horizon <= exhaustive_up_to`, otherwise `points`
/// log-spaced values from 1 to `horizon`.
pub fn check_times(horizon: u64, exhaustive_up_to: u64, points: usize) -> Vec<f64> {
    if horizon <= exhaustive_up_to {
        (1..=horizon).map(|t| t as f64).collect()
    } else {
        let top = (horizon as f64).ln();
        (0..points)
            .map(|k| {
                (top * k as f64 / (points - 1) as f64)
                    .exp()
                    .min(horizon as f64)
            })
            .collect()
    }
}
