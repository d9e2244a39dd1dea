use crate::combiner::targets::EtaPrior;
use crate::contract::PutativeBound;
use crate::error::{Error, Result};

/// One duplicate of an original learner with a guessed envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub original: usize,
    /// Confidence copy, `1..=m`.
    pub x: u32,
    /// Coefficient exponent, `C = 2^y`, `1..=k`.
    pub y: u32,
    /// Exponent step, `alpha = min(1, 1/2 + z / log2 T)`, `1..=l`.
    pub z: u32,
    pub bound: PutativeBound,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingGrid {
    pub m: u32,
    pub k: u32,
    pub l: u32,
    /// Ordered by original, then x, y, z.
    pub cells: Vec<GridCell>,
}

impl DoublingGrid {
    pub fn per_original(&self) -> usize {
        (self.m * self.k * self.l) as usize
    }

    pub fn bounds(&self) -> Vec<PutativeBound> {
        self.cells.iter().map(|c| c.bound).collect()
    }

    pub fn prior(&self) -> Result<EtaPrior> {
        EtaPrior::new(self.cells.iter().map(|c| c.eta).collect())
    }

    /// Cell for `original` covering a learner with true envelope
    /// `c_bar t^alpha_bar`, if the grid reaches that far.
    pub fn covering_cell(
        &self,
        original: usize,
        c_bar: f64,
        alpha_bar: f64,
        horizon: u64,
    ) -> Option<&GridCell> {
        let lg = (horizon as f64).log2();
        let y = (c_bar.log2().ceil() as i64).max(1) as u32;
        let z = (((alpha_bar - 0.5) * lg).ceil() as i64).max(1) as u32;
        self.cells
            .iter()
            .find(|c| c.original == original && c.x == 1 && c.y == y && c.z == z)
    }
}

/// Duplicates each of `n_originals` learners over every `(x, y, z)` in
/// `[1, m] x [1, k] x [1, l]` with `m = ceil(log2(1/delta))`, `k = ceil(log2 T)`,
/// `l = ceil(log2(T) / 2)`.
pub fn build_doubling_grid(
    n_originals: usize,
    horizon: u64,
    delta: f64,
    prior: &EtaPrior,
) -> Result<DoublingGrid> {
    if horizon < 2 {
        return Err(Error::invalid("doubling grid needs T >= 2"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if prior.len() != n_originals {
        return Err(Error::DimensionMismatch {
            expected: n_originals,
            got: prior.len(),
        });
    }
    let lg = (horizon as f64).log2();
    let m = (1.0 / delta).log2().ceil() as u32;
    let k = lg.ceil() as u32;
    let l = (lg / 2.0).ceil() as u32;
    let mut cells = Vec::with_capacity(n_originals * (m * k * l) as usize);
    for original in 0..n_originals {
        for x in 1..=m {
            for y in 1..=k {
                for z in 1..=l {
                    let alpha = (0.5 + z as f64 / lg).min(1.0);
                    cells.push(GridCell {
                        original,
                        x,
                        y,
                        z,
                        bound: PutativeBound::new(2f64.powi(y as i32), alpha)?,
                        eta: prior.etas()[original],
                    });
                }
            }
        }
    }
    Ok(DoublingGrid { m, k, l, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_t16() {
        let p = EtaPrior::new(vec![0.1, 0.3]).unwrap();
        let g = build_doubling_grid(2, 16, 0.5, &p).unwrap();
        assert_eq!((g.m, g.k, g.l), (1, 4, 2));
        assert_eq!(g.per_original(), 8);
        assert_eq!(g.cells.len(), 16);
        let first: Vec<_> = g.cells.iter().filter(|c| c.original == 0).collect();
        let mut cs: Vec<f64> = first.iter().map(|c| c.bound.coefficient()).collect();
        cs.dedup();
        assert_eq!(cs, vec![2.0, 4.0, 8.0, 16.0]);
        let mut alphas: Vec<f64> = first.iter().map(|c| c.bound.exponent()).collect();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        assert_eq!(alphas, vec![0.75, 1.0]);
        assert!(g
            .cells
            .iter()
            .filter(|c| c.original == 1)
            .all(|c| c.eta == 0.3));
    }

    #[test]
    fn grid_t2_minimal() {
        let p = EtaPrior::new(vec![1.0]).unwrap();
        let g = build_doubling_grid(1, 2, 0.2, &p).unwrap();
        assert_eq!((g.k, g.l), (1, 1));
        assert_eq!(g.m, 3);
        assert!(g
            .cells
            .iter()
            .all(|c| c.bound.coefficient() == 2.0 && c.bound.exponent() == 1.0));
    }

    #[test]
    fn grid_rejects_short_horizon() {
        let p = EtaPrior::new(vec![1.0]).unwrap();
        assert!(build_doubling_grid(1, 1, 0.1, &p).is_err());
        assert!(build_doubling_grid(2, 8, 0.1, &p).is_err());
    }

    #[test]
    fn covering_cell_example() {
        let p = EtaPrior::new(vec![1.0]).unwrap();
        let g = build_doubling_grid(1, 16, 0.5, &p).unwrap();
        let cell = g.covering_cell(0, 3.0, 0.6, 16).unwrap();
        assert_eq!((cell.y, cell.z), (2, 1));
        assert_eq!(cell.bound.coefficient(), 4.0);
        assert_eq!(cell.bound.exponent(), 0.75);
        for t in 1..=16 {
            let t = t as f64;
            let truth = 3.0 * t.powf(0.6);
            let guess = cell.bound.at(t);
            assert!(truth <= guess && guess <= 4.0 * truth, "t={t}");
        }
    }
}
