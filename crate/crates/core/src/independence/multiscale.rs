//! Data-driven choices of k: MINTauto (select one k) and MINTav (average over k).

use std::fmt;

use serde::Serialize;

use super::permutation::{grid_weights, mint_unknown, permutations_for, permutations_in};
use super::{map_resamples, TestConfig, TestOutcome};
use crate::entropy::{kl_entropy_from_distances, WeightMode, WeightVector};
use crate::error::{MintError, Result};
use crate::knn::knn_distances;
use crate::points::{BlockedSample, PointSet};
use crate::rng::Domain;

/// A set of neighbour orders and the weighting used with them.
/// Defaults to the unweighted estimator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KGrid {
    ks: Vec<usize>,
    pub weight_mode: WeightMode,
}

impl KGrid {
    /// Sorts and deduplicates `ks`.
    pub fn new(mut ks: Vec<usize>) -> Result<Self> {
        ks.sort_unstable();
        ks.dedup();
        if ks.is_empty() || ks[0] == 0 {
            return Err(MintError::InvalidInput("k grid must be non-empty and positive".into()));
        }
        Ok(KGrid {
            ks,
            weight_mode: WeightMode::Unweighted,
        })
    }

    /// `{lo, …, hi}`.
    pub fn range(lo: usize, hi: usize) -> Result<Self> {
        Self::new((lo..=hi).collect())
    }

    pub fn weighted(mut self) -> Self {
        self.weight_mode = WeightMode::AutoSolve;
        self
    }

    pub fn ks(&self) -> &[usize] {
        &self.ks
    }

    fn max(&self) -> usize {
        *self.ks.last().expect("non-empty grid")
    }
}

impl fmt::Display for KGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let contiguous = self.ks.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous && self.ks.len() > 2 {
            write!(f, "{}-{}", self.ks[0], self.max())
        } else {
            let parts: Vec<String> = self.ks.iter().map(usize::to_string).collect();
            write!(f, "{}", parts.join(";"))
        }
    }
}

/// Joint entropies of `points` for every order in the grid, from one search.
fn grid_entropies(points: &PointSet, kmax: usize, weights: &[WeightVector]) -> Result<Vec<f64>> {
    let rho = knn_distances(points, kmax)?;
    Ok(weights
        .iter()
        .map(|w| kl_entropy_from_distances(&rho, points.d(), w))
        .collect())
}

/// Outcome of the k-selection step of MINTauto.
#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k_hat: usize,
    /// `Σⱼ (Ĥ⁽²ʲ⁾ − Ĥ⁽²ʲ⁻¹⁾)²` for each k in grid order.
    pub criteria: Vec<f64>,
}

/// Picks the k whose joint entropy estimate varies least between paired
/// permuted datasets; ties go to the smallest k.
///
/// `perms` holds the Y-block permutations `τ₁,…,τ_{2N}` in order.
pub fn select_k(sample: &BlockedSample, grid: &KGrid, perms: &[Vec<usize>], parallel: bool) -> Result<KSelection> {
    if perms.is_empty() || perms.len() % 2 != 0 {
        return Err(MintError::InvalidInput("need a positive even number of permutations".into()));
    }
    let n = sample.n();
    let d = sample.points().d();
    let weights = grid_weights(grid.ks(), d, grid.weight_mode, n)?;
    let kmax = grid.max();
    let entropies = map_resamples(perms.len(), parallel, |j| {
        let p = &perms[j as usize - 1];
        grid_entropies(&sample.permuted(std::slice::from_ref(p)), kmax, &weights)
    })?;

    let criteria: Vec<f64> = (0..grid.ks().len())
        .map(|i| {
            entropies
                .chunks_exact(2)
                .map(|pair| (pair[1][i] - pair[0][i]).powi(2))
                .sum()
        })
        .collect();
    let mut best = 0;
    for (i, c) in criteria.iter().enumerate() {
        if *c < criteria[best] {
            best = i;
        }
    }
    Ok(KSelection {
        k_hat: grid.ks()[best],
        criteria,
    })
}

/// MINTauto: choose k from `2·n_pairs` permutations drawn independently of
/// the test's own, then run MINTunknown with that k.
pub fn mint_auto(sample: &BlockedSample, grid: &KGrid, n_pairs: usize, config: &TestConfig) -> Result<TestOutcome> {
    if sample.num_blocks() != 2 {
        return Err(MintError::InvalidInput("MINTauto needs exactly 2 blocks".into()));
    }
    if n_pairs == 0 {
        return Err(MintError::InvalidInput("number of permutation pairs must be positive".into()));
    }
    config.validate(sample.n())?;
    let perms: Vec<Vec<usize>> = (1..=2 * n_pairs as u64)
        .map(|j| {
            permutations_in(config.seed, Domain::KSelection, j, sample.n(), 2)
                .pop()
                .expect("one permuted block")
        })
        .collect();
    let selection = select_k(sample, grid, &perms, config.parallel)?;
    let run = config
        .clone()
        .with_k(selection.k_hat)
        .with_weight_mode(grid.weight_mode);
    let mut outcome = mint_unknown(sample, &run)?;
    outcome.k_hat = Some(selection.k_hat);
    Ok(outcome)
}

/// MINTav: the statistic is minus the average joint entropy over the grid,
/// so the p-value counts resamples with `h̄⁽⁰⁾ ≥ h̄⁽ᵇ⁾`. A singleton grid
/// reproduces MINTunknown exactly.
pub fn mint_av(sample: &BlockedSample, grid: &KGrid, config: &TestConfig) -> Result<TestOutcome> {
    if sample.num_blocks() != 2 {
        return Err(MintError::InvalidInput("MINTav needs exactly 2 blocks".into()));
    }
    let n = sample.n();
    config.validate(n)?;
    let d = sample.points().d();
    let weights = grid_weights(grid.ks(), d, grid.weight_mode, n)?;
    let kmax = grid.max();
    let size = grid.ks().len() as f64;
    let averaged = |points: &PointSet| -> Result<f64> {
        let h = grid_entropies(points, kmax, &weights)?;
        Ok(-(h.iter().sum::<f64>() / size))
    };

    let observed = averaged(sample.points())?;
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let perms = permutations_for(config.seed, b, n, 2);
        averaged(&sample.permuted(&perms))
    })?;
    TestOutcome::from_statistics(observed, nulls, config.q, config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(n: usize, seed: u64, dependent: bool) -> BlockedSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let y: Vec<f64> = if dependent {
            x.iter().map(|v| (6.0 * v).sin() + 0.1 * rng.random::<f64>()).collect()
        } else {
            (0..n).map(|_| rng.random()).collect()
        };
        BlockedSample::from_xy(&PointSet::from_column(&x).unwrap(), &PointSet::from_column(&y).unwrap()).unwrap()
    }

    #[test]
    fn grid_parsing_and_display() {
        let g = KGrid::new(vec![5, 1, 3, 3]).unwrap();
        assert_eq!(g.ks(), &[1, 3, 5]);
        assert_eq!(g.to_string(), "1;3;5");
        assert_eq!(KGrid::range(1, 20).unwrap().to_string(), "1-20");
        assert!(KGrid::new(vec![]).is_err());
        assert!(KGrid::new(vec![0, 1]).is_err());
    }

    #[test]
    fn singleton_grid_selects_its_k() {
        let s = sample(80, 1, false);
        let o = mint_auto(&s, &KGrid::new(vec![5]).unwrap(), 10, &TestConfig::new(19, 0.05, 2)).unwrap();
        assert_eq!(o.k_hat, Some(5));
        assert_eq!(o.k, Some(5));
    }

    #[test]
    fn ties_go_to_smallest_k() {
        let s = sample(60, 2, true);
        let p = permutations_for(4, 1, 60, 2).pop().unwrap();
        let duplicated = vec![p.clone(), p.clone(), p.clone(), p];
        let sel = select_k(&s, &KGrid::new(vec![7, 2, 4]).unwrap(), &duplicated, false).unwrap();
        assert!(sel.criteria.iter().all(|&c| c == 0.0));
        assert_eq!(sel.k_hat, 2);
    }

    #[test]
    fn auto_matches_unknown_at_selected_k() {
        let s = sample(80, 3, true);
        let c = TestConfig::new(19, 0.05, 6);
        let grid = KGrid::range(1, 6).unwrap();
        let auto = mint_auto(&s, &grid, 5, &c).unwrap();
        let k = auto.k_hat.unwrap();
        assert!(grid.ks().contains(&k));
        let direct = mint_unknown(&s, &c.clone().with_k(k).with_weight_mode(WeightMode::Unweighted)).unwrap();
        assert_eq!(auto.p_value, direct.p_value);
        assert_eq!(auto.null_stats, direct.null_stats);
    }

    #[test]
    fn singleton_av_is_unknown() {
        for seed in 0..6 {
            let s = sample(70, seed, seed % 2 == 0);
            let c = TestConfig::new(29, 0.05, seed).with_weight_mode(WeightMode::Unweighted);
            let av = mint_av(&s, &KGrid::new(vec![4]).unwrap(), &c).unwrap();
            let unk = mint_unknown(&s, &c.clone().with_k(4)).unwrap();
            assert_eq!(av.statistic, unk.statistic);
            assert_eq!(av.null_stats, unk.null_stats);
            assert_eq!(av.reject, unk.reject);
        }
    }

    #[test]
    fn av_detects_dependence() {
        let s = sample(150, 9, true);
        let o = mint_av(&s, &KGrid::range(1, 10).unwrap(), &TestConfig::new(49, 0.05, 1)).unwrap();
        assert!(o.reject);
    }
}
