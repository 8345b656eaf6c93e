//! Permutation tests: MINTunknown and its multi-block extension.

use rand::seq::SliceRandom;

use super::{check_order, entropy_with, map_resamples, TestConfig, TestOutcome};
use crate::entropy::{kl_entropy_from_distances, WeightMode, WeightVector};
use crate::error::{MintError, Result};
use crate::knn::knn_distances;
use crate::points::BlockedSample;
use crate::rng::{self, Domain};

/// Uniform permutations of `0..n` for blocks `2..=num_blocks` of resample `b`,
/// drawn by Fisher–Yates from stream `(seed, b)`.
pub fn permutations_for(seed: u64, b: u64, n: usize, num_blocks: usize) -> Vec<Vec<usize>> {
    permutations_in(seed, Domain::Permutation, b, n, num_blocks)
}

pub(super) fn permutations_in(
    seed: u64,
    domain: Domain,
    b: u64,
    n: usize,
    num_blocks: usize,
) -> Vec<Vec<usize>> {
    let mut rng = rng::stream(seed, domain, b);
    (1..num_blocks)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect()
}

fn require_blocks(sample: &BlockedSample, min: usize) -> Result<()> {
    if sample.num_blocks() < min {
        return Err(MintError::InvalidInput(format!(
            "test needs at least {min} blocks, sample has {}",
            sample.num_blocks()
        )));
    }
    Ok(())
}

/// Permutation test of mutual independence of all blocks.
///
/// Block 1 stays fixed; every other block is reordered by its own uniform
/// permutation in each resample. The statistic is the negated joint
/// entropy, so larger means more dependent.
pub fn mint_multi(sample: &BlockedSample, config: &TestConfig) -> Result<TestOutcome> {
    require_blocks(sample, 2)?;
    let n = sample.n();
    config.validate(n)?;
    let k = config.joint_k(n);
    check_order(k, n)?;
    let mode = config.weight_mode;

    let observed = -entropy_with(sample.points(), k, mode)?;
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let perms = permutations_for(config.seed, b, n, sample.num_blocks());
        Ok(-entropy_with(&sample.permuted(&perms), k, mode)?)
    })?;
    Ok(TestOutcome::from_statistics(observed, nulls, config.q, config.seed)?.with_k(Some(k)))
}

/// MINTunknown: permutation test of independence of two blocks.
pub fn mint_unknown(sample: &BlockedSample, config: &TestConfig) -> Result<TestOutcome> {
    if sample.num_blocks() != 2 {
        return Err(MintError::InvalidInput(format!(
            "MINTunknown needs exactly 2 blocks, sample has {}",
            sample.num_blocks()
        )));
    }
    mint_multi(sample, config)
}

/// MINTunknown computed from the full statistic `Ĥ^X + Ĥ^Y − Ĥ^Z` on every
/// resample instead of the joint entropy alone. Decisions agree with
/// [`mint_unknown`]; kept as a cross-check of that reduction.
pub fn mint_unknown_full(sample: &BlockedSample, config: &TestConfig) -> Result<TestOutcome> {
    if sample.num_blocks() != 2 {
        return Err(MintError::InvalidInput("MINTunknown needs exactly 2 blocks".into()));
    }
    let n = sample.n();
    config.validate(n)?;
    let mode = config.weight_mode;
    let (kx, ky, kz) = (config.marginal_k(0, n), config.marginal_k(1, n), config.joint_k(n));
    for k in [kx, ky, kz] {
        check_order(k, n)?;
    }
    let x = sample.block(0);
    let y = sample.block(1);
    let hx = entropy_with(&x, kx, mode)?;

    let observed = hx + entropy_with(&y, ky, mode)? - entropy_with(sample.points(), kz, mode)?;
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let perms = permutations_for(config.seed, b, n, 2);
        let y_perm = crate::points::PointSet::new(
            perms[0].iter().flat_map(|&i| y.row(i).to_vec()).collect(),
            n,
            y.d(),
        )?;
        let hy = entropy_with(&y_perm, ky, mode)?;
        Ok(hx + hy - entropy_with(&sample.permuted(&perms), kz, mode)?)
    })?;
    Ok(TestOutcome::from_statistics(observed, nulls, config.q, config.seed)?.with_k(Some(kz)))
}

/// MINTunknown for every order in `ks` at once, sharing permutations and
/// neighbour searches. Entry `i` equals `mint_unknown` run with
/// `k_joint = ks[i]` and weight mode `mode`, seed for seed.
pub fn mint_unknown_grid(
    sample: &BlockedSample,
    ks: &[usize],
    mode: WeightMode,
    config: &TestConfig,
) -> Result<Vec<TestOutcome>> {
    if sample.num_blocks() != 2 {
        return Err(MintError::InvalidInput("MINTunknown needs exactly 2 blocks".into()));
    }
    let n = sample.n();
    config.validate(n)?;
    let d = sample.points().d();
    let weights = grid_weights(ks, d, mode, n)?;
    let kmax = *ks.iter().max().expect("non-empty grid");

    let per_k = |points: &crate::points::PointSet| -> Result<Vec<f64>> {
        let rho = knn_distances(points, kmax)?;
        Ok(weights
            .iter()
            .map(|w| -kl_entropy_from_distances(&rho, d, w))
            .collect())
    };
    let observed = per_k(sample.points())?;
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let perms = permutations_for(config.seed, b, n, 2);
        per_k(&sample.permuted(&perms))
    })?;
    ks.iter()
        .enumerate()
        .map(|(i, &k)| {
            let column = nulls.iter().map(|row| row[i]).collect();
            Ok(TestOutcome::from_statistics(observed[i], column, config.q, config.seed)?.with_k(Some(k)))
        })
        .collect()
}

pub(super) fn grid_weights(ks: &[usize], d: usize, mode: WeightMode, n: usize) -> Result<Vec<WeightVector>> {
    if ks.is_empty() {
        return Err(MintError::InvalidInput("k grid must not be empty".into()));
    }
    ks.iter()
        .map(|&k| {
            check_order(k, n)?;
            WeightVector::for_mode(mode, k, d)
        })
        .collect()
}
