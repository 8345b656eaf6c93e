//! MINTknown: critical values from pseudo-data drawn from a known Y-marginal.

use super::{check_order, entropy_with, map_resamples, TestConfig, TestOutcome};
use crate::error::{MintError, Result};
use crate::points::BlockedSample;
use crate::rng::{self, Domain};
use crate::sampler::MarginalSampler;

/// Tests independence of the two blocks of `sample` when the law of the
/// second block (Y) is known and can be sampled.
///
/// For `b = 0,…,B` the statistic is `Ĥ^{Y,(b)} − Ĥ^{Z,(b)}`, where resample
/// `b ≥ 1` pairs the observed X with a fresh pseudo-sample of Y. The X
/// entropy is common to every `b` and is never computed. To test with X
/// known instead, swap the blocks.
pub fn mint_known(
    sample: &BlockedSample,
    y_sampler: &dyn MarginalSampler,
    config: &TestConfig,
) -> Result<TestOutcome> {
    if sample.num_blocks() != 2 {
        return Err(MintError::InvalidInput(format!(
            "MINTknown needs exactly 2 blocks, sample has {}",
            sample.num_blocks()
        )));
    }
    let y_dim = sample.blocks()[1].len();
    if y_sampler.dim() != y_dim {
        return Err(MintError::SamplerDimensionMismatch {
            expected: y_dim,
            got: y_sampler.dim(),
        });
    }
    let n = sample.n();
    config.validate(n)?;
    let (ky, kz) = (config.marginal_k(1, n), config.joint_k(n));
    check_order(ky, n)?;
    check_order(kz, n)?;
    let mode = config.weight_mode;

    let observed = entropy_with(&sample.block(1), ky, mode)? - entropy_with(sample.points(), kz, mode)?;
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let mut rng = rng::stream(config.seed, Domain::PseudoData, b);
        let y = y_sampler.draw(n, b, &mut rng)?;
        if y.d() != y_dim {
            return Err(MintError::SamplerDimensionMismatch {
                expected: y_dim,
                got: y.d(),
            });
        }
        let joint = sample.with_last_block(&y)?;
        Ok(entropy_with(&y, ky, mode)? - entropy_with(&joint, kz, mode)?)
    })?;
    Ok(TestOutcome::from_statistics(observed, nulls, config.q, config.seed)?.with_k(Some(kz)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::PointSet;
    use crate::sampler::{Family, ProductSampler};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normal_pair(n: usize, seed: u64, noise: Option<f64>) -> BlockedSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = match noise {
            None => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            Some(s) => x.iter().map(|v| v + s * rng.sample::<f64, _>(StandardNormal)).collect(),
        };
        BlockedSample::from_xy(&PointSet::from_column(&x).unwrap(), &PointSet::from_column(&y).unwrap()).unwrap()
    }

    fn std_normal() -> ProductSampler {
        ProductSampler::iid(Family::Normal { mean: 0.0, variance: 1.0 }, 1).unwrap()
    }

    #[test]
    fn single_resample_has_two_rank_positions() {
        for seed in 0..5 {
            let s = normal_pair(40, seed, None);
            let o = mint_known(&s, &std_normal(), &TestConfig::new(1, 0.05, seed).with_k(3)).unwrap();
            assert!(o.p_value == 0.5 || o.p_value == 1.0);
        }
    }

    #[test]
    fn strong_dependence_rejects() {
        let s = normal_pair(200, 3, Some(0.05));
        let o = mint_known(&s, &std_normal(), &TestConfig::new(99, 0.05, 1)).unwrap();
        assert!(o.p_value <= 0.05);
    }

    #[test]
    fn dimension_mismatch() {
        let s = normal_pair(40, 1, None);
        let two = ProductSampler::iid(Family::Uniform { lo: 0.0, hi: 1.0 }, 2).unwrap();
        assert_eq!(
            mint_known(&s, &two, &TestConfig::new(9, 0.05, 1)).unwrap_err(),
            MintError::SamplerDimensionMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let s = normal_pair(60, 2, None);
        let c = TestConfig::new(19, 0.05, 8);
        let a = mint_known(&s, &std_normal(), &c).unwrap();
        let b = mint_known(&s, &std_normal(), &c.clone().sequential()).unwrap();
        assert_eq!(a, b);
    }
}
