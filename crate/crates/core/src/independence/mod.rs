//! The MINT family of independence tests.
//!
//! Every test produces an observed statistic `T⁽⁰⁾` and `B` null statistics
//! `T⁽¹⁾,…,T⁽ᴮ⁾` that are exchangeable with it under independence. Larger
//! values mean more dependence. The p-value is
//! `(B+1)⁻¹ Σ_{b=0}^{B} 1{T⁽ᵇ⁾ ≥ T⁽⁰⁾}` and the test rejects at level `q`
//! exactly when `p ≤ q`, which is the same event as `T⁽⁰⁾` exceeding the
//! `(1−q)` empirical quantile of all `B+1` statistics.
//!
//! Terms common to all `B+1` statistics cancel from the comparisons, so the
//! permutation tests only ever estimate the joint entropy.

mod known;
mod multiscale;
mod permutation;

pub use known::mint_known;
pub use multiscale::{mint_auto, mint_av, select_k, KGrid, KSelection};
pub use permutation::{mint_multi, mint_unknown, mint_unknown_full, mint_unknown_grid, permutations_for};

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{kl_entropy, WeightMode, WeightVector};
use crate::error::{MintError, Result};
use crate::points::{BlockedSample, PointSet};

/// Default neighbour order for a sample of size `n`: `max(3, ⌊n^0.35⌋)`.
pub fn default_k(n: usize) -> usize {
    ((n as f64).powf(0.35).floor() as usize).max(3)
}

/// Parameters shared by all tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestConfig {
    /// Order for the joint entropy estimator; `None` uses [`default_k`].
    pub k_joint: Option<usize>,
    /// Orders for the per-block (marginal) estimators, in block order. Missing
    /// entries fall back to [`default_k`].
    pub k_marginals: Vec<usize>,
    pub weight_mode: WeightMode,
    /// Number of null resamples `B`.
    pub b: usize,
    /// Nominal level.
    pub q: f64,
    pub seed: u64,
    /// Evaluate resamples on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl TestConfig {
    pub fn new(b: usize, q: f64, seed: u64) -> Self {
        TestConfig {
            k_joint: None,
            k_marginals: Vec::new(),
            weight_mode: WeightMode::AutoSolve,
            b,
            q,
            seed,
            parallel: true,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k_joint = Some(k);
        self
    }

    pub fn with_marginal_k(mut self, ks: Vec<usize>) -> Self {
        self.k_marginals = ks;
        self
    }

    pub fn with_weight_mode(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn joint_k(&self, n: usize) -> usize {
        self.k_joint.unwrap_or_else(|| default_k(n))
    }

    pub fn marginal_k(&self, block: usize, n: usize) -> usize {
        self.k_marginals.get(block).copied().unwrap_or_else(|| default_k(n))
    }

    /// Checks `B ≥ 1`, `0 < q < 1` and that every order fits a sample of size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.b == 0 {
            return Err(MintError::InvalidInput("B must be at least 1".into()));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(MintError::InvalidInput(format!(
                "q must lie in (0, 1), got {}",
                self.q
            )));
        }
        for k in self.k_joint.iter().chain(&self.k_marginals) {
            check_order(*k, n)?;
        }
        Ok(())
    }
}

pub(crate) fn check_order(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(MintError::InvalidInput("k must be at least 1".into()));
    }
    if k > n - 1 {
        return Err(MintError::KTooLarge { k, n });
    }
    Ok(())
}

/// Result of one test run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    /// Observed statistic `T⁽⁰⁾`.
    pub statistic: f64,
    /// `T⁽¹⁾,…,T⁽ᴮ⁾` in resample order.
    pub null_stats: Vec<f64>,
    pub p_value: f64,
    /// Infimum of `r` with `(B+1)⁻¹ #{b : T⁽ᵇ⁾ ≥ r} ≤ q`.
    pub critical_value: f64,
    pub reject: bool,
    pub q: f64,
    pub seed: u64,
    /// Order used for the joint estimator, when a single one was used.
    pub k: Option<usize>,
    /// Order chosen by data-driven selection.
    pub k_hat: Option<usize>,
}

/// Largest `m` with `m/(B+1) ≤ q` as evaluated in floating point.
fn max_exceedances(q: f64, total: usize) -> usize {
    let t = total as f64;
    let mut m = (q * t).floor() as usize;
    while m + 1 <= total && ((m + 1) as f64 / t) <= q {
        m += 1;
    }
    while m > 0 && (m as f64 / t) > q {
        m -= 1;
    }
    m
}

impl TestOutcome {
    /// Assembles p-value, critical value and decision from the statistics.
    pub fn from_statistics(statistic: f64, null_stats: Vec<f64>, q: f64, seed: u64) -> Result<Self> {
        if !statistic.is_finite() || null_stats.iter().any(|t| !t.is_finite()) {
            return Err(MintError::InvalidInput("non-finite test statistic".into()));
        }
        if null_stats.is_empty() {
            return Err(MintError::InvalidInput("B must be at least 1".into()));
        }
        let total = null_stats.len() + 1;
        let count = 1 + null_stats.iter().filter(|&&t| t >= statistic).count();
        let p_value = count as f64 / total as f64;

        let mut all = Vec::with_capacity(total);
        all.push(statistic);
        all.extend_from_slice(&null_stats);
        all.sort_unstable_by(|a, b| b.total_cmp(a));
        let m = max_exceedances(q, total);
        let critical_value = all[m];

        let reject = p_value <= q;
        debug_assert_eq!(reject, count <= m);
        debug_assert_eq!(reject, statistic > critical_value);
        Ok(TestOutcome {
            statistic,
            null_stats,
            p_value,
            critical_value,
            reject,
            q,
            seed,
            k: None,
            k_hat: None,
        })
    }

    pub fn b(&self) -> usize {
        self.null_stats.len()
    }

    /// `#{b : T⁽ᵇ⁾ ≥ T⁽⁰⁾}`, including `b = 0`; equals `p·(B+1)`.
    pub fn exceedances(&self) -> usize {
        1 + self.null_stats.iter().filter(|&&t| t >= self.statistic).count()
    }

    fn with_k(mut self, k: Option<usize>) -> Self {
        self.k = k;
        self
    }
}

/// Estimated mutual information `Σ_blocks Ĥ(block) − Ĥ(joint)`.
///
/// With two blocks this is `Ĥ^X + Ĥ^Y − Ĥ^Z`.
pub fn mutual_information(sample: &BlockedSample, config: &TestConfig) -> Result<f64> {
    let n = sample.n();
    let mut total = 0.0;
    for i in 0..sample.num_blocks() {
        let block = sample.block(i);
        total += entropy_with(&block, config.marginal_k(i, n), config.weight_mode)?;
    }
    Ok(total - entropy_with(sample.points(), config.joint_k(n), config.weight_mode)?)
}

pub(crate) fn entropy_with(points: &PointSet, k: usize, mode: WeightMode) -> Result<f64> {
    let w = WeightVector::for_mode(mode, k, points.d())?;
    Ok(kl_entropy(points, k, &w)?.value)
}

/// Evaluates `f(b)` for `b = 1..=count`, in parallel if asked, returning
/// results in resample order.
pub(crate) fn map_resamples<T, F>(count: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if parallel {
        (1..=count as u64).into_par_iter().map(f).collect()
    } else {
        (1..=count as u64).map(f).collect()
    }
}
