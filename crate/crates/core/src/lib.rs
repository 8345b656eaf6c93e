//! Mutual-information-based nonparametric tests of independence and of
//! linear-model goodness of fit.
//!
//! Entropies are estimated with a weighted Kozachenko–Leonenko k-nearest
//! neighbour estimator ([`entropy`]); mutual information is the sum of
//! marginal entropies minus the joint entropy. Critical values come from
//! simulating a known marginal, from permutations, or from simulated
//! regression residuals, and every test returns a rank-based p-value whose
//! size is controlled exactly at any finite `n` and number of resamples `B`.

pub mod datagen;
pub mod entropy;
pub mod error;
pub mod independence;
pub mod knn;
pub mod points;
pub mod regression;
pub mod rng;
pub mod sampler;

pub use entropy::{kl_entropy, solve_weights, EntropyEstimate, WeightMode, WeightVector};
pub use error::{MintError, Result};
pub use independence::{TestConfig, TestOutcome};
pub use points::{BlockedSample, PointSet};
