//! Weighted Kozachenko–Leonenko differential entropy estimation.
//!
//! For a sample `Z₁,…,Zₙ` in `ℝᵈ` with `ρ₍ⱼ₎,ᵢ` the distance from `Zᵢ` to its
//! `j`-th nearest neighbour, the estimate is
//!
//! ```text
//! Ĥ = (1/n) Σᵢ Σⱼ wⱼ [ d·log ρ₍ⱼ₎,ᵢ + log V_d + log(n−1) − Ψ(j) ]
//! ```
//!
//! in nats, where `V_d` is the volume of the unit ball and `Ψ` is the digamma
//! function. With `w = (0,…,0,1)` this is the classical estimator; for
//! `d ≥ 4` the weights returned by [`solve_weights`] cancel the leading bias
//! terms.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{MintError, Result};
use crate::knn::{knn_distances, NeighbourDistances};
use crate::points::PointSet;

/// Largest admissible condition number of the weight constraint matrix.
pub const MAX_WEIGHT_CONDITION: f64 = 1e12;

/// B₂ₖ/(2k) for k = 1..7.
const DIGAMMA_ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma function Ψ(x) for x > 0.
///
/// Shifts the argument up to `x ≥ 10` with Ψ(x) = Ψ(x+1) − 1/x and then sums the
/// asymptotic series in `1/x²`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(MintError::DomainError(x));
    }
    let mut shift = 0.0;
    let mut x = x;
    while x < 10.0 {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    Ok(x.ln() - 0.5 / x - series - shift)
}

/// Volume of the unit Euclidean ball in `d` dimensions, `π^{d/2}/Γ(1+d/2)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    log_unit_ball_volume(d).exp()
}

/// Natural log of [`unit_ball_volume`], stable for large `d`.
pub fn log_unit_ball_volume(d: usize) -> f64 {
    // V₀ = 1, V₁ = 2, V_d = V_{d−2} · 2π/d.
    let mut log_v = if d % 2 == 0 { 0.0 } else { 2f64.ln() };
    let mut m = if d % 2 == 0 { 2 } else { 3 };
    while m <= d {
        log_v += (2.0 * std::f64::consts::PI / m as f64).ln();
        m += 2;
    }
    log_v
}

/// How weight vectors are chosen for a given `(k, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Minimum-norm bias-cancelling weights (unweighted when `d ≤ 3`).
    #[default]
    AutoSolve,
    /// All mass on the k-th neighbour.
    Unweighted,
}

/// Weights `w₁,…,w_k` over neighbour orders for a `d`-dimensional estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    k: usize,
    d: usize,
    w: Vec<f64>,
}

impl WeightVector {
    /// The classical estimator: `w = (0,…,0,1)`.
    pub fn unweighted(k: usize, d: usize) -> Self {
        assert!(k >= 1, "k must be at least 1");
        let mut w = vec![0.0; k];
        w[k - 1] = 1.0;
        WeightVector { k, d, w }
    }

    pub fn for_mode(mode: WeightMode, k: usize, d: usize) -> Result<Self> {
        match mode {
            WeightMode::AutoSolve => solve_weights(k, d),
            WeightMode::Unweighted => {
                if k == 0 {
                    return Err(MintError::InvalidInput("k must be at least 1".into()));
                }
                Ok(Self::unweighted(k, d))
            }
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `w[j - 1]` is the weight on the j-th neighbour.
    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Neighbour orders (1-based) carrying non-zero weight.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.w
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(j, &w)| (j + 1, w))
    }
}

/// Admissible neighbour orders `{⌊k/d⌋, ⌊2k/d⌋, …, k}` without 0 and repeats.
pub fn weight_support(k: usize, d: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (1..=d).map(|i| i * k / d).filter(|&j| j > 0).collect();
    s.dedup();
    s
}

/// `Γ(j + a)/Γ(j)` divided by the `j`-free constant `Γ(1 + a)`, computed as
/// the product `Π_{m<j} (m + a)/m`.
fn scaled_gamma_ratio(j: usize, a: f64) -> f64 {
    (1..j).map(|m| (m as f64 + a) / m as f64).product()
}

/// Minimum-norm weight vector in the bias-cancelling set for `(k, d)`.
///
/// For `d ≤ 3` no moment constraint binds and the classical estimator is
/// returned.
pub fn solve_weights(k: usize, d: usize) -> Result<WeightVector> {
    if k == 0 || d == 0 {
        return Err(MintError::InvalidInput(format!(
            "k and d must be positive (k = {k}, d = {d})"
        )));
    }
    let moments = d / 4;
    if moments == 0 {
        return Ok(WeightVector::unweighted(k, d));
    }
    let support = weight_support(k, d);
    if support.len() < moments + 1 {
        return Err(MintError::InfeasibleSupport {
            k,
            d,
            needed: moments + 1,
            available: support.len(),
        });
    }

    let rows = moments + 1;
    let a = DMatrix::from_fn(rows, support.len(), |r, c| {
        if r < moments {
            let exponent = 2.0 * (r + 1) as f64 / d as f64;
            scaled_gamma_ratio(support[c], exponent)
        } else {
            1.0
        }
    });
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= MAX_WEIGHT_CONDITION) {
        return Err(MintError::IllConditioned(cond));
    }
    let mut rhs = DVector::zeros(rows);
    rhs[moments] = 1.0;
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| MintError::InvalidInput(e.to_string()))?;

    let mut w = vec![0.0; k];
    for (c, &j) in support.iter().enumerate() {
        w[j - 1] = sol[c];
    }
    Ok(WeightVector { k, d, w })
}

/// An entropy estimate together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub weights: WeightVector,
}

/// Estimate from precomputed neighbour distances of a `d`-dimensional sample.
///
/// `rho` may hold more neighbour orders than `weights.k()`; only the first
/// `weights.k()` are used.
pub fn kl_entropy_from_distances(rho: &NeighbourDistances, d: usize, weights: &WeightVector) -> f64 {
    assert!(rho.k() >= weights.k(), "not enough neighbour orders");
    let n = rho.n();
    let offset = log_unit_ball_volume(d) + ((n - 1) as f64).ln();
    let terms: Vec<(usize, f64, f64)> = weights
        .nonzero()
        .map(|(j, w)| (j - 1, w, offset - digamma(j as f64).expect("j ≥ 1")))
        .collect();
    let dd = d as f64;
    let total: f64 = rho
        .rows()
        .map(|row| {
            terms
                .iter()
                .map(|&(col, w, c)| w * (dd * row[col].ln() + c))
                .sum::<f64>()
        })
        .sum();
    total / n as f64
}

/// Weighted Kozachenko–Leonenko entropy of `points`.
pub fn kl_entropy(points: &PointSet, k: usize, weights: &WeightVector) -> Result<EntropyEstimate> {
    if weights.k() != k {
        return Err(MintError::InvalidInput(format!(
            "weights built for k = {}, estimator asked for k = {k}",
            weights.k()
        )));
    }
    if weights.d() != points.d() {
        return Err(MintError::InvalidInput(format!(
            "weights built for d = {}, sample has d = {}",
            weights.d(),
            points.d()
        )));
    }
    let rho = knn_distances(points, k)?;
    let value = kl_entropy_from_distances(&rho, points.d(), weights);
    Ok(EntropyEstimate {
        value,
        k,
        n: points.n(),
        d: points.d(),
        weights: weights.clone(),
    })
}

/// Estimate with weights chosen by `mode`.
pub fn kl_entropy_with_mode(points: &PointSet, k: usize, mode: WeightMode) -> Result<EntropyEstimate> {
    let w = WeightVector::for_mode(mode, k, points.d())?;
    kl_entropy(points, k, &w)
}
