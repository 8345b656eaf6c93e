//! Samplers for a known marginal distribution, used to build pseudo-data.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{MintError, Result};
use crate::points::PointSet;

/// Source of i.i.d. draws from a known `dim()`-dimensional marginal.
///
/// `resample` identifies which pseudo-sample is being drawn (1-based); most
/// samplers ignore it and use `rng` alone.
pub trait MarginalSampler: Sync {
    fn dim(&self) -> usize;

    fn draw(&self, n: usize, resample: u64, rng: &mut dyn RngCore) -> Result<PointSet>;
}

/// A univariate parametric family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `N(mean, variance)`.
    Normal { mean: f64, variance: f64 },
    /// `U(lo, hi)`.
    Uniform { lo: f64, hi: f64 },
}

impl Family {
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            Family::Normal { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            Family::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Normal { mean, variance } => write!(f, "normal({mean},{variance})"),
            Family::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
        }
    }
}

impl FromStr for Family {
    type Err = MintError;

    /// Parses `normal(μ,σ²)` or `uniform(a,b)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || MintError::InvalidInput(format!("cannot parse distribution '{s}'"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let params: Vec<f64> = inner
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let [a, b] = params[..] else {
            return Err(bad());
        };
        match s[..open].trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" if b > 0.0 && a.is_finite() => Ok(Family::Normal {
                mean: a,
                variance: b,
            }),
            "uniform" if a < b && a.is_finite() && b.is_finite() => Ok(Family::Uniform { lo: a, hi: b }),
            _ => Err(bad()),
        }
    }
}

/// Independent coordinates, each from its own family.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSampler {
    coords: Vec<Family>,
}

impl ProductSampler {
    pub fn new(coords: Vec<Family>) -> Result<Self> {
        if coords.is_empty() {
            return Err(MintError::InvalidInput("sampler needs at least one coordinate".into()));
        }
        Ok(ProductSampler { coords })
    }

    /// `dim` independent copies of one family.
    pub fn iid(family: Family, dim: usize) -> Result<Self> {
        Self::new(vec![family; dim])
    }

    /// Parses `;`-separated families, e.g. `normal(0,1);uniform(0,1)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let coords = spec
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<Family>>>()?;
        Self::new(coords)
    }

    pub fn families(&self) -> &[Family] {
        &self.coords
    }
}

impl MarginalSampler for ProductSampler {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn draw(&self, n: usize, _resample: u64, rng: &mut dyn RngCore) -> Result<PointSet> {
        let mut data = Vec::with_capacity(n * self.coords.len());
        for _ in 0..n {
            for f in &self.coords {
                data.push(f.sample(rng));
            }
        }
        PointSet::new(data, n, self.coords.len())
    }
}

/// A bank of pre-generated i.i.d. draws. Pseudo-sample `b` takes rows
/// `(b−1)·n .. b·n`, so distinct pseudo-samples never share a draw.
#[derive(Debug, Clone)]
pub struct EmpiricalPool {
    rows: PointSet,
}

impl EmpiricalPool {
    pub fn new(rows: PointSet) -> Self {
        EmpiricalPool { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.n()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.n() == 0
    }
}

impl MarginalSampler for EmpiricalPool {
    fn dim(&self) -> usize {
        self.rows.d()
    }

    fn draw(&self, n: usize, resample: u64, _rng: &mut dyn RngCore) -> Result<PointSet> {
        let b = resample.max(1) as usize;
        let end = b * n;
        if end > self.rows.n() {
            return Err(MintError::InvalidInput(format!(
                "empirical pool has {} draws, pseudo-sample {b} needs {end}",
                self.rows.n()
            )));
        }
        self.rows.select_rows(end - n..end)
    }
}

/// Adapter for a user-supplied generator of single `dim`-dimensional draws.
pub struct FnSampler<F> {
    dim: usize,
    f: F,
}

impl<F> FnSampler<F>
where
    F: Fn(&mut dyn RngCore) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnSampler { dim, f }
    }
}

impl<F> MarginalSampler for FnSampler<F>
where
    F: Fn(&mut dyn RngCore) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw(&self, n: usize, _resample: u64, rng: &mut dyn RngCore) -> Result<PointSet> {
        let mut data = Vec::with_capacity(n * self.dim);
        for _ in 0..n {
            let row = (self.f)(rng);
            if row.len() != self.dim {
                return Err(MintError::SamplerDimensionMismatch {
                    expected: self.dim,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        PointSet::new(data, n, self.dim)
    }
}
