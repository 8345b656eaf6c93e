//! Seeded generators for the simulation settings: sinusoidal, circular and
//! multiplicative dependence, Gaussian nulls and alternatives, and their
//! bivariate-block variants.
//!
//! Every generator draws from the [`Domain::Data`] stream of its seed, index 0.
//! The extra uniform coordinates of [`make_multivariate`] come from index 1,
//! so adding them never disturbs the original columns.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{MintError, Result};
use crate::points::{BlockedSample, PointSet};
use crate::rng::{self, Domain};
use crate::sampler::MarginalSampler;

/// A data-generating mechanism for `(X, Y)` with scalar components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Density `∝ 1 + sin(lx)·sin(ly)` on `[−π, π]²`.
    Sinusoidal(u32),
    /// Noisy points on `l` concentric circles.
    Circular(u32),
    /// `Y = |X|^ρ·ε` with `X ~ U[−1, 1]`.
    Multiplicative(f64),
    GaussianNull,
    /// Standard bivariate normal with correlation `ρ`.
    GaussianCorr(f64),
}

impl Setting {
    fn validate(&self) -> Result<()> {
        match *self {
            Setting::Sinusoidal(0) | Setting::Circular(0) => {
                Err(MintError::InvalidInput("l must be a positive integer".into()))
            }
            Setting::Multiplicative(rho) if !(rho >= 0.0 && rho.is_finite()) => {
                Err(MintError::InvalidInput(format!("rho must be non-negative, got {rho}")))
            }
            Setting::GaussianCorr(rho) if !(rho.abs() < 1.0) => {
                Err(MintError::InvalidInput(format!("correlation must lie in (−1, 1), got {rho}")))
            }
            _ => Ok(()),
        }
    }

    /// Family name without its parameter.
    pub fn name(&self) -> &'static str {
        match self {
            Setting::Sinusoidal(_) => "sinusoidal",
            Setting::Circular(_) => "circular",
            Setting::Multiplicative(_) => "multiplicative",
            Setting::GaussianNull => "gaussian-null",
            Setting::GaussianCorr(_) => "gaussian-corr",
        }
    }

    /// The numeric parameter, if the family has one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            Setting::Sinusoidal(l) | Setting::Circular(l) => Some(l as f64),
            Setting::Multiplicative(r) | Setting::GaussianCorr(r) => Some(r),
            Setting::GaussianNull => None,
        }
    }

    /// One draw of `(X, Y)`.
    fn draw(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        match *self {
            Setting::Sinusoidal(l) => loop {
                let x = -PI + 2.0 * PI * rng.random::<f64>();
                let y = -PI + 2.0 * PI * rng.random::<f64>();
                let accept = 0.5 * (1.0 + (l as f64 * x).sin() * (l as f64 * y).sin());
                if rng.random::<f64>() < accept {
                    break (x, y);
                }
            },
            Setting::Circular(l) => {
                let radius = uniform_index(l, rng) as f64;
                let theta = 2.0 * PI * rng.random::<f64>();
                let e1: f64 = rng.sample(StandardNormal);
                let e2: f64 = rng.sample(StandardNormal);
                (radius * theta.cos() + e1 / 4.0, radius * theta.sin() + e2 / 4.0)
            }
            Setting::Multiplicative(rho) => {
                let x = -1.0 + 2.0 * rng.random::<f64>();
                let e: f64 = rng.sample(StandardNormal);
                (x, x.abs().powf(rho) * e)
            }
            Setting::GaussianNull => (rng.sample(StandardNormal), rng.sample(StandardNormal)),
            Setting::GaussianCorr(rho) => {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
            }
        }
    }
}

/// Uniform on `{1, …, l}` as `⌊l·U⌋ + 1`, clamped at `l`.
fn uniform_index(l: u32, rng: &mut dyn RngCore) -> u32 {
    let u: f64 = rng.random();
    ((l as f64 * u).floor() as u32).min(l - 1) + 1
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Sinusoidal(l) => write!(f, "sinusoidal({l})"),
            Setting::Circular(l) => write!(f, "circular({l})"),
            Setting::Multiplicative(r) => write!(f, "multiplicative({r})"),
            Setting::GaussianNull => write!(f, "gaussian-null"),
            Setting::GaussianCorr(r) => write!(f, "gaussian-corr({r})"),
        }
    }
}

impl FromStr for Setting {
    type Err = MintError;

    /// Parses the [`Display`](fmt::Display) form, e.g. `sinusoidal(3)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || MintError::InvalidInput(format!("unknown setting '{s}'"));
        let t = s.trim().to_ascii_lowercase();
        let (name, arg) = match t.find('(') {
            Some(i) => (&t[..i], Some(t[i + 1..].strip_suffix(')').ok_or_else(bad)?.trim())),
            None => (t.as_str(), None),
        };
        let setting = match (name.trim(), arg) {
            ("sinusoidal", Some(a)) => Setting::Sinusoidal(a.parse().map_err(|_| bad())?),
            ("circular", Some(a)) => Setting::Circular(a.parse().map_err(|_| bad())?),
            ("multiplicative", Some(a)) => Setting::Multiplicative(a.parse().map_err(|_| bad())?),
            ("gaussian-corr", Some(a)) => Setting::GaussianCorr(a.parse().map_err(|_| bad())?),
            ("gaussian-null", None) => Setting::GaussianNull,
            _ => return Err(bad()),
        };
        setting.validate()?;
        Ok(setting)
    }
}

/// A fully specified simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub setting: Setting,
    pub n: usize,
    /// Append an independent `U(0, 1)` coordinate to each of `X` and `Y`.
    pub multivariate: bool,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(setting: Setting, n: usize, seed: u64) -> Self {
        ScenarioSpec {
            setting,
            n,
            multivariate: false,
            seed,
        }
    }

    pub fn multivariate(mut self) -> Self {
        self.multivariate = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.setting.validate()?;
        if self.n < 4 {
            return Err(MintError::InvalidInput(format!("n must be at least 4, got {}", self.n)));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<BlockedSample> {
        self.validate()?;
        let sample = generate(self.setting, self.n, self.seed)?;
        if self.multivariate {
            make_multivariate(&sample, self.seed)
        } else {
            Ok(sample)
        }
    }

    /// Width of `Y`.
    pub fn y_dim(&self) -> usize {
        if self.multivariate {
            2
        } else {
            1
        }
    }

    /// The marginal law of `Y`, for tests that assume it known.
    pub fn y_marginal(&self) -> ScenarioMarginal {
        ScenarioMarginal {
            setting: self.setting,
            multivariate: self.multivariate,
        }
    }
}

fn generate(setting: Setting, n: usize, seed: u64) -> Result<BlockedSample> {
    setting.validate()?;
    let mut rng = rng::stream(seed, Domain::Data, 0);
    let (x, y): (Vec<f64>, Vec<f64>) = (0..n).map(|_| setting.draw(&mut rng)).unzip();
    BlockedSample::from_xy(&PointSet::from_column(&x)?, &PointSet::from_column(&y)?)
}

/// `n` draws from the sinusoidal density with frequency `l`, by rejection
/// from the uniform distribution on the square.
pub fn gen_sinusoidal(l: u32, n: usize, seed: u64) -> Result<BlockedSample> {
    generate(Setting::Sinusoidal(l), n, seed)
}

/// `X = L·cos Θ + ε₁/4`, `Y = L·sin Θ + ε₂/4` with `L ~ U{1,…,l}`,
/// `Θ ~ U[0, 2π]` and standard normal noise.
pub fn gen_circular(l: u32, n: usize, seed: u64) -> Result<BlockedSample> {
    generate(Setting::Circular(l), n, seed)
}

/// `X ~ U[−1, 1]`, `Y = |X|^ρ·ε`; independent when `ρ = 0`.
pub fn gen_multiplicative(rho: f64, n: usize, seed: u64) -> Result<BlockedSample> {
    generate(Setting::Multiplicative(rho), n, seed)
}

pub fn gen_gaussian_null(n: usize, seed: u64) -> Result<BlockedSample> {
    generate(Setting::GaussianNull, n, seed)
}

pub fn gen_gaussian_corr(rho: f64, n: usize, seed: u64) -> Result<BlockedSample> {
    generate(Setting::GaussianCorr(rho), n, seed)
}

/// Appends an independent `U(0, 1)` column to each of two scalar blocks,
/// giving `(X₁, X₂, Y₁, Y₂)`.
pub fn make_multivariate(sample: &BlockedSample, seed: u64) -> Result<BlockedSample> {
    if sample.num_blocks() != 2 || sample.blocks().iter().any(|b| b.len() != 1) {
        return Err(MintError::InvalidInput("expected two one-dimensional blocks".into()));
    }
    let n = sample.n();
    let mut rng = rng::stream(seed, Domain::Data, 1);
    let mut widen = |block: PointSet| -> Result<PointSet> {
        let extra: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        block.hstack(&PointSet::from_column(&extra)?)
    };
    let x = widen(sample.block(0))?;
    let y = widen(sample.block(1))?;
    BlockedSample::from_xy(&x, &y)
}

/// Sampler for the `Y`-marginal of a [`Setting`], optionally widened by an
/// independent uniform coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioMarginal {
    setting: Setting,
    multivariate: bool,
}

impl MarginalSampler for ScenarioMarginal {
    fn dim(&self) -> usize {
        if self.multivariate {
            2
        } else {
            1
        }
    }

    fn draw(&self, n: usize, _resample: u64, rng: &mut dyn RngCore) -> Result<PointSet> {
        let mut data = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            data.push(self.setting.draw(rng).1);
            if self.multivariate {
                data.push(rng.random());
            }
        }
        PointSet::new(data, n, self.dim())
    }
}
