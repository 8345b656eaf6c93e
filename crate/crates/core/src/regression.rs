//! MINTregression: goodness-of-fit tests for linear models with errors
//! independent of the covariates.
//!
//! The observed statistic compares covariates with standardised OLS
//! residuals `η̂ = ε̂/σ̂`, `σ̂² = n⁻¹‖ε̂‖²`. Null replicas use noise vectors
//! drawn from the assumed error family `f_η` and pushed through the same
//! residualise-and-standardise pipeline, so all `B+1` statistics are
//! exchangeable under the null whatever the true `β` and `σ`. The covariate
//! entropy `Ĥ(X)` is common to every statistic and cancels.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::{Open01, StandardNormal, StudentT};
use serde::Serialize;

use crate::entropy::WeightMode;
use crate::error::{MintError, Result};
use crate::independence::{check_order, entropy_with, map_resamples, TestConfig, TestOutcome};
use crate::points::PointSet;
use crate::rng::{self, Domain};

/// Largest admissible condition number of `XᵀX`.
pub const MAX_DESIGN_CONDITION: f64 = 1e10;

/// Residual norms below this fraction of `‖Y‖` are treated as an exact fit.
const EXACT_FIT_TOLERANCE: f64 = 1e-10;

/// Error density `f_η` of the standardised noise under the null.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    #[default]
    Normal,
    /// Student t with the given degrees of freedom.
    StudentT(f64),
    Logistic,
}

impl NoiseFamily {
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            NoiseFamily::Normal => rng.sample(StandardNormal),
            NoiseFamily::StudentT(nu) => rng.sample(StudentT::new(nu).expect("validated degrees of freedom")),
            NoiseFamily::Logistic => {
                let u: f64 = rng.sample(Open01);
                (u / (1.0 - u)).ln()
            }
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseFamily::Normal => write!(f, "normal"),
            NoiseFamily::StudentT(nu) => write!(f, "t({nu})"),
            NoiseFamily::Logistic => write!(f, "logistic"),
        }
    }
}

impl FromStr for NoiseFamily {
    type Err = MintError;

    /// Accepts `normal`, `logistic` or `t(ν)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "normal" | "gaussian" => return Ok(NoiseFamily::Normal),
            "logistic" => return Ok(NoiseFamily::Logistic),
            _ => {}
        }
        if let Some(nu) = s.strip_prefix("t(").and_then(|r| r.strip_suffix(')')) {
            if let Ok(nu) = nu.trim().parse::<f64>() {
                if nu > 0.0 && nu.is_finite() {
                    return Ok(NoiseFamily::StudentT(nu));
                }
            }
        }
        Err(MintError::InvalidInput(format!("unknown noise family '{s}'")))
    }
}

/// A linear model `Y = Xβ + ε` to be checked.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    /// Covariates `X`, the columns the statistic measures dependence against.
    design: DMatrix<f64>,
    /// Matrix the model is fitted with: `X`, or `[1 | X]` with an intercept.
    fit: DMatrix<f64>,
    response: DVector<f64>,
    /// Number of leading columns forming `X*` in the partitioned test.
    star_columns: Option<usize>,
    pub noise: NoiseFamily,
}

impl RegressionProblem {
    /// `design` is `n × p` with `n > p`.
    pub fn new(design: &PointSet, response: &[f64]) -> Result<Self> {
        let (n, p) = (design.n(), design.d());
        if response.len() != n {
            return Err(MintError::InvalidInput(format!(
                "response has {} entries, design has {n} rows",
                response.len()
            )));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(MintError::InvalidInput("response contains non-finite values".into()));
        }
        let design = DMatrix::from_row_slice(n, p, design.as_slice());
        let problem = RegressionProblem {
            fit: design.clone(),
            design,
            response: DVector::from_column_slice(response),
            star_columns: None,
            noise: NoiseFamily::Normal,
        };
        problem.check_fit_matrix()?;
        Ok(problem)
    }

    /// Fits with an added constant column. The statistic still uses `X` alone,
    /// since a constant coordinate carries no information about dependence.
    pub fn with_intercept(mut self) -> Result<Self> {
        self.fit = self.design.clone().insert_column(0, 1.0);
        self.check_fit_matrix()?;
        Ok(self)
    }

    fn check_fit_matrix(&self) -> Result<()> {
        let (n, cols) = self.fit.shape();
        if n <= cols {
            return Err(MintError::InvalidInput(format!(
                "need more observations than fitted coefficients, got n = {n}, {cols} coefficients"
            )));
        }
        let cond = condition_of_gram(&self.fit);
        if !(cond < MAX_DESIGN_CONDITION) {
            return Err(MintError::SingularDesign(cond));
        }
        Ok(())
    }

    /// Declares the first `p0` columns as `X*`; the remaining `p − p0` form `X**`.
    pub fn with_partition(mut self, p0: usize) -> Result<Self> {
        if p0 == 0 || p0 > self.p() {
            return Err(MintError::InvalidInput(format!(
                "X* must have between 1 and {} columns, got {p0}",
                self.p()
            )));
        }
        self.star_columns = Some(p0);
        Ok(self)
    }

    pub fn with_noise(mut self, noise: NoiseFamily) -> Result<Self> {
        if let NoiseFamily::StudentT(nu) = noise {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(MintError::InvalidInput(format!("bad degrees of freedom {nu}")));
            }
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    /// Number of fitted coefficients, `p` or `p + 1`.
    pub fn coefficients(&self) -> usize {
        self.fit.ncols()
    }

    pub fn has_intercept(&self) -> bool {
        self.fit.ncols() > self.design.ncols()
    }

    pub fn partition(&self) -> Option<(usize, usize)> {
        self.star_columns.map(|p0| (p0, self.p() - p0))
    }

    /// The same problem with response `a·Y + X̃·c`, where `X̃` is the fitted
    /// matrix and `c` has one entry per coefficient.
    pub fn transformed_response(&self, a: f64, c: &[f64]) -> Self {
        let mut out = self.clone();
        out.response = &self.response * a + &self.fit * DVector::from_column_slice(c);
        out
    }

    fn design_rows(&self, rows: std::ops::Range<usize>, cols: usize) -> Result<PointSet> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for i in rows.clone() {
            for j in 0..cols {
                data.push(self.design[(i, j)]);
            }
        }
        PointSet::new(data, rows.len(), cols)
    }
}

fn condition_of_gram(x: &DMatrix<f64>) -> f64 {
    let sv = x.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min > 0.0 {
        (max / min).powi(2)
    } else {
        f64::INFINITY
    }
}

/// Orthogonal-projection helper built from a thin QR factorisation of `X`.
struct LeastSquares {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl LeastSquares {
    fn new(x: DMatrix<f64>) -> Result<Self> {
        let cond = condition_of_gram(&x);
        if !(cond < MAX_DESIGN_CONDITION) {
            return Err(MintError::SingularDesign(cond));
        }
        let qr = x.qr();
        Ok(LeastSquares { q: qr.q(), r: qr.r() })
    }

    fn coefficients(&self, y: &DVector<f64>) -> DVector<f64> {
        let qty = self.q.transpose() * y;
        self.r
            .solve_upper_triangular(&qty)
            .expect("R is non-singular for a well-conditioned design")
    }

    /// `(I − P)v` with `P` the hat matrix.
    fn residualise(&self, v: &DVector<f64>) -> DVector<f64> {
        v - &self.q * (self.q.transpose() * v)
    }
}

/// Least-squares fit with `σ̂² = n⁻¹‖ε̂‖²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub beta_hat: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sigma_hat: f64,
}

impl OlsFit {
    /// `ε̂/σ̂`, or an error when the fit is exact.
    pub fn standardised(&self) -> Result<Vec<f64>> {
        if !(self.sigma_hat > 0.0) {
            return Err(MintError::DegenerateResiduals);
        }
        Ok(self.residuals.iter().map(|e| e / self.sigma_hat).collect())
    }
}

fn fit_with(ls: &LeastSquares, x: &DMatrix<f64>, y: &DVector<f64>) -> OlsFit {
    let beta = ls.coefficients(y);
    let mut resid = y - x * &beta;
    if resid.norm() <= EXACT_FIT_TOLERANCE * y.norm() {
        resid.fill(0.0);
    }
    let sigma_hat = resid.norm() / (y.len() as f64).sqrt();
    OlsFit {
        beta_hat: beta.iter().copied().collect(),
        residuals: resid.iter().copied().collect(),
        sigma_hat,
    }
}

/// Ordinary least squares via QR. Residuals are zeroed when the fit is exact
/// to within a relative `1e-10`.
pub fn ols_fit(problem: &RegressionProblem) -> Result<OlsFit> {
    let ls = LeastSquares::new(problem.fit.clone())?;
    Ok(fit_with(&ls, &problem.fit, &problem.response))
}

/// Which form of the statistic to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct StatisticForm {
    k_eta: usize,
    k: usize,
    mode: WeightMode,
    /// Add `Ĥ(X*)`; it is the same for every resample.
    with_design_entropy: bool,
}

fn statistic(form: &StatisticForm, xstar: &PointSet, design_entropy: f64, eta: &[f64]) -> Result<f64> {
    let eta = PointSet::from_column(eta)?;
    let joint = xstar.hstack(&eta)?;
    let mut t = entropy_with(&eta, form.k_eta, form.mode)? - entropy_with(&joint, form.k, form.mode)?;
    if form.with_design_entropy {
        t += design_entropy;
    }
    Ok(t)
}

fn noise_vector(noise: NoiseFamily, n: usize, seed: u64, b: u64) -> DVector<f64> {
    let mut rng = rng::stream(seed, Domain::Noise, b);
    DVector::from_fn(n, |_, _| noise.sample(&mut rng))
}

fn form_for(problem: &RegressionProblem, config: &TestConfig, n: usize, full: bool) -> Result<StatisticForm> {
    config.validate(problem.n())?;
    let form = StatisticForm {
        k_eta: config.marginal_k(0, n),
        k: config.joint_k(n),
        mode: config.weight_mode,
        with_design_entropy: full,
    };
    check_order(form.k_eta, n)?;
    check_order(form.k, n)?;
    Ok(form)
}

fn full_data_test(problem: &RegressionProblem, cols: usize, config: &TestConfig, full: bool) -> Result<TestOutcome> {
    let n = problem.n();
    let form = form_for(problem, config, n, full)?;
    let ls = LeastSquares::new(problem.fit.clone())?;
    let eta_hat = fit_with(&ls, &problem.fit, &problem.response).standardised()?;
    let xstar = problem.design_rows(0..n, cols)?;
    let hx = if full { entropy_with(&xstar, form.k, form.mode)? } else { 0.0 };

    let observed = statistic(&form, &xstar, hx, &eta_hat)?;
    let root_n = (n as f64).sqrt();
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let r = ls.residualise(&noise_vector(problem.noise, n, config.seed, b));
        let s = r.norm() / root_n;
        let eta: Vec<f64> = r.iter().map(|v| v / s).collect();
        statistic(&form, &xstar, hx, &eta)
    })?;
    let mut out = TestOutcome::from_statistics(observed, nulls, config.q, config.seed)?;
    out.k = Some(form.k);
    Ok(out)
}

/// MINTregression on the full sample. The marginal order `k_η` is
/// `config.k_marginals[0]`; the joint order is `config.k_joint`.
pub fn mint_regression(problem: &RegressionProblem, config: &TestConfig) -> Result<TestOutcome> {
    full_data_test(problem, problem.p(), config, false)
}

/// [`mint_regression`] with `Ĥ(X)` added to every statistic; decisions match.
pub fn mint_regression_full(problem: &RegressionProblem, config: &TestConfig) -> Result<TestOutcome> {
    full_data_test(problem, problem.p(), config, true)
}

/// Partitioned MINTregression: residuals from the full design, dependence
/// measured against `X*` only.
pub fn mint_regression_partitioned(problem: &RegressionProblem, config: &TestConfig) -> Result<TestOutcome> {
    let (p0, _) = problem
        .partition()
        .ok_or_else(|| MintError::InvalidInput("partitioned test needs X* columns".into()))?;
    full_data_test(problem, p0, config, false)
}

/// Sample-splitting MINTregression. `β` and `σ` are estimated on the second
/// half (rows `⌊n/2⌋..n`); the statistic uses the first `⌊n/2⌋` rows.
pub fn mint_regression_split(problem: &RegressionProblem, config: &TestConfig) -> Result<TestOutcome> {
    let n = problem.n();
    let p = problem.p();
    let m = n / 2;
    if n - m <= problem.coefficients() {
        return Err(MintError::InvalidInput(format!(
            "second half has {} rows, need more than {} coefficients",
            n - m,
            problem.coefficients()
        )));
    }
    let form = form_for(problem, config, m, false)?;
    let x1 = problem.fit.rows(0, m).into_owned();
    let x2 = problem.fit.rows(m, n - m).into_owned();
    let ls2 = LeastSquares::new(x2.clone())?;
    let xstar = problem.design_rows(0..m, p)?;

    // Coefficients and scale from the second half, standardised residuals on the first.
    let standardise = |v: &DVector<f64>| -> Result<Vec<f64>> {
        let v2 = v.rows(m, n - m).into_owned();
        let fit = fit_with(&ls2, &x2, &v2);
        if !(fit.sigma_hat > 0.0) {
            return Err(MintError::DegenerateResiduals);
        }
        let beta = DVector::from_vec(fit.beta_hat);
        let r1 = v.rows(0, m) - &x1 * beta;
        Ok(r1.iter().map(|e| e / fit.sigma_hat).collect())
    };

    let observed = statistic(&form, &xstar, 0.0, &standardise(&problem.response)?)?;
    let nulls = map_resamples(config.b, config.parallel, |b| {
        let eta = noise_vector(problem.noise, n, config.seed, b);
        statistic(&form, &xstar, 0.0, &standardise(&eta)?)
    })?;
    let mut out = TestOutcome::from_statistics(observed, nulls, config.q, config.seed)?;
    out.k = Some(form.k);
    Ok(out)
}
