//! JSON result documents.

use mint_core::regression::OlsFit;
use mint_core::{EntropyEstimate, TestOutcome};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Summary {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub variant: String,
    pub statistic: f64,
    pub null_stats_summary: Summary,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub q: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_hat: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_hat: Option<f64>,
}

impl TestReport {
    pub fn new(variant: &str, o: &TestOutcome) -> Self {
        TestReport {
            variant: variant.to_string(),
            statistic: o.statistic,
            null_stats_summary: Summary::of(&o.null_stats),
            p_value: o.p_value,
            critical_value: o.critical_value,
            reject: o.reject,
            q: o.q,
            b: o.b(),
            seed: o.seed,
            k: o.k,
            k_hat: o.k_hat,
            k_grid: None,
            beta_hat: None,
            sigma_hat: None,
        }
    }

    pub fn with_grid(mut self, grid: String) -> Self {
        self.k_grid = Some(grid);
        self
    }

    pub fn with_fit(mut self, fit: &OlsFit) -> Self {
        self.beta_hat = Some(fit.beta_hat.clone());
        self.sigma_hat = Some(fit.sigma_hat);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub value: f64,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    /// `w_1, …, w_k`.
    pub weights: Vec<f64>,
}

impl From<&EntropyEstimate> for EntropyReport {
    fn from(e: &EntropyEstimate) -> Self {
        EntropyReport {
            value: e.value,
            k: e.k,
            n: e.n,
            d: e.d,
            weights: e.weights.as_slice().to_vec(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}
