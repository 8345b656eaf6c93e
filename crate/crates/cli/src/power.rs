//! Monte Carlo power and size estimation over simulated scenarios.
//!
//! Repetition `r` draws its data and its resamples from one seed derived
//! from the study seed and `r`, so a table depends only on the study seed.
//! Repetitions run in parallel; each runs its test single-threaded.

use mint_core::datagen::{ScenarioSpec, Setting};
use mint_core::independence::{default_k, mint_auto, mint_av, mint_known, mint_unknown_grid, KGrid};
use mint_core::rng::{self, Domain};
use mint_core::{Result, TestConfig, WeightMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::PowerVariant;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudy {
    pub settings: Vec<Setting>,
    pub variants: Vec<PowerVariant>,
    /// Orders for `known` and `unknown`; one row per entry.
    pub ks: Vec<usize>,
    /// Grid for `auto` and `av`.
    pub grid: KGrid,
    pub pairs: usize,
    pub n: usize,
    pub reps: usize,
    pub b: usize,
    pub q: f64,
    pub multivariate: bool,
    /// Weighting for `known` and `unknown`.
    pub weight_mode: WeightMode,
    pub seed: u64,
}

impl PowerStudy {
    /// A study of one variant with the default order and grid.
    pub fn new(settings: Vec<Setting>, variants: Vec<PowerVariant>, n: usize, reps: usize, seed: u64) -> Self {
        PowerStudy {
            settings,
            variants,
            ks: vec![default_k(n)],
            grid: KGrid::range(1, 20).expect("non-empty grid"),
            pairs: 100,
            n,
            reps,
            b: 99,
            q: 0.05,
            multivariate: false,
            weight_mode: WeightMode::AutoSolve,
            seed,
        }
    }

    pub fn run(&self) -> Vec<PowerRow> {
        let mut rows = Vec::new();
        for &setting in &self.settings {
            for &variant in &self.variants {
                rows.extend(self.cell(setting, variant));
            }
        }
        rows
    }

    fn labels(&self, variant: PowerVariant) -> Vec<String> {
        match variant {
            PowerVariant::Known | PowerVariant::Unknown => self.ks.iter().map(usize::to_string).collect(),
            PowerVariant::Auto | PowerVariant::Av => vec![self.grid.to_string()],
        }
    }

    fn cell(&self, setting: Setting, variant: PowerVariant) -> Vec<PowerRow> {
        let outcomes: Vec<Result<Vec<bool>>> = (0..self.reps)
            .into_par_iter()
            .map(|r| self.replicate(setting, variant, r))
            .collect();
        let labels = self.labels(variant);
        let mut hits = vec![0usize; labels.len()];
        let mut failure = None;
        for outcome in outcomes {
            match outcome {
                Ok(decisions) => {
                    for (h, d) in hits.iter_mut().zip(decisions) {
                        *h += d as usize;
                    }
                }
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        labels
            .into_iter()
            .zip(hits)
            .map(|(k, h)| {
                let rate = h as f64 / self.reps as f64;
                let ok = failure.is_none();
                PowerRow {
                    setting: setting.name().to_string(),
                    parameter: setting.parameter().map(|p| p.to_string()).unwrap_or_default(),
                    variant: variant.name().to_string(),
                    k,
                    n: self.n,
                    b: self.b,
                    q: self.q,
                    num_reps: self.reps,
                    rejection_rate: ok.then_some(rate),
                    std_error: ok.then(|| (rate * (1.0 - rate) / self.reps as f64).sqrt()),
                    status: failure.clone().map_or_else(|| "ok".to_string(), |e| format!("error: {e}")),
                }
            })
            .collect()
    }

    /// Rejection decisions of repetition `rep`, one per row label.
    pub fn replicate(&self, setting: Setting, variant: PowerVariant, rep: usize) -> Result<Vec<bool>> {
        let seed = rep_seed(self.seed, rep);
        let spec = ScenarioSpec {
            setting,
            n: self.n,
            multivariate: self.multivariate,
            seed,
        };
        let sample = spec.generate()?;
        let config = TestConfig::new(self.b, self.q, seed)
            .with_weight_mode(self.weight_mode)
            .sequential();
        Ok(match variant {
            PowerVariant::Unknown => mint_unknown_grid(&sample, &self.ks, self.weight_mode, &config)?
                .iter()
                .map(|o| o.reject)
                .collect(),
            PowerVariant::Known => {
                let marginal = spec.y_marginal();
                self.ks
                    .iter()
                    .map(|&k| Ok(mint_known(&sample, &marginal, &config.clone().with_k(k))?.reject))
                    .collect::<Result<_>>()?
            }
            PowerVariant::Auto => vec![mint_auto(&sample, &self.grid, self.pairs, &config)?.reject],
            PowerVariant::Av => vec![mint_av(&sample, &self.grid, &config)?.reject],
        })
    }
}

/// Seed of repetition `rep`.
pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    rng::derive_seed(seed, Domain::Repetition, rep as u64)
}

/// One line of the power table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub setting: String,
    pub parameter: String,
    pub variant: String,
    /// The order, or the grid for `auto` and `av`.
    pub k: String,
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub q: f64,
    pub num_reps: usize,
    pub rejection_rate: Option<f64>,
    pub std_error: Option<f64>,
    pub status: String,
}

pub fn table_csv(rows: &[PowerRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialise");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(variants: Vec<PowerVariant>) -> PowerStudy {
        let mut s = PowerStudy::new(vec![Setting::Sinusoidal(1), Setting::Sinusoidal(2)], variants, 40, 6, 3);
        s.b = 9;
        s.pairs = 2;
        s.grid = KGrid::range(1, 4).unwrap();
        s
    }

    #[test]
    fn one_row_per_cell_and_order() {
        let mut s = tiny(vec![PowerVariant::Unknown, PowerVariant::Av, PowerVariant::Auto, PowerVariant::Known]);
        s.ks = vec![2, 5];
        let rows = s.run();
        assert_eq!(rows.len(), 2 * (2 + 1 + 1 + 2));
        assert_eq!(rows[0].k, "2");
        assert_eq!(rows[2].k, "1-4");
        for r in &rows {
            let p = r.rejection_rate.unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert_eq!(r.std_error.unwrap(), (p * (1.0 - p) / 6.0).sqrt());
            assert_eq!(r.status, "ok");
        }
    }

    #[test]
    fn failures_become_rows() {
        let mut s = tiny(vec![PowerVariant::Unknown]);
        s.ks = vec![60];
        let rows = s.run();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].status.starts_with("error: k must be"));
        assert_eq!(rows[0].rejection_rate, None);
    }

    #[test]
    fn unknown_rows_match_direct_runs() {
        let mut s = tiny(vec![PowerVariant::Unknown]);
        s.ks = vec![3];
        let rows = s.run();
        let direct = (0..6)
            .filter(|&r| {
                let seed = rep_seed(3, r);
                let sample = ScenarioSpec::new(Setting::Sinusoidal(1), 40, seed).generate().unwrap();
                let c = TestConfig::new(9, 0.05, seed).with_k(3);
                mint_core::independence::mint_unknown(&sample, &c).unwrap().reject
            })
            .count();
        assert_eq!(rows[0].rejection_rate.unwrap(), direct as f64 / 6.0);
    }

    #[test]
    fn csv_layout() {
        let csv = table_csv(&tiny(vec![PowerVariant::Unknown]).run());
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "setting,parameter,variant,k,n,B,q,num_reps,rejection_rate,std_error,status"
        );
        assert_eq!(lines.count(), 2);
    }
}
