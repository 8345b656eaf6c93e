//! The subcommands. Each returns the result document and the input files it read.

use std::path::PathBuf;

use mint_core::datagen::{ScenarioSpec, Setting};
use mint_core::entropy::kl_entropy_with_mode;
use mint_core::independence::{default_k, mint_auto, mint_av, mint_known, mint_multi, mint_unknown, KGrid};
use mint_core::regression::{
    mint_regression, mint_regression_partitioned, mint_regression_split, ols_fit, NoiseFamily, RegressionProblem,
};
use mint_core::sampler::{EmpiricalPool, MarginalSampler, ProductSampler};
use mint_core::{BlockedSample, PointSet, TestConfig, WeightMode};

use crate::args::{
    parse_k_list, parse_params, EntropyArgs, GenArgs, PowerArgs, RegressionArgs, RegressionVariant, TestArgs,
    TestVariant,
};
use crate::error::{CliError, CliResult};
use crate::io::{sample_csv, Table};
use crate::power::{table_csv, PowerStudy};
use crate::report::{to_json, EntropyReport, TestReport};

pub struct Executed {
    pub output: String,
    pub inputs: Vec<PathBuf>,
}

pub fn entropy(a: &EntropyArgs) -> CliResult<Executed> {
    let table = Table::read(&a.input)?;
    let cols = match &a.columns {
        Some(spec) => table.resolve(spec)?,
        None => (0..table.headers().len()).collect(),
    };
    let points = table.numeric(&cols)?;
    let k = a.k.unwrap_or_else(|| default_k(points.n()));
    let estimate = kl_entropy_with_mode(&points, k, a.weights.into())?;
    Ok(Executed {
        output: to_json(&EntropyReport::from(&estimate)),
        inputs: vec![a.input.clone()],
    })
}

fn test_sample(table: &Table, a: &TestArgs) -> CliResult<BlockedSample> {
    let specs: Vec<&str> = match (&a.blocks, &a.x_cols, &a.y_cols) {
        (Some(blocks), None, None) if a.variant == TestVariant::Multi => blocks.split(';').collect(),
        (Some(_), _, _) if a.variant == TestVariant::Multi => {
            return Err(CliError::args("give either --blocks or --x-cols/--y-cols, not both"))
        }
        (Some(_), _, _) => return Err(CliError::args("--blocks applies only to the multi variant")),
        (None, Some(x), Some(y)) => vec![x, y],
        _ => return Err(CliError::args("--x-cols and --y-cols are required")),
    };
    let parts = specs
        .iter()
        .map(|s| table.numeric(&table.resolve(s)?))
        .collect::<CliResult<Vec<PointSet>>>()?;
    Ok(BlockedSample::from_blocks(&parts)?)
}

fn grid_for(a: &TestArgs, n: usize) -> CliResult<KGrid> {
    if a.k.is_some() {
        return Err(CliError::args("the auto and av variants take --k-grid, not --k"));
    }
    let grid = match &a.k_grid {
        Some(spec) => KGrid::new(parse_k_list(spec)?)?,
        None => KGrid::range(1, 20.min(n - 1))?,
    };
    Ok(match a.weights {
        Some(w) if WeightMode::from(w) == WeightMode::AutoSolve => grid.weighted(),
        _ => grid,
    })
}

fn known_sampler(a: &TestArgs, inputs: &mut Vec<PathBuf>) -> CliResult<Box<dyn MarginalSampler>> {
    match (&a.marginal, &a.marginal_file) {
        (Some(spec), None) => Ok(Box::new(ProductSampler::parse(spec)?)),
        (None, Some(path)) => {
            let table = Table::read(path)?;
            let cols: Vec<usize> = (0..table.headers().len()).collect();
            inputs.push(path.clone());
            Ok(Box::new(EmpiricalPool::new(table.numeric(&cols)?)))
        }
        (Some(_), Some(_)) => Err(CliError::args("give only one of --marginal and --marginal-file")),
        (None, None) => Err(CliError::args("variant 'known' requires --marginal or --marginal-file")),
    }
}

pub fn test(a: &TestArgs, seed: u64) -> CliResult<Executed> {
    let mut inputs = vec![a.input.clone()];
    let sampler = match a.variant {
        TestVariant::Known => Some(known_sampler(a, &mut inputs)?),
        _ if a.marginal.is_some() || a.marginal_file.is_some() => {
            return Err(CliError::args("--marginal applies only to the known variant"))
        }
        _ => None,
    };
    let table = Table::read(&a.input)?;
    let sample = test_sample(&table, a)?;
    let n = sample.n();
    let mut config = TestConfig::new(a.b, a.q, seed)
        .with_weight_mode(a.weights.map_or(WeightMode::AutoSolve, WeightMode::from));
    config.k_joint = a.k;
    if let Some(ky) = a.k_y {
        config.k_marginals = vec![default_k(n), ky];
    }

    let name = a.variant.name();
    let report = match a.variant {
        TestVariant::Known => {
            let sampler = sampler.expect("known variant has a sampler");
            TestReport::new(name, &mint_known(&sample, sampler.as_ref(), &config)?)
        }
        TestVariant::Unknown => TestReport::new(name, &mint_unknown(&sample, &config)?),
        TestVariant::Multi => TestReport::new(name, &mint_multi(&sample, &config)?),
        TestVariant::Auto => {
            let grid = grid_for(a, n)?;
            TestReport::new(name, &mint_auto(&sample, &grid, a.pairs, &config)?).with_grid(grid.to_string())
        }
        TestVariant::Av => {
            let grid = grid_for(a, n)?;
            TestReport::new(name, &mint_av(&sample, &grid, &config)?).with_grid(grid.to_string())
        }
    };
    Ok(Executed {
        output: to_json(&report),
        inputs,
    })
}

pub fn regression(a: &RegressionArgs, seed: u64) -> CliResult<Executed> {
    let table = Table::read(&a.input)?;
    let response = table.resolve(&a.response)?;
    if response.len() != 1 {
        return Err(CliError::args("--response must name exactly one column"));
    }
    let design = table.resolve(&a.design)?;
    let (cols, star) = match (&a.star_cols, a.variant) {
        (Some(spec), RegressionVariant::Partitioned) => {
            let star = table.resolve(spec)?;
            if let Some(c) = star.iter().find(|c| !design.contains(c)) {
                return Err(CliError::args(format!(
                    "star column '{}' is not among the design columns",
                    table.headers()[*c]
                )));
            }
            let rest = design.iter().filter(|c| !star.contains(c));
            let cols: Vec<usize> = star.iter().chain(rest).copied().collect();
            (cols, Some(star.len()))
        }
        (None, RegressionVariant::Partitioned) => {
            return Err(CliError::args(
                "variant 'partitioned' requires --star-cols\n\nUsage: mint regression --variant partitioned --star-cols <COLS> ...",
            ))
        }
        (Some(_), _) => return Err(CliError::args("--star-cols applies only to --variant partitioned")),
        (None, _) => (design, None),
    };
    let x = table.numeric(&cols)?;
    let y = table.numeric(&response)?.column(0);
    let noise: NoiseFamily = a.noise.parse()?;
    let mut problem = RegressionProblem::new(&x, &y)?.with_noise(noise)?;
    if a.intercept {
        problem = problem.with_intercept()?;
    }
    if let Some(p0) = star {
        problem = problem.with_partition(p0)?;
    }
    let config = TestConfig::new(a.b, a.q, seed)
        .with_k(a.k)
        .with_marginal_k(vec![a.k_eta])
        .with_weight_mode(a.weights.into());
    let (name, outcome) = match a.variant {
        RegressionVariant::Full => ("regression-full", mint_regression(&problem, &config)?),
        RegressionVariant::Split => ("regression-split", mint_regression_split(&problem, &config)?),
        RegressionVariant::Partitioned => ("regression-partitioned", mint_regression_partitioned(&problem, &config)?),
    };
    let fit = ols_fit(&problem)?;
    Ok(Executed {
        output: to_json(&TestReport::new(name, &outcome).with_fit(&fit)),
        inputs: vec![a.input.clone()],
    })
}

fn power_settings(name: &str, params: Option<&str>) -> CliResult<Vec<Setting>> {
    let name = name.trim().to_ascii_lowercase();
    match (name.as_str(), params) {
        ("gaussian-null", None) => Ok(vec![Setting::GaussianNull]),
        ("gaussian-null", Some(_)) => Err(CliError::args("gaussian-null takes no parameters")),
        (_, None) => Err(CliError::args(format!("setting '{name}' requires --params"))),
        (_, Some(spec)) => parse_params(spec)?
            .iter()
            .map(|p| Ok(format!("{name}({p})").parse::<Setting>()?))
            .collect(),
    }
}

pub fn power(a: &PowerArgs, seed: u64) -> CliResult<Executed> {
    if a.reps == 0 || a.b == 0 {
        return Err(CliError::args("--reps and --b must be positive"));
    }
    if !(a.q > 0.0 && a.q < 1.0) {
        return Err(CliError::args("--q must lie in (0, 1)"));
    }
    if a.n < 4 {
        return Err(CliError::args("--n must be at least 4"));
    }
    let mut grid = KGrid::new(parse_k_list(&a.k_grid)?)?;
    if a.weights.map(WeightMode::from) == Some(WeightMode::AutoSolve) {
        grid = grid.weighted();
    }
    let mut study = PowerStudy::new(power_settings(&a.setting, a.params.as_deref())?, a.variants.clone(), a.n, a.reps, seed);
    if let Some(ks) = &a.ks {
        study.ks = parse_k_list(ks)?;
    }
    study.grid = grid;
    study.pairs = a.pairs;
    study.b = a.b;
    study.q = a.q;
    study.multivariate = a.multivariate;
    study.weight_mode = a.weights.map_or(WeightMode::AutoSolve, WeightMode::from);
    Ok(Executed {
        output: table_csv(&study.run()),
        inputs: Vec::new(),
    })
}

pub fn gen(a: &GenArgs, seed: u64) -> CliResult<Executed> {
    let spec = ScenarioSpec {
        setting: a.setting.parse()?,
        n: a.n,
        multivariate: a.multivariate,
        seed,
    };
    Ok(Executed {
        output: sample_csv(&spec.generate()?),
        inputs: Vec::new(),
    })
}
