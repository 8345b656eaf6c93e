//! The `mint` command-line tool.
//!
//! Every run writes its result (JSON, or CSV for `power` and `gen`) and a
//! [`manifest::RunManifest`] recording the arguments, resolved parameters,
//! seed and input hashes. `mint rerun <manifest>` repeats the run and
//! reproduces the result byte for byte, whatever the thread count.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod power;
pub mod report;

use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command, RerunArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{InputDigest, RunManifest};

/// Runs the tool on `argv` (without the program name) and returns the exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => error::ExitKind::Arguments as i32,
            };
        }
    };
    match execute(cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn parse(argv: &[String]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(std::iter::once("mint".to_string()).chain(argv.iter().cloned()))
}

/// Sizes the global rayon pool from `--threads`, else `MINT_THREADS`.
fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("MINT_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::args(format!("MINT_THREADS must be a positive integer, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::args("thread count must be positive"));
        }
        // Fails only if the pool already exists, as on a rerun.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli, argv: &[String]) -> CliResult<()> {
    configure_threads(cli.threads)?;
    if let Command::Rerun(r) = &cli.command {
        return rerun(r, &cli);
    }

    let seed = match cli.command {
        Command::Entropy(_) => None,
        _ => Some(cli.seed.unwrap_or_else(rand::random)),
    };
    let mut recorded = argv.to_vec();
    if let (Some(s), None) = (seed, cli.seed) {
        recorded.extend(["--seed".to_string(), s.to_string()]);
    }
    if matches!(cli.command, Command::Gen(_)) && cli.out.is_none() {
        return Err(CliError::args("gen requires --out"));
    }

    let start = Instant::now();
    let s = seed.unwrap_or_default();
    let executed = match &cli.command {
        Command::Entropy(a) => commands::entropy(a)?,
        Command::Test(a) => commands::test(a, s)?,
        Command::Regression(a) => commands::regression(a, s)?,
        Command::Power(a) => commands::power(a, s)?,
        Command::Gen(a) => commands::gen(a, s)?,
        Command::Rerun(_) => unreachable!("handled above"),
    };
    let duration_secs = start.elapsed().as_secs_f64();

    match &cli.out {
        Some(path) => io::write_file(path, &executed.output)?,
        None => print!("{}", executed.output),
    }

    let inputs = executed
        .inputs
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.clone(),
                sha256: io::file_sha256(p)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut resolved = cli.clone();
    resolved.seed = seed;
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        argv: recorded,
        parameters: serde_json::to_value(&resolved).expect("arguments serialise"),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        output: cli.out.clone(),
        threads: rayon::current_num_threads(),
        duration_secs,
    };
    let text = report::to_json(&manifest);
    match (&cli.manifest, &cli.out) {
        (Some(path), _) => io::write_file(path, &text),
        (None, Some(out)) => io::write_file(&manifest::beside(out), &text),
        (None, None) => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn rerun(r: &RerunArgs, cli: &Cli) -> CliResult<()> {
    let recorded = RunManifest::load(&r.from)?;
    for input in &recorded.inputs {
        if io::file_sha256(&input.path)? != input.sha256 {
            return Err(CliError::parse(format!(
                "input {} has changed since the recorded run",
                input.path.display()
            )));
        }
    }
    let mut argv = recorded.replay_argv(cli.out.as_deref());
    if let Some(m) = &cli.manifest {
        argv.extend(["--manifest".to_string(), m.display().to_string()]);
    }
    let replay = parse(&argv).map_err(|e| CliError::args(format!("recorded arguments do not parse: {e}")))?;
    if matches!(replay.command, Command::Rerun(_)) {
        return Err(CliError::args("a manifest cannot record a rerun"));
    }
    execute(replay, &argv)
}
