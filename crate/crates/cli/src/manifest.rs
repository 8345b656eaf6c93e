//! Run manifests: enough to repeat any run exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, with the seed made explicit.
    pub argv: Vec<String>,
    /// Every parameter after defaults were applied.
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(format!("bad manifest {}: {e}", path.display())))
    }

    /// Arguments for repeating the run, writing results to `out` when given.
    /// The manifest location is dropped so the repeat never overwrites this one.
    pub fn replay_argv(&self, out: Option<&Path>) -> Vec<String> {
        let mut argv = strip_option(&self.argv, "--manifest");
        if let Some(out) = out {
            argv = strip_option(&argv, "--out");
            argv.push("--out".into());
            argv.push(out.display().to_string());
        }
        argv
    }
}

/// Removes `name value` and `name=value` occurrences.
fn strip_option(argv: &[String], name: &str) -> Vec<String> {
    let prefix = format!("{name}=");
    let mut out = Vec::with_capacity(argv.len());
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
        } else if a == name {
            skip = true;
        } else if !a.starts_with(&prefix) {
            out.push(a.clone());
        }
    }
    out
}

/// `<out>.manifest.json`.
pub fn beside(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(argv: &[&str]) -> RunManifest {
        RunManifest {
            command: "gen".into(),
            argv: argv.iter().map(|s| s.to_string()).collect(),
            parameters: serde_json::Value::Null,
            seed: Some(1),
            version: "0".into(),
            inputs: vec![],
            output: None,
            threads: 1,
            duration_secs: 0.0,
        }
    }

    #[test]
    fn replay_replaces_output_and_drops_manifest() {
        let m = manifest(&["gen", "--out", "a.csv", "--manifest=m.json", "--n", "5", "--seed", "1"]);
        assert_eq!(m.replay_argv(None), vec!["gen", "--out", "a.csv", "--n", "5", "--seed", "1"]);
        assert_eq!(
            m.replay_argv(Some(Path::new("b.csv"))),
            vec!["gen", "--n", "5", "--seed", "1", "--out", "b.csv"]
        );
        let m = manifest(&["gen", "--out=a.csv", "--manifest", "m.json"]);
        assert_eq!(m.replay_argv(Some(Path::new("c"))), vec!["gen", "--out", "c"]);
    }

    #[test]
    fn round_trip() {
        let m = manifest(&["x"]);
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(beside(Path::new("dir/r.json")), PathBuf::from("dir/r.json.manifest.json"));
    }
}
