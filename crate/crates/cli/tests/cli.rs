use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mint(args: &[&str]) -> Output {
    mint_env(args, &[])
}

fn mint_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mint"));
    cmd.args(args).env_remove("MINT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_valid(schema: &str, instance: &Value) {
    let schema: Value = serde_json::from_str(schema).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let msgs: Vec<String> = match compiled.validate(instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| e.to_string()).collect(),
    };
    assert!(msgs.is_empty(), "schema violations: {msgs:?}\n{instance:#}");
}

const OUTCOME_SCHEMA: &str = include_str!("../schemas/test_outcome.schema.json");
const ENTROPY_SCHEMA: &str = include_str!("../schemas/entropy.schema.json");
const MANIFEST_SCHEMA: &str = include_str!("../schemas/manifest.schema.json");

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const POINTS: [[f64; 2]; 10] = [
    [0.0, 0.0],
    [1.0, 0.5],
    [2.5, 1.0],
    [0.3, 2.0],
    [4.0, 4.0],
    [1.7, 3.1],
    [3.3, 0.2],
    [2.2, 2.9],
    [0.9, 4.4],
    [3.8, 1.6],
];

#[test]
fn entropy_matches_hand_computation() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("u,v\n");
    for p in POINTS {
        csv.push_str(&format!("{},{}\n", p[0], p[1]));
    }
    let input = write(&dir, "pts.csv", &csv);
    let v = stdout_json(&mint(&["entropy", "--input", s(&input), "--k", "1"]));
    assert_valid(ENTROPY_SCHEMA, &v);

    // (1/n) Σ [2 log ρᵢ + log π + log(n−1) − Ψ(1)], Ψ(1) = −γ
    let euler = 0.577_215_664_901_532_9;
    let n = POINTS.len() as f64;
    let mut sum = 0.0;
    for (i, p) in POINTS.iter().enumerate() {
        let nearest = POINTS
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        sum += 2.0 * nearest.ln() + std::f64::consts::PI.ln() + (n - 1.0).ln() + euler;
    }
    let expected = sum / n;
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert_eq!(v["n"], 10);
    assert_eq!(v["d"], 2);
    assert_eq!(v["weights"], serde_json::json!([1.0]));

    let single = stdout_json(&mint(&["entropy", "--input", s(&input), "--columns", "2", "--k", "2"]));
    assert_eq!(single["d"], 1);
}

#[test]
fn entropy_errors() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.csv", "a\n1\n2\n3\n4\n");
    let out = mint(&["entropy", "--input", s(&input), "--k", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("k must be ≤ n−1"), "{}", stderr(&out));

    let bad = write(&dir, "b.csv", "a,b\n1,2\n3,x\n5,6\n");
    let out = mint(&["entropy", "--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3, column 2"), "{}", stderr(&out));

    let dup = write(&dir, "c.csv", "a\n1\n2\n2\n4\n");
    assert_eq!(mint(&["entropy", "--input", s(&dup), "--k", "1"]).status.code(), Some(3));
    assert_eq!(mint(&["entropy", "--input", "/nonexistent/file.csv"]).status.code(), Some(2));
    assert_eq!(mint(&["entropy", "--input", s(&input), "--columns", "zz"]).status.code(), Some(4));
}

fn gen_file(dir: &TempDir, setting: &str, n: &str, seed: &str, multivariate: bool) -> PathBuf {
    let path = dir.path().join(format!("{setting}-{n}-{seed}-{multivariate}.csv"));
    let mut args = vec!["gen", "--setting", setting, "--n", n, "--seed", seed, "--out", s(&path)];
    if multivariate {
        args.push("--multivariate");
    }
    let out = mint(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn gen_shapes_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = gen_file(&dir, "sinusoidal(1)", "100", "4", false);
    let text = fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,y1"));
    assert_eq!(lines.clone().count(), 100);
    assert!(lines.all(|l| l.split(',').count() == 2));
    let first = text.lines().nth(1).unwrap().split(',').next().unwrap();
    let mantissa = first.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17);

    let m = gen_file(&dir, "sinusoidal(1)", "100", "4", true);
    assert!(fs::read_to_string(&m).unwrap().starts_with("x1,x2,y1,y2\n"));

    let again = dir.path().join("again.csv");
    assert!(mint(&["gen", "--setting", "sinusoidal(1)", "--n", "100", "--seed", "4", "--out", s(&again)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&again).unwrap());

    let out = mint(&["gen", "--setting", "sinusoidal(1)", "--n", "10", "--seed", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(mint(&["gen", "--setting", "spiral(2)", "--n", "10", "--out", s(&again)]).status.code(), Some(4));
}

fn run_test(args: &[&str]) -> Value {
    let v = stdout_json(&mint(args));
    assert_valid(OUTCOME_SCHEMA, &v);
    v
}

#[test]
fn unknown_variant_on_null_data() {
    let dir = TempDir::new().unwrap();
    let mut large = 0;
    for seed in 0..10 {
        let data = gen_file(&dir, "multiplicative(0)", "150", &seed.to_string(), false);
        let v = run_test(&["test", "unknown", "--input", s(&data), "--x-cols", "x1", "--y-cols", "y1", "--b", "99", "--seed", "1"]);
        let b = v["B"].as_u64().unwrap() as f64;
        let p = v["p_value"].as_f64().unwrap();
        assert_eq!((p * (b + 1.0)).round() / (b + 1.0), p);
        large += (p > 0.05) as usize;
    }
    assert!(large >= 7, "{large}");
}

#[test]
fn every_test_variant_runs_and_validates() {
    let dir = TempDir::new().unwrap();
    let data = gen_file(&dir, "sinusoidal(1)", "120", "3", true);
    let input = s(&data);
    let common = ["--input", input, "--b", "19", "--seed", "5"];
    let xy = ["--x-cols", "x1,x2", "--y-cols", "y1,y2"];

    let mut args = vec!["test", "unknown"];
    args.extend(common);
    args.extend(xy);
    let unknown = run_test(&args);
    assert_eq!(unknown["k"], 5);
    assert!(unknown.get("k_hat").is_none());

    let mut args = vec!["test", "known", "--marginal", "uniform(-3.141592653589793,3.141592653589793);uniform(0,1)"];
    args.extend(common);
    args.extend(xy);
    run_test(&args);

    let mut args = vec!["test", "auto", "--k-grid", "1-6", "--pairs", "5"];
    args.extend(common);
    args.extend(xy);
    let auto = run_test(&args);
    assert_eq!(auto["k_grid"], "1-6");
    let k_hat = auto["k_hat"].as_u64().unwrap();
    assert!((1..=6).contains(&k_hat));
    assert_eq!(auto["k"], auto["k_hat"]);

    let mut args = vec!["test", "av", "--k-grid", "2;4;8"];
    args.extend(common);
    args.extend(xy);
    assert_eq!(run_test(&args)["k_grid"], "2;4;8");

    let mut args = vec!["test", "multi", "--blocks", "x1;x2;y1,y2"];
    args.extend(common);
    run_test(&args);
}

#[test]
fn known_variant_contract() {
    let dir = TempDir::new().unwrap();
    let data = gen_file(&dir, "gaussian-null", "80", "2", false);
    let base = ["test", "known", "--input", s(&data), "--x-cols", "1", "--y-cols", "2", "--b", "19", "--seed", "3"];

    let out = mint(&base);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("--marginal"));

    // A wrong marginal is not detectable; the run completes.
    let mut args = base.to_vec();
    args.extend(["--marginal", "uniform(0,1)"]);
    run_test(&args);

    let pool = gen_file(&dir, "gaussian-null", "1600", "9", false);
    let pool_y = dir.path().join("pool_y.csv");
    let ys: Vec<String> = fs::read_to_string(&pool)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    fs::write(&pool_y, format!("y\n{}\n", ys.join("\n"))).unwrap();
    let mut args = base.to_vec();
    args.extend(["--marginal-file", s(&pool_y)]);
    run_test(&args);
    let mut args = base.to_vec();
    args[7] = "99";
    args.extend(["--marginal-file", s(&pool_y)]);
    assert_eq!(mint(&args).status.code(), Some(4));

    let mut args = base.to_vec();
    args.extend(["--marginal", "normal(0,1);normal(0,1)"]);
    assert_eq!(mint(&args).status.code(), Some(4));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let data = gen_file(&dir, "circular(2)", "100", "8", false);
    let args = ["test", "av", "--input", s(&data), "--x-cols", "x1", "--y-cols", "y1", "--b", "29", "--seed", "77", "--k-grid", "1-5"];
    let a = mint(&args);
    let b = mint_env(&args, &[("MINT_THREADS", "1")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

fn regression_csv(dir: &TempDir, noiseless: bool) -> PathBuf {
    let mut csv = String::from("x,y,z\n");
    for i in 0..20 {
        let x = i as f64 / 4.0;
        let wiggle = if noiseless { 0.0 } else { ((i * 7919) % 13) as f64 / 13.0 - 0.5 };
        csv.push_str(&format!("{x},{},{}\n", 1.0 + 2.0 * x + wiggle, (i as f64).sin()));
    }
    write(dir, if noiseless { "exact.csv" } else { "toy.csv" }, &csv)
}

#[test]
fn regression_command() {
    let dir = TempDir::new().unwrap();
    let toy = regression_csv(&dir, false);
    let base = ["regression", "--input", s(&toy), "--response", "y", "--b", "49", "--seed", "2", "--intercept"];

    let mut args = base.to_vec();
    args.extend(["--design", "x", "--k-eta", "4"]);
    let v = run_test(&args);
    let p = v["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    assert_eq!(v["variant"], "regression-full");
    assert_eq!(v["beta_hat"].as_array().unwrap().len(), 2);
    assert!((v["beta_hat"][1].as_f64().unwrap() - 2.0).abs() < 0.2);
    assert_eq!(v["k"], 3);

    let mut args = base.to_vec();
    args.extend(["--design", "x,z", "--variant", "split", "--k-eta", "2", "--k", "2"]);
    assert_eq!(run_test(&args)["variant"], "regression-split");

    let mut args = base.to_vec();
    args.extend(["--design", "x,z", "--variant", "partitioned", "--star-cols", "z", "--k-eta", "4"]);
    run_test(&args);

    let mut args = base.to_vec();
    args.extend(["--design", "x,z", "--variant", "partitioned"]);
    let out = mint(&args);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));

    let mut args = base.to_vec();
    args.extend(["--design", "x", "--star-cols", "x"]);
    assert_eq!(mint(&args).status.code(), Some(4));

    let exact = regression_csv(&dir, true);
    let args = ["regression", "--input", s(&exact), "--response", "y", "--design", "x", "--intercept", "--b", "9", "--seed", "1", "--k-eta", "4"];
    assert_eq!(mint(&args).status.code(), Some(6));

    let singular = write(&dir, "sing.csv", "a,b,y\n1,2,0.1\n2,4,0.5\n3,6,0.2\n4,8,0.9\n5,10,0.3\n6,12,0.4\n7,14,0.8\n");
    let args = ["regression", "--input", s(&singular), "--response", "y", "--design", "a,b", "--b", "9", "--seed", "1"];
    assert_eq!(mint(&args).status.code(), Some(5));

    let mut args = base.to_vec();
    args.extend(["--design", "x", "--noise", "cauchy"]);
    assert_eq!(mint(&args).status.code(), Some(4));
}

fn power_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn power_grid_rows() {
    let out = mint(&[
        "power", "--setting", "sinusoidal", "--params", "1-6", "--variants", "unknown,av", "--reps", "3", "--n", "30",
        "--b", "9", "--k-grid", "1-4", "--seed", "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = power_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 12);
    for variant in ["unknown", "av"] {
        assert_eq!(rows.iter().filter(|r| r[2] == variant).count(), 6);
    }
    assert_eq!(rows[0][..4], ["sinusoidal", "1", "unknown", "3"]);
    assert!(rows.iter().all(|r| r[10] == "ok"));
}

#[test]
fn power_size_on_gaussian_null() {
    let out = mint(&["power", "--setting", "gaussian-null", "--variants", "unknown", "--reps", "500", "--seed", "11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = power_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    let rate: f64 = rows[0][8].parse().unwrap();
    assert!((0.0..=0.079).contains(&rate), "{rate}");
}

#[test]
fn power_rejects_bad_grids() {
    assert_eq!(mint(&["power", "--setting", "sinusoidal", "--reps", "2"]).status.code(), Some(4));
    assert_eq!(mint(&["power", "--setting", "gaussian-null", "--params", "1"]).status.code(), Some(4));
    assert_eq!(mint(&["power", "--setting", "gaussian-null", "--variants", "multi"]).status.code(), Some(4));
    let out = mint(&["power", "--setting", "gaussian-null", "--reps", "2", "--n", "10", "--ks", "12", "--seed", "1", "--b", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("error: k must be"), "{text}");
}

#[test]
fn manifests_and_reruns() {
    let dir = TempDir::new().unwrap();
    let data = gen_file(&dir, "sinusoidal(2)", "90", "1", false);
    let out_a = dir.path().join("a.json");
    let out = mint(&["test", "unknown", "--input", s(&data), "--x-cols", "x1", "--y-cols", "y1", "--b", "39", "--out", s(&out_a)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());

    let manifest_path = dir.path().join("a.json.manifest.json");
    let manifest: Value = serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_valid(MANIFEST_SCHEMA, &manifest);
    let seed = manifest["seed"].as_u64().expect("drawn seed is recorded");
    let argv: Vec<&str> = manifest["argv"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(argv[argv.len() - 2..], ["--seed", &seed.to_string()]);
    assert_eq!(manifest["parameters"]["command"]["test"]["b"], 39);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let out_b = dir.path().join("b.json");
    let out = mint_env(&["rerun", s(&manifest_path), "--out", s(&out_b)], &[("MINT_THREADS", "3")]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    let second: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(second["seed"], manifest["seed"]);
    assert_eq!(second["threads"], 3);

    let explicit = dir.path().join("m.json");
    let out = mint(&["gen", "--setting", "circular(1)", "--n", "10", "--out", s(&dir.path().join("g.csv")), "--manifest", s(&explicit)]);
    assert!(out.status.success());
    assert_valid(MANIFEST_SCHEMA, &serde_json::from_str(&fs::read_to_string(&explicit).unwrap()).unwrap());

    fs::write(&data, "x1,y1\n1,2\n3,4\n5,6\n7,8\n").unwrap();
    let out = mint(&["rerun", s(&manifest_path), "--out", s(&out_b)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("changed"));
}

#[test]
fn manifest_goes_to_stderr_without_output_file() {
    let dir = TempDir::new().unwrap();
    let data = gen_file(&dir, "sinusoidal(1)", "40", "1", false);
    let out = mint(&["entropy", "--input", s(&data)]);
    let manifest: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid(MANIFEST_SCHEMA, &manifest);
    assert!(manifest["seed"].is_null());
    assert_eq!(manifest["command"], "entropy");
}

#[test]
fn argument_errors_exit_4() {
    assert_eq!(mint(&[]).status.code(), Some(4));
    assert_eq!(mint(&["test", "sideways"]).status.code(), Some(4));
    assert_eq!(mint(&["gen", "--setting", "gaussian-null", "--n", "10"]).status.code(), Some(4));
    let out = mint_env(&["gen", "--setting", "gaussian-null", "--n", "10", "--out", "/tmp/x.csv"], &[("MINT_THREADS", "many")]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(mint(&["--help"]).status.code(), Some(0));
    assert_eq!(mint(&["--version"]).status.code(), Some(0));
}
