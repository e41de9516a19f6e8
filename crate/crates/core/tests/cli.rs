//! End-to-end runs of the `ergolab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(args)
        .env_remove("ERGOLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parses the JSON that follows an optional leading value line.
fn json_tail(text: &str) -> Value {
    let start = text.find('{').expect("json object in output");
    serde_json::from_str(&text[start..]).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SKEW: &str = "kind = \"skew\"\nfiber = 4\n[base]\nkind = \"bernoulli\"\np = [0.5, 0.5]\n\
                    [cocycle]\ntype = \"cell_driven\"\nsteps = [0, 1]\n";

#[test]
fn fbar_of_word_files() {
    let dir = TempDir::new().unwrap();
    let u = write(dir.path(), "u.txt", "alphabet=2 length=4\n0 1 0 1\n");
    let v = write(dir.path(), "v.txt", "alphabet=2 length=4\n1 0 1 0\n");
    let out = stdout(&ergolab(&["fbar", "--words", &u, &v]));
    // LCS of 0101 and 1010 is 3.
    assert_eq!(out.lines().next().unwrap(), "0.25");
    assert_eq!(json_tail(&out)["value"], 0.25);
    let out = stdout(&ergolab(&["dbar", "--words", &u, &v]));
    assert_eq!(out.lines().next().unwrap(), "1");
}

#[test]
fn dbar_of_distribution_files() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "p.csv", "word,probability\n0 0,0.5\n1 1,0.5\n");
    let q = write(dir.path(), "q.csv", "word,probability\n0 1,1.0\n");
    let out = stdout(&ergolab(&["dbar", "--dist", &p, &q]));
    let j = json_tail(&out);
    assert_eq!(j["value"], 0.5);
    assert_eq!(j["method"], "exact");
}

#[test]
fn entropy_reports_json() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        dir.path(),
        "b.toml",
        "kind = \"bernoulli\"\np = [0.5, 0.5]\n",
    );
    let out = stdout(&ergolab(&[
        "entropy", "--system", &sys, "--N", "1", "--k", "2", "--steps", "100000", "--bits",
    ]));
    let j = json_tail(&out);
    assert_eq!(j["units"], "bits");
    assert!((j["value"].as_f64().unwrap() - 1.0).abs() < 0.01);
    assert!(j["flags"].as_array().unwrap().is_empty());
}

#[test]
fn sample_dump_feeds_vwb() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        dir.path(),
        "b.toml",
        "kind = \"bernoulli\"\np = [0.5, 0.5]\n",
    );
    let dump = dir.path().join("t.txt");
    let dump_s = dump.to_string_lossy().into_owned();
    stdout(&ergolab(&[
        "sample", "--system", &sys, "--steps", "50000", "--seed", "3", "--out", &dump_s,
    ]));
    let text = fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("# alphabet=2 length=50000 seed=3"));
    let out = stdout(&ergolab(&[
        "vwb", "--sample", &dump_s, "--N", "3", "--k", "2", "--eps", "0.2",
    ]));
    let j = json_tail(&out);
    assert_eq!(j["statistic"], "vwb");
    assert_eq!(j["verdict"], true);
}

#[test]
fn kcheck_runs_on_a_system() {
    let dir = TempDir::new().unwrap();
    let sys = write(
        dir.path(),
        "b.toml",
        "kind = \"bernoulli\"\np = [0.6, 0.4]\n",
    );
    let out = stdout(&ergolab(&[
        "kcheck", "--system", &sys, "--steps", "100000", "--N", "2", "--k0", "2", "--k1", "4",
    ]));
    let j = json_tail(&out);
    assert_eq!(j["statistic"], "kcheck");
    assert_eq!(j["verdict"], true);
}

#[test]
fn rwm_trace_as_csv() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "s.toml", SKEW);
    let out = stdout(&ergolab(&[
        "rwm",
        "--system",
        &sys,
        "--L",
        "16,64",
        "--samples",
        "32",
        "--csv",
    ]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("series,x,value"));
    assert!(lines.count() >= 2);
}

#[test]
fn relmix_reports_both_forms() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "s.toml", SKEW);
    let out = stdout(&ergolab(&[
        "relmix",
        "--system",
        &sys,
        "--n",
        "1,4",
        "--samples",
        "64",
    ]));
    let j = json_tail(&out);
    assert!(j["values"]["centered_form"].is_number());
    assert!(j["values"]["identity_gap"].as_f64().unwrap() <= 1e-9);
}

fn rwm_config(dir: &Path) -> String {
    write(
        dir,
        "exp.toml",
        "name = \"cli\"\nexperiment = \"rwm\"\nseed = 5\ntrials = 3\nfiber = 4\n\
         [base]\nkind = \"bernoulli\"\np = [0.5, 0.5]\n[cocycles]\nfamily = \"random_rotation\"\n\
         [diagnostic.rwm]\nl_schedule = [16]\nsamples = 32\n",
    )
}

#[test]
fn experiment_writes_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = rwm_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = stdout(&ergolab(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        &out_dir.to_string_lossy(),
        "--workers",
        "1",
    ]));
    let j = json_tail(&out);
    assert_eq!(j["trials"], 3);
    assert_eq!(j["label"], "empirical analogue");
    let csv = fs::read_to_string(out_dir.join("cli.csv")).unwrap();
    assert!(csv.starts_with("trial,seed,cocycle,statistic,pass,values,flags"));
    assert_eq!(csv.lines().count(), 4);
    assert!(out_dir.join("cli.json").exists());
}

#[test]
fn seed_override_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = rwm_config(dir.path());
    let out_dir = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args([
            "experiment",
            "--config",
            &cfg,
            "--out",
            &out_dir.to_string_lossy(),
        ])
        .env("ERGOLAB_SEED", "77")
        .output()
        .unwrap();
    stdout(&o);
    let j: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("cli.json")).unwrap()).unwrap();
    assert_eq!(j["config"]["seed"], 77);
}

#[test]
fn precondition_refusal_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "k.toml",
        "name = \"refuse\"\nexperiment = \"class\"\nclass = \"kcheck\"\nseed = 1\ntrials = 2\nfiber = 2\n\
         [base]\nkind = \"sturmian\"\nalpha = 0.4142135623730951\n[cocycles]\nfamily = \"random_rotation\"\n\
         [diagnostic.kcheck]\nsteps = 100000\n",
    );
    let o = ergolab(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        &dir.path().to_string_lossy(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn bad_input_exits_1() {
    let dir = TempDir::new().unwrap();
    let u = write(dir.path(), "u.txt", "alphabet=2 length=3\n0 1 0\n");
    let v = write(dir.path(), "v.txt", "alphabet=2 length=4\n0 1 0 1\n");
    assert_eq!(ergolab(&["dbar", "--words", &u, &v]).status.code(), Some(1));
    let junk = write(dir.path(), "junk.toml", "kind = \"nonsense\"\n");
    assert_eq!(
        ergolab(&["entropy", "--system", &junk]).status.code(),
        Some(1)
    );
    assert_ne!(ergolab(&["fbar"]).status.code(), Some(0));
}
