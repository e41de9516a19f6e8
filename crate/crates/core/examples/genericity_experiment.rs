//! Runs an experiment config and writes its CSV and JSON reports.
//!
//! `cargo run --example genericity_experiment -- [config.toml] [out_dir]`

use std::path::PathBuf;

use ergolab::experiments::{emit_report, run_experiment, ExperimentConfig};

fn main() -> ergolab::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/entropy_genericity.toml"
        ))
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let cfg = ExperimentConfig::load(&config)?;
    let result = run_experiment(&cfg)?;
    for t in &result.trials {
        println!(
            "trial {} {} pass={} {:?}",
            t.trial, t.cocycle, t.pass, t.report.values
        );
    }
    println!(
        "pass rate {:?}, 95% interval {:?}",
        result.pass_rate, result.interval
    );
    let (csv, json) = emit_report(&result, &out)?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
