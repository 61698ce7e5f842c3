//! Runs a JSON experiment config and writes `results.csv` and `summary.json`.
//!
//! cargo run --release --example run_config -- crates/core/configs/fplix_msets_er.json /tmp/out

use std::path::PathBuf;

use ixbandit::harness::{emit_all, run_experiment, ExperimentConfig};

fn main() -> ixbandit::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/configs/exp3ix_five_cycle_file.json"
        ))
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ixbandit"));

    let cfg = ExperimentConfig::load(&config)?;
    let result = run_experiment(
        &cfg,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    for cp in &result.summary.checkpoints {
        println!(
            "round {:>6}: regret {:>8.2} ± {:.2}",
            cp.round, cp.regret.mean, cp.regret.se
        );
    }
    for a in &result.summary.assertions {
        println!("{:<26} {}", a.name, if a.passed { "pass" } else { "fail" });
    }
    let (csv, json) = emit_all(&result, &out)?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
