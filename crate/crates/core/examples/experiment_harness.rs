//! Config-driven runs: the library side of the `spg` binary. Loads the
//! bundled bandit config, runs it, prints derived constants, and sweeps a
//! few fixed schedules against the adaptive one.
//!
//! ```text
//! cargo run --release --example experiment_harness -- [OUT_DIR]
//! ```

use std::path::{Path, PathBuf};

use spg::harness::{cmd_constants, cmd_run, cmd_sweep, read_run_log, ExperimentConfig, Schedule};

fn main() -> spg::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("spg-example"), PathBuf::from);
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/bandit_softmax.toml");
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.iterations = 5;

    print!("{}", cmd_constants(&cfg)?.render());

    let log = cmd_run(&cfg, &out)?;
    let records = read_run_log(std::fs::File::open(&log)?)?;
    println!("\n{} -> {} rows", log.display(), records.len());

    let schedules: Vec<Schedule> = ["spg", "fixed:1/L:10", "fixed:10/L:10", "fixed:0.5:10"]
        .iter()
        .map(|s| s.parse())
        .collect::<spg::Result<_>>()?;
    let sweep = cmd_sweep(&cfg, &schedules, &out)?;
    println!("\n{:<14} {:>10} {:>8} {:>8}", "schedule", "final J", "drops", "traj");
    for row in &sweep.rows {
        println!(
            "{:<14} {:>10.5} {:>8} {:>8}",
            row.schedule,
            row.final_j.unwrap_or(f64::NAN),
            row.oracle_drops.unwrap_or(0),
            row.total_trajectories
        );
    }
    println!("summary: {}", sweep.summary.display());
    Ok(())
}
