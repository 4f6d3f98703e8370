//! Every classification method on the same data and seeds, via the
//! experiment runner.
//!
//!     cargo run --release --example online_baselines

use safe_explore::evaluation::mean_std;
use safe_explore::experiment::{run_replication, ExperimentConfig, ExperimentData, Method, Task};

fn main() -> safe_explore::Result<()> {
    let horizon = 5_000;
    let base = ExperimentConfig {
        horizon,
        checkpoints: vec![horizon],
        seeds: vec![0, 1, 2],
        ..ExperimentConfig::default()
    };
    let data = ExperimentData::load(&base)?;
    println!(
        "{:<15} {:>12} {:>10} {:>10}",
        "method", "cum reward", "regret", "holdout"
    );
    for method in Method::ALL
        .iter()
        .filter(|m| m.supports(Task::Classification))
    {
        let cfg = ExperimentConfig {
            method: *method,
            ..base.clone()
        };
        cfg.validate()?;
        let reps = cfg
            .seeds
            .iter()
            .map(|&s| run_replication(&cfg, &data, s))
            .collect::<safe_explore::Result<Vec<_>>>()?;
        let col = |name: &str| {
            let xs: Vec<f64> = reps
                .iter()
                .filter_map(|r| r.metric(name, horizon))
                .collect();
            mean_std(&xs).0
        };
        println!(
            "{:<15} {:>12.0} {:>10.0} {:>10.3}",
            method.name(),
            col("cumulative_reward"),
            col("regret"),
            col("holdout_reward")
        );
    }
    Ok(())
}
