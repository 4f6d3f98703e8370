//! A full experiment from a TOML config: several seeds, traces, tidy
//! metrics, an aggregate and a manifest that can rerun it.
//!
//!     cargo run --release --example experiment_runner -- /tmp/sea-demo

use safe_explore::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
task = "ranking"
method = "bsea"
profile = "position-biased"
horizon = 5000
seeds = [0, 1]
check_every = 250

[dataset]
kind = "synthetic"
seed = 0

[dataset.ranking]
n_train_queries = 100
docs_per_query = 20
"#;

fn main() -> safe_explore::Result<()> {
    let mut cfg = ExperimentConfig::from_toml(CONFIG)?;
    cfg.output_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("sea-demo").display().to_string())
        .into();
    let summary = run_experiment(&cfg)?;
    for rep in &summary.replications {
        println!(
            "seed {}: deployments at {:?}",
            rep.seed, rep.deployment_rounds
        );
    }
    print!("{}", std::fs::read_to_string(&summary.aggregate)?);
    println!("manifest: {}", summary.manifest.display());
    Ok(())
}
