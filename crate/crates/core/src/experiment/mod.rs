//! Config-driven experiment runner and the `verify` oracle suites.
//!
//! A run executes one method on one task for several seeds. Each seed gets
//! three independent RNG streams (baseline training, environment, policy),
//! so two methods run with the same seed see the same contexts and, until
//! their behaviour diverges, the same rewards.

mod config;
mod runner;
pub mod verify;

pub use config::{DatasetSource, ExperimentConfig, LearnerSettings, Method, Overrides, Task};
pub use runner::{
    aggregate_csv, resolve_output_dir, run_experiment, run_replication, sea_setup, stream_rng,
    tidy_metrics_csv, ExperimentData, MetricPoint, Replication, RunSummary, OUTPUT_ROOT_ENV,
};

/// Formats `x` with at most 12 significant digits and a '.' decimal point.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}
