//! Safe exploration on a synthetic 10-class problem.
//!
//! An ε-greedy baseline trained on 1% of the data serves traffic. A softmax
//! policy learns from its logs and replaces it once its lower bound clears
//! the baseline's upper bound.
//!
//!     cargo run --release --example sea_classification

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::environments::synthetic::SyntheticClassificationSpec;
use safe_explore::environments::{
    make_classification_baseline, ClassificationEnv, RewardProfile, SupervisedConfig,
};
use safe_explore::evaluation::average_reward_holdout;
use safe_explore::learners::LearnerConfig;
use safe_explore::policies::SoftmaxLinearPolicy;
use safe_explore::safe_deploy::{sea_run, SeaMode, SeaState};
use safe_explore::types::RewardBounds;

fn main() -> safe_explore::Result<()> {
    let data = SyntheticClassificationSpec::default().generate(0)?;
    let profile = RewardProfile::perfect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let baseline = make_classification_baseline(
        &data.train,
        data.n_classes,
        0.01,
        0.1,
        &SupervisedConfig::default(),
        &mut rng,
    )?;
    let bounds = RewardBounds::new(1.0, baseline.min_propensity())?;
    let learned = SoftmaxLinearPolicy::zeros(data.n_classes, data.n_features);
    let mut state = SeaState::new(
        baseline,
        learned,
        bounds,
        0.05,
        SeaMode::Sea,
        LearnerConfig::default(),
    )?;
    let mut env = ClassificationEnv::new(Arc::new(data.train.clone()), data.n_classes, profile, 2)?;

    let test = data.test.clone();
    let mut holdout = |p: &SoftmaxLinearPolicy| average_reward_holdout(p, &test, &profile).unwrap();
    let trace = sea_run(
        &mut state,
        &mut env,
        &mut rng,
        30_000,
        &[1_000, 5_000, 10_000, 20_000, 30_000],
        Some(&mut holdout),
    )?;

    println!(
        "{:>7} {:>10} {:>8} {:>8} {:>8}",
        "t", "reward", "lcb_w", "ucb_d", "holdout"
    );
    for c in &trace.checkpoints {
        println!(
            "{:>7} {:>10.0} {:>8.3} {:>8.3} {:>8.3}",
            c.t,
            c.cumulative_reward,
            c.lcb_w,
            c.ucb_d,
            c.holdout.unwrap_or(f64::NAN)
        );
    }
    for d in state.deployments() {
        println!("deployed at t = {}", d.t);
    }
    println!(
        "baseline holdout {:.3}",
        average_reward_holdout(state.baseline(), &data.test, &profile)?
    );
    Ok(())
}
