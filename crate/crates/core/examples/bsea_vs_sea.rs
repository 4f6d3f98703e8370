//! SEA against its boundless variant on the same seeds.
//!
//! BSEA compares plain IPS means instead of confidence bounds, so it deploys
//! earlier but without a safety guarantee. The environment knows every
//! policy's true value, so each deployment can be checked.
//!
//!     cargo run --release --example bsea_vs_sea

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::environments::synthetic::SyntheticClassificationSpec;
use safe_explore::environments::{
    make_classification_baseline, ClassificationEnv, RewardProfile, SupervisedConfig,
};
use safe_explore::learners::LearnerConfig;
use safe_explore::policies::SoftmaxLinearPolicy;
use safe_explore::safe_deploy::{SeaMode, SeaState};
use safe_explore::types::RewardBounds;

const HORIZON: usize = 20_000;

fn main() -> safe_explore::Result<()> {
    let data = SyntheticClassificationSpec::default().generate(0)?;
    let pool = Arc::new(data.train);
    for seed in 0..3u64 {
        for mode in [SeaMode::Sea, SeaMode::Bsea] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let baseline = make_classification_baseline(
                &pool,
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
                mode,
                LearnerConfig::default(),
            )?;
            let mut env = ClassificationEnv::new(
                pool.clone(),
                data.n_classes,
                RewardProfile::perfect(),
                seed,
            )?;

            let mut value = env.true_value(state.baseline());
            let mut worse = 0;
            for _ in 0..HORIZON {
                if state.round(&mut env, &mut rng)?.deployed {
                    let v = env.true_value(&state.deployments().last().unwrap().policy);
                    worse += usize::from(v < value);
                    value = v;
                }
            }
            println!(
                "seed {seed} {mode:?}: first deployment {:?}, {} deployments, {worse} made things worse, final true value {value:.3}",
                state.first_deployment(),
                state.deployments().len(),
            );
        }
    }
    Ok(())
}
