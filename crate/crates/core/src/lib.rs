//! Safe exploration for contextual bandits and learning to rank.
//!
//! A deployed policy keeps serving traffic while a new policy is learned
//! counterfactually from its logs. The new policy is only deployed once a
//! high-confidence lower bound on its value reaches the upper bound of the
//! policy it would replace.
//!
//! ```no_run
//! use std::sync::Arc;
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha8Rng;
//! use safe_explore::environments::synthetic::SyntheticClassificationSpec;
//! use safe_explore::environments::{make_classification_baseline, ClassificationEnv, RewardProfile, SupervisedConfig};
//! use safe_explore::learners::LearnerConfig;
//! use safe_explore::policies::SoftmaxLinearPolicy;
//! use safe_explore::safe_deploy::{sea_run, SeaMode, SeaState};
//! use safe_explore::types::RewardBounds;
//!
//! let data = SyntheticClassificationSpec::default().generate(0)?;
//! let mut rng = ChaCha8Rng::seed_from_u64(0);
//! let baseline = make_classification_baseline(&data.train, 10, 0.01, 0.1, &SupervisedConfig::default(), &mut rng)?;
//! let bounds = RewardBounds::new(1.0, baseline.min_propensity())?;
//! let learned = SoftmaxLinearPolicy::zeros(10, data.n_features);
//! let mut state = SeaState::new(baseline, learned, bounds, 0.05, SeaMode::Sea, LearnerConfig::default())?;
//! let mut env = ClassificationEnv::new(Arc::new(data.train), 10, RewardProfile::perfect(), 1)?;
//! let trace = sea_run(&mut state, &mut env, &mut rng, 10_000, &[10_000], None)?;
//! println!("deployed at {:?}", state.first_deployment());
//! # Ok::<(), safe_explore::Error>(())
//! ```

pub mod data_io;
pub mod environments;
mod error;
pub mod estimators;
pub mod evaluation;
pub mod experiment;
pub mod learners;
pub mod policies;
pub mod safe_deploy;
pub mod types;

pub use error::{Error, Result};
