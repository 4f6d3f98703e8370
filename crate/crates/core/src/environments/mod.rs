//! Simulated bandit environments.
//!
//! Classification datasets become bandits by rewarding the chosen label;
//! ranking datasets by simulating position-biased clicks on the top of a
//! displayed list. Every environment owns its RNG, so a seed fully
//! determines the stream it produces.

mod baseline;
mod classification;
mod ranking;
pub mod synthetic;

use crate::error::Result;
use crate::types::{ActionId, ContextVector};

pub use baseline::{
    make_classification_baseline, make_ranking_baseline, train_pairwise_ranker,
    train_softmax_classifier, SupervisedConfig,
};
pub use classification::{
    classification_reward, classification_round, expected_reward, ClassificationEnv,
    ClassificationInstance, RewardKind, RewardProfile,
};
pub use ranking::{
    examination_probability, simulate_clicks, ClickProfile, ClickProfileName, ExaminationModel,
    Query, RankingEnv, SimulatedUser, UserModel, CLICK_CUTOFF,
};

/// A contextual bandit: present a context, receive the reward of one action.
pub trait BanditEnvironment {
    fn n_actions(&self) -> usize;

    /// Advances to the next round and returns its context.
    fn observe(&mut self) -> ContextVector;

    /// Reward of `action` in the current round.
    fn play(&mut self, action: ActionId) -> Result<f64>;

    /// Reward the best action would have received this round, when known.
    fn oracle_reward(&self) -> Option<f64>;
}
