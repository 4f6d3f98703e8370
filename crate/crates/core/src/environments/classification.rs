use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BanditEnvironment;
use crate::error::{invalid, Error, Result};
use crate::policies::{sample_action, StochasticPolicy};
use crate::types::{ActionId, ContextVector, LoggedInteraction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardKind {
    /// 1 for the correct label, 0 otherwise.
    Perfect,
    /// Bernoulli rewards that only weakly favour the correct label.
    NearRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardProfile {
    pub kind: RewardKind,
    pub p_correct: f64,
    pub p_incorrect: f64,
}

impl RewardProfile {
    pub const NEAR_RANDOM_CORRECT: f64 = 0.6;
    pub const NEAR_RANDOM_INCORRECT: f64 = 0.4;

    pub fn perfect() -> Self {
        Self {
            kind: RewardKind::Perfect,
            p_correct: 1.0,
            p_incorrect: 0.0,
        }
    }

    pub fn near_random() -> Self {
        Self {
            kind: RewardKind::NearRandom,
            p_correct: Self::NEAR_RANDOM_CORRECT,
            p_incorrect: Self::NEAR_RANDOM_INCORRECT,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            RewardKind::Perfect => "perfect",
            RewardKind::NearRandom => "near-random",
        }
    }
}

impl FromStr for RewardProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Self::perfect()),
            "near-random" => Ok(Self::near_random()),
            other => Err(Error::Config(format!(
                "unknown reward profile '{other}' (expected perfect | near-random)"
            ))),
        }
    }
}

/// Expected reward of choosing `chosen` when `truth` is correct.
pub fn expected_reward(profile: &RewardProfile, chosen: ActionId, truth: ActionId) -> f64 {
    if chosen == truth {
        profile.p_correct
    } else {
        profile.p_incorrect
    }
}

/// Samples the reward for one labelling decision.
pub fn classification_reward<R: Rng + ?Sized>(
    chosen: ActionId,
    truth: ActionId,
    profile: &RewardProfile,
    rng: &mut R,
) -> f64 {
    match profile.kind {
        RewardKind::Perfect => f64::from(chosen == truth),
        RewardKind::NearRandom => {
            let p = expected_reward(profile, chosen, truth);
            f64::from(rng.random::<f64>() < p)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationInstance {
    pub features: ContextVector,
    pub label: ActionId,
}

/// Supervised pool turned into a bandit stream.
///
/// Each round draws an instance uniformly with replacement and, for noisy
/// profiles, pre-draws the reward of every action so the stream does not
/// depend on which action is played.
#[derive(Debug, Clone)]
pub struct ClassificationEnv {
    pool: Arc<Vec<ClassificationInstance>>,
    n_actions: usize,
    profile: RewardProfile,
    rng: ChaCha8Rng,
    current: Option<usize>,
    rewards: Vec<f64>,
}

impl ClassificationEnv {
    pub fn new(
        pool: Arc<Vec<ClassificationInstance>>,
        n_actions: usize,
        profile: RewardProfile,
        seed: u64,
    ) -> Result<Self> {
        Self::with_rng(pool, n_actions, profile, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(
        pool: Arc<Vec<ClassificationInstance>>,
        n_actions: usize,
        profile: RewardProfile,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if pool.is_empty() {
            return invalid("classification pool is empty");
        }
        if let Some(bad) = pool.iter().find(|i| i.label.0 >= n_actions) {
            return invalid(format!(
                "label {} out of range for {n_actions} actions",
                bad.label
            ));
        }
        Ok(Self {
            pool,
            n_actions,
            profile,
            rng,
            current: None,
            rewards: vec![0.0; n_actions],
        })
    }

    pub fn pool(&self) -> &[ClassificationInstance] {
        &self.pool
    }

    pub fn profile(&self) -> &RewardProfile {
        &self.profile
    }

    /// Label of the current round's instance.
    pub fn current_label(&self) -> Option<ActionId> {
        self.current.map(|i| self.pool[i].label)
    }

    /// Exact expected per-round reward of `policy` on this stream.
    pub fn true_value<P: StochasticPolicy + ?Sized>(&self, policy: &P) -> f64 {
        let mut probs = vec![0.0; self.n_actions];
        let total: f64 = self
            .pool
            .iter()
            .map(|inst| {
                policy.probabilities_into(&inst.features, &mut probs);
                probs
                    .iter()
                    .enumerate()
                    .map(|(a, p)| p * expected_reward(&self.profile, ActionId(a), inst.label))
                    .sum::<f64>()
            })
            .sum();
        total / self.pool.len() as f64
    }
}

impl BanditEnvironment for ClassificationEnv {
    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn observe(&mut self) -> ContextVector {
        let i = self.rng.random_range(0..self.pool.len());
        self.current = Some(i);
        let truth = self.pool[i].label;
        let (rewards, rng, profile) = (&mut self.rewards, &mut self.rng, &self.profile);
        for (a, r) in rewards.iter_mut().enumerate() {
            *r = classification_reward(ActionId(a), truth, profile, rng);
        }
        self.pool[i].features.clone()
    }

    fn play(&mut self, action: ActionId) -> Result<f64> {
        if self.current.is_none() {
            return invalid("play called before observe");
        }
        self.rewards
            .get(action.0)
            .copied()
            .ok_or_else(|| Error::Validation(format!("action {action} out of range")))
    }

    fn oracle_reward(&self) -> Option<f64> {
        self.current_label().map(|y| self.rewards[y.0])
    }
}

/// One full bandit round: context, sampled action with propensity, reward.
pub fn classification_round<E, P, R>(
    env: &mut E,
    policy: &P,
    rng: &mut R,
) -> Result<LoggedInteraction>
where
    E: BanditEnvironment + ?Sized,
    P: StochasticPolicy + ?Sized,
    R: RngCore + ?Sized,
{
    let x = env.observe();
    let (a, p) = sample_action(policy, &x, rng);
    let r = env.play(a)?;
    LoggedInteraction::new(x, a, r, p)
}
