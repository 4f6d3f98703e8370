//! Safe exploration: learn counterfactually from whatever policy is
//! deployed, and swap in the learned policy only once its lower confidence
//! bound reaches the deployed policy's upper bound.
//!
//! Every round:
//!
//! 1. sample `a ~ π_d(·|x)` and record its propensity,
//! 2. play it and append `(x, a, r, p)` to the log,
//! 3. move `π_w` along `(r/p) ∇π_w(a|x)`,
//! 4. evaluate `π_w` and `π_d` on the whole log,
//! 5. deploy a snapshot of `π_w` if `LCB(π_w) >= UCB(π_d)`.
//!
//! The boundless variant compares plain IPS means instead of bounds.

mod ranking;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::environments::BanditEnvironment;
use crate::error::{Error, Result};
use crate::estimators::{
    ConfidenceParams, PolicyEvaluation, ProbabilityCache, StreamingEstimatorState,
};
use crate::learners::{ips_sgd_update, LearnerConfig};
use crate::policies::{sample_from, SoftmaxLinearPolicy, StochasticPolicy};
use crate::types::{ActionId, InteractionLog, LoggedInteraction, RewardBounds};

pub use ranking::{RankingRoundOutcome, RankingSeaState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeaMode {
    /// Compare `LCB(π_w)` against `UCB(π_d)`.
    Sea,
    /// Compare IPS means.
    Bsea,
}

/// True iff `eval_w.lcb >= eval_d.ucb`.
pub fn deployment_check(eval_w: &PolicyEvaluation, eval_d: &PolicyEvaluation) -> bool {
    eval_w.lcb >= eval_d.ucb
}

/// The policy currently executing actions.
#[derive(Debug, Clone, PartialEq)]
pub enum Deployed<P> {
    Baseline,
    Snapshot(P),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentRecord<P> {
    /// Round at which the check fired.
    pub t: usize,
    pub eval_w: PolicyEvaluation,
    pub eval_d: PolicyEvaluation,
    /// The snapshot that went live.
    pub policy: P,
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub interaction: LoggedInteraction,
    pub eval_w: PolicyEvaluation,
    pub eval_d: PolicyEvaluation,
    pub deployed: bool,
}

/// One row of the per-round trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub action: ActionId,
    pub reward: f64,
    pub propensity: f64,
    pub mean_w: f64,
    pub lcb_w: f64,
    pub mean_d: f64,
    pub ucb_d: f64,
    pub deployed: bool,
    pub cumulative_reward: f64,
}

#[derive(Debug, Clone)]
pub struct SeaState<B> {
    baseline: B,
    learned: SoftmaxLinearPolicy,
    deployed: Deployed<SoftmaxLinearPolicy>,
    estimator: StreamingEstimatorState,
    log: Option<InteractionLog>,
    delta: f64,
    bounds: RewardBounds,
    mode: SeaMode,
    cfg: LearnerConfig,
    d_cache: ProbabilityCache,
    probs: Vec<f64>,
    deployments: Vec<DeploymentRecord<SoftmaxLinearPolicy>>,
    cumulative: f64,
}

impl<B: StochasticPolicy> SeaState<B> {
    /// `learned` is the starting point of `π_w`; `bounds` declares the
    /// reward range and the smallest propensity the baseline can log.
    pub fn new(
        baseline: B,
        learned: SoftmaxLinearPolicy,
        bounds: RewardBounds,
        delta: f64,
        mode: SeaMode,
        cfg: LearnerConfig,
    ) -> Result<Self> {
        if baseline.n_actions() != learned.n_actions() {
            return Err(Error::Validation(format!(
                "baseline has {} actions, learned policy {}",
                baseline.n_actions(),
                learned.n_actions()
            )));
        }
        ConfidenceParams::new(delta, bounds.b())?;
        cfg.validate()?;
        let n = baseline.n_actions();
        Ok(Self {
            baseline,
            learned,
            deployed: Deployed::Baseline,
            estimator: StreamingEstimatorState::new(n),
            log: None,
            delta,
            bounds,
            mode,
            cfg,
            d_cache: ProbabilityCache::new(),
            probs: vec![0.0; n],
            deployments: Vec::new(),
            cumulative: 0.0,
        })
    }

    /// Also keep every interaction in an [`InteractionLog`].
    pub fn keep_log(mut self) -> Self {
        self.log = Some(InteractionLog::new());
        self
    }

    pub fn t(&self) -> usize {
        self.estimator.t()
    }

    pub fn mode(&self) -> SeaMode {
        self.mode
    }

    pub fn baseline(&self) -> &B {
        &self.baseline
    }

    pub fn learned(&self) -> &SoftmaxLinearPolicy {
        &self.learned
    }

    pub fn deployed(&self) -> &Deployed<SoftmaxLinearPolicy> {
        &self.deployed
    }

    pub fn deployments(&self) -> &[DeploymentRecord<SoftmaxLinearPolicy>] {
        &self.deployments
    }

    pub fn first_deployment(&self) -> Option<usize> {
        self.deployments.first().map(|d| d.t)
    }

    pub fn estimator(&self) -> &StreamingEstimatorState {
        &self.estimator
    }

    pub fn log(&self) -> Option<&InteractionLog> {
        self.log.as_ref()
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative
    }

    /// Confidence parameters with `b` from the smallest propensity seen so far.
    pub fn params(&self) -> ConfidenceParams {
        ConfidenceParams {
            delta: self.delta,
            b: self.bounds.b(),
        }
    }

    fn deployed_probabilities(&mut self, x: &crate::types::ContextVector) {
        match &self.deployed {
            Deployed::Baseline => self.baseline.probabilities_into(x, &mut self.probs),
            Deployed::Snapshot(p) => p.probabilities_into(x, &mut self.probs),
        }
    }

    fn evaluate_deployed(&mut self) -> Result<PolicyEvaluation> {
        let (sum, sum_sq) = match &self.deployed {
            Deployed::Baseline => self
                .estimator
                .moments_cached(&self.baseline, &mut self.d_cache),
            Deployed::Snapshot(p) => self.estimator.moments_cached(p, &mut self.d_cache),
        };
        self.finish(sum, sum_sq)
    }

    fn finish(&self, sum: f64, sum_sq: f64) -> Result<PolicyEvaluation> {
        match self.mode {
            SeaMode::Sea => PolicyEvaluation::from_moments(self.t(), sum, sum_sq, &self.params()),
            SeaMode::Bsea => PolicyEvaluation::boundless(self.t(), sum),
        }
    }

    /// Evaluations of `π_w` and `π_d` on the current log.
    pub fn evaluations(&mut self) -> Result<(PolicyEvaluation, PolicyEvaluation)> {
        let (sum, sum_sq) = self.estimator.moments(&self.learned);
        let eval_w = self.finish(sum, sum_sq)?;
        Ok((eval_w, self.evaluate_deployed()?))
    }

    /// Plays one round against `env`, drawing the action with `rng`.
    pub fn round<E, R>(&mut self, env: &mut E, rng: &mut R) -> Result<RoundOutcome>
    where
        E: BanditEnvironment + ?Sized,
        R: RngCore + ?Sized,
    {
        let x = env.observe();
        if x.dedup_key().is_none() {
            return Err(Error::Validation(
                "environment contexts need dedup keys".into(),
            ));
        }
        self.deployed_probabilities(&x);
        let (a, p) = sample_from(&self.probs, rng);
        let r = env.play(a)?;
        let item = LoggedInteraction::new(x, a, r, p)?;

        self.estimator.update(&item)?;
        self.bounds.observe(p);
        self.cumulative += r;
        ips_sgd_update(&mut self.learned, &item, &self.cfg)?;
        if let Some(log) = &mut self.log {
            log.append(item.clone())?;
        }

        let (eval_w, eval_d) = self.evaluations()?;
        let deployed = deployment_check(&eval_w, &eval_d);
        if deployed {
            self.deployed = Deployed::Snapshot(self.learned.clone());
            self.d_cache.clear();
            self.deployments.push(DeploymentRecord {
                t: self.t(),
                eval_w,
                eval_d,
                policy: self.learned.clone(),
            });
        }
        Ok(RoundOutcome {
            interaction: item,
            eval_w,
            eval_d,
            deployed,
        })
    }
}

/// Checkpoint summary produced by [`sea_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub cumulative_reward: f64,
    pub mean_w: f64,
    pub lcb_w: f64,
    pub mean_d: f64,
    pub ucb_d: f64,
    pub deployments: usize,
    pub holdout: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeaTrace {
    pub rows: Vec<TraceRow>,
    pub checkpoints: Vec<Checkpoint>,
}

impl SeaTrace {
    pub fn rewards(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.reward).collect()
    }
}

/// Runs `horizon` rounds, summarizing at every checkpoint.
///
/// `holdout` scores the learned policy on held-out data at checkpoints.
pub fn sea_run<B, E, R>(
    state: &mut SeaState<B>,
    env: &mut E,
    rng: &mut R,
    horizon: usize,
    checkpoints: &[usize],
    mut holdout: Option<&mut dyn FnMut(&SoftmaxLinearPolicy) -> f64>,
) -> Result<SeaTrace>
where
    B: StochasticPolicy,
    E: BanditEnvironment + ?Sized,
    R: RngCore + ?Sized,
{
    let mut trace = SeaTrace::default();
    let mut next = checkpoints
        .iter()
        .copied()
        .filter(|&c| c >= 1 && c <= horizon)
        .peekable();
    for _ in 0..horizon {
        let out = state.round(env, rng)?;
        let t = state.t();
        trace.rows.push(TraceRow {
            t,
            action: out.interaction.action,
            reward: out.interaction.reward,
            propensity: out.interaction.propensity,
            mean_w: out.eval_w.mean,
            lcb_w: out.eval_w.lcb,
            mean_d: out.eval_d.mean,
            ucb_d: out.eval_d.ucb,
            deployed: out.deployed,
            cumulative_reward: state.cumulative_reward(),
        });
        while next.peek().is_some_and(|&c| c <= t) {
            next.next();
            trace.checkpoints.push(Checkpoint {
                t,
                cumulative_reward: state.cumulative_reward(),
                mean_w: out.eval_w.mean,
                lcb_w: out.eval_w.lcb,
                mean_d: out.eval_d.mean,
                ucb_d: out.eval_d.ucb,
                deployments: state.deployments().len(),
                holdout: holdout.as_mut().map(|f| f(state.learned())),
            });
        }
    }
    Ok(trace)
}
