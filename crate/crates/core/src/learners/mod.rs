//! Weight-update rules.
//!
//! The counterfactual update moves a softmax policy along
//! `(r/p) ∇_w π(a|x)`; the online policy-gradient baseline uses
//! `r ∇_w log π(a|x)` instead. For a softmax over `w_k·x / τ`,
//!
//! ```text
//! ∂π(a|x)/∂w_k     = π(a|x) (1[k=a] - π(k|x)) x / τ
//! ∂log π(a|x)/∂w_k =        (1[k=a] - π(k|x)) x / τ
//! ```

mod ranking;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::policies::{SoftmaxLinearPolicy, StochasticPolicy};
use crate::types::{ActionId, ContextVector, LoggedInteraction};

pub use ranking::{
    dbgd_step, ranking_ips_update, ranksvm_pairwise_update, team_draft_interleave,
    team_draft_interleave_with, DbgdOutcome, Team, RANKER_RADIUS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub learn_rate: f64,
    /// Constant subtracted from every reward by λ-IPS.
    pub lambda_shift: f64,
    pub dbgd_delta: f64,
    pub dbgd_gamma: f64,
    pub ranksvm_margin: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            learn_rate: 0.01,
            lambda_shift: 0.0,
            dbgd_delta: 1.0,
            dbgd_gamma: 0.01,
            ranksvm_margin: 1.0,
        }
    }
}

impl LearnerConfig {
    /// Defaults for the ranking task (smaller step).
    pub fn ranking() -> Self {
        Self {
            learn_rate: 1e-4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("learn_rate", self.learn_rate),
            ("dbgd_delta", self.dbgd_delta),
            ("dbgd_gamma", self.dbgd_gamma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.lambda_shift.is_finite() || !self.ranksvm_margin.is_finite() {
            return invalid("lambda_shift and ranksvm_margin must be finite");
        }
        Ok(())
    }
}

// w_k += scale · (1[k=a] - π(k|x)) · x / τ
fn softmax_step(
    policy: &mut SoftmaxLinearPolicy,
    x: &ContextVector,
    a: ActionId,
    probs: &[f64],
    scale: f64,
) {
    let tau = policy.temperature();
    let w = policy.weights_mut();
    for (k, &pk) in probs.iter().enumerate() {
        let g = scale * (f64::from(k == a.0) - pk) / tau;
        if g != 0.0 {
            for (wj, xj) in w.row_mut(k).iter_mut().zip(x.values()) {
                *wj += g * xj;
            }
        }
    }
}

fn check(policy: &SoftmaxLinearPolicy, x: &ContextVector, a: ActionId) -> Result<()> {
    if a.0 >= policy.n_actions() {
        return invalid(format!(
            "action {a} out of range for {} actions",
            policy.n_actions()
        ));
    }
    if x.dim() != policy.dim() {
        return invalid(format!(
            "context has {} features, policy expects {}",
            x.dim(),
            policy.dim()
        ));
    }
    Ok(())
}

fn translated_step(
    policy: &mut SoftmaxLinearPolicy,
    item: &LoggedInteraction,
    cfg: &LearnerConfig,
    shift: f64,
) -> Result<()> {
    check(policy, &item.context, item.action)?;
    let scale = cfg.learn_rate * (item.reward - shift) / item.propensity;
    if scale == 0.0 {
        return Ok(());
    }
    let probs = policy.probabilities(&item.context);
    let pa = probs[item.action.0];
    softmax_step(policy, &item.context, item.action, &probs, scale * pa);
    Ok(())
}

/// `w += learn_rate · (r/p) · ∇_w π(a|x)`.
pub fn ips_sgd_update(
    policy: &mut SoftmaxLinearPolicy,
    item: &LoggedInteraction,
    cfg: &LearnerConfig,
) -> Result<()> {
    translated_step(policy, item, cfg, 0.0)
}

/// As [`ips_sgd_update`] with the reward replaced by `r - lambda_shift`.
pub fn lambda_ips_update(
    policy: &mut SoftmaxLinearPolicy,
    item: &LoggedInteraction,
    cfg: &LearnerConfig,
) -> Result<()> {
    translated_step(policy, item, cfg, cfg.lambda_shift)
}

/// `w += learn_rate · r · ∇_w log π(a|x)`.
pub fn policy_gradient_update(
    policy: &mut SoftmaxLinearPolicy,
    x: &ContextVector,
    a: ActionId,
    r: f64,
    cfg: &LearnerConfig,
) -> Result<()> {
    check(policy, x, a)?;
    let scale = cfg.learn_rate * r;
    if scale == 0.0 {
        return Ok(());
    }
    let probs = policy.probabilities(x);
    softmax_step(policy, x, a, &probs, scale);
    Ok(())
}
