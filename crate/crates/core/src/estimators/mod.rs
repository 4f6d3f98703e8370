//! Off-policy value estimates with empirical-Bernstein confidence bounds.
//!
//! For a log `D_t` and a target policy `π`, the point terms are
//! `R̂_i = (r_i / p_i) · π(a_i | x_i)` and the estimate is their mean. The
//! confidence width is
//!
//! ```text
//! CB = 7 b ln(2/δ) / (3 (t-1)) + (1/t) sqrt( ln(2/δ)/(t-1) · Σ_{i,j} (R̂_i - R̂_j)² )
//! ```
//!
//! where `b` bounds every `R̂_i`. The pairwise sum is evaluated through
//! `Σ_{i,j} (R̂_i - R̂_j)² = 2 t ΣR̂² - 2 (ΣR̂)²`, so only two running sums
//! are needed.

mod aggregate;
mod ranking;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::policies::StochasticPolicy;
use crate::types::InteractionLog;

pub use aggregate::{ProbabilityCache, StreamingEstimatorState};
pub use ranking::{
    dcg_rank_weight, ranking_ips_estimate, ranking_ips_terms, ranking_reward_bound,
    ClickImpression, RankingTermEvaluator,
};

/// Confidence level `1 - δ` and the bound `b` on every point term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParams {
    pub delta: f64,
    pub b: f64,
}

impl ConfidenceParams {
    pub fn new(delta: f64, b: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta must be in (0, 1), got {delta}"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return invalid(format!("b must be positive and finite, got {b}"));
        }
        Ok(Self { delta, b })
    }
}

/// Point estimate with its two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub mean: f64,
    pub cb: f64,
    pub lcb: f64,
    pub ucb: f64,
    pub t: usize,
}

impl PolicyEvaluation {
    /// `cb = +∞` marks an undefined bound (fewer than two terms).
    pub fn new(mean: f64, cb: f64, t: usize) -> Self {
        debug_assert!(cb >= 0.0);
        Self {
            mean,
            cb,
            lcb: mean - cb,
            ucb: mean + cb,
            t,
        }
    }

    /// Builds the evaluation from `t`, `ΣR̂` and `ΣR̂²`.
    pub fn from_moments(
        t: usize,
        sum: f64,
        sum_sq: f64,
        params: &ConfidenceParams,
    ) -> Result<Self> {
        if t == 0 {
            return Err(Error::EmptyLog);
        }
        let cb = confidence_bound_from_moments(t, sum, sum_sq, params).unwrap_or(f64::INFINITY);
        Ok(Self::new(sum / t as f64, cb, t))
    }

    /// Mean-only evaluation: `lcb = ucb = mean`.
    pub fn boundless(t: usize, sum: f64) -> Result<Self> {
        if t == 0 {
            return Err(Error::EmptyLog);
        }
        Ok(Self::new(sum / t as f64, 0.0, t))
    }
}

/// `R̂_i = (r_i / p_i) π(a_i | x_i)` for every logged interaction.
pub fn ips_point_terms<P: StochasticPolicy + ?Sized>(
    log: &InteractionLog,
    policy: &P,
) -> Result<Vec<f64>> {
    log.iter()
        .map(|item| {
            if item.propensity <= 0.0 {
                return invalid(format!("non-positive propensity {}", item.propensity));
            }
            if item.action.0 >= policy.n_actions() {
                return invalid(format!("logged action {} unknown to policy", item.action));
            }
            Ok(item.reward / item.propensity * policy.probability(item.action, &item.context))
        })
        .collect()
}

/// Pairwise squared differences via `2 t ΣR̂² - 2 (ΣR̂)²`, clamped at zero.
pub fn pairwise_spread(t: usize, sum: f64, sum_sq: f64) -> f64 {
    (2.0 * t as f64 * sum_sq - 2.0 * sum * sum).max(0.0)
}

/// Confidence width from running moments; `None` when `t < 2`.
pub fn confidence_bound_from_moments(
    t: usize,
    sum: f64,
    sum_sq: f64,
    params: &ConfidenceParams,
) -> Option<f64> {
    if t < 2 {
        return None;
    }
    let tf = t as f64;
    let log_term = (2.0 / params.delta).ln();
    let range = 7.0 * params.b * log_term / (3.0 * (tf - 1.0));
    let spread = (log_term / (tf - 1.0) * pairwise_spread(t, sum, sum_sq)).sqrt() / tf;
    Some(range + spread)
}

/// Confidence width of a vector of point terms; `None` when fewer than two.
pub fn confidence_bound(terms: &[f64], params: &ConfidenceParams) -> Option<f64> {
    let (sum, sum_sq) = moments(terms);
    confidence_bound_from_moments(terms.len(), sum, sum_sq, params)
}

pub(crate) fn moments(terms: &[f64]) -> (f64, f64) {
    terms
        .iter()
        .fold((0.0, 0.0), |(s, s2), &r| (s + r, s2 + r * r))
}

/// Mean and `[LCB, UCB]` of `policy` on `log`, computed term by term.
pub fn evaluate_policy<P: StochasticPolicy + ?Sized>(
    log: &InteractionLog,
    policy: &P,
    params: &ConfidenceParams,
) -> Result<PolicyEvaluation> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let terms = ips_point_terms(log, policy)?;
    let (sum, sum_sq) = moments(&terms);
    PolicyEvaluation::from_moments(terms.len(), sum, sum_sq, params)
}

/// Boundless variant: both bounds collapse onto the IPS mean.
pub fn bsea_evaluate<P: StochasticPolicy + ?Sized>(
    log: &InteractionLog,
    policy: &P,
) -> Result<PolicyEvaluation> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let terms = ips_point_terms(log, policy)?;
    PolicyEvaluation::boundless(terms.len(), terms.iter().sum())
}
