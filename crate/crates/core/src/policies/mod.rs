//! Decision policies over a fixed action set.
//!
//! Stochastic policies expose a full probability vector so that the
//! propensity of a sampled action is exactly the value used for the draw.
//! Online learners (LinUCB, Thompson sampling) only select actions.

mod document;
mod epsilon_greedy;
mod linucb;
mod ranker;
mod softmax;
mod thompson;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::types::{ActionId, ContextVector};

pub use document::PolicyDocument;
pub use epsilon_greedy::EpsilonGreedyPolicy;
pub use linucb::LinUcbState;
pub use ranker::LinearRanker;
pub use softmax::SoftmaxLinearPolicy;
pub use thompson::ThompsonState;

/// A policy that defines `π(a | x)` for every action.
pub trait StochasticPolicy {
    fn n_actions(&self) -> usize;

    /// Full distribution over actions at `x`; sums to one.
    fn probabilities(&self, x: &ContextVector) -> Vec<f64>;

    fn probability(&self, action: ActionId, x: &ContextVector) -> f64 {
        self.probabilities(x)[action.0]
    }

    /// Writes the distribution into `out` (length `n_actions`).
    fn probabilities_into(&self, x: &ContextVector, out: &mut [f64]) {
        out.copy_from_slice(&self.probabilities(x));
    }

    /// Distributions for every context of `batch`, row after row in `out`.
    fn probabilities_batch(&self, batch: &ContextBatch<'_>, out: &mut [f64]) {
        let n = self.n_actions();
        for (x, row) in batch.contexts.iter().zip(out.chunks_exact_mut(n)) {
            self.probabilities_into(x, row);
        }
    }
}

/// A run of same-dimension contexts together with their row-major values.
#[derive(Debug, Clone, Copy)]
pub struct ContextBatch<'a> {
    pub contexts: &'a [ContextVector],
    /// `contexts.len() × dim` values.
    pub flat: &'a [f64],
    pub dim: usize,
}

/// Anything that commits to a single best action for a context.
pub trait Classifier {
    fn predict(&self, x: &ContextVector) -> ActionId;
}

/// Draws `a ~ π(· | x)` and returns it with its probability.
pub fn sample_action<P, R>(policy: &P, x: &ContextVector, rng: &mut R) -> (ActionId, f64)
where
    P: StochasticPolicy + ?Sized,
    R: Rng + ?Sized,
{
    let probs = policy.probabilities(x);
    sample_from(&probs, rng)
}

pub(crate) fn sample_from<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> (ActionId, f64) {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (a, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_positive = a;
        cum += p;
        if u < cum {
            return (ActionId(a), p);
        }
    }
    // u landed in the rounding gap above the cumulative sum
    (ActionId(last_positive), probs[last_positive])
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Row-major `n × m` weight matrix, one row per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![0.0; n * m],
        }
    }

    pub fn from_rows(n: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return invalid("weight matrix needs n >= 1 and m >= 1");
        }
        if data.len() != n * m {
            return invalid(format!("expected {} weights, got {}", n * m, data.len()));
        }
        if data.iter().any(|w| !w.is_finite()) {
            return invalid("weights must be finite");
        }
        Ok(Self { n, m, data })
    }

    pub fn n_actions(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.m..(a + 1) * self.m]
    }

    pub fn row_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.data[a * self.m..(a + 1) * self.m]
    }

    /// `W x`, one score per action.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.m);
        self.data
            .chunks_exact(self.m)
            .map(|row| dot(row, x))
            .collect()
    }

    pub(crate) fn check_context(&self, x: &ContextVector) -> Result<()> {
        if x.dim() != self.m {
            return invalid(format!(
                "context has dimension {}, policy expects {}",
                x.dim(),
                self.m
            ));
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Uniformly random policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformPolicy {
    pub n: usize,
}

impl StochasticPolicy for UniformPolicy {
    fn n_actions(&self) -> usize {
        self.n
    }

    fn probabilities(&self, _x: &ContextVector) -> Vec<f64> {
        vec![1.0 / self.n as f64; self.n]
    }
}
