//! Policy-independent aggregates of a log, keyed by `(action, context)`.
//!
//! Every logged interaction adds `r/p` to `W[a, x]` and `(r/p)²` to a
//! second table. For any policy,
//!
//! ```text
//! Σ_i R̂_i  = Σ_{(a,x)} π(a|x)  · W[a, x]
//! Σ_i R̂_i² = Σ_{(a,x)} π(a|x)² · W2[a, x]
//! ```
//!
//! so re-evaluating a policy costs one probability vector per distinct
//! context instead of one per interaction.

use std::collections::HashMap;

use super::{ConfidenceParams, PolicyEvaluation};
use crate::error::{invalid, Error, Result};
use crate::policies::{ContextBatch, StochasticPolicy};
use crate::types::{ActionId, ContextVector, LoggedInteraction};

#[derive(Debug, Clone)]
pub struct StreamingEstimatorState {
    n_actions: usize,
    t: usize,
    index: HashMap<u64, usize>,
    contexts: Vec<ContextVector>,
    // contexts again, row-major, for batched policy evaluation
    flat: Vec<f64>,
    dim: usize,
    // row per distinct context, one column per action
    sums: Vec<f64>,
    sums_sq: Vec<f64>,
    active: Vec<bool>,
    raw: Vec<(u64, ActionId, f64)>,
}

impl StreamingEstimatorState {
    pub fn new(n_actions: usize) -> Self {
        Self {
            n_actions,
            t: 0,
            index: HashMap::new(),
            contexts: Vec::new(),
            flat: Vec::new(),
            dim: 0,
            sums: Vec::new(),
            sums_sq: Vec::new(),
            active: Vec::new(),
            raw: Vec::new(),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn distinct_contexts(&self) -> usize {
        self.contexts.len()
    }

    /// `W[a, x] += r/p`; the item's context must carry a dedup key.
    pub fn update(&mut self, item: &LoggedInteraction) -> Result<()> {
        let key = item.context.dedup_key().ok_or_else(|| {
            Error::Validation("aggregate table needs contexts with a dedup key".into())
        })?;
        if item.action.0 >= self.n_actions {
            return invalid(format!("action {} out of range", item.action));
        }
        item.validate()?;
        if self.contexts.is_empty() {
            self.dim = item.context.dim();
        } else if item.context.dim() != self.dim {
            return invalid(format!(
                "context has {} features, log has {}",
                item.context.dim(),
                self.dim
            ));
        }
        let n = self.n_actions;
        let row = *self.index.entry(key).or_insert_with(|| {
            self.contexts.push(item.context.clone());
            self.flat.extend_from_slice(item.context.values());
            self.sums.extend(std::iter::repeat_n(0.0, n));
            self.sums_sq.extend(std::iter::repeat_n(0.0, n));
            self.active.push(false);
            self.contexts.len() - 1
        });
        let w = item.weighted_reward();
        let cell = row * n + item.action.0;
        self.sums[cell] += w;
        self.sums_sq[cell] += w * w;
        if w != 0.0 {
            self.active[row] = true;
        }
        self.raw.push((key, item.action, w));
        self.t += 1;
        Ok(())
    }

    /// Accumulated `Σ r/p` for one `(action, key)` cell.
    pub fn entry(&self, action: ActionId, key: u64) -> f64 {
        match self.index.get(&key) {
            Some(&row) => self.sums[row * self.n_actions + action.0],
            None => 0.0,
        }
    }

    pub fn nonzero_entries(&self) -> usize {
        self.sums.iter().filter(|&&w| w != 0.0).count()
    }

    /// Sum over the whole table; equals `Σ_i r_i/p_i` over the log.
    pub fn table_total(&self) -> f64 {
        self.sums.iter().sum()
    }

    /// Per-interaction `(key, action, r/p)` triples in log order.
    pub fn raw(&self) -> &[(u64, ActionId, f64)] {
        &self.raw
    }

    /// Representative context for a key.
    pub fn context(&self, key: u64) -> Option<&ContextVector> {
        self.index.get(&key).map(|&row| &self.contexts[row])
    }

    fn batch(&self, rows: std::ops::Range<usize>) -> ContextBatch<'_> {
        ContextBatch {
            contexts: &self.contexts[rows.clone()],
            flat: &self.flat[rows.start * self.dim..rows.end * self.dim],
            dim: self.dim,
        }
    }

    /// `(ΣR̂, ΣR̂²)` for `policy` over the whole log.
    pub fn moments<P: StochasticPolicy + ?Sized>(&self, policy: &P) -> (f64, f64) {
        let mut probs = vec![0.0; self.contexts.len() * self.n_actions];
        policy.probabilities_batch(&self.batch(0..self.contexts.len()), &mut probs);
        self.accumulate_all(&probs)
    }

    fn accumulate_all(&self, probs: &[f64]) -> (f64, f64) {
        let n = self.n_actions;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for row in (0..self.contexts.len()).filter(|&r| self.active[r]) {
            let r = row * n..(row + 1) * n;
            accumulate(
                &probs[r.clone()],
                &self.sums[r.clone()],
                &self.sums_sq[r],
                &mut sum,
                &mut sum_sq,
            );
        }
        (sum, sum_sq)
    }

    /// Same as [`moments`](Self::moments), reusing probabilities cached for
    /// a policy that has not changed since the cache was filled.
    pub fn moments_cached<P: StochasticPolicy + ?Sized>(
        &self,
        policy: &P,
        cache: &mut ProbabilityCache,
    ) -> (f64, f64) {
        let n = self.n_actions;
        if cache.n != n {
            cache.n = n;
            cache.clear();
        }
        let cached = cache.rows();
        if cached < self.contexts.len() {
            cache.probs.resize(self.contexts.len() * n, 0.0);
            policy.probabilities_batch(
                &self.batch(cached..self.contexts.len()),
                &mut cache.probs[cached * n..],
            );
        }
        self.accumulate_all(&cache.probs)
    }

    /// `(1/t) Σ_{(a,x): W≠0} π(a|x) W[a, x]`.
    pub fn estimate_mean_fast<P: StochasticPolicy + ?Sized>(&self, policy: &P) -> Result<f64> {
        if self.t == 0 {
            return Err(Error::EmptyLog);
        }
        Ok(self.moments(policy).0 / self.t as f64)
    }

    pub fn evaluate<P: StochasticPolicy + ?Sized>(
        &self,
        policy: &P,
        params: &ConfidenceParams,
    ) -> Result<PolicyEvaluation> {
        let (sum, sum_sq) = self.moments(policy);
        PolicyEvaluation::from_moments(self.t, sum, sum_sq, params)
    }

    pub fn evaluate_boundless<P: StochasticPolicy + ?Sized>(
        &self,
        policy: &P,
    ) -> Result<PolicyEvaluation> {
        PolicyEvaluation::boundless(self.t, self.moments(policy).0)
    }
}

fn accumulate(probs: &[f64], sums: &[f64], sums_sq: &[f64], sum: &mut f64, sum_sq: &mut f64) {
    for ((&p, &w), &w2) in probs.iter().zip(sums).zip(sums_sq) {
        if w != 0.0 {
            *sum += p * w;
            *sum_sq += p * p * w2;
        }
    }
}

/// Probabilities of one fixed policy for every distinct context seen so far.
#[derive(Debug, Clone, Default)]
pub struct ProbabilityCache {
    n: usize,
    probs: Vec<f64>,
}

impl ProbabilityCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Must be called whenever the cached policy changes.
    pub fn clear(&mut self) {
        self.probs.clear();
    }

    fn rows(&self) -> usize {
        self.probs.len().checked_div(self.n).unwrap_or(0)
    }
}
