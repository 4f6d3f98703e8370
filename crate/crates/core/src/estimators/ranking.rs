//! Document-level click IPS for rankers.
//!
//! A logged impression contributes `Σ_clicked λ(rank') / p`, where `rank'`
//! is the clicked document's position under the candidate ranker, `p` its
//! examination propensity when it was shown, and `λ(k) = 1/log₂(1+k)` for
//! `k <= 10`.

use crate::environments::{ExaminationModel, Query, CLICK_CUTOFF};
use crate::error::{invalid, Result};
use crate::policies::LinearRanker;
use crate::types::ClickRecord;

/// Clicks observed on one displayed list for `queries[query]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickImpression {
    pub query: usize,
    pub clicks: Vec<ClickRecord>,
}

impl ClickImpression {
    /// Keeps only clicked records.
    pub fn new(query: usize, records: &[ClickRecord]) -> Self {
        Self {
            query,
            clicks: records.iter().filter(|c| c.clicked).copied().collect(),
        }
    }
}

/// DCG rank weight `1/log₂(1+k)` for 1-based `k <= 10`, else 0.
pub fn dcg_rank_weight(rank: usize) -> f64 {
    if rank == 0 || rank > CLICK_CUTOFF {
        0.0
    } else {
        1.0 / ((1 + rank) as f64).log2()
    }
}

/// Upper bound on a single impression term: every top-10 slot clicked at
/// the smallest propensity.
pub fn ranking_reward_bound(model: &ExaminationModel) -> f64 {
    let total: f64 = (1..=model.cutoff.min(CLICK_CUTOFF))
        .map(dcg_rank_weight)
        .sum();
    total / model.min_propensity()
}

fn impression_term(imp: &ClickImpression, ranks: &[usize]) -> Result<f64> {
    let mut term = 0.0;
    for c in imp.clicks.iter().filter(|c| c.clicked) {
        if c.propensity.is_nan() || c.propensity <= 0.0 {
            return invalid(format!(
                "click on doc {} has propensity {}",
                c.doc_id, c.propensity
            ));
        }
        let rank = *ranks.get(c.doc_id).ok_or_else(|| {
            crate::Error::Validation(format!("clicked doc {} not in query", c.doc_id))
        })?;
        term += dcg_rank_weight(rank) / c.propensity;
    }
    Ok(term)
}

/// One term per impression for `ranker`.
pub fn ranking_ips_terms(
    impressions: &[ClickImpression],
    queries: &[Query],
    ranker: &LinearRanker,
) -> Result<Vec<f64>> {
    let mut eval = RankingTermEvaluator::new(queries.len());
    impressions
        .iter()
        .map(|imp| eval.term(imp, queries, ranker))
        .collect()
}

/// Mean impression term; 0 for an empty log.
pub fn ranking_ips_estimate(
    impressions: &[ClickImpression],
    queries: &[Query],
    ranker: &LinearRanker,
) -> Result<f64> {
    if impressions.is_empty() {
        return Ok(0.0);
    }
    let terms = ranking_ips_terms(impressions, queries, ranker)?;
    Ok(terms.iter().sum::<f64>() / terms.len() as f64)
}

/// Evaluates impression terms for one fixed ranker, ranking each query once.
#[derive(Debug, Clone, Default)]
pub struct RankingTermEvaluator {
    ranks: Vec<Option<Vec<usize>>>,
}

impl RankingTermEvaluator {
    pub fn new(n_queries: usize) -> Self {
        Self {
            ranks: vec![None; n_queries],
        }
    }

    /// Forget cached rankings; call when the ranker changes.
    pub fn clear(&mut self) {
        self.ranks.iter_mut().for_each(|r| *r = None);
    }

    pub fn term(
        &mut self,
        imp: &ClickImpression,
        queries: &[Query],
        ranker: &LinearRanker,
    ) -> Result<f64> {
        let q = queries.get(imp.query).ok_or_else(|| {
            crate::Error::Validation(format!("query index {} out of range", imp.query))
        })?;
        if self.ranks.len() < queries.len() {
            self.ranks.resize(queries.len(), None);
        }
        let slot = &mut self.ranks[imp.query];
        if slot.is_none() {
            *slot = Some(ranker.rank_flat(q.features()).ranks());
        }
        impression_term(imp, slot.as_ref().unwrap())
    }

    /// `(Σ term, Σ term²)` over `impressions`.
    pub fn moments(
        &mut self,
        impressions: &[ClickImpression],
        queries: &[Query],
        ranker: &LinearRanker,
    ) -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for imp in impressions {
            let v = self.term(imp, queries, ranker)?;
            sum += v;
            sum_sq += v * v;
        }
        Ok((sum, sum_sq))
    }
}
