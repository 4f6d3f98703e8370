use serde::{Deserialize, Serialize};

use super::dot;
use crate::error::{invalid, Result};
use crate::types::RankedList;

/// Linear document scorer; ranks candidates by `w·d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRanker {
    weights: Vec<f64>,
}

impl LinearRanker {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("ranker needs at least one weight");
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return invalid("ranker weights must be finite");
        }
        Ok(Self { weights })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            weights: vec![0.0; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn score(&self, doc: &[f64]) -> f64 {
        dot(&self.weights, doc)
    }

    /// Scores `docs` (row-major, `dim` features each) and sorts them.
    pub fn rank_flat(&self, docs: &[f64]) -> RankedList {
        let scores: Vec<f64> = docs
            .chunks_exact(self.dim())
            .map(|d| self.score(d))
            .collect();
        RankedList::from_scores(&scores)
    }

    pub fn rank_candidates<D: AsRef<[f64]>>(&self, docs: &[D]) -> RankedList {
        let scores: Vec<f64> = docs.iter().map(|d| self.score(d.as_ref())).collect();
        RankedList::from_scores(&scores)
    }

    /// Scales the weights back onto the L2 ball of `radius` if outside it.
    pub fn clip_norm(&mut self, radius: f64) {
        let norm = dot(&self.weights, &self.weights).sqrt();
        if norm > radius {
            let s = radius / norm;
            for w in &mut self.weights {
                *w *= s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_by_score() {
        let r = LinearRanker::zeros(2);
        assert_eq!(
            r.rank_candidates(&[[1.0, 0.0], [0.0, 1.0], [3.0, 3.0]])
                .doc_ids(),
            &[0, 1, 2]
        );

        let r = LinearRanker::new(vec![1.0, 0.0]).unwrap();
        let docs = [[0.2, 5.0], [0.9, 0.0], [0.5, -1.0]];
        let list = r.rank_candidates(&docs);
        assert_eq!(list.doc_ids(), &[1, 2, 0]);
        assert_eq!(list.scores(), &[0.9, 0.5, 0.2]);

        let flat: Vec<f64> = docs.iter().flatten().copied().collect();
        assert_eq!(r.rank_flat(&flat), list);
        assert_eq!(r.rank_candidates(&[[4.0, 4.0]]).doc_ids(), &[0]);
    }

    #[test]
    fn clip() {
        let mut r = LinearRanker::new(vec![300.0, 400.0]).unwrap();
        r.clip_norm(100.0);
        assert!((r.weights()[0] - 60.0).abs() < 1e-12);
        assert!((r.weights()[1] - 80.0).abs() < 1e-12);
    }
}
