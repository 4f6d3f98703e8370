use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EpsilonGreedyPolicy, LinearRanker, SoftmaxLinearPolicy, WeightMatrix};
use crate::error::{invalid, Result};

/// JSON form of a linear policy, loadable as a warm start.
///
/// ```json
/// {"kind":"softmax","n":3,"m":2,"weights":[...],"hyperparams":{"temperature":1.0}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDocument {
    pub kind: String,
    pub n: usize,
    pub m: usize,
    /// Row-major, one row per action.
    pub weights: Vec<f64>,
    #[serde(default)]
    pub hyperparams: BTreeMap<String, f64>,
}

impl PolicyDocument {
    pub const SOFTMAX: &'static str = "softmax";
    pub const EPSILON_GREEDY: &'static str = "epsilon-greedy";
    pub const LINEAR_RANKER: &'static str = "linear-ranker";

    fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return invalid(format!(
                "policy document is '{}', expected '{kind}'",
                self.kind
            ));
        }
        Ok(())
    }

    fn matrix(&self) -> Result<WeightMatrix> {
        WeightMatrix::from_rows(self.n, self.m, self.weights.clone())
    }

    pub fn to_softmax(&self) -> Result<SoftmaxLinearPolicy> {
        self.expect_kind(Self::SOFTMAX)?;
        let t = self.hyperparams.get("temperature").copied().unwrap_or(1.0);
        SoftmaxLinearPolicy::new(self.matrix()?, t)
    }

    pub fn to_epsilon_greedy(&self) -> Result<EpsilonGreedyPolicy> {
        self.expect_kind(Self::EPSILON_GREEDY)?;
        let eps = self.hyperparams.get("epsilon").copied().unwrap_or(0.1);
        EpsilonGreedyPolicy::new(self.matrix()?, eps)
    }

    pub fn to_ranker(&self) -> Result<LinearRanker> {
        self.expect_kind(Self::LINEAR_RANKER)?;
        if self.n != 1 {
            return invalid("a linear ranker document has exactly one weight row");
        }
        self.matrix()?;
        LinearRanker::new(self.weights.clone())
    }

    /// Weight rows regardless of kind, for warm-starting a different policy class.
    pub fn weight_matrix(&self) -> Result<WeightMatrix> {
        self.matrix()
    }
}

impl From<&SoftmaxLinearPolicy> for PolicyDocument {
    fn from(p: &SoftmaxLinearPolicy) -> Self {
        let w = p.weights();
        Self {
            kind: Self::SOFTMAX.into(),
            n: w.n_actions(),
            m: w.dim(),
            weights: w.as_slice().to_vec(),
            hyperparams: [("temperature".to_string(), p.temperature())].into(),
        }
    }
}

impl From<&EpsilonGreedyPolicy> for PolicyDocument {
    fn from(p: &EpsilonGreedyPolicy) -> Self {
        let w = p.base();
        Self {
            kind: Self::EPSILON_GREEDY.into(),
            n: w.n_actions(),
            m: w.dim(),
            weights: w.as_slice().to_vec(),
            hyperparams: [("epsilon".to_string(), p.epsilon())].into(),
        }
    }
}

impl From<&LinearRanker> for PolicyDocument {
    fn from(r: &LinearRanker) -> Self {
        Self {
            kind: Self::LINEAR_RANKER.into(),
            n: 1,
            m: r.dim(),
            weights: r.weights().to_vec(),
            hyperparams: BTreeMap::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_round_trip() {
        let w = WeightMatrix::from_rows(2, 2, vec![0.1, -0.2, 1.0 / 3.0, 4.0]).unwrap();
        let p = SoftmaxLinearPolicy::new(w, 0.5).unwrap();
        let json = serde_json::to_string(&PolicyDocument::from(&p)).unwrap();
        let doc: PolicyDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc.to_softmax().unwrap(), p);
        assert!(doc.to_ranker().is_err());
    }

    #[test]
    fn epsilon_and_ranker() {
        let p = EpsilonGreedyPolicy::new(WeightMatrix::zeros(3, 2), 0.2).unwrap();
        let doc = PolicyDocument::from(&p);
        assert_eq!(doc.to_epsilon_greedy().unwrap(), p);
        let r = LinearRanker::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(PolicyDocument::from(&r).to_ranker().unwrap(), r);
        let bad = PolicyDocument {
            weights: vec![1.0],
            ..PolicyDocument::from(&r)
        };
        assert!(bad.to_ranker().is_err());
    }
}
