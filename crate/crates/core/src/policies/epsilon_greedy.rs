use serde::{Deserialize, Serialize};

use super::{argmax, Classifier, StochasticPolicy, WeightMatrix};
use crate::error::{invalid, Result};
use crate::types::{ActionId, ContextVector};

/// Greedy linear scorer that takes a uniformly random action with probability ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGreedyPolicy {
    base: WeightMatrix,
    epsilon: f64,
}

impl EpsilonGreedyPolicy {
    pub fn new(base: WeightMatrix, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return invalid(format!("epsilon must be in [0, 1], got {epsilon}"));
        }
        Ok(Self { base, epsilon })
    }

    pub fn base(&self) -> &WeightMatrix {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut WeightMatrix {
        &mut self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Smallest probability this policy ever assigns: `ε / n` (or 1 when greedy and n = 1).
    pub fn min_propensity(&self) -> f64 {
        let n = self.base.n_actions() as f64;
        if self.epsilon == 0.0 {
            // only the greedy action is ever played
            1.0
        } else {
            self.epsilon / n
        }
    }
}

impl StochasticPolicy for EpsilonGreedyPolicy {
    fn n_actions(&self) -> usize {
        self.base.n_actions()
    }

    fn probabilities(&self, x: &ContextVector) -> Vec<f64> {
        let mut out = vec![0.0; self.n_actions()];
        self.probabilities_into(x, &mut out);
        out
    }

    fn probabilities_into(&self, x: &ContextVector, out: &mut [f64]) {
        let n = out.len() as f64;
        let greedy = argmax(&self.base.scores(x.values()));
        out.fill(self.epsilon / n);
        out[greedy] += 1.0 - self.epsilon;
    }
}

impl Classifier for EpsilonGreedyPolicy {
    fn predict(&self, x: &ContextVector) -> ActionId {
        ActionId(argmax(&self.base.scores(x.values())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::sample_action;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn greedy_on_seven(eps: f64) -> (EpsilonGreedyPolicy, ContextVector) {
        let mut w = WeightMatrix::zeros(10, 1);
        w.row_mut(7)[0] = 1.0;
        (
            EpsilonGreedyPolicy::new(w, eps).unwrap(),
            ContextVector::new(vec![1.0]).unwrap(),
        )
    }

    #[test]
    fn propensities_follow_formula() {
        let (p, x) = greedy_on_seven(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let (a, prop) = sample_action(&p, &x, &mut rng);
            if a == ActionId(7) {
                assert!((prop - 0.91).abs() < 1e-12);
            } else {
                assert!((prop - 0.01).abs() < 1e-12);
            }
        }
        assert!((p.min_propensity() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn extremes() {
        let (greedy, x) = greedy_on_seven(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_action(&greedy, &x, &mut rng), (ActionId(7), 1.0));
        let (uniform, _) = greedy_on_seven(1.0);
        assert!(uniform.probabilities(&x).iter().all(|&p| p == 0.1));
        assert!(EpsilonGreedyPolicy::new(WeightMatrix::zeros(2, 1), 1.5).is_err());
    }
}
