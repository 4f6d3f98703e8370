//! Deliberately weak production policies trained on a small labelled sample.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClassificationInstance, Query};
use crate::data_io::subsample;
use crate::error::{invalid, Result};
use crate::policies::{
    dot, EpsilonGreedyPolicy, LinearRanker, SoftmaxLinearPolicy, StochasticPolicy, WeightMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupervisedConfig {
    pub epochs: usize,
    pub learn_rate: f64,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learn_rate: 0.01,
        }
    }
}

/// Multinomial logistic regression by plain SGD on cross-entropy.
///
/// Instances are put in dedup-key order before training, so the result
/// depends only on the set of instances and the RNG.
pub fn train_softmax_classifier<R: Rng + ?Sized>(
    instances: &[ClassificationInstance],
    n_classes: usize,
    cfg: &SupervisedConfig,
    rng: &mut R,
) -> Result<SoftmaxLinearPolicy> {
    let first = instances
        .first()
        .ok_or_else(|| crate::Error::Validation("no training instances".into()))?;
    let m = first.features.dim();
    let mut sorted: Vec<&ClassificationInstance> = instances.iter().collect();
    sorted.sort_by_key(|i| i.features.dedup_key());

    let mut policy = SoftmaxLinearPolicy::zeros(n_classes, m);
    let mut order: Vec<usize> = (0..sorted.len()).collect();
    let mut probs = vec![0.0; n_classes];
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for &i in &order {
            let inst = sorted[i];
            policy.probabilities_into(&inst.features, &mut probs);
            let x = inst.features.values();
            let w = policy.weights_mut();
            for (k, &pk) in probs.iter().enumerate() {
                let g = f64::from(k == inst.label.0) - pk;
                for (wj, xj) in w.row_mut(k).iter_mut().zip(x) {
                    *wj += cfg.learn_rate * g * xj;
                }
            }
        }
    }
    Ok(policy)
}

/// Pairwise hinge-loss ranker trained on every graded pair within a query.
pub fn train_pairwise_ranker<R: Rng + ?Sized>(
    queries: &[Query],
    cfg: &SupervisedConfig,
    rng: &mut R,
) -> Result<LinearRanker> {
    let first = queries
        .first()
        .ok_or_else(|| crate::Error::Validation("no training queries".into()))?;
    let m = first.dim();
    let mut pairs = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        let g = q.grades();
        for i in 0..q.n_docs() {
            for j in 0..q.n_docs() {
                if g[i] > g[j] {
                    pairs.push((qi, i, j));
                }
            }
        }
    }
    let mut ranker = LinearRanker::zeros(m);
    let mut diff = vec![0.0; m];
    for _ in 0..cfg.epochs {
        pairs.shuffle(rng);
        for &(qi, i, j) in &pairs {
            let q = &queries[qi];
            for ((d, a), b) in diff.iter_mut().zip(q.doc(i)).zip(q.doc(j)) {
                *d = a - b;
            }
            if dot(ranker.weights(), &diff) < 1.0 {
                for (w, d) in ranker.weights_mut().iter_mut().zip(&diff) {
                    *w += cfg.learn_rate * d;
                }
            }
        }
    }
    Ok(ranker)
}

/// Trains on a `fraction` subsample of `pool` and wraps the result in ε-greedy.
///
/// Classes missing from a small subsample are left untrained rather than
/// resampled.
pub fn make_classification_baseline<R: Rng + ?Sized>(
    pool: &[ClassificationInstance],
    n_classes: usize,
    fraction: f64,
    epsilon: f64,
    cfg: &SupervisedConfig,
    rng: &mut R,
) -> Result<EpsilonGreedyPolicy> {
    let sample = subsample(pool, fraction, rng)?;
    if sample.is_empty() {
        return invalid("baseline subsample is empty");
    }
    let trained = train_softmax_classifier(&sample, n_classes, cfg, rng)?;
    let weights: WeightMatrix = trained.weights().clone();
    EpsilonGreedyPolicy::new(weights, epsilon)
}

/// Trains a pairwise ranker on a `fraction` subsample of whole queries.
pub fn make_ranking_baseline<R: Rng + ?Sized>(
    queries: &[Query],
    fraction: f64,
    cfg: &SupervisedConfig,
    rng: &mut R,
) -> Result<LinearRanker> {
    let sample = subsample(queries, fraction, rng)?;
    if sample.is_empty() {
        return invalid("baseline subsample is empty");
    }
    train_pairwise_ranker(&sample, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::synthetic::SyntheticClassificationSpec;
    use crate::evaluation::accuracy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn separable() -> crate::environments::synthetic::ClassificationData {
        SyntheticClassificationSpec {
            n_classes: 4,
            n_features: 8,
            n_train: 2000,
            n_test: 500,
            separation: 2.0,
            noise: 0.5,
        }
        .generate(7)
        .unwrap()
    }

    #[test]
    fn full_data_learns() {
        let data = separable();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = make_classification_baseline(
            &data.train,
            4,
            1.0,
            0.1,
            &SupervisedConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert!(accuracy(&p, &data.test) > 0.95);
        assert!((p.min_propensity() - 0.1 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn small_fraction_is_worse_but_better_than_chance() {
        let data = SyntheticClassificationSpec {
            n_train: 2000,
            ..Default::default()
        }
        .generate(7)
        .unwrap();
        let cfg = SupervisedConfig::default();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let full =
                make_classification_baseline(&data.train, 10, 1.0, 0.1, &cfg, &mut rng).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let small =
                make_classification_baseline(&data.train, 10, 0.01, 0.1, &cfg, &mut rng).unwrap();
            let (a_full, a_small) = (accuracy(&full, &data.test), accuracy(&small, &data.test));
            assert!(a_full > 0.95);
            assert!(
                a_small > 0.1 && a_small < a_full,
                "seed {seed}: {a_small} vs {a_full}"
            );
        }
    }

    #[test]
    fn order_of_subsample_is_irrelevant() {
        let data = separable();
        let sample: Vec<_> = data.train[..40].to_vec();
        let mut reversed = sample.clone();
        reversed.reverse();
        let cfg = SupervisedConfig::default();
        let a =
            train_softmax_classifier(&sample, 4, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = train_softmax_classifier(&reversed, 4, &cfg, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_sample_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(make_classification_baseline(
            &[],
            2,
            0.5,
            0.1,
            &SupervisedConfig::default(),
            &mut rng
        )
        .is_err());
    }
}
