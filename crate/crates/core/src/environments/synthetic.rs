//! Built-in synthetic datasets so experiments run without downloads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ClassificationInstance, Query};
use crate::error::{invalid, Result};
use crate::types::{ActionId, ContextVector};

/// Gaussian class clusters: one random centre per class, isotropic noise around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticClassificationSpec {
    pub n_classes: usize,
    pub n_features: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Standard deviation of the class centres around the origin.
    pub separation: f64,
    /// Standard deviation of instances around their centre.
    pub noise: f64,
}

impl Default for SyntheticClassificationSpec {
    fn default() -> Self {
        Self {
            n_classes: 10,
            n_features: 20,
            n_train: 1000,
            n_test: 1000,
            separation: 1.0,
            noise: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationData {
    pub n_classes: usize,
    pub n_features: usize,
    pub train: Vec<ClassificationInstance>,
    pub test: Vec<ClassificationInstance>,
}

impl SyntheticClassificationSpec {
    pub fn generate(&self, seed: u64) -> Result<ClassificationData> {
        if self.n_classes < 2 || self.n_features == 0 || self.n_train == 0 {
            return invalid(
                "synthetic classification needs >= 2 classes, >= 1 feature and a training set",
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.n_features;
        let centres: Vec<Vec<f64>> = (0..self.n_classes)
            .map(|_| {
                (0..m)
                    .map(|_| self.separation * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let draw = |i: usize, rng: &mut ChaCha8Rng| -> Result<ClassificationInstance> {
            let label = rng.random_range(0..self.n_classes);
            let values = centres[label]
                .iter()
                .map(|c| c + self.noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            Ok(ClassificationInstance {
                features: ContextVector::with_key(values, i as u64)?,
                label: ActionId(label),
            })
        };
        let train = (0..self.n_train)
            .map(|i| draw(i, &mut rng))
            .collect::<Result<_>>()?;
        let test = (0..self.n_test)
            .map(|i| draw(self.n_train + i, &mut rng))
            .collect::<Result<_>>()?;
        Ok(ClassificationData {
            n_classes: self.n_classes,
            n_features: m,
            train,
            test,
        })
    }
}

/// Queries whose documents are graded by a hidden linear relevance function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticRankingSpec {
    pub n_train_queries: usize,
    pub n_test_queries: usize,
    pub docs_per_query: usize,
    pub n_features: usize,
    /// Standard deviation of the label noise added to the hidden score.
    pub noise: f64,
}

impl Default for SyntheticRankingSpec {
    fn default() -> Self {
        Self {
            n_train_queries: 200,
            n_test_queries: 100,
            docs_per_query: 30,
            n_features: 10,
            noise: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingData {
    pub n_features: usize,
    pub train: Vec<Query>,
    pub test: Vec<Query>,
}

// grade boundaries on the standardized hidden score
const GRADE_CUTS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

impl SyntheticRankingSpec {
    pub fn generate(&self, seed: u64) -> Result<RankingData> {
        if self.docs_per_query < 2 || self.n_features == 0 || self.n_train_queries == 0 {
            return invalid(
                "synthetic ranking needs >= 2 docs per query, >= 1 feature and training queries",
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.n_features;
        let mut hidden: Vec<f64> = (0..m)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = hidden.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        hidden.iter_mut().for_each(|v| *v /= norm);
        let scale = (1.0 + self.noise * self.noise).sqrt();

        let make = |qid: usize, rng: &mut ChaCha8Rng| -> Result<Query> {
            let mut features = Vec::with_capacity(self.docs_per_query * m);
            let mut grades = Vec::with_capacity(self.docs_per_query);
            for _ in 0..self.docs_per_query {
                let doc: Vec<f64> = (0..m)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let latent = crate::policies::dot(&hidden, &doc)
                    + self.noise * rng.sample::<f64, _>(StandardNormal);
                let z = latent / scale;
                grades.push(GRADE_CUTS.iter().filter(|&&c| z >= c).count() as u8);
                features.extend(doc);
            }
            Query::new(qid.to_string(), m, features, grades)
        };
        let train = (0..self.n_train_queries)
            .map(|q| make(q + 1, &mut rng))
            .collect::<Result<_>>()?;
        let test = (0..self.n_test_queries)
            .map(|q| make(self.n_train_queries + q + 1, &mut rng))
            .collect::<Result<_>>()?;
        Ok(RankingData {
            n_features: m,
            train,
            test,
        })
    }
}
