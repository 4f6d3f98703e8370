use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::types::{ClickRecord, RankedList};

/// Clicks are only simulated on the first result page.
pub const CLICK_CUTOFF: usize = 10;

/// One query with its candidate documents and graded relevance labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub qid: String,
    dim: usize,
    /// Row-major, `dim` features per document.
    features: Vec<f64>,
    grades: Vec<u8>,
}

impl Query {
    pub fn new(
        qid: impl Into<String>,
        dim: usize,
        features: Vec<f64>,
        grades: Vec<u8>,
    ) -> Result<Self> {
        if dim == 0 || grades.is_empty() {
            return invalid("query needs at least one document and one feature");
        }
        if features.len() != dim * grades.len() {
            return invalid(format!(
                "query has {} feature values for {} documents of dimension {dim}",
                features.len(),
                grades.len()
            ));
        }
        if let Some(g) = grades.iter().find(|&&g| g > 4) {
            return invalid(format!("relevance grade {g} outside 0..=4"));
        }
        Ok(Self {
            qid: qid.into(),
            dim,
            features,
            grades,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.grades.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doc(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn grades(&self) -> &[u8] {
        &self.grades
    }

    /// Keeps the first `max_docs` candidates.
    pub fn truncated(&self, max_docs: usize) -> Self {
        let k = max_docs.min(self.n_docs());
        Self {
            qid: self.qid.clone(),
            dim: self.dim,
            features: self.features[..k * self.dim].to_vec(),
            grades: self.grades[..k].to_vec(),
        }
    }
}

/// Position bias: rank `i` is examined with probability `(1/i)^η`, ranks
/// past the cutoff never.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExaminationModel {
    pub bias_severity: f64,
    pub cutoff: usize,
}

impl ExaminationModel {
    pub fn new(bias_severity: f64) -> Result<Self> {
        if !(bias_severity >= 0.0 && bias_severity.is_finite()) {
            return invalid(format!("bias severity must be >= 0, got {bias_severity}"));
        }
        Ok(Self {
            bias_severity,
            cutoff: CLICK_CUTOFF,
        })
    }

    /// Smallest non-zero examination probability, reached at the cutoff.
    pub fn min_propensity(&self) -> f64 {
        examination_probability(self, self.cutoff)
    }
}

impl Default for ExaminationModel {
    fn default() -> Self {
        Self {
            bias_severity: 1.0,
            cutoff: CLICK_CUTOFF,
        }
    }
}

/// `(1/rank)^η` for `rank <= cutoff`, else 0. `rank` is 1-based.
pub fn examination_probability(model: &ExaminationModel, rank: usize) -> f64 {
    if rank == 0 || rank > model.cutoff {
        return 0.0;
    }
    (1.0 / rank as f64).powf(model.bias_severity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClickProfileName {
    Perfect,
    PositionBiased,
    NearRandom,
}

/// `P(click | examined, relevance grade)` for grades 0..=4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProfile {
    pub name: ClickProfileName,
    pub probs: [f64; 5],
}

impl ClickProfile {
    pub const PERFECT: [f64; 5] = [0.00, 0.20, 0.40, 0.80, 1.00];
    pub const POSITION_BIASED: [f64; 5] = [0.10, 0.10, 0.10, 1.00, 1.00];
    pub const NEAR_RANDOM: [f64; 5] = [0.40, 0.45, 0.50, 0.55, 0.60];

    pub fn perfect() -> Self {
        Self {
            name: ClickProfileName::Perfect,
            probs: Self::PERFECT,
        }
    }

    pub fn position_biased() -> Self {
        Self {
            name: ClickProfileName::PositionBiased,
            probs: Self::POSITION_BIASED,
        }
    }

    pub fn near_random() -> Self {
        Self {
            name: ClickProfileName::NearRandom,
            probs: Self::NEAR_RANDOM,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.name {
            ClickProfileName::Perfect => "perfect",
            ClickProfileName::PositionBiased => "position-biased",
            ClickProfileName::NearRandom => "near-random",
        }
    }
}

impl FromStr for ClickProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Self::perfect()),
            "position-biased" => Ok(Self::position_biased()),
            "near-random" => Ok(Self::near_random()),
            other => Err(Error::Config(format!(
                "unknown click profile '{other}' (expected perfect | position-biased | near-random)"
            ))),
        }
    }
}

/// Simulates one user looking at `list`.
///
/// Returns a record for every position up to the cutoff; each carries the
/// examination probability of its rank.
pub fn simulate_clicks<R: Rng + ?Sized>(
    list: &RankedList,
    grades: &[u8],
    model: &ExaminationModel,
    profile: &ClickProfile,
    rng: &mut R,
) -> Vec<ClickRecord> {
    list.doc_ids()
        .iter()
        .take(model.cutoff)
        .enumerate()
        .map(|(pos, &doc)| {
            let rank = pos + 1;
            let propensity = examination_probability(model, rank);
            let examined = rng.random::<f64>() < propensity;
            let clicked = examined && rng.random::<f64>() < profile.probs[grades[doc] as usize];
            ClickRecord {
                rank,
                doc_id: doc,
                examined,
                clicked,
                propensity,
            }
        })
        .collect()
}

/// Source of clicks on a displayed list.
pub trait UserModel {
    fn clicks(
        &mut self,
        list: &RankedList,
        query: &Query,
        rng: &mut dyn RngCore,
    ) -> Vec<ClickRecord>;

    /// Examination probability the learner should use for `rank`.
    fn propensity(&self, rank: usize) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedUser {
    pub model: ExaminationModel,
    pub profile: ClickProfile,
}

impl UserModel for SimulatedUser {
    fn clicks(
        &mut self,
        list: &RankedList,
        query: &Query,
        rng: &mut dyn RngCore,
    ) -> Vec<ClickRecord> {
        simulate_clicks(list, query.grades(), &self.model, &self.profile, rng)
    }

    fn propensity(&self, rank: usize) -> f64 {
        examination_probability(&self.model, rank)
    }
}

/// Stream of queries drawn uniformly with replacement, answered by a simulated user.
#[derive(Debug, Clone)]
pub struct RankingEnv {
    queries: Arc<Vec<Query>>,
    user: SimulatedUser,
    rng: ChaCha8Rng,
}

impl RankingEnv {
    pub fn new(queries: Arc<Vec<Query>>, user: SimulatedUser, seed: u64) -> Result<Self> {
        Self::with_rng(queries, user, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(
        queries: Arc<Vec<Query>>,
        user: SimulatedUser,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if queries.is_empty() {
            return invalid("ranking environment needs at least one query");
        }
        Ok(Self { queries, user, rng })
    }

    pub fn queries(&self) -> &Arc<Vec<Query>> {
        &self.queries
    }

    pub fn user(&self) -> &SimulatedUser {
        &self.user
    }

    pub fn next_query(&mut self) -> usize {
        self.rng.random_range(0..self.queries.len())
    }

    pub fn show(&mut self, query: usize, list: &RankedList) -> Vec<ClickRecord> {
        let q = &self.queries[query];
        simulate_clicks(
            list,
            q.grades(),
            &self.user.model,
            &self.user.profile,
            &mut self.rng,
        )
    }

    /// Splits off the RNG so callers can drive a [`UserModel`] directly.
    pub fn parts(&mut self) -> (&Arc<Vec<Query>>, &mut SimulatedUser, &mut ChaCha8Rng) {
        (&self.queries, &mut self.user, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examination_eta_one() {
        let m = ExaminationModel::new(1.0).unwrap();
        assert_eq!(examination_probability(&m, 1), 1.0);
        assert_eq!(examination_probability(&m, 2), 0.5);
        assert_eq!(examination_probability(&m, 3), 1.0 / 3.0);
        assert_eq!(examination_probability(&m, 10), 0.1);
        assert_eq!(examination_probability(&m, 11), 0.0);
        assert!((m.min_propensity() - 0.1).abs() < 1e-15);
        assert!(ExaminationModel::new(-1.0).is_err());
    }

    #[test]
    fn profiles_by_name() {
        assert_eq!(
            "position-biased".parse::<ClickProfile>().unwrap().probs,
            [0.1, 0.1, 0.1, 1.0, 1.0]
        );
        assert!("cascade".parse::<ClickProfile>().is_err());
    }

    #[test]
    fn all_relevant_without_bias() {
        let m = ExaminationModel::new(0.0).unwrap();
        let list = RankedList::from_scores(&[0.0; 15]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let clicks = simulate_clicks(&list, &[4; 15], &m, &ClickProfile::perfect(), &mut rng);
        assert_eq!(clicks.len(), 10);
        assert!(clicks.iter().all(|c| c.clicked && c.examined));
    }

    #[test]
    fn irrelevant_never_clicked_under_perfect() {
        let m = ExaminationModel::new(0.0).unwrap();
        let list = RankedList::from_scores(&[0.0; 10]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let clicks = simulate_clicks(&list, &[0; 10], &m, &ClickProfile::perfect(), &mut rng);
            assert!(clicks.iter().all(|c| !c.clicked));
        }
    }

    #[test]
    fn rank_two_click_rate() {
        let m = ExaminationModel::new(1.0).unwrap();
        let list = RankedList::from_scores(&[1.0, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let clicks = (0..trials)
            .filter(|_| {
                simulate_clicks(&list, &[0, 4], &m, &ClickProfile::perfect(), &mut rng)[1].clicked
            })
            .count();
        let rate = clicks as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.005, "{rate}");
    }

    #[test]
    fn query_validation() {
        assert!(Query::new("1", 2, vec![0.0; 4], vec![0, 5]).is_err());
        assert!(Query::new("1", 2, vec![0.0; 3], vec![0, 1]).is_err());
        let q = Query::new("1", 2, vec![1.0, 2.0, 3.0, 4.0], vec![0, 1]).unwrap();
        assert_eq!(q.doc(1), &[3.0, 4.0]);
        assert_eq!(q.truncated(1).n_docs(), 1);
    }
}
