//! Metrics over experiment traces and held-out data.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::environments::{expected_reward, ClassificationInstance, RewardProfile};
use crate::error::{invalid, Result};
use crate::policies::Classifier;
use crate::types::{ActionId, RankedList};

/// Values of one metric at increasing rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub metric_name: String,
    pub checkpoints: Vec<(usize, f64)>,
}

impl MetricSeries {
    pub fn new(metric_name: impl Into<String>) -> Self {
        Self {
            metric_name: metric_name.into(),
            checkpoints: Vec::new(),
        }
    }

    pub fn push(&mut self, t: usize, value: f64) -> Result<()> {
        if let Some(&(last, _)) = self.checkpoints.last() {
            if t <= last {
                return invalid(format!("checkpoint {t} does not follow {last}"));
            }
        }
        self.checkpoints.push((t, value));
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.1).collect()
    }

    pub fn last(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.1)
    }
}

/// Powers of ten up to `horizon`, plus `horizon` itself.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut c = 10;
    while c < horizon {
        out.push(c);
        c = c.saturating_mul(10);
    }
    if horizon > 0 {
        out.push(horizon);
    }
    out
}

fn at_checkpoints(
    name: &str,
    prefix: impl Fn(usize) -> f64,
    len: usize,
    checkpoints: &[usize],
) -> Result<MetricSeries> {
    let mut series = MetricSeries::new(name);
    for &c in checkpoints.iter().filter(|&&c| c >= 1 && c <= len) {
        series.push(c, prefix(c))?;
    }
    Ok(series)
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Prefix sums of `rewards` at each checkpoint that lies within the trace.
pub fn cumulative_reward(rewards: &[f64], checkpoints: &[usize]) -> Result<MetricSeries> {
    if rewards.is_empty() {
        return invalid("cumulative reward of an empty trace");
    }
    let sums = prefix_sums(rewards);
    at_checkpoints(
        "cumulative_reward",
        |c| sums[c - 1],
        sums.len(),
        checkpoints,
    )
}

/// Cumulative reward of `method` minus that of `baseline` on the same rounds.
pub fn relative_cumulative_reward(
    method: &[f64],
    baseline: &[f64],
    checkpoints: &[usize],
) -> Result<MetricSeries> {
    if method.len() != baseline.len() {
        return invalid("traces differ in length");
    }
    let diff: Vec<f64> = method.iter().zip(baseline).map(|(a, b)| a - b).collect();
    let mut s = cumulative_reward(&diff, checkpoints)?;
    s.metric_name = "relative_cumulative_reward".into();
    Ok(s)
}

/// `Σ_{i<=t} (oracle_i - r_i)`; every round needs an oracle reward.
pub fn regret(
    rewards: &[f64],
    oracle_rewards: &[Option<f64>],
    checkpoints: &[usize],
) -> Result<MetricSeries> {
    if rewards.len() != oracle_rewards.len() {
        return invalid("reward and oracle traces differ in length");
    }
    let mut gaps = Vec::with_capacity(rewards.len());
    for (i, (r, o)) in rewards.iter().zip(oracle_rewards).enumerate() {
        match o {
            Some(o) => gaps.push(o - r),
            None => return invalid(format!("no oracle reward for round {}", i + 1)),
        }
    }
    let sums = prefix_sums(&gaps);
    at_checkpoints("regret", |c| sums[c - 1], sums.len(), checkpoints)
}

/// Fraction of `test` whose label the greedy action matches.
pub fn accuracy<C: Classifier + ?Sized>(policy: &C, test: &[ClassificationInstance]) -> f64 {
    if test.is_empty() {
        return 0.0;
    }
    let hits = test
        .iter()
        .filter(|i| policy.predict(&i.features) == i.label)
        .count();
    hits as f64 / test.len() as f64
}

/// Expected per-action reward of the greedy action on held-out data.
///
/// Computed from accuracy and the profile's reward probabilities, so no
/// sampling noise enters.
pub fn average_reward_holdout<C: Classifier + ?Sized>(
    policy: &C,
    test: &[ClassificationInstance],
    profile: &RewardProfile,
) -> Result<f64> {
    if test.is_empty() {
        return invalid("held-out set is empty");
    }
    let acc = accuracy(policy, test);
    let hit = expected_reward(profile, ActionId(0), ActionId(0));
    let miss = expected_reward(profile, ActionId(0), ActionId(1));
    Ok(miss + (hit - miss) * acc)
}

fn dcg(grades: impl Iterator<Item = u8>) -> f64 {
    grades
        .enumerate()
        .map(|(pos, g)| ((1u32 << g) - 1) as f64 / ((pos + 2) as f64).log2())
        .sum()
}

/// nDCG@k with gain `2^g - 1`; 0 when no document is relevant.
pub fn ndcg_at_k(list: &RankedList, grades: &[u8], k: usize) -> f64 {
    let actual = dcg(list.doc_ids().iter().take(k).map(|&d| grades[d]));
    let mut ideal: Vec<u8> = grades.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let best = dcg(ideal.into_iter().take(k));
    if best == 0.0 {
        0.0
    } else {
        actual / best
    }
}

/// Sample mean and (n-1) standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Two-sided Welch t-test; returns `(t, p)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 2 || b.len() < 2 {
        return invalid("welch test needs at least two values per sample");
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return invalid("welch test needs finite values");
    }
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    let (va, vb) = (sa * sa / a.len() as f64, sb * sb / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        return Ok(if ma == mb {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(ma - mb), 0.0)
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| crate::Error::Numerical(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok((t, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{SoftmaxLinearPolicy, WeightMatrix};
    use crate::types::ContextVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cumulative() {
        let s = cumulative_reward(&[1.0, 0.0, 1.0], &[1, 2, 3]).unwrap();
        assert_eq!(s.values(), vec![1.0, 1.0, 2.0]);
        let z = cumulative_reward(&[0.0; 5], &[1, 5, 9]).unwrap();
        assert_eq!(z.checkpoints, vec![(1, 0.0), (5, 0.0)]);
        assert!(cumulative_reward(&[], &[1]).is_err());
        assert_eq!(default_checkpoints(1000), vec![10, 100, 1000]);
        assert_eq!(default_checkpoints(2500), vec![10, 100, 1000, 2500]);
    }

    #[test]
    fn regret_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rewards: Vec<f64> = (0..200).map(|_| f64::from(rng.random::<bool>())).collect();
        let oracle: Vec<Option<f64>> = (0..200).map(|_| Some(1.0)).collect();
        let cps: Vec<usize> = (1..=200).collect();
        let reg = regret(&rewards, &oracle, &cps).unwrap();
        let cum = cumulative_reward(&rewards, &cps).unwrap();
        for ((t, r), (_, c)) in reg.checkpoints.iter().zip(&cum.checkpoints) {
            assert_eq!(r + c, *t as f64);
        }
        let wrong = regret(&[0.0; 4], &[Some(1.0); 4], &[4]).unwrap();
        assert_eq!(wrong.last(), Some(4.0));
        assert!(regret(&[0.0], &[None], &[1]).is_err());
    }

    #[test]
    fn holdout_reward() {
        let test: Vec<ClassificationInstance> = (0..10)
            .map(|i| ClassificationInstance {
                features: ContextVector::new(vec![1.0]).unwrap(),
                label: ActionId(if i < 9 { 0 } else { 1 }),
            })
            .collect();
        let w = WeightMatrix::from_rows(2, 1, vec![1.0, 0.0]).unwrap();
        let p = SoftmaxLinearPolicy::new(w, 1.0).unwrap();
        assert_eq!(accuracy(&p, &test), 0.9);
        let nr = average_reward_holdout(&p, &test, &RewardProfile::near_random()).unwrap();
        assert!((nr - 0.58).abs() < 1e-12);
        assert_eq!(
            average_reward_holdout(&p, &test, &RewardProfile::perfect()).unwrap(),
            0.9
        );
    }

    #[test]
    fn ndcg_cases() {
        let grades = [3, 0];
        let ideal = RankedList::from_order(vec![0, 1]).unwrap();
        let swapped = RankedList::from_order(vec![1, 0]).unwrap();
        assert_eq!(ndcg_at_k(&ideal, &grades, 10), 1.0);
        assert!((ndcg_at_k(&swapped, &grades, 10) - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert_eq!(ndcg_at_k(&swapped, &[0, 0], 10), 0.0);
    }

    #[test]
    fn welch() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(welch_t_test(&a, &a).unwrap(), (0.0, 1.0));
        assert_eq!(welch_t_test(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), (0.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..30)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let y: Vec<f64> = (0..30)
            .map(|_| 5.0 + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let (t, p) = welch_t_test(&x, &y).unwrap();
        assert!(t < 0.0 && p < 1e-6);
        let (t2, p2) = welch_t_test(&y, &x).unwrap();
        assert_eq!((t2, p2), (-t, p));
        assert!(welch_t_test(&[1.0], &a).is_err());
    }

    #[test]
    fn welch_known_value() {
        // df = 4, t = -sqrt(6); two-sided p from a t table
        let (t, p) = welch_t_test(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap();
        assert!((t + 6f64.sqrt()).abs() < 1e-12);
        assert!((p - 0.070_484).abs() < 1e-5, "{p}");
    }
}
