//! Shared domain vocabulary: contexts, actions, logged bandit feedback and
//! ranked lists.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Propensities below this are rejected when appending to a log.
pub const MIN_PROPENSITY: f64 = 1e-12;

/// Dense real context with an optional key identifying exact duplicates.
///
/// The key is what the aggregate-table estimator uses to group
/// interactions; contexts without a key cannot be fed to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector {
    values: Vec<f64>,
    dedup_key: Option<u64>,
}

impl ContextVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("context vector must have at least one entry");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("context entry {i} is not finite"));
        }
        Ok(Self {
            values,
            dedup_key: None,
        })
    }

    pub fn with_key(values: Vec<f64>, key: u64) -> Result<Self> {
        let mut x = Self::new(values)?;
        x.dedup_key = Some(key);
        Ok(x)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dedup_key(&self) -> Option<u64> {
        self.dedup_key
    }

    pub fn set_dedup_key(&mut self, key: u64) {
        self.dedup_key = Some(key);
    }
}

/// Index of one of the `n` actions available in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One `(context, action, reward, propensity)` tuple of bandit feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InteractionRecord", into = "InteractionRecord")]
pub struct LoggedInteraction {
    pub context: ContextVector,
    pub action: ActionId,
    pub reward: f64,
    pub propensity: f64,
}

impl LoggedInteraction {
    pub fn new(
        context: ContextVector,
        action: ActionId,
        reward: f64,
        propensity: f64,
    ) -> Result<Self> {
        let item = Self {
            context,
            action,
            reward,
            propensity,
        };
        item.validate()?;
        Ok(item)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.reward) {
            return invalid(format!("reward {} outside [0, 1]", self.reward));
        }
        if !(self.propensity >= MIN_PROPENSITY && self.propensity <= 1.0) {
            return invalid(format!("propensity {} outside (0, 1]", self.propensity));
        }
        Ok(())
    }

    /// `r / p`, the inverse-propensity weighted reward.
    pub fn weighted_reward(&self) -> f64 {
        self.reward / self.propensity
    }
}

/// Wire form of a logged interaction, one JSON object per line.
#[derive(Serialize, Deserialize)]
struct InteractionRecord {
    context: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dedup_key: Option<u64>,
    action: usize,
    reward: f64,
    propensity: f64,
}

impl TryFrom<InteractionRecord> for LoggedInteraction {
    type Error = Error;

    fn try_from(rec: InteractionRecord) -> Result<Self> {
        let mut context = ContextVector::new(rec.context)?;
        context.dedup_key = rec.dedup_key;
        LoggedInteraction::new(context, ActionId(rec.action), rec.reward, rec.propensity)
    }
}

impl From<LoggedInteraction> for InteractionRecord {
    fn from(item: LoggedInteraction) -> Self {
        Self {
            dedup_key: item.context.dedup_key,
            context: item.context.values,
            action: item.action.0,
            reward: item.reward,
            propensity: item.propensity,
        }
    }
}

/// Append-only log of bandit feedback.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionLog {
    entries: Vec<LoggedInteraction>,
}

impl InteractionLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and appends `item`; on error the log is left untouched.
    pub fn append(&mut self, item: LoggedInteraction) -> Result<()> {
        item.validate()?;
        self.entries.push(item);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LoggedInteraction] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &LoggedInteraction> {
        self.entries.iter()
    }

    pub fn last(&self) -> Option<&LoggedInteraction> {
        self.entries.last()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for item in &self.entries {
            serde_json::to_writer(&mut out, item)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut log = Self::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let item: LoggedInteraction =
                serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            log.append(item)?;
        }
        Ok(log)
    }
}

/// `b = max_reward / min_propensity`, an upper bound on every `r / p`.
pub fn reward_bound_b(max_reward: f64, min_propensity: f64) -> Result<f64> {
    if !(max_reward > 0.0 && max_reward.is_finite()) {
        return invalid(format!("max reward must be positive, got {max_reward}"));
    }
    if !(min_propensity > 0.0 && min_propensity <= 1.0) {
        return invalid(format!(
            "min propensity must be in (0, 1], got {min_propensity}"
        ));
    }
    Ok(max_reward / min_propensity)
}

/// Declared reward and propensity range for an experiment.
///
/// `observe` lowers the propensity floor when a smaller propensity is
/// logged, so `b()` always dominates every realized `r / p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBounds {
    pub max_reward: f64,
    pub min_propensity: f64,
}

impl RewardBounds {
    pub fn new(max_reward: f64, min_propensity: f64) -> Result<Self> {
        reward_bound_b(max_reward, min_propensity)?;
        Ok(Self {
            max_reward,
            min_propensity,
        })
    }

    pub fn b(&self) -> f64 {
        self.max_reward / self.min_propensity
    }

    pub fn observe(&mut self, propensity: f64) {
        if propensity < self.min_propensity {
            self.min_propensity = propensity;
        }
    }
}

/// A ranking of a query's candidate documents with the scores that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    doc_ids: Vec<usize>,
    scores: Vec<f64>,
}

impl RankedList {
    /// Sorts candidates by descending score; equal scores go by ascending doc id.
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut doc_ids: Vec<usize> = (0..scores.len()).collect();
        doc_ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let sorted = doc_ids.iter().map(|&d| scores[d]).collect();
        Self {
            doc_ids,
            scores: sorted,
        }
    }

    /// Builds a list from an explicit order; scores descend with position.
    pub fn from_order(doc_ids: Vec<usize>) -> Result<Self> {
        let n = doc_ids.len();
        let mut seen = vec![false; n];
        for &d in &doc_ids {
            if d >= n || seen[d] {
                return invalid("ranked list must be a permutation of 0..n");
            }
            seen[d] = true;
        }
        let scores = (0..n).map(|i| (n - i) as f64).collect();
        Ok(Self { doc_ids, scores })
    }

    pub fn doc_ids(&self) -> &[usize] {
        &self.doc_ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    /// Inverse permutation: `ranks()[doc]` is the 1-based rank of `doc`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.doc_ids.len()];
        for (pos, &d) in self.doc_ids.iter().enumerate() {
            ranks[d] = pos + 1;
        }
        ranks
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.doc_ids.len();
        let mut seen = vec![false; n];
        self.doc_ids
            .iter()
            .all(|&d| d < n && !std::mem::replace(&mut seen[d], true))
    }
}

/// Outcome of showing one document to the simulated user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    /// 1-based position in the displayed list.
    pub rank: usize,
    pub doc_id: usize,
    pub examined: bool,
    pub clicked: bool,
    /// Examination probability at `rank`, the IPS denominator for this click.
    pub propensity: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ContextVector {
        ContextVector::new(vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn append_counts() {
        let mut log = InteractionLog::new();
        log.append(LoggedInteraction::new(x(), ActionId(3), 1.0, 0.5).unwrap())
            .unwrap();
        assert_eq!(log.len(), 1);
        for _ in 0..4 {
            log.append(LoggedInteraction::new(x(), ActionId(0), 0.0, 1.0).unwrap())
                .unwrap();
        }
        assert_eq!(log.len(), 5);
        log.append(LoggedInteraction::new(x(), ActionId(1), 0.2, 0.3).unwrap())
            .unwrap();
        assert_eq!(log.len(), 6);
        assert_eq!(log.last().unwrap().action, ActionId(1));
    }

    #[test]
    fn rejects_bad_items() {
        assert!(LoggedInteraction::new(x(), ActionId(0), 0.5, 0.0).is_err());
        assert!(LoggedInteraction::new(x(), ActionId(0), 0.5, 1e-13).is_err());
        assert!(LoggedInteraction::new(x(), ActionId(0), 1.5, 0.5).is_err());
        assert!(LoggedInteraction::new(x(), ActionId(0), -0.1, 0.5).is_err());
        assert!(ContextVector::new(vec![]).is_err());
        assert!(ContextVector::new(vec![f64::NAN]).is_err());

        let mut log = InteractionLog::new();
        let bad = LoggedInteraction {
            context: x(),
            action: ActionId(0),
            reward: 0.5,
            propensity: 0.0,
        };
        assert!(log.append(bad).is_err());
        assert!(log.is_empty());
    }

    #[test]
    fn reward_bound() {
        assert_eq!(reward_bound_b(1.0, 0.05).unwrap(), 20.0);
        assert_eq!(reward_bound_b(1.0, 1.0).unwrap(), 1.0);
        assert!((reward_bound_b(0.6, 0.01).unwrap() - 60.0).abs() < 1e-12);
        assert!(reward_bound_b(0.0, 0.5).is_err());
        assert!(reward_bound_b(1.0, 0.0).is_err());
        assert!(reward_bound_b(-1.0, 0.5).is_err());
    }

    #[test]
    fn bounds_track_smaller_propensities() {
        let mut b = RewardBounds::new(1.0, 0.1).unwrap();
        b.observe(0.5);
        assert_eq!(b.b(), 10.0);
        b.observe(0.01);
        assert_eq!(b.b(), 100.0);
    }

    #[test]
    fn ranked_list_ties_by_doc_id() {
        let l = RankedList::from_scores(&[0.0, 0.0, 0.0]);
        assert_eq!(l.doc_ids(), &[0, 1, 2]);
        let l = RankedList::from_scores(&[0.2, 0.9, 0.5, 0.9]);
        assert_eq!(l.doc_ids(), &[1, 3, 2, 0]);
        assert_eq!(l.ranks(), vec![4, 1, 3, 2]);
        assert!(l.scores().windows(2).all(|w| w[0] >= w[1]));
        assert!(RankedList::from_order(vec![0, 0]).is_err());
    }

    #[test]
    fn jsonl_keeps_key_and_exact_floats() {
        let mut log = InteractionLog::new();
        let ctx = ContextVector::with_key(vec![0.1, 1.0 / 3.0, -2.5e-300], 7).unwrap();
        log.append(LoggedInteraction::new(ctx, ActionId(2), 0.7, 0.123456789).unwrap())
            .unwrap();
        let mut buf = Vec::new();
        log.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"dedup_key\":7"));
        let back = InteractionLog::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn jsonl_rejects_invalid_line() {
        let text = "{\"context\":[1.0],\"action\":0,\"reward\":0.5,\"propensity\":0.0}\n";
        assert!(InteractionLog::read_jsonl(text.as_bytes()).is_err());
        let text = "not json\n";
        match InteractionLog::read_jsonl(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
