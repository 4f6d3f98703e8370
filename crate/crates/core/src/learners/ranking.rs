use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LearnerConfig;
use crate::environments::{Query, UserModel, CLICK_CUTOFF};
use crate::error::{invalid, Result};
use crate::estimators::ClickImpression;
use crate::policies::{dot, LinearRanker};
use crate::types::{ClickRecord, RankedList};

/// Rankers are projected back onto this L2 ball after every update.
pub const RANKER_RADIUS: f64 = 100.0;

fn add_pair_step(w: &mut [f64], plus: &[f64], minus: &[f64], step: f64, margin: f64) -> bool {
    let score: f64 = w
        .iter()
        .zip(plus.iter().zip(minus))
        .map(|(wi, (p, m))| wi * (p - m))
        .sum();
    if score >= margin {
        return false;
    }
    for (wi, (p, m)) in w.iter_mut().zip(plus.iter().zip(minus)) {
        *wi += step * (p - m);
    }
    true
}

/// Online pairwise update from one impression.
///
/// Each clicked document in the top 10 is preferred over every unclicked
/// document shown above it. Pairs are applied one at a time.
pub fn ranksvm_pairwise_update(
    ranker: &mut LinearRanker,
    clicks: &[ClickRecord],
    query: &Query,
    cfg: &LearnerConfig,
) -> Result<usize> {
    let mut shown: Vec<&ClickRecord> = clicks
        .iter()
        .filter(|c| c.rank >= 1 && c.rank <= CLICK_CUTOFF)
        .collect();
    shown.sort_by_key(|c| c.rank);
    let mut updates = 0;
    for (i, pos) in shown.iter().enumerate() {
        if !pos.clicked {
            continue;
        }
        for above in shown[..i].iter().filter(|c| !c.clicked) {
            if add_pair_step(
                ranker.weights_mut(),
                query.doc(pos.doc_id),
                query.doc(above.doc_id),
                cfg.learn_rate,
                cfg.ranksvm_margin,
            ) {
                updates += 1;
            }
        }
    }
    if updates > 0 {
        ranker.clip_norm(RANKER_RADIUS);
    }
    Ok(updates)
}

/// Counterfactual pairwise update: every clicked document, weighted by
/// `1/p`, is pushed above each other candidate it does not beat by the margin.
pub fn ranking_ips_update(
    ranker: &mut LinearRanker,
    impression: &ClickImpression,
    query: &Query,
    cfg: &LearnerConfig,
) -> Result<usize> {
    let mut updates = 0;
    for c in impression.clicks.iter().filter(|c| c.clicked) {
        if c.propensity.is_nan() || c.propensity <= 0.0 {
            return invalid(format!(
                "click on doc {} has propensity {}",
                c.doc_id, c.propensity
            ));
        }
        let step = cfg.learn_rate / c.propensity;
        let plus = query.doc(c.doc_id);
        for d in (0..query.n_docs()).filter(|&d| d != c.doc_id) {
            if add_pair_step(
                ranker.weights_mut(),
                plus,
                query.doc(d),
                step,
                cfg.ranksvm_margin,
            ) {
                updates += 1;
            }
        }
    }
    if updates > 0 {
        ranker.clip_norm(RANKER_RADIUS);
    }
    Ok(updates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Team {
    A,
    B,
}

/// Team-draft interleaving with coin flips from `rng`.
pub fn team_draft_interleave<R: Rng + ?Sized>(
    a: &RankedList,
    b: &RankedList,
    rng: &mut R,
) -> Result<(RankedList, Vec<Team>)> {
    team_draft_interleave_with(a, b, || rng.random::<bool>())
}

/// Team-draft interleaving; `a_first()` is asked once per round whether
/// team A picks first. Each team then takes its highest-ranked document
/// not yet placed.
pub fn team_draft_interleave_with(
    a: &RankedList,
    b: &RankedList,
    mut a_first: impl FnMut() -> bool,
) -> Result<(RankedList, Vec<Team>)> {
    let n = a.len();
    if b.len() != n || !a.is_permutation() || !b.is_permutation() {
        return invalid("interleaved lists must be permutations of the same candidates");
    }
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut teams = Vec::with_capacity(n);
    let (mut ia, mut ib) = (0, 0);
    let mut pick =
        |team: Team, order: &mut Vec<usize>, teams: &mut Vec<Team>, placed: &mut Vec<bool>| {
            let (list, idx) = match team {
                Team::A => (a.doc_ids(), &mut ia),
                Team::B => (b.doc_ids(), &mut ib),
            };
            while placed[list[*idx]] {
                *idx += 1;
            }
            let d = list[*idx];
            placed[d] = true;
            order.push(d);
            teams.push(team);
        };
    while order.len() < n {
        let first = if a_first() {
            [Team::A, Team::B]
        } else {
            [Team::B, Team::A]
        };
        for team in first {
            if order.len() < n {
                pick(team, &mut order, &mut teams, &mut placed);
            }
        }
    }
    Ok((RankedList::from_order(order)?, teams))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbgdOutcome {
    pub displayed: RankedList,
    pub teams: Vec<Team>,
    pub clicks: Vec<ClickRecord>,
    /// Unit exploration direction that was tried.
    pub direction: Vec<f64>,
    pub candidate_won: bool,
}

fn unit_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..m)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = dot(&u, &u).sqrt();
        if norm > 1e-12 {
            return u.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// One dueling-bandit step: interleave the current ranker with a perturbed
/// candidate, and move towards the candidate only if its team gets strictly
/// more clicks.
pub fn dbgd_step<R: RngCore>(
    ranker: &mut LinearRanker,
    query: &Query,
    user: &mut dyn UserModel,
    rng: &mut R,
    cfg: &LearnerConfig,
) -> Result<DbgdOutcome> {
    if query.n_docs() < 2 {
        return invalid("dueling step needs at least two candidates");
    }
    let u = unit_direction(ranker.dim(), rng);
    let candidate_w: Vec<f64> = ranker
        .weights()
        .iter()
        .zip(&u)
        .map(|(w, d)| w + cfg.dbgd_delta * d)
        .collect();
    let candidate = LinearRanker::new(candidate_w)?;
    let current_list = ranker.rank_flat(query.features());
    let candidate_list = candidate.rank_flat(query.features());
    let (displayed, teams) = team_draft_interleave(&current_list, &candidate_list, rng)?;
    let clicks = user.clicks(&displayed, query, rng);

    let (mut wins_a, mut wins_b) = (0usize, 0usize);
    for c in clicks.iter().filter(|c| c.clicked) {
        match teams[c.rank - 1] {
            Team::A => wins_a += 1,
            Team::B => wins_b += 1,
        }
    }
    let candidate_won = wins_b > wins_a;
    if candidate_won {
        for (w, d) in ranker.weights_mut().iter_mut().zip(&u) {
            *w += cfg.dbgd_gamma * d;
        }
        ranker.clip_norm(RANKER_RADIUS);
    }
    Ok(DbgdOutcome {
        displayed,
        teams,
        clicks,
        direction: u,
        candidate_won,
    })
}
