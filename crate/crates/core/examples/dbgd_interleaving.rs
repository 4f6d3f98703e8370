//! Online ranker learning by dueling bandit gradient descent.
//!
//! Each step interleaves the current ranker with a random perturbation of
//! it (team draft) and moves toward the perturbation when its team wins
//! more clicks.
//!
//!     cargo run --release --example dbgd_interleaving

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::environments::synthetic::SyntheticRankingSpec;
use safe_explore::environments::{ClickProfile, ExaminationModel, SimulatedUser};
use safe_explore::evaluation::ndcg_at_k;
use safe_explore::learners::{dbgd_step, team_draft_interleave, LearnerConfig};
use safe_explore::policies::LinearRanker;
use safe_explore::types::RankedList;

fn main() -> safe_explore::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let a = RankedList::from_order(vec![0, 1, 2, 3, 4])?;
    let b = RankedList::from_order(vec![4, 3, 2, 1, 0])?;
    let (mixed, teams) = team_draft_interleave(&a, &b, &mut rng)?;
    println!("interleaved {:?} teams {:?}", mixed.doc_ids(), teams);

    let data = SyntheticRankingSpec::default().generate(1)?;
    let mut user = SimulatedUser {
        model: ExaminationModel::new(1.0)?,
        profile: ClickProfile::perfect(),
    };
    let cfg = LearnerConfig::ranking();
    let mut ranker = LinearRanker::zeros(data.n_features);
    let ndcg = |r: &LinearRanker| {
        data.test
            .iter()
            .map(|q| ndcg_at_k(&r.rank_flat(q.features()), q.grades(), 10))
            .sum::<f64>()
            / data.test.len() as f64
    };
    let mut wins = 0;
    for step in 1..=20_000 {
        let q = &data.train[step % data.train.len()];
        wins += usize::from(dbgd_step(&mut ranker, q, &mut user, &mut rng, &cfg)?.candidate_won);
        if step % 5_000 == 0 {
            println!(
                "step {step:>6}: nDCG@10 {:.4}, candidate won {wins} times",
                ndcg(&ranker)
            );
        }
    }
    Ok(())
}
