//! Safe deployment of a learned ranker under position-biased clicks.
//!
//!     cargo run --release --example ranking_sea

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::environments::synthetic::SyntheticRankingSpec;
use safe_explore::environments::{
    make_ranking_baseline, ClickProfile, ExaminationModel, Query, RankingEnv, SimulatedUser,
    SupervisedConfig,
};
use safe_explore::evaluation::ndcg_at_k;
use safe_explore::learners::LearnerConfig;
use safe_explore::policies::LinearRanker;
use safe_explore::safe_deploy::{RankingSeaState, SeaMode};

fn mean_ndcg(ranker: &LinearRanker, queries: &[Query]) -> f64 {
    queries
        .iter()
        .map(|q| ndcg_at_k(&ranker.rank_flat(q.features()), q.grades(), 10))
        .sum::<f64>()
        / queries.len() as f64
}

fn main() -> safe_explore::Result<()> {
    let data = SyntheticRankingSpec::default().generate(0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let baseline =
        make_ranking_baseline(&data.train, 0.01, &SupervisedConfig::default(), &mut rng)?;

    let model = ExaminationModel::new(1.0)?;
    let user = SimulatedUser {
        model,
        profile: ClickProfile::position_biased(),
    };
    let mut env = RankingEnv::new(Arc::new(data.train), user, 4)?;
    let mut state = RankingSeaState::new(
        baseline.clone(),
        &model,
        0.05,
        SeaMode::Sea,
        LearnerConfig::ranking(),
        100,
    )?;

    println!("baseline nDCG@10 {:.4}", mean_ndcg(&baseline, &data.test));
    for _ in 0..20_000 {
        let out = state.round(&mut env)?;
        if out.deployed {
            let w = out.eval_w.unwrap();
            let d = out.eval_d.unwrap();
            println!(
                "t = {}: lcb_w {:.4} >= ucb_d {:.4}, deployed ranker nDCG@10 {:.4}",
                out.t,
                w.lcb,
                d.ucb,
                mean_ndcg(state.deployed_ranker(), &data.test)
            );
        }
    }
    println!(
        "learned nDCG@10 {:.4}, {} clicks collected",
        mean_ndcg(state.learned(), &data.test),
        state.total_clicks()
    );
    Ok(())
}
