//! Counterfactual evaluation of a policy from someone else's logs.
//!
//! A uniform logger picks actions in a small finite world. The IPS estimate
//! of a target softmax policy and its confidence interval are computed both
//! term by term and from the streaming per-context aggregates, then compared
//! with the exact value.
//!
//!     cargo run --release --example off_policy_evaluation

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use safe_explore::estimators::{evaluate_policy, ConfidenceParams, StreamingEstimatorState};
use safe_explore::policies::{SoftmaxLinearPolicy, StochasticPolicy, WeightMatrix};
use safe_explore::types::{
    reward_bound_b, ActionId, ContextVector, InteractionLog, LoggedInteraction,
};

fn main() -> safe_explore::Result<()> {
    let (n, m, n_contexts) = (5, 4, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let contexts: Vec<ContextVector> = (0..n_contexts)
        .map(|k| {
            let v = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            ContextVector::with_key(v, k as u64)
        })
        .collect::<Result<_, _>>()?;
    // Bernoulli click rate for every (context, action)
    let mu: Vec<Vec<f64>> = (0..n_contexts)
        .map(|_| (0..n).map(|_| rng.random()).collect())
        .collect();
    let w = (0..n * m).map(|_| rng.sample(StandardNormal)).collect();
    let target = SoftmaxLinearPolicy::new(WeightMatrix::from_rows(n, m, w)?, 1.0)?;

    let truth = contexts
        .iter()
        .zip(&mu)
        .map(|(x, mu)| {
            target
                .probabilities(x)
                .iter()
                .zip(mu)
                .map(|(p, r)| p * r)
                .sum::<f64>()
        })
        .sum::<f64>()
        / n_contexts as f64;

    let p_log = 1.0 / n as f64;
    let params = ConfidenceParams::new(0.05, reward_bound_b(1.0, p_log)?)?;
    let mut log = InteractionLog::new();
    let mut stream = StreamingEstimatorState::new(n);
    println!(
        "{:>7} {:>8} {:>8} {:>8} {:>8}",
        "t", "lcb", "mean", "ucb", "truth"
    );
    for t in 1..=100_000 {
        let c = rng.random_range(0..n_contexts);
        let a = rng.random_range(0..n);
        let r = f64::from(rng.random::<f64>() < mu[c][a]);
        let item = LoggedInteraction::new(contexts[c].clone(), ActionId(a), r, p_log)?;
        stream.update(&item)?;
        log.append(item)?;
        if [100, 1_000, 10_000, 100_000].contains(&t) {
            let e = evaluate_policy(&log, &target, &params)?;
            let fast = stream.evaluate(&target, &params)?;
            assert!((e.mean - fast.mean).abs() < 1e-9);
            println!(
                "{t:>7} {:>8.4} {:>8.4} {:>8.4} {truth:>8.4}",
                e.lcb, e.mean, e.ucb
            );
        }
    }
    println!(
        "{} distinct contexts summarize {} rows",
        stream.distinct_contexts(),
        log.len()
    );
    Ok(())
}
