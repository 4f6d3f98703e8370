//! Oracle suites behind `sea verify`.
//!
//! Each suite recomputes a quantity two ways, or against a closed form, and
//! reports the observed discrepancy next to the tolerance it must meet.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{ExperimentConfig, Method};
use super::runner::{sea_setup, ExperimentData};
use crate::environments::{
    examination_probability, simulate_clicks, ClassificationEnv, ClassificationInstance,
    ClickProfile, ExaminationModel, RewardProfile,
};
use crate::error::{Error, Result};
use crate::estimators::{
    confidence_bound, evaluate_policy, ips_point_terms, pairwise_spread, ConfidenceParams,
    StreamingEstimatorState,
};
use crate::learners::{
    ips_sgd_update, lambda_ips_update, policy_gradient_update, team_draft_interleave_with,
    LearnerConfig, Team,
};
use crate::policies::{
    sample_action, SoftmaxLinearPolicy, StochasticPolicy, UniformPolicy, WeightMatrix,
};
use crate::types::{ActionId, ContextVector, InteractionLog, LoggedInteraction, RankedList};

pub const SUITES: [&str; 6] = [
    "estimators",
    "bounds",
    "gradients",
    "interleaving",
    "environments",
    "safety",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Largest acceptable value of `observed`, or the smallest for `at_least` checks.
    pub tolerance: f64,
    pub observed: f64,
    pub at_least: bool,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            observed,
            at_least: false,
            passed: observed <= tolerance,
        }
    }

    fn at_least(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            observed,
            at_least: true,
            passed: observed >= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs one named suite, or every suite for `"all"`.
pub fn verify(suite: &str) -> Result<Vec<VerifyReport>> {
    if suite == "all" {
        return SUITES.iter().map(|s| run_suite(s)).collect();
    }
    Ok(vec![run_suite(suite)?])
}

fn run_suite(suite: &str) -> Result<VerifyReport> {
    let checks = match suite {
        "estimators" => estimators()?,
        "bounds" => bounds()?,
        "gradients" => gradients()?,
        "interleaving" => interleaving()?,
        "environments" => environments()?,
        "safety" => safety()?,
        other => {
            return Err(Error::Config(format!(
                "unknown suite '{other}' (available: {}, all)",
                SUITES.join(", ")
            )))
        }
    };
    Ok(VerifyReport {
        suite: suite.into(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn random_softmax(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SoftmaxLinearPolicy {
    let w: Vec<f64> = (0..n * m)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    SoftmaxLinearPolicy::new(WeightMatrix::from_rows(n, m, w).expect("shape"), 1.0)
        .expect("temperature")
}

fn random_contexts(rng: &mut ChaCha8Rng, count: usize, m: usize) -> Vec<ContextVector> {
    (0..count)
        .map(|k| {
            let v = (0..m)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            ContextVector::with_key(v, k as u64).expect("finite")
        })
        .collect()
}

/// Logs `t` rounds of a uniform logger over a fixed context pool.
fn random_log(
    rng: &mut ChaCha8Rng,
    n: usize,
    contexts: &[ContextVector],
    t: usize,
) -> Result<InteractionLog> {
    let uniform = UniformPolicy { n };
    let mut log = InteractionLog::new();
    for _ in 0..t {
        let x = &contexts[rng.random_range(0..contexts.len())];
        let (a, p) = sample_action(&uniform, x, rng);
        let r = f64::from(rng.random::<f64>() < 0.5);
        log.append(LoggedInteraction::new(x.clone(), a, r, p)?)?;
    }
    Ok(log)
}

fn estimators() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, m) = (10, 5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let contexts = random_contexts(&mut rng, 50, m);
        let log = random_log(&mut rng, n, &contexts, 2_000)?;
        let policy = random_softmax(&mut rng, n, m);
        let mut state = StreamingEstimatorState::new(n);
        for item in log.iter() {
            state.update(item)?;
        }
        let terms = ips_point_terms(&log, &policy)?;
        let naive = terms.iter().sum::<f64>() / terms.len() as f64;
        worst = worst.max((state.estimate_mean_fast(&policy)? - naive).abs());
    }

    let mut spread_err = 0.0f64;
    for k in 0..50 {
        let t = 2 + k * 40;
        let terms: Vec<f64> = (0..t).map(|_| rng.random::<f64>() * 10.0).collect();
        let brute: f64 = terms
            .iter()
            .flat_map(|a| terms.iter().map(move |b| (a - b).powi(2)))
            .sum();
        let (s, s2) = terms
            .iter()
            .fold((0.0, 0.0), |(s, s2), r| (s + r, s2 + r * r));
        spread_err = spread_err.max((pairwise_spread(t, s, s2) - brute).abs() / brute.max(1e-300));
    }
    Ok(vec![
        Check::at_most("fast mean vs naive mean, 100 logs (abs)", worst, 1e-9),
        Check::at_most(
            "pairwise spread identity, 50 vectors (rel)",
            spread_err,
            1e-6,
        ),
    ])
}

fn bounds() -> Result<Vec<Check>> {
    let params = ConfidenceParams::new(0.05, 1.0)?;
    let constant = confidence_bound(&[0.3, 0.3], &params).unwrap_or(f64::INFINITY);
    let expected = 7.0 * 40f64.ln() / 3.0;

    // finite environment with an exactly known value for the target policy
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, m) = (4, 3);
    let contexts = random_contexts(&mut rng, 20, m);
    let pool: Vec<ClassificationInstance> = contexts
        .iter()
        .map(|x| ClassificationInstance {
            features: x.clone(),
            label: ActionId(rng.random_range(0..n)),
        })
        .collect();
    let pool = Arc::new(pool);
    let target = random_softmax(&mut rng, n, m);
    let logger = UniformPolicy { n };
    let params = ConfidenceParams::new(0.05, 1.0 / (1.0 / n as f64))?;
    let trials = 200;
    let mut covered = 0;
    for trial in 0..trials {
        let mut env = ClassificationEnv::new(pool.clone(), n, RewardProfile::near_random(), trial)?;
        let truth = env.true_value(&target);
        let mut log = InteractionLog::new();
        for _ in 0..500 {
            log.append(crate::environments::classification_round(
                &mut env, &logger, &mut rng,
            )?)?;
        }
        let eval = evaluate_policy(&log, &target, &params)?;
        if eval.lcb <= truth && truth <= eval.ucb {
            covered += 1;
        }
    }
    Ok(vec![
        Check::at_most(
            "bound of two equal terms vs 7 ln(40)/3",
            (constant - expected).abs(),
            1e-9,
        ),
        Check::at_least(
            "coverage over 200 trials at delta 0.05",
            covered as f64 / trials as f64,
            0.95,
        ),
    ])
}

fn central_difference(w: &WeightMatrix, f: impl Fn(&WeightMatrix) -> f64) -> Vec<f64> {
    let h = 1e-5;
    (0..w.as_slice().len())
        .map(|i| {
            let (mut plus, mut minus) = (w.clone(), w.clone());
            plus.as_mut_slice()[i] += h;
            minus.as_mut_slice()[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-12);
    diff / scale
}

/// Worst relative error of `update`'s step against the gradient of `objective`.
pub fn gradient_check(
    seed: u64,
    instances: usize,
    update: impl Fn(&mut SoftmaxLinearPolicy, &LoggedInteraction, &LearnerConfig) -> Result<()>,
    objective: impl Fn(&SoftmaxLinearPolicy, &LoggedInteraction, &LearnerConfig) -> f64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(2..6);
        let m = rng.random_range(1..5);
        let tau = rng.random_range(0.5..2.0);
        let w = random_softmax(&mut rng, n, m).weights().clone();
        let policy = SoftmaxLinearPolicy::new(w, tau)?;
        let x = random_contexts(&mut rng, 1, m).remove(0);
        let item = LoggedInteraction::new(
            x,
            ActionId(rng.random_range(0..n)),
            rng.random_range(0.0..1.0),
            rng.random_range(0.05..1.0),
        )?;
        let cfg = LearnerConfig {
            learn_rate: 0.01,
            lambda_shift: rng.random_range(0.0..1.0),
            ..LearnerConfig::default()
        };
        let mut stepped = policy.clone();
        update(&mut stepped, &item, &cfg)?;
        let step: Vec<f64> = stepped
            .weights()
            .as_slice()
            .iter()
            .zip(policy.weights().as_slice())
            .map(|(a, b)| (a - b) / cfg.learn_rate)
            .collect();
        let grad = central_difference(policy.weights(), |w| {
            let p = SoftmaxLinearPolicy::new(w.clone(), tau).expect("temperature");
            objective(&p, &item, &cfg)
        });
        worst = worst.max(relative_error(&step, &grad));
    }
    Ok(worst)
}

fn gradients() -> Result<Vec<Check>> {
    let ips = gradient_check(1, 100, ips_sgd_update, |p, it, _| {
        it.reward / it.propensity * p.probability(it.action, &it.context)
    })?;
    let lambda = gradient_check(2, 100, lambda_ips_update, |p, it, cfg| {
        (it.reward - cfg.lambda_shift) / it.propensity * p.probability(it.action, &it.context)
    })?;
    let pg = gradient_check(
        3,
        100,
        |p, it, cfg| policy_gradient_update(p, &it.context, it.action, it.reward, cfg),
        |p, it, _| it.reward * p.probability(it.action, &it.context).ln(),
    )?;
    Ok(vec![
        Check::at_most("ips step vs finite differences (rel)", ips, 1e-5),
        Check::at_most("lambda-ips step vs finite differences (rel)", lambda, 1e-5),
        Check::at_most("policy gradient step vs finite differences (rel)", pg, 1e-5),
    ])
}

/// Largest team-size imbalance and number of invalid outputs over every coin sequence.
pub fn interleaving_audit(a: &RankedList, b: &RankedList) -> Result<(usize, usize)> {
    let n = a.len();
    let (mut worst_gap, mut invalid) = (0usize, 0usize);
    for coins in 0u32..(1 << n) {
        let mut i = 0;
        let (list, teams) = team_draft_interleave_with(a, b, || {
            let c = coins >> (i % n) & 1 == 1;
            i += 1;
            c
        })?;
        let na = teams.iter().filter(|t| **t == Team::A).count();
        let nb = teams.len() - na;
        worst_gap = worst_gap.max(na.abs_diff(nb));
        if !list.is_permutation() || list.len() != n {
            invalid += 1;
        }
    }
    Ok((worst_gap, invalid))
}

fn shuffled(rng: &mut ChaCha8Rng, n: usize) -> RankedList {
    let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    RankedList::from_scores(&scores)
}

fn interleaving() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut gap, mut bad) = (0, 0);
    for n in 1..=8 {
        for _ in 0..3 {
            let (g, b) = interleaving_audit(&shuffled(&mut rng, n), &shuffled(&mut rng, n))?;
            gap = gap.max(g);
            bad += b;
        }
    }
    Ok(vec![
        Check::at_most(
            "invalid interleavings, all coin sequences, up to 8 docs",
            bad as f64,
            0.0,
        ),
        Check::at_most("team size difference", gap as f64, 1.0),
    ])
}

fn environments() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let constants = [
        (ClickProfile::PERFECT, [0.0, 0.2, 0.4, 0.8, 1.0]),
        (ClickProfile::POSITION_BIASED, [0.1, 0.1, 0.1, 1.0, 1.0]),
        (ClickProfile::NEAR_RANDOM, [0.4, 0.45, 0.5, 0.55, 0.6]),
    ];
    let mismatches = constants.iter().filter(|(got, want)| got != want).count();
    checks.push(Check::at_most(
        "click profile table mismatches",
        mismatches as f64,
        0.0,
    ));
    let nr = RewardProfile::near_random();
    let reward_err = (nr.p_correct - 0.6).abs() + (nr.p_incorrect - 0.4).abs();
    checks.push(Check::at_most(
        "near-random reward probabilities",
        reward_err,
        0.0,
    ));

    let model = ExaminationModel::new(1.0)?;
    let exam_err = (1..=12)
        .map(|k| {
            let want = if k <= 10 { 1.0 / k as f64 } else { 0.0 };
            (examination_probability(&model, k) - want).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "examination probability at eta 1",
        exam_err,
        0.0,
    ));

    // Monte Carlo click rate of a grade-4 document at rank 2, in standard errors
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let list = RankedList::from_order(vec![0, 1])?;
    let grades = [0u8, 4];
    let samples = 100_000;
    let profile = ClickProfile::perfect();
    let clicks = (0..samples)
        .filter(|_| simulate_clicks(&list, &grades, &model, &profile, &mut rng)[1].clicked)
        .count();
    let p = 0.5 * profile.probs[4];
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    checks.push(Check::at_most(
        "click rate z-score",
        (clicks as f64 / samples as f64 - p).abs() / se,
        3.0,
    ));
    Ok(checks)
}

fn safety() -> Result<Vec<Check>> {
    let mut violations = 0usize;
    let mut deployments = 0usize;
    for profile in ["perfect", "near-random"] {
        let cfg = ExperimentConfig {
            method: Method::Sea,
            profile: profile.into(),
            horizon: 10_000,
            seeds: vec![0, 1],
            ..ExperimentConfig::default()
        };
        let data = ExperimentData::load(&cfg)?;
        for &seed in &cfg.seeds {
            let audit = audit_deployments(&cfg, &data, seed)?;
            violations += audit.violations;
            deployments += audit.deployments;
        }
    }
    Ok(vec![Check::at_most(
        format!("deployments worse than the policy they replaced (of {deployments})"),
        violations as f64,
        0.0,
    )])
}

/// Counts of a safety audit over one seeded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SafetyAudit {
    pub deployments: usize,
    pub violations: usize,
}

/// Runs classification SEA for `cfg.horizon` rounds and compares the exact
/// value of every deployed policy with that of the policy it replaced.
pub fn audit_deployments(
    cfg: &ExperimentConfig,
    data: &ExperimentData,
    seed: u64,
) -> Result<SafetyAudit> {
    let ExperimentData::Classification {
        n_classes, train, ..
    } = data
    else {
        return Err(Error::Config(
            "safety audit needs a classification task".into(),
        ));
    };
    let (mut state, mut env, mut rng) = sea_setup(cfg, *n_classes, train, seed)?;
    let mut current = env.true_value(state.baseline());
    let mut violations = 0;
    for _ in 0..cfg.horizon {
        if state.round(&mut env, &mut rng)?.deployed {
            let snapshot = &state.deployments().last().expect("just deployed").policy;
            let value = env.true_value(snapshot);
            if value < current {
                violations += 1;
            }
            current = value;
        }
    }
    Ok(SafetyAudit {
        deployments: state.deployments().len(),
        violations,
    })
}
