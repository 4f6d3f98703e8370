use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{DatasetSource, ExperimentConfig, Method, Task};
use super::fmt_float;
use crate::data_io::{parse_ltr_svmlight, parse_svmlight, MinMaxScaler};
use crate::environments::{
    make_classification_baseline, make_ranking_baseline, BanditEnvironment, ClassificationEnv,
    ClassificationInstance, ExaminationModel, Query, RankingEnv, RewardProfile, SimulatedUser,
};
use crate::error::{Error, Result};
use crate::estimators::{ClickImpression, PolicyEvaluation};
use crate::evaluation::{average_reward_holdout, mean_std, ndcg_at_k};
use crate::learners::{
    dbgd_step, ips_sgd_update, lambda_ips_update, policy_gradient_update, ranking_ips_update,
    ranksvm_pairwise_update, LearnerConfig,
};
use crate::policies::{
    sample_action, Classifier, EpsilonGreedyPolicy, LinUcbState, LinearRanker, SoftmaxLinearPolicy,
    StochasticPolicy, ThompsonState,
};
use crate::safe_deploy::{RankingSeaState, SeaMode, SeaState};
use crate::types::{ActionId, ContextVector, LoggedInteraction, RewardBounds};

/// Environment variable that roots relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "SEA_OUTPUT_ROOT";

const BASELINE_STREAM: u64 = 1;
const ENV_STREAM: u64 = 2;
const POLICY_STREAM: u64 = 3;

/// Independent RNG stream `stream` of replication `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Training and held-out data, loaded once and shared by all replications.
#[derive(Debug, Clone)]
pub enum ExperimentData {
    Classification {
        n_classes: usize,
        train: Arc<Vec<ClassificationInstance>>,
        test: Vec<ClassificationInstance>,
    },
    Ranking {
        train: Arc<Vec<Query>>,
        test: Vec<Query>,
    },
}

impl ExperimentData {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        match (&cfg.dataset, cfg.task) {
            (
                DatasetSource::Synthetic {
                    seed,
                    classification,
                    ..
                },
                Task::Classification,
            ) => {
                let data = classification.generate(*seed)?;
                Ok(Self::Classification {
                    n_classes: data.n_classes,
                    train: Arc::new(data.train),
                    test: data.test,
                })
            }
            (DatasetSource::Synthetic { seed, ranking, .. }, Task::Ranking) => {
                let data = ranking.generate(*seed)?;
                Ok(Self::Ranking {
                    train: Arc::new(data.train),
                    test: data.test,
                })
            }
            (
                DatasetSource::Files {
                    train,
                    test,
                    scale_features,
                    ..
                },
                Task::Classification,
            ) => load_classification_files(train, test, *scale_features),
            (
                DatasetSource::Files {
                    train,
                    test,
                    scale_features,
                    max_docs,
                },
                Task::Ranking,
            ) => load_ranking_files(train, test, *scale_features, *max_docs),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))
}

fn load_classification_files(train: &Path, test: &Path, scale: bool) -> Result<ExperimentData> {
    let tr = parse_svmlight(open(train)?)?;
    let te = parse_svmlight(open(test)?)?;
    let m = tr.meta.n_features.max(te.meta.n_features);
    let mut train_set = tr.instances(m)?;
    let mut test_set = te.instances(m)?;
    // test labels were remapped independently; map them onto the training ids
    for inst in &mut test_set {
        let name = &te.label_names[inst.label.0];
        let id = tr
            .label_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| {
                Error::Config(format!(
                    "test label '{name}' does not occur in the training file"
                ))
            })?;
        inst.label = ActionId(id);
    }
    if scale {
        let scaler = MinMaxScaler::fit(train_set.iter().map(|i| i.features.values()))
            .ok_or_else(|| Error::Config("training file is empty".into()))?;
        for inst in train_set.iter_mut().chain(test_set.iter_mut()) {
            let mut v = inst.features.values().to_vec();
            scaler.transform(&mut v);
            let key = inst.features.dedup_key().unwrap_or_default();
            inst.features = ContextVector::with_key(v, key)?;
        }
    }
    Ok(ExperimentData::Classification {
        n_classes: tr.label_names.len(),
        train: Arc::new(train_set),
        test: test_set,
    })
}

fn load_ranking_files(
    train: &Path,
    test: &Path,
    scale: bool,
    max_docs: usize,
) -> Result<ExperimentData> {
    let (tr, tr_meta) = parse_ltr_svmlight(open(train)?)?;
    let (te, te_meta) = parse_ltr_svmlight(open(test)?)?;
    let m = tr_meta.n_features.max(te_meta.n_features);
    let mut train_q = tr
        .iter()
        .map(|q| q.to_query(m, max_docs))
        .collect::<Result<Vec<_>>>()?;
    let mut test_q = te
        .iter()
        .map(|q| q.to_query(m, max_docs))
        .collect::<Result<Vec<_>>>()?;
    if train_q.is_empty() || test_q.is_empty() {
        return Err(Error::Config(
            "ranking files need at least one query each".into(),
        ));
    }
    if scale {
        let scaler = MinMaxScaler::fit(train_q.iter().flat_map(|q| q.features().chunks_exact(m)))
            .ok_or_else(|| Error::Config("training file is empty".into()))?;
        for q in train_q.iter_mut().chain(test_q.iter_mut()) {
            let mut f = q.features().to_vec();
            f.chunks_exact_mut(m).for_each(|d| scaler.transform(d));
            *q = Query::new(q.qid.clone(), m, f, q.grades().to_vec())?;
        }
    }
    Ok(ExperimentData::Ranking {
        train: Arc::new(train_q),
        test: test_q,
    })
}

/// One metric value at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPoint {
    pub checkpoint: usize,
    pub metric: &'static str,
    pub value: f64,
}

/// Everything one seed produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub seed: u64,
    pub trace_csv: String,
    pub metrics: Vec<MetricPoint>,
    pub deployment_rounds: Vec<usize>,
}

impl Replication {
    pub fn metric(&self, name: &str, checkpoint: usize) -> Option<f64> {
        self.metrics
            .iter()
            .find(|p| p.metric == name && p.checkpoint == checkpoint)
            .map(|p| p.value)
    }
}

const CLASSIFICATION_HEADER: &str =
    "t,action,reward,propensity,mean_w,lcb_w,mean_d,ucb_d,deployed,cumulative_reward";
const RANKING_HEADER: &str = "t,query,clicks,mean_w,lcb_w,mean_d,ucb_d,deployed,cumulative_clicks";

fn push_evals(
    line: &mut String,
    evals: Option<(PolicyEvaluation, PolicyEvaluation)>,
    deployed: bool,
) {
    match evals {
        Some((w, d)) => {
            let _ = write!(
                line,
                ",{},{},{},{}",
                fmt_float(w.mean),
                fmt_float(w.lcb),
                fmt_float(d.mean),
                fmt_float(d.ucb)
            );
        }
        None => line.push_str(",,,,"),
    }
    let _ = write!(line, ",{}", u8::from(deployed));
}

struct Step {
    action: ActionId,
    reward: f64,
    propensity: f64,
    evals: Option<(PolicyEvaluation, PolicyEvaluation)>,
    deployed: bool,
}

enum ClassAgent {
    Sea(Box<SeaState<EpsilonGreedyPolicy>>),
    Offline {
        baseline: EpsilonGreedyPolicy,
        learned: SoftmaxLinearPolicy,
        translated: bool,
    },
    EpsGreedy {
        learned: SoftmaxLinearPolicy,
        epsilon: f64,
    },
    Boltzmann(SoftmaxLinearPolicy),
    LinUcb(LinUcbState),
    Thompson(ThompsonState),
    Baseline(EpsilonGreedyPolicy),
}

impl ClassAgent {
    fn new(
        cfg: &ExperimentConfig,
        baseline: EpsilonGreedyPolicy,
        n_features: usize,
    ) -> Result<Self> {
        let n = baseline.n_actions();
        let start = baseline.base().clone();
        Ok(match cfg.method {
            Method::Sea | Method::Bsea => {
                Self::Sea(Box::new(new_sea_state(cfg, baseline, n_features)?))
            }
            Method::Ips | Method::LambdaIps => Self::Offline {
                baseline,
                learned: SoftmaxLinearPolicy::zeros(n, n_features),
                translated: cfg.method == Method::LambdaIps,
            },
            Method::EpsGreedy => Self::EpsGreedy {
                learned: SoftmaxLinearPolicy::new(start, 1.0)?,
                epsilon: cfg.epsilon,
            },
            Method::Boltzmann => {
                Self::Boltzmann(SoftmaxLinearPolicy::new(start, cfg.boltzmann_temperature)?)
            }
            Method::Linucb => Self::LinUcb(LinUcbState::warm_start(&start, cfg.linucb_alpha)?),
            Method::Thompson => Self::Thompson(ThompsonState::with_prior_means(
                &start,
                cfg.thompson_prior_variance,
                1.0,
            )?),
            Method::BaselineOnly => Self::Baseline(baseline),
            Method::RanksvmOnline | Method::Dbgd => {
                return Err(Error::Config(format!("{} is a ranking method", cfg.method)));
            }
        })
    }

    fn step(
        &mut self,
        env: &mut ClassificationEnv,
        rng: &mut ChaCha8Rng,
        learner: &LearnerConfig,
    ) -> Result<Step> {
        let plain = |item: &LoggedInteraction| Step {
            action: item.action,
            reward: item.reward,
            propensity: item.propensity,
            evals: None,
            deployed: false,
        };
        match self {
            Self::Sea(state) => {
                let out = state.round(env, rng)?;
                Ok(Step {
                    evals: Some((out.eval_w, out.eval_d)),
                    deployed: out.deployed,
                    ..plain(&out.interaction)
                })
            }
            Self::Offline {
                baseline,
                learned,
                translated,
            } => {
                let item = crate::environments::classification_round(env, baseline, rng)?;
                if *translated {
                    lambda_ips_update(learned, &item, learner)?;
                } else {
                    ips_sgd_update(learned, &item, learner)?;
                }
                Ok(plain(&item))
            }
            Self::EpsGreedy { learned, epsilon } => {
                let acting = EpsilonGreedyPolicy::new(learned.weights().clone(), *epsilon)?;
                let item = crate::environments::classification_round(env, &acting, rng)?;
                ips_sgd_update(learned, &item, learner)?;
                Ok(plain(&item))
            }
            Self::Boltzmann(learned) => {
                let item = crate::environments::classification_round(env, &*learned, rng)?;
                policy_gradient_update(learned, &item.context, item.action, item.reward, learner)?;
                Ok(plain(&item))
            }
            Self::LinUcb(state) => {
                let x = env.observe();
                let a = state.select(&x)?;
                let r = env.play(a)?;
                state.update(&x, a, r)?;
                Ok(plain(&LoggedInteraction::new(x, a, r, 1.0)?))
            }
            Self::Thompson(state) => {
                let x = env.observe();
                let a = state.select(&x, rng)?;
                let r = env.play(a)?;
                state.update(&x, a, r)?;
                Ok(plain(&LoggedInteraction::new(x, a, r, 1.0)?))
            }
            Self::Baseline(policy) => {
                let x = env.observe();
                let (a, p) = sample_action(policy, &x, rng);
                let r = env.play(a)?;
                Ok(plain(&LoggedInteraction::new(x, a, r, p)?))
            }
        }
    }

    /// The model whose held-out quality is reported.
    fn model(&self) -> &dyn Classifier {
        match self {
            Self::Sea(state) => state.learned(),
            Self::Offline { learned, .. }
            | Self::EpsGreedy { learned, .. }
            | Self::Boltzmann(learned) => learned,
            Self::LinUcb(state) => state,
            Self::Thompson(state) => state,
            Self::Baseline(policy) => policy,
        }
    }

    fn deployments(&self) -> Vec<usize> {
        match self {
            Self::Sea(state) => state.deployments().iter().map(|d| d.t).collect(),
            _ => Vec::new(),
        }
    }
}

fn sea_mode(method: Method) -> SeaMode {
    if method == Method::Bsea {
        SeaMode::Bsea
    } else {
        SeaMode::Sea
    }
}

fn new_sea_state(
    cfg: &ExperimentConfig,
    baseline: EpsilonGreedyPolicy,
    n_features: usize,
) -> Result<SeaState<EpsilonGreedyPolicy>> {
    let bounds = RewardBounds::new(1.0, baseline.min_propensity())?;
    let learned = SoftmaxLinearPolicy::zeros(baseline.n_actions(), n_features);
    SeaState::new(
        baseline,
        learned,
        bounds,
        cfg.delta,
        sea_mode(cfg.method),
        cfg.learner(),
    )
}

fn classification_baseline(
    cfg: &ExperimentConfig,
    n_classes: usize,
    train: &[ClassificationInstance],
    seed: u64,
) -> Result<EpsilonGreedyPolicy> {
    let mut brng = stream_rng(seed, BASELINE_STREAM);
    make_classification_baseline(
        train,
        n_classes,
        cfg.baseline_fraction,
        cfg.epsilon,
        &cfg.supervised,
        &mut brng,
    )
}

/// The SEA state, environment and policy RNG that a classification run of
/// `cfg` starts from for `seed` (BSEA when `cfg.method` is `bsea`).
pub fn sea_setup(
    cfg: &ExperimentConfig,
    n_classes: usize,
    train: &Arc<Vec<ClassificationInstance>>,
    seed: u64,
) -> Result<(SeaState<EpsilonGreedyPolicy>, ClassificationEnv, ChaCha8Rng)> {
    let baseline = classification_baseline(cfg, n_classes, train, seed)?;
    let state = new_sea_state(cfg, baseline, train[0].features.dim())?;
    let env = ClassificationEnv::with_rng(
        train.clone(),
        n_classes,
        cfg.reward_profile()?,
        stream_rng(seed, ENV_STREAM),
    )?;
    Ok((state, env, stream_rng(seed, POLICY_STREAM)))
}

fn run_classification(
    cfg: &ExperimentConfig,
    n_classes: usize,
    train: &Arc<Vec<ClassificationInstance>>,
    test: &[ClassificationInstance],
    seed: u64,
) -> Result<Replication> {
    let profile: RewardProfile = cfg.reward_profile()?;
    let n_features = train[0].features.dim();
    let baseline = classification_baseline(cfg, n_classes, train, seed)?;
    let mut agent = ClassAgent::new(cfg, baseline, n_features)?;
    let learner = cfg.learner();
    let mut env = ClassificationEnv::with_rng(
        train.clone(),
        n_classes,
        profile,
        stream_rng(seed, ENV_STREAM),
    )?;
    let mut rng = stream_rng(seed, POLICY_STREAM);

    let checkpoints = cfg.checkpoints();
    let mut next = checkpoints.iter().copied().peekable();
    let mut trace = String::from(CLASSIFICATION_HEADER);
    trace.push('\n');
    let mut metrics = Vec::new();
    let (mut cumulative, mut oracle) = (0.0, 0.0);
    for t in 1..=cfg.horizon {
        let step = agent.step(&mut env, &mut rng, &learner)?;
        cumulative += step.reward;
        oracle += env.oracle_reward().unwrap_or(step.reward);
        let _ = write!(
            trace,
            "{t},{},{},{}",
            step.action,
            fmt_float(step.reward),
            fmt_float(step.propensity)
        );
        push_evals(&mut trace, step.evals, step.deployed);
        let _ = writeln!(trace, ",{}", fmt_float(cumulative));
        if next.peek() == Some(&t) {
            next.next();
            let holdout = average_reward_holdout(agent.model(), test, &profile)?;
            metrics.push(MetricPoint {
                checkpoint: t,
                metric: "cumulative_reward",
                value: cumulative,
            });
            metrics.push(MetricPoint {
                checkpoint: t,
                metric: "regret",
                value: oracle - cumulative,
            });
            metrics.push(MetricPoint {
                checkpoint: t,
                metric: "holdout_reward",
                value: holdout,
            });
            if matches!(cfg.method, Method::Sea | Method::Bsea) {
                let n = agent.deployments().len() as f64;
                metrics.push(MetricPoint {
                    checkpoint: t,
                    metric: "deployments",
                    value: n,
                });
            }
        }
    }
    Ok(Replication {
        seed,
        trace_csv: trace,
        metrics,
        deployment_rounds: agent.deployments(),
    })
}

fn mean_ndcg(ranker: &LinearRanker, queries: &[Query]) -> f64 {
    let total: f64 = queries
        .iter()
        .map(|q| ndcg_at_k(&ranker.rank_flat(q.features()), q.grades(), 10))
        .sum();
    total / queries.len() as f64
}

fn run_ranking(
    cfg: &ExperimentConfig,
    train: &Arc<Vec<Query>>,
    test: &[Query],
    seed: u64,
) -> Result<Replication> {
    let profile = cfg.click_profile()?;
    let learner = cfg.learner();
    let model = ExaminationModel::new(cfg.bias_severity)?;
    let mut brng = stream_rng(seed, BASELINE_STREAM);
    let baseline = make_ranking_baseline(train, cfg.baseline_fraction, &cfg.supervised, &mut brng)?;
    let user = SimulatedUser { model, profile };
    let mut env = RankingEnv::with_rng(train.clone(), user, stream_rng(seed, ENV_STREAM))?;

    let mut sea = match cfg.method {
        Method::Sea | Method::Bsea => Some(RankingSeaState::new(
            baseline.clone(),
            &model,
            cfg.delta,
            sea_mode(cfg.method),
            learner,
            cfg.check_every,
        )?),
        _ => None,
    };
    let mut learned = baseline.clone();

    let checkpoints = cfg.checkpoints();
    let mut next = checkpoints.iter().copied().peekable();
    let mut trace = String::from(RANKING_HEADER);
    trace.push('\n');
    let mut metrics = Vec::new();
    let mut cumulative = 0usize;
    for t in 1..=cfg.horizon {
        let (query, clicks, evals, deployed) = match (&mut sea, cfg.method) {
            (Some(state), _) => {
                let out = state.round(&mut env)?;
                let evals = out.eval_w.zip(out.eval_d);
                (out.query, out.clicks, evals, out.deployed)
            }
            (None, Method::Dbgd) => {
                let q = env.next_query();
                let (queries, user, env_rng) = env.parts();
                let out = dbgd_step(&mut learned, &queries[q], user, env_rng, &learner)?;
                (
                    q,
                    out.clicks.iter().filter(|c| c.clicked).count(),
                    None,
                    false,
                )
            }
            (None, method) => {
                let q = env.next_query();
                let shown = if method == Method::RanksvmOnline {
                    &learned
                } else {
                    &baseline
                };
                let list = shown.rank_flat(env.queries()[q].features());
                let records = env.show(q, &list);
                let query = &env.queries()[q];
                match method {
                    Method::RanksvmOnline => {
                        ranksvm_pairwise_update(&mut learned, &records, query, &learner)?;
                    }
                    Method::Ips => {
                        ranking_ips_update(
                            &mut learned,
                            &ClickImpression::new(q, &records),
                            query,
                            &learner,
                        )?;
                    }
                    _ => {}
                }
                (q, records.iter().filter(|c| c.clicked).count(), None, false)
            }
        };
        cumulative += clicks;
        let _ = write!(trace, "{t},{query},{clicks}");
        push_evals(&mut trace, evals, deployed);
        let _ = writeln!(trace, ",{cumulative}");
        if next.peek() == Some(&t) {
            next.next();
            let ranker = match &sea {
                Some(state) => state.learned(),
                None => &learned,
            };
            metrics.push(MetricPoint {
                checkpoint: t,
                metric: "cumulative_clicks",
                value: cumulative as f64,
            });
            metrics.push(MetricPoint {
                checkpoint: t,
                metric: "ndcg",
                value: mean_ndcg(ranker, test),
            });
            if let Some(state) = &sea {
                let n = state.deployments().len() as f64;
                metrics.push(MetricPoint {
                    checkpoint: t,
                    metric: "deployments",
                    value: n,
                });
            }
        }
    }
    let deployment_rounds = sea
        .map(|s| s.deployments().iter().map(|d| d.t).collect())
        .unwrap_or_default();
    Ok(Replication {
        seed,
        trace_csv: trace,
        metrics,
        deployment_rounds,
    })
}

/// Runs a single seed of `cfg` on already loaded data.
pub fn run_replication(
    cfg: &ExperimentConfig,
    data: &ExperimentData,
    seed: u64,
) -> Result<Replication> {
    match data {
        ExperimentData::Classification {
            n_classes,
            train,
            test,
        } => run_classification(cfg, *n_classes, train, test, seed),
        ExperimentData::Ranking { train, test } => run_ranking(cfg, train, test, seed),
    }
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub traces: Vec<PathBuf>,
    pub aggregate: PathBuf,
    pub metrics: PathBuf,
    pub manifest: PathBuf,
    pub replications: Vec<Replication>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    git_describe: String,
    crate_version: &'static str,
    seeds: &'a [u64],
    rng_streams: [(&'static str, u64); 3],
    deployments: Vec<(u64, &'a [usize])>,
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

/// `cfg.output_dir`, placed under `$SEA_OUTPUT_ROOT` when that is set and the path is relative.
pub fn resolve_output_dir(cfg: &ExperimentConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if cfg.output_dir.is_relative() => PathBuf::from(root).join(&cfg.output_dir),
        _ => cfg.output_dir.clone(),
    }
}

/// Tidy rows `method,seed,checkpoint,metric,value`.
pub fn tidy_metrics_csv(method: Method, reps: &[Replication]) -> String {
    let mut out = String::from("method,seed,checkpoint,metric,value\n");
    for rep in reps {
        for p in &rep.metrics {
            let _ = writeln!(
                out,
                "{method},{},{},{},{}",
                rep.seed,
                p.checkpoint,
                p.metric,
                fmt_float(p.value)
            );
        }
    }
    out
}

/// Mean and sample standard deviation across seeds, per checkpoint and metric.
pub fn aggregate_csv(method: Method, reps: &[Replication]) -> String {
    let mut out = String::from("method,checkpoint,metric,mean,std,n\n");
    let Some(first) = reps.first() else {
        return out;
    };
    for p in &first.metrics {
        let values: Vec<f64> = reps
            .iter()
            .filter_map(|r| r.metric(p.metric, p.checkpoint))
            .collect();
        let (mean, std) = mean_std(&values);
        let _ = writeln!(
            out,
            "{method},{},{},{},{},{}",
            p.checkpoint,
            p.metric,
            fmt_float(mean),
            fmt_float(std),
            values.len()
        );
    }
    out
}

/// Runs every seed of `cfg` (in parallel) and writes traces, metrics and a manifest.
///
/// Nothing is written unless every replication succeeds.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let data = ExperimentData::load(cfg)?;
    let replications = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_replication(cfg, &data, seed))
        .collect::<Result<Vec<_>>>()?;

    let dir = resolve_output_dir(cfg);
    fs::create_dir_all(&dir)?;
    let mut traces = Vec::new();
    for rep in &replications {
        let path = dir.join(format!("trace_{}_seed{}.csv", cfg.method, rep.seed));
        fs::write(&path, &rep.trace_csv)?;
        traces.push(path);
    }
    let aggregate = dir.join(format!("aggregate_{}.csv", cfg.method));
    fs::write(&aggregate, aggregate_csv(cfg.method, &replications))?;
    let metrics = dir.join(format!("metrics_{}.csv", cfg.method));
    fs::write(&metrics, tidy_metrics_csv(cfg.method, &replications))?;

    let manifest_path = dir.join(format!("manifest_{}.json", cfg.method));
    let manifest = Manifest {
        config: cfg,
        git_describe: git_describe(),
        crate_version: env!("CARGO_PKG_VERSION"),
        seeds: &cfg.seeds,
        rng_streams: [
            ("baseline", BASELINE_STREAM),
            ("environment", ENV_STREAM),
            ("policy", POLICY_STREAM),
        ],
        deployments: replications
            .iter()
            .map(|r| (r.seed, r.deployment_rounds.as_slice()))
            .collect(),
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunSummary {
        output_dir: dir,
        traces,
        aggregate,
        metrics,
        manifest: manifest_path,
        replications,
    })
}
