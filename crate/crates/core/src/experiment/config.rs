use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::environments::synthetic::{SyntheticClassificationSpec, SyntheticRankingSpec};
use crate::environments::{ClickProfile, RewardProfile, SupervisedConfig};
use crate::error::{Error, Result};
use crate::learners::LearnerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Classification,
    Ranking,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(Self::Classification),
            "ranking" => Ok(Self::Ranking),
            other => Err(Error::Config(format!(
                "unknown task '{other}' (expected classification | ranking)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sea,
    Bsea,
    Ips,
    LambdaIps,
    EpsGreedy,
    Boltzmann,
    Linucb,
    Thompson,
    RanksvmOnline,
    Dbgd,
    BaselineOnly,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Sea,
        Method::Bsea,
        Method::Ips,
        Method::LambdaIps,
        Method::EpsGreedy,
        Method::Boltzmann,
        Method::Linucb,
        Method::Thompson,
        Method::RanksvmOnline,
        Method::Dbgd,
        Method::BaselineOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sea => "sea",
            Method::Bsea => "bsea",
            Method::Ips => "ips",
            Method::LambdaIps => "lambda-ips",
            Method::EpsGreedy => "eps-greedy",
            Method::Boltzmann => "boltzmann",
            Method::Linucb => "linucb",
            Method::Thompson => "thompson",
            Method::RanksvmOnline => "ranksvm-online",
            Method::Dbgd => "dbgd",
            Method::BaselineOnly => "baseline-only",
        }
    }

    pub fn supports(self, task: Task) -> bool {
        use Method::*;
        match task {
            Task::Classification => !matches!(self, RanksvmOnline | Dbgd),
            Task::Ranking => matches!(self, Sea | Bsea | Ips | RanksvmOnline | Dbgd | BaselineOnly),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!(
                    "unknown method '{s}' (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Built-in generator; `seed` fixes the dataset across replications.
    Synthetic {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        classification: SyntheticClassificationSpec,
        #[serde(default)]
        ranking: SyntheticRankingSpec,
    },
    /// svmlight files (qid-annotated for ranking).
    Files {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        scale_features: bool,
        /// Ranking only: documents kept per query.
        #[serde(default = "default_max_docs")]
        max_docs: usize,
    },
}

fn default_max_docs() -> usize {
    100
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            seed: 0,
            classification: SyntheticClassificationSpec::default(),
            ranking: SyntheticRankingSpec::default(),
        }
    }
}

/// One experiment grid cell: a task, a method and a list of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub method: Method,
    /// `perfect | near-random` for classification; `perfect | position-biased | near-random` for ranking.
    pub profile: String,
    pub horizon: usize,
    /// Empty means powers of ten up to the horizon.
    pub checkpoints: Vec<usize>,
    pub seeds: Vec<u64>,
    pub delta: f64,
    pub epsilon: f64,
    pub bias_severity: f64,
    pub baseline_fraction: f64,
    /// Ranking SEA re-evaluates the log every this many rounds.
    pub check_every: usize,
    pub boltzmann_temperature: f64,
    pub linucb_alpha: f64,
    pub thompson_prior_variance: f64,
    pub output_dir: PathBuf,
    pub dataset: DatasetSource,
    /// Unset fields take the task's defaults.
    pub learner: LearnerSettings,
    pub supervised: SupervisedConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Classification,
            method: Method::Sea,
            profile: "perfect".into(),
            horizon: 10_000,
            checkpoints: Vec::new(),
            seeds: vec![0, 1, 2],
            delta: 0.05,
            epsilon: 0.1,
            bias_severity: 1.0,
            baseline_fraction: 0.01,
            check_every: 100,
            boltzmann_temperature: 1.0,
            linucb_alpha: 1.0,
            thompson_prior_variance: 1.0,
            output_dir: PathBuf::from("runs"),
            dataset: DatasetSource::default(),
            learner: LearnerSettings::default(),
            supervised: SupervisedConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config, or the `config` field of a run manifest (`.json`).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct ManifestConfig {
                config: ExperimentConfig,
            }
            let m: ManifestConfig =
                serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            m.config.validate()?;
            return Ok(m.config);
        }
        Self::from_toml(&text)
    }

    /// Learner settings with unset fields filled from the task defaults.
    pub fn learner(&self) -> LearnerConfig {
        let base = match self.task {
            Task::Classification => LearnerConfig::default(),
            Task::Ranking => LearnerConfig::ranking(),
        };
        let s = &self.learner;
        LearnerConfig {
            learn_rate: s.learn_rate.unwrap_or(base.learn_rate),
            lambda_shift: s.lambda_shift.unwrap_or(base.lambda_shift),
            dbgd_delta: s.dbgd_delta.unwrap_or(base.dbgd_delta),
            dbgd_gamma: s.dbgd_gamma.unwrap_or(base.dbgd_gamma),
            ranksvm_margin: s.ranksvm_margin.unwrap_or(base.ranksvm_margin),
        }
    }

    pub fn reward_profile(&self) -> Result<RewardProfile> {
        self.profile.parse()
    }

    pub fn click_profile(&self) -> Result<ClickProfile> {
        self.profile.parse()
    }

    pub fn checkpoints(&self) -> Vec<usize> {
        if self.checkpoints.is_empty() {
            crate::evaluation::default_checkpoints(self.horizon)
        } else {
            self.checkpoints.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !self.method.supports(self.task) {
            return bad(format!(
                "method {} does not apply to {:?} tasks",
                self.method, self.task
            ));
        }
        match self.task {
            Task::Classification => {
                self.reward_profile()?;
            }
            Task::Ranking => {
                self.click_profile()?;
            }
        }
        if self.horizon == 0 {
            return bad("horizon must be >= 1".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1])
            || self.checkpoints.iter().any(|&c| c == 0 || c > self.horizon)
        {
            return bad("checkpoints must be increasing and within 1..=horizon".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must be in (0, 1), got {}", self.delta));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon must be in (0, 1], got {}", self.epsilon));
        }
        if !(self.bias_severity >= 0.0 && self.bias_severity.is_finite()) {
            return bad(format!(
                "bias_severity must be >= 0, got {}",
                self.bias_severity
            ));
        }
        if !(self.baseline_fraction > 0.0 && self.baseline_fraction <= 1.0) {
            return bad(format!(
                "baseline_fraction must be in (0, 1], got {}",
                self.baseline_fraction
            ));
        }
        if self.check_every == 0 {
            return bad("check_every must be >= 1".into());
        }
        for (name, v) in [
            ("boltzmann_temperature", self.boltzmann_temperature),
            ("thompson_prior_variance", self.thompson_prior_variance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.linucb_alpha >= 0.0 && self.linucb_alpha.is_finite()) {
            return bad(format!(
                "linucb_alpha must be >= 0, got {}",
                self.linucb_alpha
            ));
        }
        self.learner()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Applies flag overrides; flags win over the file.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = &o.task {
            self.task = v.parse()?;
        }
        if let Some(v) = &o.method {
            self.method = v.parse()?;
        }
        if let Some(v) = &o.profile {
            self.profile = v.clone();
        }
        if let Some(v) = o.horizon {
            self.horizon = v;
        }
        if let Some(v) = &o.checkpoints {
            self.checkpoints = v.clone();
        }
        if let Some(v) = &o.seeds {
            self.seeds = v.clone();
        }
        if let Some(v) = o.delta {
            self.delta = v;
        }
        if let Some(v) = o.epsilon {
            self.epsilon = v;
        }
        if let Some(v) = o.bias_severity {
            self.bias_severity = v;
        }
        if let Some(v) = o.baseline_fraction {
            self.baseline_fraction = v;
        }
        if let Some(v) = o.check_every {
            self.check_every = v;
        }
        if let Some(v) = o.learn_rate {
            self.learner.learn_rate = Some(v);
        }
        if let Some(v) = o.lambda {
            self.learner.lambda_shift = Some(v);
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        match (&o.train, &o.test) {
            (Some(train), Some(test)) => {
                self.dataset = DatasetSource::Files {
                    train: train.clone(),
                    test: test.clone(),
                    scale_features: o.scale_features,
                    max_docs: default_max_docs(),
                }
            }
            (None, None) => {}
            _ => {
                return Err(Error::Config(
                    "--train and --test must be given together".into(),
                ))
            }
        }
        self.validate()
    }
}

/// Optional learner fields; see [`ExperimentConfig::learner`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learn_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbgd_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbgd_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranksvm_margin: Option<f64>,
}

/// Command-line overrides for [`ExperimentConfig`] fields.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub bias_severity: Option<f64>,
    #[arg(long)]
    pub baseline_fraction: Option<f64>,
    #[arg(long)]
    pub check_every: Option<usize>,
    #[arg(long)]
    pub learn_rate: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub scale_features: bool,
}
