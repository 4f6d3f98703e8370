use serde::{Deserialize, Serialize};

use super::{deployment_check, Deployed, DeploymentRecord, SeaMode};
use crate::environments::{ExaminationModel, RankingEnv};
use crate::error::{invalid, Result};
use crate::estimators::{
    ranking_reward_bound, ClickImpression, ConfidenceParams, PolicyEvaluation, RankingTermEvaluator,
};
use crate::learners::{ranking_ips_update, LearnerConfig};
use crate::policies::LinearRanker;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRoundOutcome {
    pub t: usize,
    pub query: usize,
    pub clicks: usize,
    /// `None` on rounds where no check ran.
    pub eval_w: Option<PolicyEvaluation>,
    pub eval_d: Option<PolicyEvaluation>,
    pub deployed: bool,
}

/// Safe deployment for rankers, using the click IPS estimate.
///
/// Re-ranking every logged query for a changed ranker is costly, so the
/// deployment check runs every `check_every` rounds.
#[derive(Debug, Clone)]
pub struct RankingSeaState {
    baseline: LinearRanker,
    learned: LinearRanker,
    deployed: Deployed<LinearRanker>,
    impressions: Vec<ClickImpression>,
    params: ConfidenceParams,
    mode: SeaMode,
    cfg: LearnerConfig,
    check_every: usize,
    d_eval: RankingTermEvaluator,
    deployments: Vec<DeploymentRecord<LinearRanker>>,
    total_clicks: usize,
}

impl RankingSeaState {
    pub fn new(
        baseline: LinearRanker,
        model: &ExaminationModel,
        delta: f64,
        mode: SeaMode,
        cfg: LearnerConfig,
        check_every: usize,
    ) -> Result<Self> {
        if check_every == 0 {
            return invalid("check_every must be >= 1");
        }
        cfg.validate()?;
        let params = ConfidenceParams::new(delta, ranking_reward_bound(model))?;
        Ok(Self {
            learned: baseline.clone(),
            baseline,
            deployed: Deployed::Baseline,
            impressions: Vec::new(),
            params,
            mode,
            cfg,
            check_every,
            d_eval: RankingTermEvaluator::default(),
            deployments: Vec::new(),
            total_clicks: 0,
        })
    }

    pub fn t(&self) -> usize {
        self.impressions.len()
    }

    pub fn learned(&self) -> &LinearRanker {
        &self.learned
    }

    pub fn deployed_ranker(&self) -> &LinearRanker {
        match &self.deployed {
            Deployed::Baseline => &self.baseline,
            Deployed::Snapshot(r) => r,
        }
    }

    pub fn deployments(&self) -> &[DeploymentRecord<LinearRanker>] {
        &self.deployments
    }

    pub fn total_clicks(&self) -> usize {
        self.total_clicks
    }

    pub fn params(&self) -> ConfidenceParams {
        self.params
    }

    fn finish(&self, sum: f64, sum_sq: f64) -> Result<PolicyEvaluation> {
        match self.mode {
            SeaMode::Sea => PolicyEvaluation::from_moments(self.t(), sum, sum_sq, &self.params),
            SeaMode::Bsea => PolicyEvaluation::boundless(self.t(), sum),
        }
    }

    pub fn round(&mut self, env: &mut RankingEnv) -> Result<RankingRoundOutcome> {
        let q = env.next_query();
        let list = self
            .deployed_ranker()
            .rank_flat(env.queries()[q].features());
        let records = env.show(q, &list);
        let imp = ClickImpression::new(q, &records);
        self.total_clicks += imp.clicks.len();
        ranking_ips_update(&mut self.learned, &imp, &env.queries()[q], &self.cfg)?;
        let clicks = imp.clicks.len();
        self.impressions.push(imp);

        let t = self.t();
        let mut out = RankingRoundOutcome {
            t,
            query: q,
            clicks,
            eval_w: None,
            eval_d: None,
            deployed: false,
        };
        if !t.is_multiple_of(self.check_every) {
            return Ok(out);
        }
        let queries = env.queries().clone();
        let (sw, sw2) = RankingTermEvaluator::new(queries.len()).moments(
            &self.impressions,
            &queries,
            &self.learned,
        )?;
        let deployed = match &self.deployed {
            Deployed::Baseline => &self.baseline,
            Deployed::Snapshot(r) => r,
        };
        let (sd, sd2) = self.d_eval.moments(&self.impressions, &queries, deployed)?;
        let eval_w = self.finish(sw, sw2)?;
        let eval_d = self.finish(sd, sd2)?;
        out.eval_w = Some(eval_w);
        out.eval_d = Some(eval_d);
        if deployment_check(&eval_w, &eval_d) {
            self.deployed = Deployed::Snapshot(self.learned.clone());
            self.d_eval.clear();
            self.deployments.push(DeploymentRecord {
                t,
                eval_w,
                eval_d,
                policy: self.learned.clone(),
            });
            out.deployed = true;
        }
        Ok(out)
    }
}
