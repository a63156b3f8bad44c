//! Comparison learners. Each one pairs a query criterion with a
//! recommendation rule and shares the budget gate with CAMS:
//!
//! | name  | query                          | recommendation            |
//! |-------|--------------------------------|---------------------------|
//! | rs    | fixed `B/T`                    | FTL                       |
//! | mp    | variance, floor `sqrt(ln k/t)` | exponential weights       |
//! | qbc   | vote entropy                   | FTL                       |
//! | iwal  | survivor disagreement          | FTL over survivors        |
//! | cqbc  | vote entropy                   | reward x advice product   |
//! | ciwal | survivor disagreement          | reward x advice product   |
//! | oracle| CAMS rule on its own row       | hindsight-best policy     |

mod contextual;
mod ftl;
mod iwal;
mod oracle;
mod query;

pub use contextual::{contextual_pick, contextual_recommend, ContextualScoreState};
pub use ftl::{ftl_recommend, FtlState};
pub use iwal::{iwal_query, rejection_threshold, IwalState, DEFAULT_C0};
pub use oracle::{greedy_follow_loss, oracle_policy, policy_follow_losses, OracleLearner};
pub use query::{mp_query_probability, mp_rate, mp_variance, qbc_vote_entropy, rs_query};

use rand_chacha::ChaCha8Rng;

use crate::cams::policy_weights;
use crate::domain::RoundRecord;
use crate::error::{Error, Result};
use crate::learner::{loss_of, Learner, QueryBudget, RoundOutcome};
use crate::seed::rng_from_seed;
use crate::select;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Rs,
    Mp,
    Qbc,
    Iwal,
    Cqbc,
    Ciwal,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Rs => "rs",
            BaselineKind::Mp => "mp",
            BaselineKind::Qbc => "qbc",
            BaselineKind::Iwal => "iwal",
            BaselineKind::Cqbc => "cqbc",
            BaselineKind::Ciwal => "ciwal",
        }
    }
}

#[derive(Debug, Clone)]
enum Recommender {
    Ftl(FtlState),
    /// Importance-weighted cumulative model losses.
    ModelPicker(Vec<f64>),
    Contextual(ContextualScoreState),
}

#[derive(Debug, Clone)]
enum QueryCriterion {
    Fixed(f64),
    Variance,
    VoteEntropy,
    Iwal(IwalState),
}

#[derive(Debug, Clone)]
pub struct BaselineLearner {
    kind: BaselineKind,
    classes: usize,
    models: usize,
    policies: usize,
    recommender: Recommender,
    query: QueryCriterion,
    budget: QueryBudget,
    round: usize,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub horizon: usize,
    pub budget: usize,
    pub iwal_c0: f64,
    pub seed: u64,
}

impl BaselineLearner {
    pub fn new(kind: BaselineKind, classes: usize, models: usize, policies: usize, params: BaselineParams) -> Result<Self> {
        if classes < 2 || models < 2 {
            return Err(Error::Config(format!(
                "need at least 2 classes and 2 models (got c = {classes}, k = {models})"
            )));
        }
        if !(params.iwal_c0.is_finite() && params.iwal_c0 >= 0.0) {
            return Err(Error::Config(format!("iwal c0 = {} must be non-negative", params.iwal_c0)));
        }
        let recommender = match kind {
            BaselineKind::Rs | BaselineKind::Qbc | BaselineKind::Iwal => Recommender::Ftl(FtlState::new(models)),
            BaselineKind::Mp => Recommender::ModelPicker(vec![0.0; models]),
            BaselineKind::Cqbc | BaselineKind::Ciwal => {
                Recommender::Contextual(ContextualScoreState::new(models, policies))
            }
        };
        let query = match kind {
            BaselineKind::Rs => QueryCriterion::Fixed(rs_query(params.budget, params.horizon)),
            BaselineKind::Mp => QueryCriterion::Variance,
            BaselineKind::Qbc | BaselineKind::Cqbc => QueryCriterion::VoteEntropy,
            BaselineKind::Iwal | BaselineKind::Ciwal => QueryCriterion::Iwal(IwalState::new(models, params.iwal_c0)),
        };
        Ok(Self {
            kind,
            classes,
            models,
            policies,
            recommender,
            query,
            budget: QueryBudget::new(params.budget),
            round: 0,
            rng: rng_from_seed(params.seed),
        })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    /// Surviving-model mask for the IWAL-family learners.
    pub fn iwal_state(&self) -> Option<&IwalState> {
        match &self.query {
            QueryCriterion::Iwal(s) => Some(s),
            _ => None,
        }
    }

    fn mp_distribution(losses: &[f64], t: usize, models: usize) -> Result<Vec<f64>> {
        policy_weights(losses, mp_rate(t, models)).map(|w| w.weights)
    }
}

impl Learner for BaselineLearner {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn step(&mut self, record: &RoundRecord) -> Result<RoundOutcome> {
        record.validate(self.classes, self.models, self.policies)?;
        let t = self.round + 1;
        if record.round_index != t {
            return Err(Error::RoundOutOfOrder {
                expected: t,
                found: record.round_index,
            });
        }

        let mut mp_w = None;
        let chosen = match &self.recommender {
            Recommender::Ftl(state) => match &self.query {
                QueryCriterion::Iwal(iwal) => ftl::ftl_recommend_among(state, &iwal.surviving, &mut self.rng),
                _ => ftl_recommend(state, &mut self.rng),
            },
            Recommender::ModelPicker(losses) => {
                let w = Self::mp_distribution(losses, t, self.models)?;
                let j = select::argmax(&w, &mut self.rng);
                mp_w = Some(w);
                j
            }
            Recommender::Contextual(state) => contextual_recommend(state, &record.advice, t, &mut self.rng)?,
        };

        let raw_q = match &self.query {
            QueryCriterion::Fixed(q) => *q,
            QueryCriterion::Variance => {
                let w = match mp_w {
                    Some(w) => w,
                    None => match &self.recommender {
                        Recommender::ModelPicker(losses) => Self::mp_distribution(losses, t, self.models)?,
                        _ => vec![1.0 / self.models as f64; self.models],
                    },
                };
                mp_query_probability(mp_variance(&record.predictions, &w, self.classes), t, self.models)
            }
            QueryCriterion::VoteEntropy => qbc_vote_entropy(&record.predictions, self.classes),
            QueryCriterion::Iwal(state) => iwal_query(state, &record.predictions),
        };
        let q = self.budget.effective(raw_q);
        let queried = self.budget.flip(q, &mut self.rng);

        if queried {
            let losses = record.losses();
            match &mut self.recommender {
                Recommender::Ftl(state) => state.observe(&losses),
                Recommender::ModelPicker(cum) => {
                    for (c, l) in cum.iter_mut().zip(&losses) {
                        *c += l / q;
                    }
                }
                Recommender::Contextual(state) => state.observe(&losses, &record.advice, q),
            }
            if let QueryCriterion::Iwal(state) = &mut self.query {
                state.observe(&losses, q);
                let threshold = rejection_threshold(state.c0, t);
                state.prune(t, threshold);
            }
        }
        self.round = t;

        Ok(RoundOutcome {
            chosen_model: chosen,
            queried,
            query_prob: q,
            learner_loss: loss_of(&record.predictions, chosen, record.true_label),
            policy_weights_snapshot: None,
        })
    }

    fn cost_spent(&self) -> usize {
        self.budget.spent()
    }

    fn set_query_scale(&mut self, scale: f64) {
        self.budget.set_scale(scale);
    }
}
