//! The participation decision: builds the standard three-action tree from a
//! scenario, rolls it back, and places the scenario in the participation
//! matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decision::{rollback, AnnotatedNode, DecisionTree, Node, RollbackResult, TieBreak};
use crate::error::{Error, Result};
use crate::fit::{fit_gompertz, FitConfig, FitResult};
use crate::gompertz::{gompertz_value, GompertzParams};
use crate::model::{influence, market_advantage_delta, total_cost, LifecycleStage, Scenario};

/// Level of participation chosen at the root of the standard tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Participation {
    Full,
    Moderate,
    None,
}

impl Participation {
    pub const ALL: [Participation; 3] = [Participation::Full, Participation::Moderate, Participation::None];

    pub fn label(self) -> &'static str {
        match self {
            Participation::Full => "full",
            Participation::Moderate => "moderate",
            Participation::None => "none",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == label)
    }
}

impl fmt::Display for Participation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Lifecycle-aware action vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Invest,
    Increase,
    Continue,
    Exit,
    Reject,
}

impl Action {
    /// Translates a participation level into the action for a lifecycle stage.
    pub fn for_stage(participation: Participation, stage: LifecycleStage) -> Self {
        use LifecycleStage::*;
        match (participation, stage) {
            (Participation::Full, Inception) => Action::Invest,
            (Participation::Full, Development | Growth) => Action::Increase,
            (Participation::Full, Maturity) => Action::Continue,
            (Participation::Moderate, Inception) => Action::Invest,
            (Participation::Moderate, Development | Growth | Maturity) => Action::Continue,
            (Participation::None, Inception) => Action::Reject,
            (Participation::None, _) => Action::Exit,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Action::Invest => "invest",
            Action::Increase => "increase",
            Action::Continue => "continue",
            Action::Exit => "exit",
            Action::Reject => "reject",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Cell of the participation matrix (influence on one axis, net advantage on the other).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrant {
    Full,
    Moderate,
    Minimal,
    None,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrant::Full => "full",
            Quadrant::Moderate => "moderate",
            Quadrant::Minimal => "minimal",
            Quadrant::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub influence: f64,
    pub advantage: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { influence: 0.5, advantage: 0.0 }
    }
}

/// Places a scenario in the participation matrix. Values on a threshold count
/// as high.
pub fn classify_quadrant(influence_score: f64, net_advantage: f64, thresholds: Thresholds) -> Quadrant {
    let high_influence = influence_score >= thresholds.influence;
    let high_advantage = net_advantage >= thresholds.advantage;
    match (high_influence, high_advantage) {
        (true, true) => Quadrant::Full,
        (false, true) => Quadrant::Moderate,
        (true, false) => Quadrant::Minimal,
        (false, false) => Quadrant::None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionConfig {
    pub fit: FitConfig,
    /// Years since inception at which the advantage is projected. Defaults to
    /// the last observation time.
    pub horizon: Option<f64>,
    /// Fraction of cost and advantage borne by moderate participation.
    pub moderate_scale: f64,
    pub thresholds: Thresholds,
    pub tie_break: TieBreak,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            horizon: None,
            moderate_scale: 0.5,
            thresholds: Thresholds::default(),
            tie_break: TieBreak::new(["none", "moderate", "full"]),
        }
    }
}

impl DecisionConfig {
    fn validate(&self) -> Result<()> {
        if !(self.moderate_scale.is_finite() && self.moderate_scale > 0.0 && self.moderate_scale <= 1.0) {
            return Err(Error::Validation(format!("moderate scale must lie in (0, 1], got {}", self.moderate_scale)));
        }
        if !(self.thresholds.influence.is_finite() && self.thresholds.advantage.is_finite()) {
            return Err(Error::Validation("quadrant thresholds must be finite".into()));
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::Validation(format!("horizon must be finite and >= 0, got {h}")));
            }
        }
        Ok(())
    }
}

/// Monetary value of the advantage at the horizon: the combined advantage
/// score, read as the value at full curve level, times `M(horizon)`.
pub fn projected_advantage(scenario: &Scenario, fitted: &GompertzParams, horizon: f64) -> Result<f64> {
    Ok(market_advantage_delta(&scenario.advantage)? * gompertz_value(fitted, horizon)?)
}

/// Builds the single-stage tree: full and moderate participation each face a
/// success/failure chance node; abstaining carries the forgone share of the
/// advantage as an opportunity cost.
pub fn build_standard_tree(scenario: &Scenario, fitted: &GompertzParams, horizon: f64, moderate_scale: f64) -> Result<DecisionTree> {
    scenario.validate()?;
    let advantage = projected_advantage(scenario, fitted, horizon)?;
    let cost = total_cost(&scenario.costs)?;
    let p = scenario.success_probability;

    let participate = |level: Participation, scale: f64| {
        let name = level.label();
        Node::chance(
            format!("{name}: outcome"),
            [
                (p, Node::terminal(format!("{name}: success"), scale * advantage - scale * cost)),
                (1.0 - p, Node::terminal(format!("{name}: failure"), -(scale * cost) + 0.0)),
            ],
        )
    };
    let share = 1.0 / (scenario.adopter_count_now as f64 + 1.0);
    // + 0.0 folds a negative zero into zero
    let abstain = -(scenario.opportunity_cost_coefficient * p * advantage * share) + 0.0;

    Ok(DecisionTree::new(Node::decision(
        "participation",
        [
            (Participation::Full.label(), participate(Participation::Full, 1.0)),
            (Participation::Moderate.label(), participate(Participation::Moderate, moderate_scale)),
            (Participation::None.label(), Node::terminal("none: opportunity cost", abstain)),
        ],
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub action: Action,
    pub participation: Participation,
    pub quadrant: Quadrant,
    pub expected_value: f64,
    pub influence_score: f64,
    /// Expected net advantage of full participation: `p·A - C`.
    pub net_advantage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub participation: Participation,
    pub expected_value: f64,
}

/// Everything `decide` produced, in a stable field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub scenario: String,
    pub recommendation: Recommendation,
    pub action_values: Vec<ActionValue>,
    pub horizon: f64,
    pub projected_advantage: f64,
    pub total_cost: f64,
    pub thresholds: Thresholds,
    pub curve: GompertzParams,
    /// Present when the curve was fitted rather than supplied.
    pub fit: Option<FitResult>,
    pub rollback: RollbackResult,
}

/// Full pipeline: fit the lifecycle curve, then [`decide_with_params`].
pub fn decide(scenario: &Scenario, config: &DecisionConfig) -> Result<DecisionOutcome> {
    scenario.validate()?;
    config.validate()?;
    let fit = fit_gompertz(&scenario.observations, &config.fit)?;
    let mut outcome = decide_with_params(scenario, &fit.params, config)?;
    outcome.fit = Some(fit);
    Ok(outcome)
}

/// Decision pipeline for an already known lifecycle curve.
pub fn decide_with_params(scenario: &Scenario, params: &GompertzParams, config: &DecisionConfig) -> Result<DecisionOutcome> {
    scenario.validate()?;
    config.validate()?;
    params.validate()?;
    let horizon = match (config.horizon, scenario.observations.last()) {
        (Some(h), _) => h,
        (None, Some(last)) => last.time_t,
        (None, None) => return Err(Error::Validation("no horizon given and no observations to default it from".into())),
    };

    let tree = build_standard_tree(scenario, params, horizon, config.moderate_scale)?;
    let rollback = rollback(&tree, &config.tie_break)?;
    let chosen = rollback.policy.get("participation").and_then(|a| Participation::from_label(a));
    let participation = chosen.ok_or_else(|| Error::Validation("rollback produced no root action".into()))?;

    let advantage = projected_advantage(scenario, params, horizon)?;
    let cost = total_cost(&scenario.costs)?;
    let influence_score = influence(scenario.adopter_count_now)?;
    let net_advantage = scenario.success_probability * advantage - cost;

    let action_values = action_values(&rollback.annotated_tree);
    let recommendation = Recommendation {
        action: Action::for_stage(participation, scenario.lifecycle_stage),
        participation,
        quadrant: classify_quadrant(influence_score, net_advantage, config.thresholds),
        expected_value: rollback.expected_value,
        influence_score,
        net_advantage,
    };
    Ok(DecisionOutcome {
        scenario: scenario.name.clone(),
        recommendation,
        action_values,
        horizon,
        projected_advantage: advantage,
        total_cost: cost,
        thresholds: config.thresholds,
        curve: *params,
        fit: None,
        rollback,
    })
}

fn action_values(root: &AnnotatedNode) -> Vec<ActionValue> {
    root.action_values()
        .into_iter()
        .filter_map(|(label, expected_value)| {
            Participation::from_label(&label).map(|participation| ActionValue { participation, expected_value })
        })
        .collect()
}
