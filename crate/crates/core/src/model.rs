//! Domain types of the participation model and the three non-lifecycle
//! component relations: total cost, market innovation advantage and influence.
//!
//! Money is carried as `f64` millions of a single reference currency.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cost of participating in a standard: initial investment, labor and
/// membership, and research and development.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    #[serde(rename = "initial_investment_v")]
    pub initial_investment: f64,
    #[serde(rename = "labor_membership_l")]
    pub labor_membership: f64,
    #[serde(rename = "rnd_r")]
    pub rnd: f64,
}

impl CostBreakdown {
    pub fn new(initial_investment: f64, labor_membership: f64, rnd: f64) -> Self {
        Self { initial_investment, labor_membership, rnd }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("initial_investment_v", self.initial_investment),
            ("labor_membership_l", self.labor_membership),
            ("rnd_r", self.rnd),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation(format!("cost component {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Multiplies every component by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.initial_investment * factor, self.labor_membership * factor, self.rnd * factor)
    }
}

/// Total cost `V + L + R`.
pub fn total_cost(costs: &CostBreakdown) -> Result<f64> {
    costs.validate()?;
    Ok(costs.initial_investment + costs.labor_membership + costs.rnd)
}

/// Analyst-supplied changes in market coverage, supplier base and compliant
/// products, with the weights used to combine them. Scores may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketAdvantageDelta {
    #[serde(rename = "delta_market_coverage_mc")]
    pub market_coverage: f64,
    #[serde(rename = "delta_supplier_base_sb")]
    pub supplier_base: f64,
    #[serde(rename = "delta_compliant_products_cp")]
    pub compliant_products: f64,
    #[serde(default = "MarketAdvantageDelta::default_weights")]
    pub weights: [f64; 3],
}

impl MarketAdvantageDelta {
    pub fn new(market_coverage: f64, supplier_base: f64, compliant_products: f64) -> Self {
        Self { market_coverage, supplier_base, compliant_products, weights: Self::default_weights() }
    }

    pub fn with_weights(mut self, weights: [f64; 3]) -> Self {
        self.weights = weights;
        self
    }

    fn default_weights() -> [f64; 3] {
        [1.0, 1.0, 1.0]
    }

    fn scores(&self) -> [f64; 3] {
        [self.market_coverage, self.supplier_base, self.compliant_products]
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.scores().iter().find(|s| !s.is_finite()) {
            return Err(Error::Validation(format!("advantage score must be finite, got {s}")));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Validation(format!("advantage weights must be finite and >= 0, got {:?}", self.weights)));
        }
        if self.weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Validation("at least one advantage weight must be positive".into()));
        }
        Ok(())
    }
}

/// Weight-normalized combination `(w1·ΔMC + w2·ΔSB + w3·ΔCP) / (w1 + w2 + w3)`.
pub fn market_advantage_delta(adv: &MarketAdvantageDelta) -> Result<f64> {
    adv.validate()?;
    let weighted: f64 = adv.weights.iter().zip(adv.scores()).map(|(w, s)| w * s).sum();
    Ok(weighted / adv.weights.iter().sum::<f64>())
}

/// A single point of a penetration time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdoptionObservation {
    /// Years since the standard's inception.
    pub time_t: f64,
    /// Fraction of candidate firms that have adopted, in `[0, 1]`.
    pub penetration: f64,
}

impl AdoptionObservation {
    pub fn new(time_t: f64, penetration: f64) -> Self {
        Self { time_t, penetration }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.time_t.is_finite() || self.time_t < 0.0 {
            return Err(Error::Validation(format!("observation time must be finite and >= 0, got {}", self.time_t)));
        }
        if !(0.0..=1.0).contains(&self.penetration) {
            return Err(Error::Validation(format!("penetration must lie in [0, 1], got {}", self.penetration)));
        }
        Ok(())
    }
}

/// Checks that every observation is valid and times strictly increase.
pub fn validate_observations(observations: &[AdoptionObservation]) -> Result<()> {
    for obs in observations {
        obs.validate()?;
    }
    check_increasing(observations.iter().map(|o| o.time_t))
}

fn check_increasing(times: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    for t in times {
        if !t.is_finite() {
            return Err(Error::Validation(format!("time must be finite, got {t}")));
        }
        if let Some(p) = prev {
            if t <= p {
                return Err(Error::Validation(format!("times must be strictly increasing ({p} then {t})")));
            }
        }
        prev = Some(t);
    }
    Ok(())
}

/// Influence of a participant among `adopter_count` adopters: `1 / k`.
pub fn influence(adopter_count: u64) -> Result<f64> {
    if adopter_count == 0 {
        return Err(Error::Domain("adopter count must be >= 1".into()));
    }
    Ok(1.0 / adopter_count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfluencePoint {
    pub time_t: f64,
    pub adopter_count_k: u64,
    pub influence_i: f64,
}

/// Elementwise [`influence`] over `(time, adopter_count)` pairs.
pub fn influence_series(points: &[(f64, u64)]) -> Result<Vec<InfluencePoint>> {
    check_increasing(points.iter().map(|p| p.0))?;
    points
        .iter()
        .map(|&(time_t, k)| Ok(InfluencePoint { time_t, adopter_count_k: k, influence_i: influence(k)? }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecycleStage {
    Inception,
    Development,
    Growth,
    Maturity,
}

impl fmt::Display for LifecycleStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecycleStage::Inception => "inception",
            LifecycleStage::Development => "development",
            LifecycleStage::Growth => "growth",
            LifecycleStage::Maturity => "maturity",
        })
    }
}

/// The full input bundle describing one firm's participation question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub costs: CostBreakdown,
    pub advantage: MarketAdvantageDelta,
    pub observations: Vec<AdoptionObservation>,
    #[serde(rename = "success_probability_p")]
    pub success_probability: f64,
    pub lifecycle_stage: LifecycleStage,
    pub adopter_count_now: u64,
    pub opportunity_cost_coefficient: f64,
    pub currency_deflator: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.costs.validate()?;
        self.advantage.validate()?;
        validate_observations(&self.observations)?;
        if !(0.0..=1.0).contains(&self.success_probability) {
            return Err(Error::Validation(format!(
                "success probability must lie in [0, 1], got {}",
                self.success_probability
            )));
        }
        if self.adopter_count_now == 0 {
            return Err(Error::Validation("adopter_count_now must be >= 1".into()));
        }
        if !self.opportunity_cost_coefficient.is_finite() || self.opportunity_cost_coefficient < 0.0 {
            return Err(Error::Validation(format!(
                "opportunity cost coefficient must be finite and >= 0, got {}",
                self.opportunity_cost_coefficient
            )));
        }
        if !self.currency_deflator.is_finite() || self.currency_deflator <= 0.0 {
            return Err(Error::Validation(format!("currency deflator must be > 0, got {}", self.currency_deflator)));
        }
        Ok(())
    }
}
