//! One-parameter what-if sweeps over a scenario.

use std::str::FromStr;

use serde::Serialize;
use stdpart_core::{decide, Error, Participation, Result, Scenario};
use stdpart_service::DecideOptions;

pub const MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Probability,
    Investment,
    Labor,
    Research,
    OpportunityCost,
    AdopterCount,
}

impl SweepParameter {
    pub const NAMES: [&'static str; 6] = ["p", "V", "L", "R", "opportunity_cost_coefficient", "adopter_count_now"];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Probability => "p",
            SweepParameter::Investment => "V",
            SweepParameter::Labor => "L",
            SweepParameter::Research => "R",
            SweepParameter::OpportunityCost => "opportunity_cost_coefficient",
            SweepParameter::AdopterCount => "adopter_count_now",
        }
    }

    /// Copy of `scenario` with this parameter set to `value`.
    pub fn apply(self, scenario: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = scenario.clone();
        match self {
            SweepParameter::Probability => s.success_probability = value,
            SweepParameter::Investment => s.costs.initial_investment = value,
            SweepParameter::Labor => s.costs.labor_membership = value,
            SweepParameter::Research => s.costs.rnd = value,
            SweepParameter::OpportunityCost => s.opportunity_cost_coefficient = value,
            SweepParameter::AdopterCount => {
                if !(value.fract() == 0.0 && value >= 0.0 && value <= u64::MAX as f64) {
                    return Err(Error::Validation(format!("adopter_count_now must be a whole number, got {value}")));
                }
                s.adopter_count_now = value as u64;
            }
        }
        Ok(s)
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "p" => SweepParameter::Probability,
            "V" => SweepParameter::Investment,
            "L" => SweepParameter::Labor,
            "R" => SweepParameter::Research,
            "opportunity_cost_coefficient" => SweepParameter::OpportunityCost,
            "adopter_count_now" => SweepParameter::AdopterCount,
            other => {
                return Err(Error::Validation(format!(
                    "unknown sweep parameter '{other}' (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

/// `steps` evenly spaced values from `from` to `to`, in that order.
pub fn sweep_points(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(Error::Validation("sweep range must be finite".into()));
    }
    if steps == 0 || steps > MAX_STEPS {
        return Err(Error::Validation(format!("steps must lie in 1..={MAX_STEPS}, got {steps}")));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| if i + 1 == steps { to } else { from + (to - from) * i as f64 / (steps - 1) as f64 })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub action: &'static str,
    pub participation: &'static str,
    pub expected_value: f64,
    pub full: f64,
    pub moderate: f64,
    pub none: f64,
}

pub fn run_sweep(scenario: &Scenario, parameter: SweepParameter, values: &[f64], options: &DecideOptions) -> Result<Vec<SweepRow>> {
    let config = options.config();
    values
        .iter()
        .map(|&value| {
            let outcome = decide(&parameter.apply(scenario, value)?, &config)?;
            let ev = |p: Participation| {
                outcome.action_values.iter().find(|a| a.participation == p).map_or(f64::NAN, |a| a.expected_value)
            };
            Ok(SweepRow {
                value,
                action: outcome.recommendation.action.label(),
                participation: outcome.recommendation.participation.label(),
                expected_value: outcome.recommendation.expected_value,
                full: ev(Participation::Full),
                moderate: ev(Participation::Moderate),
                none: ev(Participation::None),
            })
        })
        .collect()
}
