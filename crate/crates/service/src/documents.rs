//! Response documents shared by the HTTP handlers and the command line.
//!
//! Both front ends serialize through these functions, so the bytes a client
//! receives as `payload` are the bytes `stdpart decide --format structured`
//! writes.

use serde::{Deserialize, Serialize};
use stdpart_core::gompertz::sample_curve;
use stdpart_core::{
    decide, fit_gompertz, generate_case_report, AdoptionObservation, AnalysisReport, CaseConfig, CaseRecord,
    DecisionConfig, DecisionOutcome, Error, FitConfig, FitResult, GompertzParams, Result, Scenario,
};

pub const DEFAULT_CURVE_SAMPLES: usize = 64;
pub const MAX_CURVE_SAMPLES: usize = 10_000;

/// Overrides applied on top of the default decision configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecideOptions {
    pub threshold_influence: Option<f64>,
    pub threshold_advantage: Option<f64>,
    pub seed: Option<u64>,
}

impl DecideOptions {
    pub fn config(&self) -> DecisionConfig {
        let mut config = DecisionConfig::default();
        if let Some(v) = self.threshold_influence {
            config.thresholds.influence = v;
        }
        if let Some(v) = self.threshold_advantage {
            config.thresholds.advantage = v;
        }
        if let Some(seed) = self.seed {
            config.fit.seed = seed;
        }
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub time_t: f64,
    pub penetration: f64,
}

fn curve_points(params: &GompertzParams, end: f64, count: usize) -> Result<Vec<CurvePoint>> {
    if count > MAX_CURVE_SAMPLES {
        return Err(Error::Validation(format!("at most {MAX_CURVE_SAMPLES} curve samples, got {count}")));
    }
    Ok(sample_curve(params, 0.0, end, count)?
        .into_iter()
        .map(|(time_t, penetration)| CurvePoint { time_t, penetration })
        .collect())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Parse(e.to_string()))
}

fn default_samples() -> usize {
    DEFAULT_CURVE_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    pub observations: Vec<AdoptionObservation>,
    #[serde(default)]
    pub config: FitConfig,
    /// Number of evenly spaced curve samples over `[0, last observation time]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub fit: FitResult,
    pub curve: Vec<CurvePoint>,
}

pub fn fit_document(request: &FitRequest) -> Result<String> {
    let fit = fit_gompertz(&request.observations, &request.config)?;
    let end = request.observations.last().map_or(0.0, |o| o.time_t);
    let curve = curve_points(&fit.params, end, request.samples)?;
    to_json(&FitDocument { fit, curve })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecideDocument {
    #[serde(flatten)]
    pub outcome: DecisionOutcome,
    /// Fitted curve over `[0, max(horizon, last observation)]`.
    pub curve_samples: Vec<CurvePoint>,
}

pub fn decide_outcome(scenario: &Scenario, options: &DecideOptions) -> Result<DecideDocument> {
    let outcome = decide(scenario, &options.config())?;
    let end = scenario.observations.last().map_or(outcome.horizon, |o| o.time_t.max(outcome.horizon));
    let curve_samples = curve_points(&outcome.curve, end, DEFAULT_CURVE_SAMPLES)?;
    Ok(DecideDocument { outcome, curve_samples })
}

pub fn decide_document(scenario: &Scenario, options: &DecideOptions) -> Result<String> {
    to_json(&decide_outcome(scenario, options)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDocument {
    pub case: CaseRecord,
    pub report: AnalysisReport,
}

pub const CASES: [&str; 1] = ["rbac"];

/// Bundled case by name; `None` for an unknown name.
pub fn case_record(name: &str) -> Option<CaseRecord> {
    match name {
        "rbac" => Some(CaseRecord::rbac()),
        _ => None,
    }
}

pub fn case_report(name: &str) -> Option<Result<CaseDocument>> {
    let case = case_record(name)?;
    Some(generate_case_report(&case, &CaseConfig::default()).map(|report| CaseDocument { case, report }))
}

pub fn case_document(name: &str) -> Option<Result<String>> {
    case_report(name).map(|doc| doc.and_then(|d| to_json(&d)))
}
