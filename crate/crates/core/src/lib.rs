//! Decision support for participation in standards development.
//!
//! The crate models a firm's participation question from three components
//! (cost, influence, market innovation advantage) and a lifecycle curve,
//! fits the curve to adoption data, evaluates a risk-bearing decision tree by
//! expected-value rollback and reproduces the RBAC case study.

pub mod decision;
pub mod engine;
pub mod error;
pub mod fit;
pub mod gompertz;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod rbac;

pub use error::{Error, Result};
pub use fit::{fit_gompertz, FitConfig, FitResult};
pub use gompertz::{counterfactual_shift, gompertz_value, time_to_level, GompertzParams};
pub use model::*;
pub use decision::{rollback, DecisionTree, Node, RollbackResult, TieBreak};
pub use engine::{
    build_standard_tree, classify_quadrant, decide, decide_with_params, Action, DecisionConfig, DecisionOutcome,
    Participation, Quadrant, Recommendation, Thresholds,
};
pub use rbac::{
    adjust_currency, build_rbac_scenario, cost_savings, generate_case_report, AnalysisReport, CaseConfig, CaseRecord,
};
