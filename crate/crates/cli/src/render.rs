//! Plain-text renderings. Output is a pure function of the input document so
//! it can be compared against golden text.

use std::fmt::Write;

use stdpart_core::decision::AnnotatedNode;
use stdpart_core::{AdoptionObservation, FitResult, GompertzParams};
use stdpart_service::{CaseDocument, DecideDocument};

use crate::sweep::SweepRow;

fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e7) {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

fn params_block(out: &mut String, p: &GompertzParams) {
    let _ = writeln!(out, "  d (baseline)   {}", num(p.baseline));
    let _ = writeln!(out, "  a (scale)      {}", num(p.scale));
    let _ = writeln!(out, "  b (shape)      {}", num(p.shape));
    let _ = writeln!(out, "  c (rate)       {}", num(p.rate));
}

pub fn fit_report(observations: &[AdoptionObservation], fit: &FitResult) -> String {
    let mut out = String::new();
    let status = if fit.converged { "converged" } else { "NOT converged" };
    let _ = writeln!(out, "Gompertz fit: {} observations, {status} after {} iterations", observations.len(), fit.iterations);
    params_block(&mut out, &fit.params);
    let _ = writeln!(out, "  rmse           {}", num(fit.residual_rmse));
    let _ = writeln!(out);
    let _ = writeln!(out, "{:>10} {:>12} {:>12} {:>12}", "t", "observed", "fitted", "residual");
    for (o, r) in observations.iter().zip(&fit.residuals) {
        let _ = writeln!(out, "{:>10.3} {:>12.6} {:>12.6} {:>12.6}", o.time_t, o.penetration, o.penetration + r, r);
    }
    out
}

/// Box-drawing rendering of an annotated tree.
pub fn tree(root: &AnnotatedNode) -> String {
    fn node_line(node: &AnnotatedNode) -> String {
        match node {
            AnnotatedNode::Decision { label, expected_value, chosen, .. } => {
                format!("{label} [decision] EV {} -> {chosen}", num(*expected_value))
            }
            AnnotatedNode::Chance { label, expected_value, .. } => format!("{label} [chance] EV {}", num(*expected_value)),
            AnnotatedNode::Terminal { label, value, .. } => format!("{label} = {}", num(*value)),
        }
    }

    fn children(node: &AnnotatedNode) -> Vec<(String, &AnnotatedNode)> {
        match node {
            AnnotatedNode::Decision { branches, chosen, .. } => branches
                .iter()
                .map(|b| {
                    let mark = if &b.action == chosen { " (chosen)" } else { "" };
                    (format!("{}{mark}: ", b.action), &b.node)
                })
                .collect(),
            AnnotatedNode::Chance { branches, .. } => {
                branches.iter().map(|b| (format!("p={:.4}: ", b.probability), &b.node)).collect()
            }
            AnnotatedNode::Terminal { .. } => Vec::new(),
        }
    }

    fn walk(node: &AnnotatedNode, prefix: &str, out: &mut String) {
        let kids = children(node);
        for (i, (edge, child)) in kids.iter().enumerate() {
            let last = i + 1 == kids.len();
            let _ = writeln!(out, "{prefix}{}{edge}{}", if last { "└── " } else { "├── " }, node_line(child));
            walk(child, &format!("{prefix}{}", if last { "    " } else { "│   " }), out);
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "{}", node_line(root));
    walk(root, "", &mut out);
    out
}

pub fn decision(doc: &DecideDocument) -> String {
    let o = &doc.outcome;
    let r = &o.recommendation;
    let mut out = String::new();
    let _ = writeln!(out, "Scenario: {}", o.scenario);
    let _ = writeln!(out, "Recommendation: {} ({} participation)", r.action.label(), r.participation.label());
    let _ = writeln!(out, "Quadrant: {:?}", r.quadrant);
    let _ = writeln!(out, "Expected value: {}", num(r.expected_value));
    let _ = writeln!(
        out,
        "Influence {} (threshold {}), net advantage {} (threshold {})",
        num(r.influence_score),
        num(o.thresholds.influence),
        num(r.net_advantage),
        num(o.thresholds.advantage)
    );
    let _ = writeln!(
        out,
        "Total cost {}, projected advantage {} at t = {}",
        num(o.total_cost),
        num(o.projected_advantage),
        num(o.horizon)
    );
    if let Some(fit) = &o.fit {
        let _ = writeln!(out, "Curve fit rmse {} ({} iterations)", num(fit.residual_rmse), fit.iterations);
    }
    params_block(&mut out, &o.curve);
    let _ = writeln!(out);
    out.push_str(&tree(&o.rollback.annotated_tree));
    out
}

pub fn case(doc: &CaseDocument) -> String {
    let r = &doc.report;
    let mut out = String::new();
    let _ = writeln!(out, "{} ({}), inception {}", r.title, r.case, r.inception_year);
    let _ = writeln!(out, "Total participation cost: {}", num(r.total_cost));
    let _ = writeln!(
        out,
        "Developer cost savings: {} (cost ratio {}, quoted {}%)",
        num(r.cost_savings.savings),
        r.cost_savings.ratio_display,
        r.reported_cost_ratio_pct
    );
    let _ = writeln!(
        out,
        "Net benefit: {} nominal x {} deflator = {} (quoted {})",
        num(r.net_benefit.nominal),
        r.net_benefit.deflator,
        num(r.net_benefit.adjusted),
        r.net_benefit.reported_2021
    );
    let a = &r.acceleration;
    let _ = writeln!(
        out,
        "{}-year acceleration: gain {:.2}% at t = {}, mean {:.2}% (quoted growth {}%)",
        a.comparison.shift_years,
        a.gain_at_horizon_pct,
        a.comparison.horizon,
        a.mean_gain_pct,
        a.reported_growth_pct
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:>6} {:>6} {:>10} {:>10} {:>10}", "year", "t", "observed", "fitted", "influence");
    for (p, i) in r.fitted_points.iter().zip(&r.influence) {
        let _ = writeln!(
            out,
            "{:>6} {:>6} {:>10.4} {:>10.4} {:>10.4}",
            p.year, p.time_t, p.observed, p.fitted, i.influence_i
        );
    }
    let _ = writeln!(out, "rmse {}", num(r.fit.residual_rmse));
    let _ = writeln!(out);
    let d = &r.decision.recommendation;
    let _ = writeln!(out, "Recommendation: {} ({} participation), EV {}", d.action.label(), d.participation.label(), num(d.expected_value));
    out
}

pub fn sweep(parameter: &str, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let width = parameter.len().max(10);
    let _ = writeln!(
        out,
        "{:>width$} {:>10} {:>10} {:>12} {:>12} {:>12} {:>12}",
        parameter, "action", "level", "ev", "full", "moderate", "none"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>width$} {:>10} {:>10} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            num(r.value),
            r.action,
            r.participation,
            r.expected_value,
            r.full,
            r.moderate,
            r.none
        );
    }
    out
}
