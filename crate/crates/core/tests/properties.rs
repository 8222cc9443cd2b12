use proptest::prelude::*;

use stdpart_core::decision::{rollback, DecisionTree, TieBreak};
use stdpart_core::engine::{build_standard_tree, classify_quadrant, Quadrant, Thresholds};
use stdpart_core::model::{
    influence, market_advantage_delta, total_cost, AdoptionObservation, CostBreakdown, LifecycleStage, MarketAdvantageDelta,
    Scenario,
};
use stdpart_core::rbac::{adjust_currency, cost_savings, CaseRecord};
use stdpart_core::{fit_gompertz, gompertz_value, time_to_level, FitConfig, GompertzParams};

#[path = "support/tree_oracle.rs"]
mod tree_oracle;

fn params() -> impl Strategy<Value = GompertzParams> {
    (0.0..2.0f64, 0.01..10.0f64, 0.001..0.999f64, 0.01..0.99f64)
        .prop_map(|(d, a, b, c)| GompertzParams::new(d, a, b, c).unwrap())
}

proptest! {
    #[test]
    fn cost_is_homogeneous(v in 0.0..100.0f64, l in 0.0..100.0f64, r in 0.0..100.0f64, lambda in 0.0..10.0f64) {
        let base = total_cost(&CostBreakdown::new(v, l, r)).unwrap();
        let scaled = total_cost(&CostBreakdown::new(v, l, r).scaled(lambda)).unwrap();
        prop_assert!((scaled - lambda * base).abs() <= 1e-12 * (1.0 + lambda * base));
    }

    #[test]
    fn influence_is_decreasing(k in 1u64..1_000_000) {
        prop_assert!(influence(k + 1).unwrap() < influence(k).unwrap());
        prop_assert!(influence(k).unwrap() <= 1.0);
    }

    #[test]
    fn advantage_bounds_and_scale_invariance(
        s in prop::array::uniform3(-10.0..10.0f64),
        w in prop::array::uniform3(0.0..5.0f64),
        lambda in 0.01..100.0f64,
    ) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let adv = MarketAdvantageDelta::new(s[0], s[1], s[2]).with_weights(w);
        let m = market_advantage_delta(&adv).unwrap();
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        let scaled = market_advantage_delta(&adv.with_weights(w.map(|x| x * lambda))).unwrap();
        prop_assert!((scaled - m).abs() < 1e-12 * (1.0 + m.abs()));
    }

    #[test]
    fn curve_is_strictly_increasing(p in params(), t1 in 0.0..30.0f64, dt in 0.01..5.0f64) {
        let (lo, hi) = (gompertz_value(&p, t1).unwrap(), gompertz_value(&p, t1 + dt).unwrap());
        prop_assert!(hi >= lo);
        // strict until the curve rounds to its asymptote
        if p.asymptote() - hi > 1e-9 * p.asymptote() {
            prop_assert!(hi > lo);
        }
    }

    #[test]
    fn curve_boundaries(p in params()) {
        let m0 = gompertz_value(&p, 0.0).unwrap();
        prop_assert!((m0 - (p.baseline + p.scale * p.shape)).abs() < 1e-12);
        // c^t < 1e-12
        let t = (1e-13f64).ln() / p.rate.ln();
        prop_assert!((gompertz_value(&p, t).unwrap() - (p.baseline + p.scale)).abs() < 1e-9);
    }

    #[test]
    fn smaller_rate_gives_larger_value(p in params(), c2 in 0.01..0.99f64, t in 0.01..30.0f64) {
        prop_assume!(c2 < p.rate);
        let faster = GompertzParams::new(p.baseline, p.scale, p.shape, c2).unwrap();
        prop_assert!(gompertz_value(&faster, t).unwrap() >= gompertz_value(&p, t).unwrap());
    }

    // The inverse is well conditioned where c^t·|ln b| stays well above machine
    // epsilon, which these ranges guarantee over t ∈ [0.01, 50].
    #[test]
    fn inverse_round_trip(
        d in 0.0..0.5f64, a in 0.5..5.0f64, b in 0.01..0.9f64, c in 0.8..0.99f64, t in 0.01..50.0f64,
    ) {
        let p = GompertzParams::new(d, a, b, c).unwrap();
        let back = time_to_level(&p, gompertz_value(&p, t).unwrap()).unwrap();
        prop_assert!((back - t).abs() < 1e-9, "t = {t}, back = {back}");
    }

    #[test]
    fn shifted_curve_dominates(p in params(), shift in 0.0..5.0f64, horizon in 0.5..40.0f64) {
        let c = stdpart_core::counterfactual_shift(&p, shift, horizon).unwrap();
        for pt in &c.points {
            prop_assert!(pt.shifted >= pt.unshifted);
        }
    }

    #[test]
    fn rollback_matches_enumeration(seed in any::<u64>()) {
        let root = tree_oracle::random_tree(seed, tree_oracle::MAX_NODES);
        prop_assert!(root.size() <= tree_oracle::MAX_NODES);
        let r = rollback(&DecisionTree::new(root.clone()), &TieBreak::default()).unwrap();
        prop_assert_eq!(r.expected_value, tree_oracle::brute_force_value(&root));
        // the returned policy attains the optimum
        prop_assert_eq!(tree_oracle::strategy_value(&root, &r.policy), r.expected_value);
    }

    #[test]
    fn rollback_scales_with_values(seed in any::<u64>(), lambda in 0.001..1000.0f64) {
        let root = tree_oracle::random_tree(seed, tree_oracle::MAX_NODES);
        let base = rollback(&DecisionTree::new(root.clone()), &TieBreak::default()).unwrap();
        let scaled = rollback(&DecisionTree::new(root.scale_values(lambda)), &TieBreak::default()).unwrap();
        prop_assert!((scaled.expected_value - lambda * base.expected_value).abs() <= 1e-9 * lambda.max(1.0) * (1.0 + base.expected_value.abs()));
        if tree_oracle::optimum_is_unique(&base.annotated_tree) {
            prop_assert_eq!(scaled.policy, base.policy);
        }
    }

    #[test]
    fn quadrants_partition_the_plane(i in -2.0..2.0f64, m in -100.0..100.0f64, ti in -1.0..1.0f64, tm in -10.0..10.0f64) {
        let th = Thresholds { influence: ti, advantage: tm };
        let q = classify_quadrant(i, m, th);
        let expected = match (i >= ti, m >= tm) {
            (true, true) => Quadrant::Full,
            (false, true) => Quadrant::Moderate,
            (true, false) => Quadrant::Minimal,
            (false, false) => Quadrant::None,
        };
        prop_assert_eq!(q, expected);
    }

    #[test]
    fn standard_tree_is_monotone_in_probability(
        p1 in 0.0..1.0f64, dp in 0.0..1.0f64, cost in 0.0..20.0f64, adv in 0.0..100.0f64, k in 1u64..20,
    ) {
        let p2 = (p1 + dp).min(1.0);
        let curve = GompertzParams::new(0.01, 0.6, 0.08, 0.75).unwrap();
        let values = |p: f64| {
            let s = Scenario {
                name: "m".into(),
                costs: CostBreakdown::new(cost, 0.0, 0.0),
                advantage: MarketAdvantageDelta::new(adv, adv, adv),
                observations: vec![AdoptionObservation::new(5.0, 0.3)],
                success_probability: p,
                lifecycle_stage: LifecycleStage::Growth,
                adopter_count_now: k,
                opportunity_cost_coefficient: 1.0,
                currency_deflator: 1.0,
            };
            let tree = build_standard_tree(&s, &curve, 5.0, 0.5).unwrap();
            rollback(&tree, &TieBreak::default()).unwrap().annotated_tree.action_values()
        };
        let (lo, hi) = (values(p1), values(p2));
        let slack = 1e-12 * (1.0 + cost + adv);
        prop_assert!(hi[0].1 >= lo[0].1 - slack);
        prop_assert!(hi[1].1 >= lo[1].1 - slack);
        prop_assert!(hi[2].1 <= lo[2].1 + slack);
    }

    #[test]
    fn savings_identity(with in 0.0..50.0f64, extra in 0.0..50.0f64) {
        let mut r = CaseRecord::rbac();
        r.metadata.developer_cost_with = with;
        r.metadata.developer_cost_without = with + extra;
        let s = cost_savings(&r).unwrap();
        let without = with + extra;
        prop_assert!((s.savings - without * (1.0 - s.ratio)).abs() < 1e-8_f64.max(1e-12 * without));
    }

    #[test]
    fn currency_is_linear(x in -100.0..100.0f64, y in -100.0..100.0f64, k in 0.01..10.0f64) {
        let lhs = adjust_currency(x + y, k).unwrap();
        let rhs = adjust_currency(x, k).unwrap() + adjust_currency(y, k).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fit_is_deterministic(seed in any::<u64>(), p in params()) {
        let obs: Vec<AdoptionObservation> = (0..8)
            .map(|t| AdoptionObservation::new(t as f64 * 1.5, gompertz_value(&p, t as f64 * 1.5).unwrap().min(1.0)))
            .collect();
        let cfg = FitConfig { seed, max_asymptote: None, ..FitConfig::default() };
        let a = fit_gompertz(&obs, &cfg);
        let b = fit_gompertz(&obs, &cfg);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
