//! Random decision trees and a brute-force pure-strategy oracle.
//!
//! Terminal values are small integers and chance probabilities are multiples
//! of 1/8, so every sum and product the rollback or the oracle forms is exact
//! in `f64` and the two can be compared with `==`.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stdpart_core::decision::{AnnotatedNode, Node};

pub const MAX_NODES: usize = 12;

/// A random tree with at most `max_nodes` nodes.
pub fn random_tree(seed: u64, max_nodes: usize) -> Node {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_label = 0usize;
    let budget = rng.random_range(1..=max_nodes);
    gen(&mut rng, budget, &mut next_label).0
}

fn gen(rng: &mut ChaCha8Rng, budget: usize, next_label: &mut usize) -> (Node, usize) {
    *next_label += 1;
    let id = *next_label;
    if budget < 2 || rng.random_bool(0.3) {
        return (Node::terminal(format!("t{id}"), rng.random_range(-20..=20) as f64), 1);
    }
    let decision = budget < 3 || rng.random_bool(0.5);
    let max_children = (budget - 1).min(3);
    let k = if decision { rng.random_range(1..=max_children) } else { rng.random_range(2..=max_children) };

    let mut remaining = budget - 1;
    let mut children = Vec::with_capacity(k);
    for i in 0..k {
        let cap = remaining - (k - i - 1);
        let child_budget = rng.random_range(1..=cap);
        let (child, used) = gen(rng, child_budget, next_label);
        remaining -= used;
        children.push(child);
    }
    let used = budget - remaining;
    let node = if decision {
        Node::decision(format!("d{id}"), children.into_iter().enumerate().map(|(i, c)| (format!("a{i}"), c)))
    } else {
        let mut eighths = vec![0u32; k];
        for _ in 0..8 {
            eighths[rng.random_range(0..k)] += 1;
        }
        Node::chance(format!("c{id}"), eighths.into_iter().map(|e| e as f64 / 8.0).zip(children))
    };
    (node, used)
}

fn decision_nodes<'a>(node: &'a Node, out: &mut Vec<(&'a str, Vec<&'a str>)>) {
    match node {
        Node::Terminal { .. } => {}
        Node::Chance { branches, .. } => branches.iter().for_each(|b| decision_nodes(&b.node, out)),
        Node::Decision { label, branches } => {
            out.push((label, branches.iter().map(|b| b.action.as_str()).collect()));
            branches.iter().for_each(|b| decision_nodes(&b.node, out));
        }
    }
}

/// Sum over every leaf reachable under `strategy` of path probability times value.
pub fn strategy_value(node: &Node, strategy: &BTreeMap<String, String>) -> f64 {
    fn walk(node: &Node, strategy: &BTreeMap<String, String>, reach: f64, total: &mut f64) {
        match node {
            Node::Terminal { value, .. } => *total += reach * value,
            Node::Chance { branches, .. } => {
                for b in branches {
                    walk(&b.node, strategy, reach * b.probability, total);
                }
            }
            Node::Decision { label, branches } => {
                let chosen = &strategy[label.as_str()];
                let b = branches.iter().find(|b| &b.action == chosen).expect("strategy names an existing action");
                walk(&b.node, strategy, reach, total);
            }
        }
    }
    let mut total = 0.0;
    walk(node, strategy, 1.0, &mut total);
    total
}

/// Best value over all pure strategies, by exhaustive enumeration.
pub fn brute_force_value(root: &Node) -> f64 {
    let mut nodes = Vec::new();
    decision_nodes(root, &mut nodes);
    let mut best = f64::NEG_INFINITY;
    let mut index = vec![0usize; nodes.len()];
    loop {
        let strategy: BTreeMap<String, String> =
            nodes.iter().zip(&index).map(|((label, actions), &i)| (label.to_string(), actions[i].to_string())).collect();
        best = best.max(strategy_value(root, &strategy));
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == nodes.len() {
                return best;
            }
            index[pos] += 1;
            if index[pos] < nodes[pos].1.len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// True when every decision node in the annotated tree has a strict maximum.
pub fn optimum_is_unique(node: &AnnotatedNode) -> bool {
    match node {
        AnnotatedNode::Terminal { .. } => true,
        AnnotatedNode::Chance { branches, .. } => branches.iter().all(|b| optimum_is_unique(&b.node)),
        AnnotatedNode::Decision { expected_value, branches, .. } => {
            branches.iter().filter(|b| b.node.expected_value() == *expected_value).count() == 1
                && branches.iter().all(|b| optimum_is_unique(&b.node))
        }
    }
}
