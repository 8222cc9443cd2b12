//! Decision trees with decision, chance and terminal nodes, evaluated by
//! expected-value rollback (backward induction).

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of chance-branch probabilities.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Decision { label: String, branches: Vec<ActionBranch> },
    Chance { label: String, branches: Vec<ChanceBranch> },
    Terminal { label: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBranch {
    pub action: String,
    pub node: Node,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceBranch {
    pub probability: f64,
    pub node: Node,
}

impl Node {
    pub fn terminal(label: impl Into<String>, value: f64) -> Self {
        Node::Terminal { label: label.into(), value }
    }

    pub fn chance(label: impl Into<String>, branches: impl IntoIterator<Item = (f64, Node)>) -> Self {
        Node::Chance {
            label: label.into(),
            branches: branches.into_iter().map(|(probability, node)| ChanceBranch { probability, node }).collect(),
        }
    }

    pub fn decision<S: Into<String>>(label: impl Into<String>, branches: impl IntoIterator<Item = (S, Node)>) -> Self {
        Node::Decision {
            label: label.into(),
            branches: branches.into_iter().map(|(action, node)| ActionBranch { action: action.into(), node }).collect(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Node::Decision { label, .. } | Node::Chance { label, .. } | Node::Terminal { label, .. } => label,
        }
    }

    /// Total number of nodes in the subtree.
    pub fn size(&self) -> usize {
        1 + match self {
            Node::Decision { branches, .. } => branches.iter().map(|b| b.node.size()).sum(),
            Node::Chance { branches, .. } => branches.iter().map(|b| b.node.size()).sum(),
            Node::Terminal { .. } => 0,
        }
    }

    /// Multiplies every terminal value by `factor`.
    pub fn scale_values(&self, factor: f64) -> Node {
        match self {
            Node::Terminal { label, value } => Node::Terminal { label: label.clone(), value: value * factor },
            Node::Decision { label, branches } => Node::Decision {
                label: label.clone(),
                branches: branches
                    .iter()
                    .map(|b| ActionBranch { action: b.action.clone(), node: b.node.scale_values(factor) })
                    .collect(),
            },
            Node::Chance { label, branches } => Node::Chance {
                label: label.clone(),
                branches: branches
                    .iter()
                    .map(|b| ChanceBranch { probability: b.probability, node: b.node.scale_values(factor) })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
}

impl DecisionTree {
    pub fn new(root: Node) -> Self {
        Self { root }
    }

    /// Checks probabilities, branch counts, finiteness and label uniqueness.
    ///
    /// Decision labels key the rollback policy, so they must be unique across
    /// the tree, and action labels must be unique within a decision node.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        validate_node(&self.root, &mut seen)
    }
}

fn validate_node<'a>(node: &'a Node, decision_labels: &mut HashSet<&'a str>) -> Result<()> {
    match node {
        Node::Terminal { label, value } => {
            if !value.is_finite() {
                return Err(Error::Validation(format!("terminal '{label}' has non-finite value {value}")));
            }
        }
        Node::Chance { label, branches } => {
            if branches.is_empty() {
                return Err(Error::Validation(format!("chance node '{label}' has no branches")));
            }
            for b in branches {
                if !(0.0..=1.0).contains(&b.probability) {
                    return Err(Error::Validation(format!(
                        "chance node '{label}' has probability {} outside [0, 1]",
                        b.probability
                    )));
                }
            }
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                return Err(Error::Validation(format!("chance node '{label}' probabilities sum to {total}, not 1")));
            }
            for b in branches {
                validate_node(&b.node, decision_labels)?;
            }
        }
        Node::Decision { label, branches } => {
            if branches.is_empty() {
                return Err(Error::Validation(format!("decision node '{label}' has no branches")));
            }
            if !decision_labels.insert(label) {
                return Err(Error::Validation(format!("decision label '{label}' is not unique")));
            }
            let mut actions = HashSet::new();
            for b in branches {
                if !actions.insert(b.action.as_str()) {
                    return Err(Error::Validation(format!("decision node '{label}' repeats action '{}'", b.action)));
                }
                validate_node(&b.node, decision_labels)?;
            }
        }
    }
    Ok(())
}

/// Preference among actions whose expected values tie exactly.
///
/// Earlier entries win. Actions not listed rank after all listed ones, in
/// branch order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBreak(pub Vec<String>);

impl TieBreak {
    pub fn new<S: Into<String>>(order: impl IntoIterator<Item = S>) -> Self {
        Self(order.into_iter().map(Into::into).collect())
    }

    fn rank(&self, action: &str, branch_index: usize) -> (usize, usize) {
        match self.0.iter().position(|a| a == action) {
            Some(i) => (0, i),
            None => (1, branch_index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnotatedNode {
    Decision { label: String, expected_value: f64, chosen: String, branches: Vec<AnnotatedActionBranch> },
    Chance { label: String, expected_value: f64, branches: Vec<AnnotatedChanceBranch> },
    Terminal { label: String, value: f64, expected_value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedActionBranch {
    pub action: String,
    pub node: AnnotatedNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedChanceBranch {
    pub probability: f64,
    pub node: AnnotatedNode,
}

impl AnnotatedNode {
    pub fn expected_value(&self) -> f64 {
        match self {
            AnnotatedNode::Decision { expected_value, .. }
            | AnnotatedNode::Chance { expected_value, .. }
            | AnnotatedNode::Terminal { expected_value, .. } => *expected_value,
        }
    }

    /// Expected value of each action at a decision node, in branch order.
    pub fn action_values(&self) -> Vec<(String, f64)> {
        match self {
            AnnotatedNode::Decision { branches, .. } => {
                branches.iter().map(|b| (b.action.clone(), b.node.expected_value())).collect()
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollbackResult {
    pub expected_value: f64,
    /// Chosen action for every decision node, keyed by node label.
    pub policy: BTreeMap<String, String>,
    pub annotated_tree: AnnotatedNode,
}

/// Evaluates the tree leaf-to-root: expectations at chance nodes, maxima at
/// decision nodes with exact ties resolved by `tie_break`.
pub fn rollback(tree: &DecisionTree, tie_break: &TieBreak) -> Result<RollbackResult> {
    tree.validate()?;
    let mut policy = BTreeMap::new();
    let annotated_tree = annotate(&tree.root, tie_break, &mut policy);
    Ok(RollbackResult { expected_value: annotated_tree.expected_value(), policy, annotated_tree })
}

fn annotate(node: &Node, tie_break: &TieBreak, policy: &mut BTreeMap<String, String>) -> AnnotatedNode {
    match node {
        Node::Terminal { label, value } => {
            AnnotatedNode::Terminal { label: label.clone(), value: *value, expected_value: *value }
        }
        Node::Chance { label, branches } => {
            let branches: Vec<AnnotatedChanceBranch> = branches
                .iter()
                .map(|b| AnnotatedChanceBranch { probability: b.probability, node: annotate(&b.node, tie_break, policy) })
                .collect();
            let expected_value = branches.iter().map(|b| b.probability * b.node.expected_value()).sum();
            AnnotatedNode::Chance { label: label.clone(), expected_value, branches }
        }
        Node::Decision { label, branches } => {
            let branches: Vec<AnnotatedActionBranch> = branches
                .iter()
                .map(|b| AnnotatedActionBranch { action: b.action.clone(), node: annotate(&b.node, tie_break, policy) })
                .collect();
            let best = branches
                .iter()
                .enumerate()
                .max_by(|(i, x), (j, y)| {
                    x.node
                        .expected_value()
                        .total_cmp(&y.node.expected_value())
                        // lower rank is preferred, so it must compare as greater
                        .then_with(|| tie_break.rank(&y.action, *j).cmp(&tie_break.rank(&x.action, *i)))
                })
                .map(|(_, b)| b)
                .expect("validated decision nodes have branches");
            let (chosen, expected_value) = (best.action.clone(), best.node.expected_value());
            policy.insert(label.clone(), chosen.clone());
            AnnotatedNode::Decision { label: label.clone(), expected_value, chosen, branches }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal() {
        let r = rollback(&DecisionTree::new(Node::terminal("leaf", 7.3)), &TieBreak::default()).unwrap();
        assert_eq!(r.expected_value, 7.3);
        assert!(r.policy.is_empty());
    }

    #[test]
    fn coin_flip() {
        let tree = DecisionTree::new(Node::chance("flip", [(0.5, Node::terminal("win", 10.0)), (0.5, Node::terminal("lose", -2.0))]));
        assert_eq!(rollback(&tree, &TieBreak::default()).unwrap().expected_value, 4.0);
    }

    #[test]
    fn decision_takes_maximum() {
        let tree = DecisionTree::new(Node::decision(
            "root",
            [
                ("safe", Node::terminal("s", 3.0)),
                ("gamble", Node::chance("g", [(0.5, Node::terminal("w", 10.0)), (0.5, Node::terminal("l", -2.0))])),
            ],
        ));
        let r = rollback(&tree, &TieBreak::default()).unwrap();
        assert_eq!(r.expected_value, 4.0);
        assert_eq!(r.policy["root"], "gamble");
        assert_eq!(r.annotated_tree.action_values(), vec![("safe".to_string(), 3.0), ("gamble".to_string(), 4.0)]);
    }

    #[test]
    fn ties_follow_ordering() {
        let tree = DecisionTree::new(Node::decision("root", [("a", Node::terminal("x", 1.0)), ("b", Node::terminal("y", 1.0))]));
        assert_eq!(rollback(&tree, &TieBreak::new(["b", "a"])).unwrap().policy["root"], "b");
        assert_eq!(rollback(&tree, &TieBreak::new(["a", "b"])).unwrap().policy["root"], "a");
        // unlisted actions fall back to branch order
        assert_eq!(rollback(&tree, &TieBreak::default()).unwrap().policy["root"], "a");
        assert_eq!(rollback(&tree, &TieBreak::new(["zzz"])).unwrap().policy["root"], "a");
    }

    #[test]
    fn off_path_decisions_are_resolved() {
        let tree = DecisionTree::new(Node::decision(
            "root",
            [
                ("stop", Node::terminal("s", 100.0)),
                ("go", Node::decision("later", [("x", Node::terminal("x", 1.0)), ("y", Node::terminal("y", 2.0))])),
            ],
        ));
        let r = rollback(&tree, &TieBreak::default()).unwrap();
        assert_eq!(r.policy.len(), 2);
        assert_eq!(r.policy["later"], "y");
    }

    #[test]
    fn invalid_trees() {
        let bad_sum = DecisionTree::new(Node::chance("c", [(0.5, Node::terminal("a", 1.0)), (0.4, Node::terminal("b", 1.0))]));
        assert!(matches!(rollback(&bad_sum, &TieBreak::default()), Err(Error::Validation(_))));
        let empty = DecisionTree::new(Node::Decision { label: "d".into(), branches: vec![] });
        assert!(matches!(rollback(&empty, &TieBreak::default()), Err(Error::Validation(_))));
        let negative = DecisionTree::new(Node::chance("c", [(1.5, Node::terminal("a", 1.0)), (-0.5, Node::terminal("b", 1.0))]));
        assert!(matches!(rollback(&negative, &TieBreak::default()), Err(Error::Validation(_))));
        let dup = DecisionTree::new(Node::decision(
            "d",
            [("a", Node::decision("d", [("x", Node::terminal("t", 0.0))])), ("b", Node::terminal("u", 0.0))],
        ));
        assert!(matches!(rollback(&dup, &TieBreak::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn tree_document_shape() {
        let tree = DecisionTree::new(Node::decision("root", [("go", Node::terminal("t", 1.5))]));
        let json = serde_json::to_string(&tree).unwrap();
        assert_eq!(
            json,
            r#"{"root":{"kind":"decision","label":"root","branches":[{"action":"go","node":{"kind":"terminal","label":"t","value":1.5}}]}}"#
        );
        let back: DecisionTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }
}
