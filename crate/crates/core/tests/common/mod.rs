//! Random rules, cases and trees shared by the property and acceptance tests.
#![allow(dead_code)]

use advice_loop_core::advice::{Comparator, Conclusion, Literal, NodeId, Predicate, RdrTree, Rule};
use advice_loop_core::env::driving::{self, SdcObservation, OBSERVATION_COUNT, SENSOR_NAMES};
use advice_loop_core::{ActionId, Case, StateId};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const COMPARATORS: [Comparator; 6] = [
    Comparator::Lt,
    Comparator::Le,
    Comparator::Gt,
    Comparator::Ge,
    Comparator::Eq,
    Comparator::Ne,
];

/// Legal driving velocities, so equality tests can hit.
pub const VELOCITIES: [f64; 9] = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

pub fn random_case<R: Rng>(rng: &mut R) -> Case {
    let id = rng.random_range(0..OBSERVATION_COUNT);
    SdcObservation::decode(StateId(id)).unwrap().case(&driving::schema())
}

pub fn random_predicate<R: Rng>(rng: &mut R) -> Predicate {
    if rng.random_bool(0.6) {
        let name = SENSOR_NAMES.choose(rng).unwrap();
        let cmp = if rng.random_bool(0.5) { Comparator::Eq } else { Comparator::Ne };
        Predicate::new(name, cmp, Literal::Bool(rng.random_bool(0.5)))
    } else {
        let cmp = *COMPARATORS.choose(rng).unwrap();
        Predicate::new("velocity", cmp, Literal::Real(*VELOCITIES.choose(rng).unwrap()))
    }
}

pub fn random_rule<R: Rng>(rng: &mut R) -> Rule {
    let terms = rng.random_range(1..=3);
    Rule::AnyOf(
        (0..terms)
            .map(|_| (0..rng.random_range(1..=3)).map(|_| random_predicate(rng)).collect())
            .collect(),
    )
}

/// A predicate that holds on `case`, built from one of its features.
pub fn predicate_true_on<R: Rng>(case: &Case, rng: &mut R) -> Predicate {
    loop {
        let p = random_predicate(rng);
        if p.eval(case).unwrap() {
            return p;
        }
    }
}

/// A conjunction of one to three predicates that all hold on `case`.
pub fn rule_true_on<R: Rng>(case: &Case, rng: &mut R) -> Rule {
    let n = rng.random_range(1..=3);
    Rule::all((0..n).map(|_| predicate_true_on(case, rng)).collect())
}

pub fn random_conclusion<R: Rng>(rng: &mut R) -> Conclusion {
    Conclusion::Recommend(ActionId(rng.random_range(0..5)))
}

/// Arbitrary tree shape built with `attach`, at most `max_depth` below the
/// root and `max_nodes` in total.
pub fn random_tree<R: Rng>(rng: &mut R, max_depth: usize, max_nodes: usize) -> RdrTree {
    let mut tree = RdrTree::new();
    let mut frontier = vec![(NodeId::ROOT, 0usize)];
    while let Some((node, depth)) = frontier.pop() {
        if depth >= max_depth {
            continue;
        }
        for branch in [true, false] {
            if tree.len() >= max_nodes || !rng.random_bool(0.6) {
                continue;
            }
            let child = tree
                .attach(node, branch, random_rule(rng), random_conclusion(rng), None)
                .unwrap();
            frontier.push((child, depth + 1));
        }
    }
    tree
}

/// Every root-to-leaf path as `(node, branch taken)` steps.
pub fn enumerate_paths(tree: &RdrTree) -> Vec<Vec<(NodeId, bool)>> {
    fn walk(tree: &RdrTree, node: NodeId, prefix: &mut Vec<(NodeId, bool)>, out: &mut Vec<Vec<(NodeId, bool)>>) {
        for branch in [true, false] {
            prefix.push((node, branch));
            match tree.node(node).unwrap().child(branch) {
                Some(next) => walk(tree, next, prefix, out),
                None => out.push(prefix.clone()),
            }
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    walk(tree, NodeId::ROOT, &mut Vec::new(), &mut out);
    out
}

/// Conclusion of the single path consistent with `case`: the last node on
/// it whose rule held.
pub fn oracle_conclusion(tree: &RdrTree, paths: &[Vec<(NodeId, bool)>], case: &Case) -> Conclusion {
    let consistent: Vec<&Vec<(NodeId, bool)>> = paths
        .iter()
        .filter(|path| {
            path.iter()
                .all(|(n, b)| tree.node(*n).unwrap().rule.eval(case).unwrap() == *b)
        })
        .collect();
    assert_eq!(consistent.len(), 1, "exactly one path must match");
    let last_true = consistent[0]
        .iter()
        .rev()
        .find(|(_, b)| *b)
        .map(|(n, _)| *n)
        .unwrap_or(NodeId::ROOT);
    tree.node(last_true).unwrap().conclusion
}
