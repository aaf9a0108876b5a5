mod common;

use advice_loop_core::advice::format::{from_json, from_text, to_json, to_text};
use advice_loop_core::advice::{parse_rule, EvalAdviceStore, RdrError, Rule, StateAdviceStore};
use advice_loop_core::env::ActionSpace;
use advice_loop_core::rl::{epsilon_greedy, ppr_select, PprConfig, QTable};
use advice_loop_core::rng::seeded;
use advice_loop_core::{ActionId, StateId};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::*;

proptest! {
    #[test]
    fn printed_rules_parse_back(seed in any::<u64>()) {
        let rule = random_rule(&mut seeded(seed));
        let text = rule.to_string();
        let back = parse_rule(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        let mut rng = seeded(seed ^ 1);
        for _ in 0..20 {
            let case = random_case(&mut rng);
            prop_assert_eq!(back.eval(&case).unwrap(), rule.eval(&case).unwrap());
        }
    }

    #[test]
    fn real_literals_survive_printing(v in -1e6f64..1e6) {
        let rule = parse_rule(&format!("velocity < {v}")).unwrap();
        let again = parse_rule(&rule.to_string()).unwrap();
        prop_assert_eq!(again, rule);
    }

    #[test]
    fn tree_text_and_json_round_trip(seed in any::<u64>()) {
        let tree = random_tree(&mut seeded(seed), 4, 20);
        let actions = ActionSpace::DRIVING;
        let text = to_text(&tree, &actions);
        let from_t = from_text(&text, &actions).unwrap();
        prop_assert_eq!(to_text(&from_t, &actions), text);
        let json = to_json(&tree, &actions);
        let from_j = from_json(&json, &actions).unwrap();
        prop_assert_eq!(to_json(&from_j, &actions), json);
        let mut rng = seeded(seed ^ 2);
        for _ in 0..20 {
            let case = random_case(&mut rng);
            let want = tree.classify(&case).unwrap().conclusion;
            prop_assert_eq!(from_t.classify(&case).unwrap().conclusion, want);
            prop_assert_eq!(from_j.classify(&case).unwrap().conclusion, want);
        }
    }

    #[test]
    fn stores_keep_the_first_advice(writes in prop::collection::vec((0usize..20, 0usize..3, -2.0f64..2.0), 1..60)) {
        let mut states = StateAdviceStore::new();
        let mut evals = EvalAdviceStore::new();
        let mut first_action = std::collections::HashMap::new();
        let mut first_eval = std::collections::HashMap::new();
        for (s, a, r) in writes {
            let new_state = !first_action.contains_key(&s);
            prop_assert_eq!(states.store(StateId(s), ActionId(a)), new_state);
            first_action.entry(s).or_insert(a);
            let new_pair = !first_eval.contains_key(&(s, a));
            prop_assert_eq!(evals.store(StateId(s), ActionId(a), r), new_pair);
            first_eval.entry((s, a)).or_insert(r);
        }
        for (s, a) in &first_action {
            prop_assert_eq!(states.recall(StateId(*s)), Some(ActionId(*a)));
        }
        for ((s, a), r) in &first_eval {
            prop_assert_eq!(evals.recall(StateId(*s), ActionId(*a)), Some(*r));
        }
        prop_assert_eq!(states.len(), first_action.len());
    }

    #[test]
    fn greedy_choice_ignores_a_constant_shift(
        row in prop::collection::vec(prop::sample::select(vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0]), 5),
        shift in prop::sample::select(vec![-8.0, -1.0, 0.25, 3.0, 16.0]),
    ) {
        let mut q = QTable::new(1, 5);
        let mut shifted = QTable::new(1, 5);
        for (a, v) in row.iter().enumerate() {
            q.set(StateId(0), ActionId(a), *v).unwrap();
            shifted.set(StateId(0), ActionId(a), v + shift).unwrap();
        }
        prop_assert_eq!(q.argmax_set(StateId(0)).unwrap(), shifted.argmax_set(StateId(0)).unwrap());
    }

    #[test]
    fn reuse_probability_never_rises(decay in 0.0f64..0.5, floor in 0.0f64..0.5, multiplicative in any::<bool>()) {
        let config = PprConfig {
            decay,
            floor,
            decay_kind: if multiplicative {
                advice_loop_core::rl::DecayKind::Multiplicative
            } else {
                advice_loop_core::rl::DecayKind::Subtractive
            },
            ..PprConfig::default()
        };
        let mut state = config.initial_state();
        let mut last = state.p_reuse;
        for _ in 0..50 {
            state.decay();
            prop_assert!(state.p_reuse <= last);
            prop_assert!(state.p_reuse >= floor.min(config.p_reuse));
            last = state.p_reuse;
        }
    }

    #[test]
    fn accepted_insertions_keep_old_cornerstones(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mut tree = advice_loop_core::advice::RdrTree::new();
        for _ in 0..40 {
            let case = random_case(&mut rng);
            let at = tree.classify(&case).unwrap().insertion_node;
            let rule = rule_true_on(&case, &mut rng);
            let action = ActionId(rand::Rng::random_range(&mut rng, 0..5));
            match tree.insert(at, rule, action, case.clone()) {
                Ok(id) => {
                    let c = tree.classify(&case).unwrap();
                    prop_assert_eq!(c.classification_node, id);
                }
                Err(RdrError::CornerstoneConflict(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
            for (id, node) in tree.nodes() {
                if let Some(c) = &node.cornerstone {
                    prop_assert_eq!(tree.classify(c).unwrap().conclusion, node.conclusion, "node {:?}", id);
                }
            }
        }
    }
}

#[test]
fn the_always_rule_prints_as_a_tautology() {
    assert_eq!(Rule::Always.to_string(), "1==1");
    assert_eq!(parse_rule("1 == 1").unwrap(), Rule::Always);
}

/// Pearson statistic of observed counts against expected counts.
fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (*o as f64 - e).powi(2) / e)
        .sum()
}

#[test]
fn policy_reuse_without_advice_matches_epsilon_greedy() {
    let mut q = QTable::new(1, 5);
    for (a, v) in [-1.0, 0.5, 0.5, -0.2, 0.1].into_iter().enumerate() {
        q.set(StateId(0), ActionId(a), v).unwrap();
    }
    let eps = 0.3;
    let n = 100_000;
    let ppr = PprConfig::default().initial_state();
    let mut rng = seeded(41);
    let mut counts = [0u64; 5];
    for _ in 0..n {
        let c = ppr_select(&q, StateId(0), None, None, eps, &ppr, &mut rng).unwrap();
        counts[c.action.0] += 1;
    }
    let mut reference = [0u64; 5];
    let mut rng = seeded(42);
    for _ in 0..n {
        reference[epsilon_greedy(&q, StateId(0), eps, &mut rng).unwrap().action.0] += 1;
    }
    // Exact ε-greedy probabilities: ties at 0.5 split the greedy mass.
    let p: Vec<f64> = (0..5)
        .map(|a| eps / 5.0 + if a == 1 || a == 2 { (1.0 - eps) / 2.0 } else { 0.0 })
        .collect();
    let expected: Vec<f64> = p.iter().map(|p| p * n as f64).collect();
    let critical = ChiSquared::new(4.0).unwrap().inverse_cdf(0.999);
    assert!(chi_square(&counts, &expected) < critical, "{counts:?}");
    assert!(chi_square(&reference, &expected) < critical, "{reference:?}");
}
