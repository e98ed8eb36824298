//! Randomized invariants over generated documents: classification
//! partitions, level monotonicity under relabeling, transparency
//! monotonicity under deployment growth, parser round-trips, and
//! inference against the joint-enumeration oracle.

use potx_core::classify::{classify_all, ModelClass};
use potx_core::dsl::{parse, serialize};
use potx_core::graph::{resolve, NodeId, Physicality, SystemGraph};
use potx_core::inference::{brute_force_joint, infer, Evidence};
use potx_core::transparency::opacity_map;
use potx_testgen::{random_bn, random_document_text, random_graph, GraphConfig};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn generated(seed: u64) -> SystemGraph {
    let doc = random_graph(seed, &GraphConfig::default());
    resolve(&doc).expect("generated documents resolve")
}

proptest! {
    /// Reclassifying a physical state as non-physical can push models
    /// toward bridge/intro territory but never lowers what it takes to
    /// understand any node.
    #[test]
    fn required_levels_never_drop_when_a_state_turns_nonphysical(
        seed in any::<u64>(),
        pick in any::<usize>(),
    ) {
        let mut doc = random_graph(seed, &GraphConfig::default());
        let before = resolve(&doc).expect("resolves");
        let classes_before = classify_all(&before).expect("classifies");

        let index = pick % doc.states.len();
        doc.states[index].physicality = Physicality::NonPhysical;
        let after = resolve(&doc).expect("still resolves");
        let classes_after = classify_all(&after).expect("still classifies");

        for id in before.content_ids() {
            let old = classes_before.required(&id).expect("classified before");
            let new = classes_after.required(&id).expect("classified after");
            prop_assert!(
                new >= old,
                "required level of {id} dropped from {old} to {new} after relabeling {}",
                doc.states[index].id
            );
        }
    }

    /// Growing the deployed set never shrinks the transparent set, and
    /// deploying nothing leaves everything opaque.
    #[test]
    fn transparency_grows_with_deployment(seed in any::<u64>(), extra in any::<usize>()) {
        let graph = generated(seed);
        let everyone: Vec<NodeId> = graph.observers().map(|o| o.id.clone()).collect();

        let none = opacity_map(&graph, &BTreeSet::new()).expect("empty deployment");
        prop_assert!(none.transparent_nodes().is_empty());

        if everyone.is_empty() {
            return Ok(());
        }
        let smaller: BTreeSet<NodeId> =
            everyone.iter().step_by(2).cloned().collect();
        let mut larger = smaller.clone();
        larger.insert(everyone[extra % everyone.len()].clone());

        let small_map = opacity_map(&graph, &smaller).expect("smaller deployment");
        let large_map = opacity_map(&graph, &larger).expect("larger deployment");
        let small_set = small_map.transparent_nodes();
        let large_set = large_map.transparent_nodes();
        prop_assert!(
            small_set.is_subset(&large_set),
            "adding an observer removed {:?}",
            small_set.difference(&large_set).collect::<Vec<_>>()
        );
    }

    /// Every model lands in exactly one class, re-derived here directly
    /// from the physicality tags of the states it touches.
    #[test]
    fn models_partition_into_exactly_one_class(seed in any::<u64>()) {
        let graph = generated(seed);
        let classes = classify_all(&graph).expect("classifies");
        for model in graph.models() {
            let mut touches_physical = false;
            let mut touches_nonphysical = false;
            for id in model.inputs.iter().chain(&model.outputs) {
                if let Some(state) = graph.state(id) {
                    match state.physicality {
                        Physicality::Physical => touches_physical = true,
                        Physicality::NonPhysical => touches_nonphysical = true,
                    }
                }
            }
            let expected = match (touches_nonphysical, touches_physical) {
                (true, true) => ModelClass::Bridge,
                (true, false) => ModelClass::Intro,
                (false, true) => ModelClass::Extero,
                (false, false) => {
                    prop_assert!(false, "{} touches no state at all", model.id);
                    unreachable!()
                }
            };
            prop_assert_eq!(
                classes.class(&model.id),
                Some(expected),
                "class of {} disagrees with its state tags",
                &model.id
            );
        }
        let (intro, extero, bridge) = classes.class_counts();
        prop_assert_eq!(intro + extero + bridge, graph.models().count());
    }

    /// Scrambled generated text survives parse → serialize → parse, and
    /// the canonical form is a serializer fixed point.
    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let text = random_document_text(seed);
        let doc = parse(&text).expect("generated text parses");
        let canonical = serialize(&doc);
        let reparsed = parse(&canonical).expect("canonical text parses");
        prop_assert_eq!(&doc, &reparsed, "round-trip changed the document");
        prop_assert_eq!(canonical, serialize(&reparsed), "serialize is not a fixed point");
    }

    /// Variable elimination agrees with joint enumeration on random
    /// networks, with and without evidence.
    #[test]
    fn elimination_matches_joint_enumeration(seed in any::<u64>()) {
        let doc = random_bn(seed, 8);
        let graph = resolve(&doc).expect("network resolves");
        let deployed: BTreeSet<NodeId> = [NodeId::from("watcher")].into();
        let states: Vec<NodeId> = graph.states().map(|s| s.id.clone()).collect();

        let query = states.last().expect("at least two states").clone();
        let mut evidence = Evidence::new();
        let no_evidence = Evidence::new();
        if states.len() > 1 {
            evidence.insert(states[0].clone(), "high".to_string());
        }
        for ev in [&no_evidence, &evidence] {
            let fast = infer(&graph, &deployed, ev, &query).expect("inference succeeds");
            let slow = brute_force_joint(&graph, ev, &query).expect("oracle succeeds");
            let total: f64 = fast.iter().map(|(_, p)| p).sum();
            prop_assert!((total - 1.0).abs() <= 1e-9, "posterior is not normalized");
            for ((value, p), (_, q)) in fast.iter().zip(slow.iter()) {
                prop_assert!(
                    (p - q).abs() <= 1e-9,
                    "seed {seed}: P({query}={value}) differs: {p} vs {q}"
                );
            }
        }
    }
}
