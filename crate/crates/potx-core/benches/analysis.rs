//! Benchmarks the analysis passes on a layered synthetic system, and —
//! when the `parallel` feature is on — compares the default thread pool
//! against a single-threaded pool running the identical code.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use potx_core::classify::classify_all;
use potx_core::graph::{
    Level, Measure, Model, NodeId, Observer, Physicality, State, SystemGraph,
};
use potx_core::recipe::analyze_gaps;
use potx_core::transparency::{check_all_observers, opacity_map};
use std::collections::BTreeSet;

/// Builds a deterministic layered system: a row of measures, then
/// `layers` rows of models, each model combining two nodes of the
/// previous row. The last two rows are non-physical, so the graph has
/// bridges and intro models like a realistic landscape.
fn layered_system(layers: usize, width: usize) -> SystemGraph {
    let mut measures = Vec::new();
    let mut states = Vec::new();
    let mut models = Vec::new();
    let mut observers = Vec::new();

    let mut previous: Vec<NodeId> = (0..width)
        .map(|i| {
            let id = NodeId::new(format!("m_{i:03}"));
            measures.push(Measure { id: id.clone(), label: None });
            id
        })
        .collect();

    for layer in 0..layers {
        let nonphysical = layer + 2 >= layers;
        let mut row = Vec::new();
        let mut covers = BTreeSet::new();
        for i in 0..width {
            let state_id = NodeId::new(format!("s_{layer:03}_{i:03}"));
            states.push(State {
                id: state_id.clone(),
                physicality: if nonphysical {
                    Physicality::NonPhysical
                } else {
                    Physicality::Physical
                },
                domain: None,
                label: None,
            });
            let model_id = NodeId::new(format!("f_{layer:03}_{i:03}"));
            let inputs =
                vec![previous[i].clone(), previous[(i + 1) % previous.len()].clone()];
            models.push(Model {
                id: model_id.clone(),
                inputs,
                outputs: vec![state_id.clone()],
                goal: nonphysical && i == 0,
                alt_group: None,
            });
            covers.insert(model_id);
            row.push(state_id);
        }
        observers.push(Observer {
            id: NodeId::new(format!("o_{layer:03}")),
            level: Level::new(if nonphysical { 4 } else { 3 }).unwrap(),
            experimentable: nonphysical,
            covers,
            embeds: BTreeSet::new(),
        });
        previous = row;
    }

    let targets: BTreeSet<NodeId> = previous.iter().cloned().collect();
    SystemGraph::from_parts("layered", measures, states, models, observers, vec![], targets)
}

fn run_passes(graph: &SystemGraph, deployed: &BTreeSet<NodeId>) {
    let classes = classify_all(graph).unwrap();
    criterion::black_box(classes.class_counts());
    let violations = check_all_observers(graph);
    criterion::black_box(violations.len());
    let opacity = opacity_map(graph, deployed).unwrap();
    criterion::black_box(opacity.transparent_nodes().len());
    let report = analyze_gaps(graph, deployed).unwrap();
    criterion::black_box(report.gaps.len());
}

fn bench_analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis");
    for &(layers, width) in &[(6usize, 24usize), (10, 48)] {
        let graph = layered_system(layers, width);
        let deployed: BTreeSet<NodeId> =
            graph.observers().map(|o| o.id.clone()).collect();

        group.bench_with_input(
            BenchmarkId::new("default_pool", format!("{layers}x{width}")),
            &(&graph, &deployed),
            |b, (graph, deployed)| b.iter(|| run_passes(graph, deployed)),
        );

        #[cfg(feature = "parallel")]
        {
            let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            group.bench_with_input(
                BenchmarkId::new("single_thread", format!("{layers}x{width}")),
                &(&graph, &deployed),
                |b, (graph, deployed)| {
                    b.iter(|| single.install(|| run_passes(graph, deployed)))
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, bench_analysis);
criterion_main!(benches);
