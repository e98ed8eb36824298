//! Graphviz rendering of a system graph.
//!
//! The drawing mirrors the analysis: two perspective clusters plus a
//! border cluster between them, nodes placed by their classification,
//! and one dashed sub-cluster per observer and perspective section
//! showing what that observer directly covers. All iteration orders are
//! alphabetical, so the same input always renders to the same bytes.

use potx_core::classify::{ClassificationMap, ModelClass, Perspective};
use potx_core::graph::{NodeId, SystemGraph};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

/// The three drawing sections, pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Extero,
    Border,
    Intro,
}

impl Section {
    fn key(self) -> &'static str {
        match self {
            Section::Extero => "extero",
            Section::Border => "border",
            Section::Intro => "intro",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Section::Extero => "exteroperspective",
            Section::Border => "perspective border",
            Section::Intro => "introperspective",
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Which section a measure, state, or model belongs to.
fn section_of(graph: &SystemGraph, classes: &ClassificationMap, id: &NodeId) -> Section {
    if graph.measure(id).is_some() {
        return Section::Extero;
    }
    if let Some(perspective) = classes.perspective(id) {
        return match perspective {
            Perspective::Extero => Section::Extero,
            Perspective::Intro => Section::Intro,
        };
    }
    match classes.class(id) {
        Some(ModelClass::Extero) => Section::Extero,
        Some(ModelClass::Intro) => Section::Intro,
        Some(ModelClass::Bridge) => Section::Border,
        None => Section::Extero,
    }
}

/// Drawing attributes of one node.
fn node_attrs(graph: &SystemGraph, id: &NodeId) -> String {
    let mut attrs: Vec<String> = Vec::new();
    if let Some(measure) = graph.measure(id) {
        attrs.push("shape=box".to_string());
        attrs.push("style=rounded".to_string());
        if let Some(label) = &measure.label {
            attrs.push(format!("label=\"{}\\n{}\"", escape(id.as_str()), escape(label)));
        }
    } else if graph.state(id).is_some() {
        attrs.push("shape=box".to_string());
        attrs.push("style=diagonals".to_string());
    } else {
        // Models draw as plain rectangles.
        attrs.push("shape=box".to_string());
    }
    if graph.targets().contains(id) {
        attrs.push("peripheries=2".to_string());
    }
    format!(" [{}]", attrs.join(", "))
}

/// Renders the graph as a DOT digraph.
pub fn render(graph: &SystemGraph, classes: &ClassificationMap) -> String {
    // Owner of each covered node: the alphabetically first observer that
    // lists it in its own covers. BTreeMap iteration keeps this stable.
    let mut owner: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for observer in graph.observers() {
        for covered in &observer.covers {
            owner.entry(covered.clone()).or_insert_with(|| observer.id.clone());
        }
    }

    // section -> observer -> nodes drawn inside that observer's box, and
    // section -> nodes drawn directly in the section.
    let mut boxed: BTreeMap<Section, BTreeMap<NodeId, BTreeSet<NodeId>>> = BTreeMap::new();
    let mut free: BTreeMap<Section, BTreeSet<NodeId>> = BTreeMap::new();
    for section in [Section::Extero, Section::Border, Section::Intro] {
        boxed.insert(section, BTreeMap::new());
        free.insert(section, BTreeSet::new());
    }
    for id in graph.content_ids() {
        let section = section_of(graph, classes, &id);
        match owner.get(&id) {
            Some(observer) => {
                boxed
                    .get_mut(&section)
                    .unwrap()
                    .entry(observer.clone())
                    .or_default()
                    .insert(id);
            }
            None => {
                free.get_mut(&section).unwrap().insert(id);
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", escape(graph.name()));
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");

    for section in [Section::Extero, Section::Border, Section::Intro] {
        let _ = writeln!(out, "  subgraph cluster_{} {{", section.key());
        let _ = writeln!(out, "    label=\"{}\";", section.label());
        out.push_str("    style=solid;\n");
        for (observer_id, nodes) in &boxed[&section] {
            let observer = graph.observer(observer_id).expect("owners are observers");
            let _ = writeln!(
                out,
                "    subgraph cluster_obs_{}_{} {{",
                escape(observer_id.as_str()),
                section.key()
            );
            let experimentable = if observer.experimentable { ", experimentable" } else { "" };
            let _ = writeln!(
                out,
                "      label=\"observer {} (level {}{})\";",
                escape(observer_id.as_str()),
                observer.level,
                experimentable
            );
            out.push_str("      style=dashed;\n");
            for node in nodes {
                let _ = writeln!(
                    out,
                    "      \"{}\"{};",
                    escape(node.as_str()),
                    node_attrs(graph, node)
                );
            }
            out.push_str("    }\n");
        }
        for node in &free[&section] {
            let _ = writeln!(out, "    \"{}\"{};", escape(node.as_str()), node_attrs(graph, node));
        }
        out.push_str("  }\n");
    }

    for model in graph.models() {
        for input in &model.inputs {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\";",
                escape(input.as_str()),
                escape(model.id.as_str())
            );
        }
        for output in &model.outputs {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\";",
                escape(model.id.as_str()),
                escape(output.as_str())
            );
        }
    }

    out.push('}');
    out
}
