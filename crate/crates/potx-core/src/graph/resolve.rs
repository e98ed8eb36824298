//! Conversion from a parsed document into an analyzable system graph.

use super::validate::validate_structure;
use super::{Cpt, Measure, Model, NodeId, Observer, State, SystemGraph, ValidationReport};
use crate::dsl::Document;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Why a document could not be turned into a graph.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("duplicate declaration of {0}")]
    DuplicateId(String),
    #[error("reference to undeclared node {0}")]
    UnknownReference(String),
    #[error("model {0} must list at least one input and one output")]
    DanglingModel(String),
    #[error("cpt for {node} repeats the row ({row})")]
    DuplicateRow { node: String, row: String },
    #[error("observer {observer} declares level {level}, outside 0..=5")]
    InvalidLevel { observer: String, level: u8 },
    #[error("structural validation failed:\n{0}")]
    Invalid(ValidationReport),
}

/// Builds a [`SystemGraph`] from a parsed document.
///
/// Name collisions, dangling references, and empty model interfaces are
/// rejected up front with a typed error; everything else goes through
/// [`validate_structure`], and any error-severity finding fails the
/// resolution with [`ResolveError::Invalid`].
pub fn resolve(doc: &Document) -> Result<SystemGraph, ResolveError> {
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    let ids = doc
        .measures
        .iter()
        .map(|m| m.id.as_str())
        .chain(doc.states.iter().map(|s| s.id.as_str()))
        .chain(doc.models.iter().map(|m| m.id.as_str()))
        .chain(doc.observers.iter().map(|o| o.id.as_str()));
    for id in ids {
        if !declared.insert(id) {
            return Err(ResolveError::DuplicateId(id.to_string()));
        }
    }

    let exists = |name: &str| declared.contains(name);
    for model in &doc.models {
        if model.inputs.is_empty() || model.outputs.is_empty() {
            return Err(ResolveError::DanglingModel(model.id.clone()));
        }
        for referenced in model.inputs.iter().chain(&model.outputs) {
            if !exists(referenced) {
                return Err(ResolveError::UnknownReference(referenced.clone()));
            }
        }
    }
    for observer in &doc.observers {
        for referenced in observer.covers.iter().chain(&observer.embeds) {
            if !exists(referenced) {
                return Err(ResolveError::UnknownReference(referenced.clone()));
            }
        }
    }
    for target in doc.targets.iter().flat_map(|t| &t.ids) {
        if !exists(target) {
            return Err(ResolveError::UnknownReference(target.clone()));
        }
    }
    for cpt in &doc.cpts {
        if !exists(&cpt.node) {
            return Err(ResolveError::UnknownReference(cpt.node.clone()));
        }
    }

    let measures: Vec<Measure> = doc
        .measures
        .iter()
        .map(|m| Measure { id: NodeId::from(m.id.as_str()), label: m.label.clone() })
        .collect();
    let states: Vec<State> = doc
        .states
        .iter()
        .map(|s| State {
            id: NodeId::from(s.id.as_str()),
            physicality: s.physicality,
            domain: s.domain.clone(),
            label: s.label.clone(),
        })
        .collect();
    let models: Vec<Model> = doc
        .models
        .iter()
        .map(|m| Model {
            id: NodeId::from(m.id.as_str()),
            inputs: m.inputs.iter().map(|i| NodeId::from(i.as_str())).collect(),
            outputs: m.outputs.iter().map(|o| NodeId::from(o.as_str())).collect(),
            goal: m.goal,
            alt_group: m.alt_group.clone(),
        })
        .collect();
    let observers: Vec<Observer> = doc
        .observers
        .iter()
        .map(|o| {
            let level = super::Level::new(o.level).ok_or_else(|| {
                ResolveError::InvalidLevel { observer: o.id.clone(), level: o.level }
            })?;
            Ok(Observer {
                id: NodeId::from(o.id.as_str()),
                level,
                experimentable: o.experimentable,
                covers: o.covers.iter().map(|c| NodeId::from(c.as_str())).collect(),
                embeds: o.embeds.iter().map(|e| NodeId::from(e.as_str())).collect(),
            })
        })
        .collect::<Result<_, ResolveError>>()?;

    let state_domains: BTreeMap<&str, bool> = doc
        .states
        .iter()
        .map(|s| (s.id.as_str(), s.domain.is_some()))
        .collect();
    let models_by_id: BTreeMap<&str, &Model> =
        models.iter().map(|m| (m.id.as_str(), m)).collect();
    let has_domain = |id: &NodeId| state_domains.get(id.as_str()).copied().unwrap_or(false);

    let mut cpt_subjects: BTreeSet<&str> = BTreeSet::new();
    let mut cpts: Vec<Cpt> = Vec::new();
    for decl in &doc.cpts {
        if !cpt_subjects.insert(decl.node.as_str()) {
            return Err(ResolveError::DuplicateId(format!("cpt for {}", decl.node)));
        }
        let node = NodeId::from(decl.node.as_str());
        // The table's output and parent list are derived from the graph:
        // a model table describes its single domained output conditioned
        // on the model's domained state inputs in declared order, a state
        // table is an unconditioned prior. When the derivation has no
        // unique answer the placeholders below are rejected by
        // `validate_structure` before anything consumes them.
        let (output, parents) = match models_by_id.get(decl.node.as_str()) {
            Some(model) => {
                let output = model
                    .outputs
                    .iter()
                    .find(|o| has_domain(o))
                    .cloned()
                    .unwrap_or_else(|| node.clone());
                let parents: Vec<NodeId> =
                    model.inputs.iter().filter(|i| has_domain(i)).cloned().collect();
                (output, parents)
            }
            None => (node.clone(), Vec::new()),
        };
        let mut rows: BTreeMap<Vec<String>, BTreeMap<String, f64>> = BTreeMap::new();
        for row in &decl.rows {
            let entries: BTreeMap<String, f64> = row.entries.iter().cloned().collect();
            if rows.insert(row.parents.clone(), entries).is_some() {
                return Err(ResolveError::DuplicateRow {
                    node: decl.node.clone(),
                    row: row.parents.join(", "),
                });
            }
        }
        cpts.push(Cpt { node, output, parents, rows });
    }

    let targets: BTreeSet<NodeId> = doc
        .targets
        .iter()
        .flat_map(|t| &t.ids)
        .map(|n| NodeId::from(n.as_str()))
        .collect();

    let graph =
        SystemGraph::from_parts(doc.name.clone(), measures, states, models, observers, cpts, targets);
    let report = validate_structure(&graph);
    if report.has_errors() {
        return Err(ResolveError::Invalid(report));
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn resolved(source: &str) -> SystemGraph {
        resolve(&parse(source).expect("parse")).expect("resolve")
    }

    #[test]
    fn builds_graph_with_derived_cpt_shape() {
        let graph = resolved(
            r#"
            system s {
              measure raw
              state a physical domain { low, high }
              state b physical domain { low, high }
              model m { in: raw, a; out: b }
              cpt a {
                row () -> { low: 0.3, high: 0.7 }
              }
              cpt m {
                row (low) -> { low: 0.9, high: 0.1 }
                row (high) -> { low: 0.2, high: 0.8 }
              }
            }
            "#,
        );
        let table = graph.cpt(&NodeId::from("m")).expect("cpt for m");
        assert_eq!(table.output, NodeId::from("b"));
        // The measure input carries no domain, so it is not a parent.
        assert_eq!(table.parents, vec![NodeId::from("a")]);
        let prior = graph.cpt(&NodeId::from("a")).expect("prior for a");
        assert_eq!(prior.parents, Vec::<NodeId>::new());
        assert_eq!(prior.prob(&[], "low"), Some(0.3));
    }

    #[test]
    fn rejects_cross_category_duplicates() {
        let doc = parse("system s { measure x state x physical }").expect("parse");
        assert_eq!(resolve(&doc), Err(ResolveError::DuplicateId("x".to_string())));
    }

    #[test]
    fn rejects_unknown_references() {
        let doc = parse("system s { state a physical model m { in: ghost; out: a } }")
            .expect("parse");
        assert_eq!(resolve(&doc), Err(ResolveError::UnknownReference("ghost".to_string())));
    }

    #[test]
    fn rejects_duplicate_cpt_rows() {
        let doc = parse(
            r#"
            system s {
              state a physical domain { low, high }
              cpt a {
                row () -> { low: 0.3, high: 0.7 }
                row () -> { low: 0.4, high: 0.6 }
              }
            }
            "#,
        )
        .expect("parse");
        assert!(matches!(resolve(&doc), Err(ResolveError::DuplicateRow { .. })));
    }

    #[test]
    fn structural_errors_surface_as_findings() {
        let doc = parse(
            "system s { state a physical state b physical model m { in: a; out: a } }",
        )
        .expect("parse");
        let Err(ResolveError::Invalid(report)) = resolve(&doc) else {
            panic!("expected a validation failure");
        };
        assert!(report.has_errors());
        assert!(report.findings().iter().any(|f| f.rule == "model-io-overlap"));
    }

    #[test]
    fn cycle_between_models_is_informational_only() {
        let graph = resolved(
            concat!(
                "system s {\n",
                "  state a physical\n",
                "  state b physical\n",
                "  model forward { in: a; out: b }\n",
                "  model back { in: b; out: a }\n",
                "}\n",
            ),
        );
        let report = validate_structure(&graph);
        assert!(!report.has_errors());
        let cyclic: Vec<&str> = report
            .findings()
            .iter()
            .filter(|f| f.rule == "model-cycle")
            .map(|f| f.node.as_str())
            .collect();
        assert_eq!(cyclic, vec!["back", "forward"]);
    }
}
