//! Structural validation of a system graph.

use super::{NodeId, NodeKind, SystemGraph};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// How bad a finding is. `Error` findings make a graph unusable for
/// analysis, `Warning` marks suspicious but legal constructs, `Info` is
/// advisory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        };
        f.write_str(word)
    }
}

/// One structural finding, anchored at a node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub severity: Severity,
    pub node: NodeId,
    pub rule: &'static str,
    pub detail: String,
}

/// All findings for one graph, sorted by severity, node, and rule.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn findings(&self) -> &[Finding] {
        &self.findings
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    fn push(&mut self, severity: Severity, node: &NodeId, rule: &'static str, detail: String) {
        self.findings.push(Finding { severity, node: node.clone(), rule, detail });
    }

    fn finish(mut self) -> ValidationReport {
        self.findings.sort();
        self.findings.dedup();
        self
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for finding in &self.findings {
            writeln!(
                f,
                "{} {} at {}: {}",
                finding.severity, finding.rule, finding.node, finding.detail
            )?;
        }
        Ok(())
    }
}

/// Checks every structural rule and reports findings.
///
/// A graph built by [`super::resolve`] never produces `Error` findings;
/// warnings (suspicious duplicate producers) and info findings (model
/// cycles) can still appear. Graphs assembled via
/// [`SystemGraph::from_parts`] can trip any rule.
pub fn validate_structure(graph: &SystemGraph) -> ValidationReport {
    let mut report = ValidationReport::default();

    check_identifiers(graph, &mut report);
    check_duplicate_ids(graph, &mut report);
    check_states(graph, &mut report);
    check_models(graph, &mut report);
    check_observers(graph, &mut report);
    check_targets(graph, &mut report);
    check_cpts(graph, &mut report);
    check_duplicate_outputs(graph, &mut report);
    check_model_cycles(graph, &mut report);

    report.finish()
}

fn check_identifiers(graph: &SystemGraph, report: &mut ValidationReport) {
    let all = graph
        .measures()
        .map(|m| &m.id)
        .chain(graph.states().map(|s| &s.id))
        .chain(graph.models().map(|m| &m.id))
        .chain(graph.observers().map(|o| &o.id));
    for id in all {
        if !NodeId::is_valid_identifier(id.as_str()) {
            report.push(
                Severity::Error,
                id,
                "invalid-identifier",
                "identifiers are ASCII letters, digits, and underscores, not starting with a digit"
                    .to_string(),
            );
        }
    }
}

fn check_duplicate_ids(graph: &SystemGraph, report: &mut ValidationReport) {
    let mut seen: BTreeMap<&NodeId, &'static str> = BTreeMap::new();
    let categories: [(Vec<&NodeId>, &'static str); 4] = [
        (graph.measures().map(|m| &m.id).collect(), "measure"),
        (graph.states().map(|s| &s.id).collect(), "state"),
        (graph.models().map(|m| &m.id).collect(), "model"),
        (graph.observers().map(|o| &o.id).collect(), "observer"),
    ];
    for (ids, kind) in &categories {
        for id in ids {
            if let Some(previous) = seen.insert(id, kind) {
                report.push(
                    Severity::Error,
                    id,
                    "duplicate-id",
                    format!("declared as both {previous} and {kind}"),
                );
            }
        }
    }
}

fn check_states(graph: &SystemGraph, report: &mut ValidationReport) {
    for state in graph.states() {
        if let Some(domain) = &state.domain {
            if domain.len() < 2 {
                report.push(
                    Severity::Error,
                    &state.id,
                    "state-domain-too-small",
                    format!("domain has {} value(s), at least 2 required", domain.len()),
                );
            }
            let mut values: Vec<&String> = domain.iter().collect();
            values.sort();
            values.dedup();
            if values.len() != domain.len() {
                report.push(
                    Severity::Error,
                    &state.id,
                    "state-domain-duplicate-value",
                    "domain values must be distinct".to_string(),
                );
            }
        }
    }
}

fn check_models(graph: &SystemGraph, report: &mut ValidationReport) {
    for model in graph.models() {
        if model.inputs.is_empty() {
            report.push(
                Severity::Error,
                &model.id,
                "model-no-inputs",
                "a model consumes at least one measure or state".to_string(),
            );
        }
        if model.outputs.is_empty() {
            report.push(
                Severity::Error,
                &model.id,
                "model-no-outputs",
                "a model produces at least one state".to_string(),
            );
        }
        for list in [&model.inputs, &model.outputs] {
            let mut sorted = list.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != list.len() {
                report.push(
                    Severity::Error,
                    &model.id,
                    "duplicate-list-entry",
                    "inputs and outputs may list each node once".to_string(),
                );
            }
        }
        for input in &model.inputs {
            if model.outputs.contains(input) {
                report.push(
                    Severity::Error,
                    &model.id,
                    "model-io-overlap",
                    format!("{input} appears as both input and output"),
                );
            }
            match graph.node_kind(input) {
                Some(NodeKind::Measure | NodeKind::State) => {}
                Some(_) => report.push(
                    Severity::Error,
                    &model.id,
                    "model-input-invalid",
                    format!("input {input} is not a measure or state"),
                ),
                None => report.push(
                    Severity::Error,
                    &model.id,
                    "unknown-reference",
                    format!("input {input} is not declared"),
                ),
            }
        }
        for output in &model.outputs {
            match graph.node_kind(output) {
                Some(NodeKind::State) => {}
                Some(NodeKind::Measure) => report.push(
                    Severity::Error,
                    output,
                    "measure-has-input",
                    format!("measure is produced by model {}", model.id),
                ),
                Some(_) => report.push(
                    Severity::Error,
                    &model.id,
                    "model-output-not-state",
                    format!("output {output} is not a state"),
                ),
                None => report.push(
                    Severity::Error,
                    &model.id,
                    "unknown-reference",
                    format!("output {output} is not declared"),
                ),
            }
        }
    }
}

fn check_observers(graph: &SystemGraph, report: &mut ValidationReport) {
    for observer in graph.observers() {
        for covered in &observer.covers {
            match graph.node_kind(covered) {
                Some(NodeKind::Observer) => report.push(
                    Severity::Error,
                    &observer.id,
                    "observer-covers-observer",
                    format!("{covered} is an observer; covers name measures, states, or models"),
                ),
                Some(_) => {}
                None => report.push(
                    Severity::Error,
                    &observer.id,
                    "unknown-reference",
                    format!("covered node {covered} is not declared"),
                ),
            }
        }
        for embedded in &observer.embeds {
            match graph.node_kind(embedded) {
                Some(NodeKind::Observer) => {}
                Some(_) => report.push(
                    Severity::Error,
                    &observer.id,
                    "observer-embeds-nonobserver",
                    format!("{embedded} is not an observer"),
                ),
                None => report.push(
                    Severity::Error,
                    &observer.id,
                    "unknown-reference",
                    format!("embedded observer {embedded} is not declared"),
                ),
            }
        }
    }

    // The embeds relation must form a forest.
    let mut parent_count: BTreeMap<&NodeId, usize> = BTreeMap::new();
    for observer in graph.observers() {
        for child in &observer.embeds {
            *parent_count.entry(child).or_default() += 1;
        }
    }
    for (child, count) in &parent_count {
        if *count > 1 {
            report.push(
                Severity::Error,
                child,
                "observer-embed-multiparent",
                format!("embedded by {count} observers, at most one allowed"),
            );
        }
    }
    for observer in graph.observers() {
        if on_embed_cycle(graph, &observer.id) {
            report.push(
                Severity::Error,
                &observer.id,
                "observer-embed-cycle",
                "observer embedding must not be cyclic".to_string(),
            );
        }
    }

    // Within one embedding tree every node is covered at most once.
    let parents = graph.observer_parents();
    let roots: Vec<&NodeId> = graph
        .observers()
        .map(|o| &o.id)
        .filter(|id| !parents.contains_key(*id))
        .collect();
    for root in roots {
        let mut covered_by: BTreeMap<&NodeId, &NodeId> = BTreeMap::new();
        for member_id in graph.observer_subtree(root) {
            let Some(member) = graph.observer(&member_id) else { continue };
            for covered in &member.covers {
                if let Some(previous) = covered_by.get(covered) {
                    report.push(
                        Severity::Error,
                        covered,
                        "observer-cover-overlap",
                        format!("covered by both {previous} and {} within one tree", member.id),
                    );
                } else {
                    covered_by.insert(covered, &member.id);
                }
            }
        }
    }
}

fn on_embed_cycle(graph: &SystemGraph, start: &NodeId) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<NodeId> = graph
        .observer(start)
        .map(|o| o.embeds.iter().cloned().collect())
        .unwrap_or_default();
    while let Some(current) = stack.pop() {
        if current == *start {
            return true;
        }
        if !seen.insert(current.clone()) {
            continue;
        }
        if let Some(observer) = graph.observer(&current) {
            stack.extend(observer.embeds.iter().cloned());
        }
    }
    false
}

fn check_targets(graph: &SystemGraph, report: &mut ValidationReport) {
    for target in graph.targets() {
        match graph.node_kind(target) {
            Some(NodeKind::Observer) => report.push(
                Severity::Error,
                target,
                "invalid-target",
                "targets name measures, states, or models".to_string(),
            ),
            Some(_) => {}
            None => report.push(
                Severity::Error,
                target,
                "unknown-reference",
                "target is not declared".to_string(),
            ),
        }
    }
}

fn check_cpts(graph: &SystemGraph, report: &mut ValidationReport) {
    for cpt in graph.cpts() {
        match graph.node_kind(&cpt.node) {
            Some(NodeKind::Model) => {
                let model = graph.model(&cpt.node).unwrap();
                let domained: Vec<&NodeId> = model
                    .outputs
                    .iter()
                    .filter(|id| {
                        graph.state(id).map(|s| s.domain.is_some()).unwrap_or(false)
                    })
                    .collect();
                match domained.len() {
                    0 => report.push(
                        Severity::Error,
                        &cpt.node,
                        "cpt-no-domained-output",
                        "the model outputs no state with a declared domain".to_string(),
                    ),
                    1 => check_cpt_rows(graph, cpt, report),
                    _ => report.push(
                        Severity::Error,
                        &cpt.node,
                        "cpt-ambiguous-output",
                        format!(
                            "the model outputs {} domained states; a table describes exactly one",
                            domained.len()
                        ),
                    ),
                }
            }
            Some(NodeKind::State) => {
                let state = graph.state(&cpt.node).unwrap();
                if state.domain.is_none() {
                    report.push(
                        Severity::Error,
                        &cpt.node,
                        "cpt-state-no-domain",
                        "a prior needs a state with a declared domain".to_string(),
                    );
                } else if !graph.producers_of(&cpt.node).is_empty() {
                    report.push(
                        Severity::Error,
                        &cpt.node,
                        "cpt-prior-for-produced-state",
                        "the state is produced by a model; attach the table to that model"
                            .to_string(),
                    );
                } else {
                    check_cpt_rows(graph, cpt, report);
                }
            }
            Some(_) => report.push(
                Severity::Error,
                &cpt.node,
                "cpt-invalid-subject",
                "a cpt names a model or a root state".to_string(),
            ),
            None => report.push(
                Severity::Error,
                &cpt.node,
                "unknown-reference",
                "cpt subject is not declared".to_string(),
            ),
        }
    }
}

fn check_cpt_rows(graph: &SystemGraph, cpt: &super::Cpt, report: &mut ValidationReport) {
    let Some(output_domain) = graph.state(&cpt.output).and_then(|s| s.domain.clone()) else {
        report.push(
            Severity::Error,
            &cpt.node,
            "cpt-state-no-domain",
            format!("output {} has no declared domain", cpt.output),
        );
        return;
    };
    let mut parent_domains: Vec<Vec<String>> = Vec::new();
    for parent in &cpt.parents {
        match graph.state(parent).and_then(|s| s.domain.clone()) {
            Some(domain) => parent_domains.push(domain),
            None => {
                report.push(
                    Severity::Error,
                    &cpt.node,
                    "cpt-state-no-domain",
                    format!("parent {parent} has no declared domain"),
                );
                return;
            }
        }
    }

    let expected_rows: usize = parent_domains.iter().map(|d| d.len()).product();
    if cpt.rows.len() != expected_rows {
        report.push(
            Severity::Error,
            &cpt.node,
            "cpt-missing-row",
            format!(
                "{} row(s) declared, the parent domains produce {expected_rows} combination(s)",
                cpt.rows.len()
            ),
        );
    }
    for (parent_values, row) in &cpt.rows {
        if parent_values.len() != cpt.parents.len() {
            report.push(
                Severity::Error,
                &cpt.node,
                "cpt-row-arity",
                format!(
                    "row ({}) lists {} value(s) for {} parent(s)",
                    parent_values.join(", "),
                    parent_values.len(),
                    cpt.parents.len()
                ),
            );
            continue;
        }
        for (value, domain) in parent_values.iter().zip(&parent_domains) {
            if !domain.contains(value) {
                report.push(
                    Severity::Error,
                    &cpt.node,
                    "cpt-unknown-value",
                    format!("row value {value} is not in the parent's domain"),
                );
            }
        }
        let mut sum = 0.0;
        for (value, prob) in row {
            if !output_domain.contains(value) {
                report.push(
                    Severity::Error,
                    &cpt.node,
                    "cpt-unknown-value",
                    format!("{value} is not in the domain of {}", cpt.output),
                );
            }
            if !(0.0..=1.0).contains(prob) {
                report.push(
                    Severity::Error,
                    &cpt.node,
                    "cpt-probability-range",
                    format!("probability {prob} is outside [0, 1]"),
                );
            }
            sum += prob;
        }
        if (sum - 1.0).abs() > crate::dsl::ROW_SUM_TOLERANCE {
            report.push(
                Severity::Error,
                &cpt.node,
                "cpt-row-sum",
                format!("row probabilities sum to {sum}, expected 1"),
            );
        }
    }
}

fn check_duplicate_outputs(graph: &SystemGraph, report: &mut ValidationReport) {
    for state in graph.states() {
        let producers = graph.producers_of(&state.id);
        if producers.len() < 2 {
            continue;
        }
        let groups: BTreeSet<Option<&String>> =
            producers.iter().map(|m| m.alt_group.as_ref()).collect();
        let deliberate = groups.len() == 1 && !groups.contains(&None);
        if !deliberate {
            let names: Vec<String> = producers.iter().map(|m| m.id.to_string()).collect();
            report.push(
                Severity::Warning,
                &state.id,
                "duplicate-output",
                format!(
                    "produced by {}; mark deliberate alternatives with alt-of",
                    names.join(" and ")
                ),
            );
        }
    }
}

fn check_model_cycles(graph: &SystemGraph, report: &mut ValidationReport) {
    // model -> model edges exist where an output state of one model feeds
    // another; a model sits on a cycle iff it can reach itself.
    let mut successors: BTreeMap<&NodeId, BTreeSet<&NodeId>> = BTreeMap::new();
    for model in graph.models() {
        let entry = successors.entry(&model.id).or_default();
        for output in &model.outputs {
            for consumer in graph.consumers_of(output) {
                entry.insert(&consumer.id);
            }
        }
    }
    for model in graph.models() {
        let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
        let mut stack: Vec<&NodeId> = successors
            .get(&model.id)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        let mut cyclic = false;
        while let Some(current) = stack.pop() {
            if *current == model.id {
                cyclic = true;
                break;
            }
            if !seen.insert(current) {
                continue;
            }
            if let Some(next) = successors.get(current) {
                stack.extend(next.iter().copied());
            }
        }
        if cyclic {
            report.push(
                Severity::Info,
                &model.id,
                "model-cycle",
                "the model participates in a feedback cycle".to_string(),
            );
        }
    }
}
