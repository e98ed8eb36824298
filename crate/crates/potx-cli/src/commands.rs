//! One function per subcommand. Each is a thin composition of library
//! operations plus formatting; exit codes are returned, never called.
//!
//! Exit code contract: 0 = success / everything holds; 1 = the document
//! has findings, violations, failed expectations, gaps, or the inference
//! data is unusable (opaque query, missing table, cycle, zero-mass
//! evidence); 2 = usage errors, unreadable or unparsable input, unknown
//! observers, unknown states or values; 3 = internal error (set by
//! `main`).

use crate::dot;
use crate::out::Writer;
use crate::Format;
use potx_core::classify::{classify_all, ClassificationMap, ModelClass};
use potx_core::dsl::{assertion_text, parse, Assertion, Document, ModelClassName};
use potx_core::graph::{resolve, NodeId, SystemGraph};
use potx_core::inference::{self, Evidence, InferError};
use potx_core::recipe::{analyze_gaps, CurrentTransparency, GapReport, RecipeError};
use potx_core::transparency::{check_observer, ObserverViolation};
use std::collections::BTreeSet;
use std::path::Path;

/// Reads and parses the document; parse and IO problems are usage-level
/// errors (exit 2).
fn load_document(path: &Path) -> Result<Document, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        2u8
    })?;
    parse(&text).map_err(|e| {
        eprintln!("{}:{e}", path.display());
        2u8
    })
}

/// Loads and resolves for the analysis commands, where an unresolvable
/// document means the requested operation cannot run at all (exit 2).
/// `check` does NOT use this: reporting resolution problems is its job.
fn load_graph(path: &Path) -> Result<SystemGraph, u8> {
    let doc = load_document(path)?;
    resolve(&doc).map_err(|e| {
        eprintln!("error: {e}");
        2u8
    })
}

/// The deployed observer set: the named ones, or all declared when the
/// flag is absent. Unknown names are usage errors.
fn deployed_set(graph: &SystemGraph, deploy: Option<&[String]>) -> Result<BTreeSet<NodeId>, u8> {
    match deploy {
        None => Ok(graph.observers().map(|o| o.id.clone()).collect()),
        Some(names) => {
            let mut set = BTreeSet::new();
            for name in names {
                let id = NodeId::from(name.as_str());
                if graph.observer(&id).is_none() {
                    eprintln!("error: unknown observer {name}");
                    return Err(2);
                }
                set.insert(id);
            }
            Ok(set)
        }
    }
}

fn reject_dot(format: Format, writer: &Writer) -> Option<u8> {
    if format == Format::Dot {
        let _ = writer;
        eprintln!("error: --format dot is only valid for export");
        Some(2)
    } else {
        None
    }
}

fn violation_line(v: &ObserverViolation) -> String {
    match &v.node {
        Some(node) => format!("VIOLATION {} {} {}", v.observer, v.rule.name(), node),
        None => format!("VIOLATION {} {}", v.observer, v.rule.name()),
    }
}

pub fn check(path: &Path, format: Format, writer: &Writer) -> u8 {
    if let Some(code) = reject_dot(format, writer) {
        return code;
    }
    let doc = match load_document(path) {
        Ok(doc) => doc,
        Err(code) => return code,
    };
    let graph = match resolve(&doc) {
        Ok(graph) => graph,
        Err(potx_core::graph::ResolveError::Invalid(report)) => {
            // Structural findings are exactly what check reports.
            for finding in report.findings() {
                writer.machine(&format!(
                    "FINDING {} {} {}",
                    finding.severity, finding.rule, finding.node
                ));
                if !writer.is_machine() {
                    writer.result(&format!(
                        "{} {} at {}: {}",
                        finding.severity, finding.rule, finding.node, finding.detail
                    ));
                }
            }
            writer.machine("RESULT problems");
            writer.info("check: document has structural errors");
            return 1;
        }
        Err(e) => {
            writer.machine(&format!("FINDING error document {e}"));
            writer.machine("RESULT problems");
            writer.result(&format!("error: {e}"));
            return 1;
        }
    };

    writer.machine(&format!("SYSTEM {}", graph.name()));
    writer.info(&format!(
        "system {}: {} measures, {} states, {} models, {} observers",
        graph.name(),
        graph.measures().count(),
        graph.states().count(),
        graph.models().count(),
        graph.observers().count(),
    ));

    let classes = match classify_all(&graph) {
        Ok(classes) => classes,
        Err(e) => {
            writer.result(&format!("error: {e}"));
            return 1;
        }
    };
    let (intro, extero, bridge) = classes.class_counts();
    for (id, class) in classes.models() {
        writer.machine(&format!("CLASS {id} {class}"));
    }
    writer.info(&format!("classes: {intro} intro, {extero} extero, {bridge} bridge"));

    // `resolve` succeeded, so findings can only be warnings or notes.
    let report = potx_core::graph::validate_structure(&graph);
    for finding in report.findings() {
        writer.machine(&format!(
            "FINDING {} {} {}",
            finding.severity, finding.rule, finding.node
        ));
        writer.info(&format!(
            "{} {} at {}: {}",
            writer.yellow(&finding.severity.to_string()),
            finding.rule,
            finding.node,
            finding.detail
        ));
    }

    let mut violation_count = 0usize;
    for observer in graph.observers() {
        let violations = check_observer(&graph, observer);
        for v in &violations {
            writer.machine(&violation_line(v));
            writer.result(&format!("{} {v}", writer.red("violation:")));
        }
        violation_count += violations.len();
    }
    if violation_count == 0 {
        writer.info("violations: none");
    }

    let mut failed_expects = 0usize;
    for expect in &doc.expects {
        for assertion in &expect.assertions {
            let holds = assertion_holds(&graph, &classes, assertion);
            let text = assertion_text(assertion);
            let verdict = if holds { "PASS" } else { "FAIL" };
            writer.machine(&format!("EXPECT {verdict} {text}"));
            let painted =
                if holds { writer.green(verdict) } else { writer.red(verdict) };
            writer.info(&format!("expect {text}: {painted}"));
            if !holds {
                failed_expects += 1;
            }
        }
    }

    let ok = violation_count == 0 && failed_expects == 0;
    writer.machine(if ok { "RESULT ok" } else { "RESULT problems" });
    if ok {
        writer.info(&format!("check: {}", writer.green("ok")));
        0
    } else {
        writer.info(&format!(
            "check: {} ({violation_count} violations, {failed_expects} failed expectations)",
            writer.red("problems")
        ));
        1
    }
}

/// Evaluates one expect assertion against the analysis results. Gap
/// assertions deploy all declared observers, matching the default of the
/// `gaps` command.
fn assertion_holds(
    graph: &SystemGraph,
    classes: &ClassificationMap,
    assertion: &Assertion,
) -> bool {
    match assertion {
        Assertion::ModelIs { model, class } => {
            let expected = match class {
                ModelClassName::Intro => ModelClass::Intro,
                ModelClassName::Extero => ModelClass::Extero,
                ModelClassName::Bridge => ModelClass::Bridge,
            };
            classes.class(&NodeId::from(model.as_str())) == Some(expected)
        }
        Assertion::ObserverOk { observer } => graph
            .observer(&NodeId::from(observer.as_str()))
            .is_some_and(|o| check_observer(graph, o).is_empty()),
        Assertion::ObserverViolates { observer, rule } => {
            graph.observer(&NodeId::from(observer.as_str())).is_some_and(|o| {
                check_observer(graph, o).iter().any(|v| v.rule.name() == rule)
            })
        }
        Assertion::GapLevel { node, level } => {
            let deployed = graph.observers().map(|o| o.id.clone()).collect();
            analyze_gaps(graph, &deployed).is_ok_and(|report| {
                report.gaps.iter().any(|g| {
                    g.node == NodeId::from(node.as_str()) && g.required.get() == *level
                })
            })
        }
    }
}

pub fn classify(path: &Path, format: Format, writer: &Writer) -> u8 {
    if let Some(code) = reject_dot(format, writer) {
        return code;
    }
    let graph = match load_graph(path) {
        Ok(graph) => graph,
        Err(code) => return code,
    };
    let classes = match classify_all(&graph) {
        Ok(classes) => classes,
        Err(e) => {
            writer.result(&format!("error: {e}"));
            return 1;
        }
    };
    for measure in graph.measures() {
        writer.machine(&format!("MEASURE {} level=0", measure.id));
        writer.info(&format!("measure {}: level 0", measure.id));
    }
    for state in graph.states() {
        let perspective = classes.perspective(&state.id).expect("states are classified");
        let required = classes.required(&state.id).expect("states have levels");
        writer.machine(&format!(
            "STATE {} perspective={perspective} required={required}",
            state.id
        ));
        writer.info(&format!(
            "state {}: {}, requires level {required}",
            state.id,
            perspective.full_name()
        ));
    }
    for model in graph.models() {
        let class = classes.class(&model.id).expect("models are classified");
        let required = classes.required(&model.id).expect("models have levels");
        let direct = classes.direct_cover(&model.id).expect("models have cover levels");
        writer.machine(&format!(
            "MODEL {} class={class} required={required} direct={direct}",
            model.id
        ));
        writer.info(&format!(
            "model {}: {class}, requires level {required}, coverable at level {direct}",
            model.id
        ));
    }
    0
}

pub fn regions(path: &Path, deploy: Option<&[String]>, format: Format, writer: &Writer) -> u8 {
    if let Some(code) = reject_dot(format, writer) {
        return code;
    }
    let graph = match load_graph(path) {
        Ok(graph) => graph,
        Err(code) => return code,
    };
    let deployed = match deployed_set(&graph, deploy) {
        Ok(set) => set,
        Err(code) => return code,
    };
    let names: Vec<String> = deployed.iter().map(|id| id.to_string()).collect();
    writer.info(&format!("deployed: {}", if names.is_empty() {
        "none".to_string()
    } else {
        names.join(", ")
    }));
    for id in &deployed {
        let observer = graph.observer(id).expect("deployed observers exist");
        if !check_observer(&graph, observer).is_empty() {
            writer.machine(&format!("INERT {id}"));
            writer.info(&format!(
                "{} observer {id} violates its level rules and contributes nothing",
                writer.yellow("note:")
            ));
        }
    }
    let opacity = match potx_core::transparency::opacity_map(&graph, &deployed) {
        Ok(map) => map,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for (node, state) in opacity.iter() {
        match state {
            potx_core::transparency::Opacity::Transparent(via) => {
                let level = opacity
                    .effective_level(node)
                    .map(|l| l.to_string())
                    .unwrap_or_else(|| "?".to_string());
                writer.machine(&format!("TRANSPARENT {node} via={via} level={level}"));
                writer.info(&format!(
                    "{node}: transparent via {via} at level {level}"
                ));
            }
            potx_core::transparency::Opacity::Opaque => {
                writer.machine(&format!("OPAQUE {node}"));
                writer.info(&format!("{node}: opaque"));
            }
        }
    }
    0
}

pub fn gaps(path: &Path, deploy: Option<&[String]>, format: Format, writer: &Writer) -> u8 {
    if let Some(code) = reject_dot(format, writer) {
        return code;
    }
    let graph = match load_graph(path) {
        Ok(graph) => graph,
        Err(code) => return code,
    };
    let deployed = match deployed_set(&graph, deploy) {
        Ok(set) => set,
        Err(code) => return code,
    };
    let report = match analyze_gaps(&graph, &deployed) {
        Ok(report) => report,
        Err(RecipeError::NoTargets) => {
            eprintln!("error: {}", RecipeError::NoTargets);
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    render_gap_report(&report, writer);
    if report.is_clear() {
        writer.info(&format!("gaps: {}", writer.green("none")));
        0
    } else {
        1
    }
}

fn render_gap_report(report: &GapReport, writer: &Writer) {
    for (gap, suggestion) in report.gaps.iter().zip(&report.suggestions) {
        writer.machine(&format!(
            "GAP {} required={} experimentable={}",
            gap.node,
            gap.required,
            gap.needs_experimentability
        ));
        let current = match gap.current {
            CurrentTransparency::Opaque => "opaque".to_string(),
            CurrentTransparency::TransparentAtLevel(level) => {
                format!("transparent only at level {level}")
            }
        };
        let framework = if gap.needs_experimentability {
            " inside an experimentable framework"
        } else {
            ""
        };
        writer.info(&format!(
            "target {}: {current}, needs a level-{} observer{framework}",
            gap.node, gap.required
        ));
        if suggestion.unmeasurable {
            writer.machine(&format!("UNMEASURABLE {}", gap.node));
            writer.info(&format!(
                "  no measurement chain reaches {}; no cover can be suggested",
                gap.node
            ));
        } else {
            let cover: Vec<String> =
                suggestion.candidate_cover.iter().map(|id| id.to_string()).collect();
            writer.machine(&format!(
                "SUGGEST {} level={} cover={}",
                suggestion.gap,
                suggestion.minimum_level,
                cover.join(",")
            ));
            writer.info(&format!(
                "  suggest: a level-{} observer covering {}",
                suggestion.minimum_level,
                cover.join(", ")
            ));
            writer.info(&format!("  needed abilities: {}", suggestion.abilities));
        }
    }
    for (level, count) in &report.level_counts {
        writer.machine(&format!("LEVEL_COUNT {level} {count}"));
    }
}

pub fn infer(
    path: &Path,
    query: &str,
    evidence_args: &[String],
    deploy: Option<&[String]>,
    format: Format,
    writer: &Writer,
) -> u8 {
    if let Some(code) = reject_dot(format, writer) {
        return code;
    }
    let graph = match load_graph(path) {
        Ok(graph) => graph,
        Err(code) => return code,
    };
    let deployed = match deployed_set(&graph, deploy) {
        Ok(set) => set,
        Err(code) => return code,
    };
    let mut evidence = Evidence::new();
    for item in evidence_args {
        let Some((node, value)) = item.split_once('=') else {
            eprintln!("error: evidence must be state=value, got {item}");
            return 2;
        };
        evidence.insert(NodeId::from(node.trim()), value.trim().to_string());
    }

    match inference::infer(&graph, &deployed, &evidence, &NodeId::from(query)) {
        Ok(posterior) => {
            for (value, p) in posterior.iter() {
                writer.result(&format!("{value}: {p:.6}"));
            }
            0
        }
        Err(InferError::OpaqueQuery(node)) => {
            writer.result(&format!("opaque: {node}"));
            1
        }
        Err(
            e @ (InferError::UnknownNode(_)
            | InferError::NoDomain(_)
            | InferError::UnknownValue { .. }
            | InferError::Transparency(_)),
        ) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            writer.result(&format!("error: {e}"));
            1
        }
    }
}

pub fn export(path: &Path, format: Format, writer: &Writer) -> u8 {
    if format != Format::Dot {
        eprintln!("error: export requires --format dot");
        return 2;
    }
    let graph = match load_graph(path) {
        Ok(graph) => graph,
        Err(code) => return code,
    };
    let classes = match classify_all(&graph) {
        Ok(classes) => classes,
        Err(e) => {
            writer.result(&format!("error: {e}"));
            return 1;
        }
    };
    writer.result(&dot::render(&graph, &classes));
    0
}
