//! Canonical serializer: deterministic, diff-friendly output.

use super::ast::*;
use std::fmt::Write;

/// Renders the canonical form of a document.
///
/// Statements are grouped by kind in the order measures, states, models,
/// observers, cpts, targets, expects, each group sorted by id. Semantic
/// orderings (model inputs and outputs, domain values) are preserved.
/// `serialize` is a fixed point: serializing a parse of its own output
/// reproduces the text byte for byte.
pub fn serialize(doc: &Document) -> String {
    let doc = doc.canonical();
    let mut out = String::new();
    let _ = writeln!(out, "system {} {{", doc.name);
    for m in &doc.measures {
        let _ = writeln!(out, "  measure {}{}", m.id, label_suffix(&m.label));
    }
    for s in &doc.states {
        let mut line = format!("  state {} {}", s.id, physicality_word(s));
        if let Some(domain) = &s.domain {
            let _ = write!(line, " domain {{ {} }}", domain.join(", "));
        }
        line.push_str(&label_suffix(&s.label));
        let _ = writeln!(out, "{line}");
    }
    for m in &doc.models {
        let mut line = format!(
            "  model {} {{ in: {}; out: {}",
            m.id,
            m.inputs.join(", "),
            m.outputs.join(", ")
        );
        if m.goal {
            line.push_str("; goal");
        }
        if let Some(group) = &m.alt_group {
            let _ = write!(line, "; alt-of: {group}");
        }
        line.push_str(" }");
        let _ = writeln!(out, "{line}");
    }
    for o in &doc.observers {
        let mut line = format!("  observer {} level {}", o.id, o.level);
        if o.experimentable {
            line.push_str(" experimentable");
        }
        line.push_str(" {");
        if !o.covers.is_empty() {
            let _ = write!(line, " covers: {};", o.covers.join(", "));
        }
        if !o.embeds.is_empty() {
            let _ = write!(line, " embeds: {};", o.embeds.join(", "));
        }
        line.push_str(" }");
        let _ = writeln!(out, "{line}");
    }
    for c in &doc.cpts {
        let _ = writeln!(out, "  cpt {} {{", c.node);
        for row in &c.rows {
            let entries: Vec<String> =
                row.entries.iter().map(|(v, p)| format!("{v}: {p}")).collect();
            let _ = writeln!(
                out,
                "    row ({}) -> {{ {} }}",
                row.parents.join(", "),
                entries.join(", ")
            );
        }
        let _ = writeln!(out, "  }}");
    }
    for t in &doc.targets {
        let _ = writeln!(out, "  target transparent {{ {} }}", t.ids.join(", "));
    }
    for e in &doc.expects {
        let _ = writeln!(out, "  expect {{");
        for assertion in &e.assertions {
            let _ = writeln!(out, "    {}", assertion_text(assertion));
        }
        let _ = writeln!(out, "  }}");
    }
    out.push_str("}\n");
    out
}

fn physicality_word(s: &StateDecl) -> &'static str {
    match s.physicality {
        crate::graph::Physicality::Physical => "physical",
        crate::graph::Physicality::NonPhysical => "nonphysical",
    }
}

fn label_suffix(label: &Option<String>) -> String {
    match label {
        Some(text) => format!(" \"{}\"", text.replace('\\', "\\\\").replace('"', "\\\"")),
        None => String::new(),
    }
}

/// Text of an assertion, identical to its source syntax.
/// Canonical one-line text of an expect assertion, as it appears in a
/// serialized document.
pub fn assertion_text(assertion: &Assertion) -> String {
    match assertion {
        Assertion::ModelIs { model, class } => format!("model {model} is {}", class.as_str()),
        Assertion::ObserverOk { observer } => format!("observer {observer} ok"),
        Assertion::ObserverViolates { observer, rule } => {
            format!("observer {observer} violates {rule}")
        }
        Assertion::GapLevel { node, level } => format!("gap {node} level {level}"),
    }
}
