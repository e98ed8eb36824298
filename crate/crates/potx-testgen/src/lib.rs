//! Seeded random generators for system documents.
//!
//! Everything here is deterministic in the seed (ChaCha8 streams), so
//! property and acceptance tests can freeze failing cases by seed. Three
//! generators cover the main shapes tests need:
//!
//! * [`random_graph`] — structurally valid documents with a mix of
//!   perspectives, multi-output models, goal/alternative markers, and
//!   observer forests; guaranteed to resolve.
//! * [`random_bn`] — acyclic binary-domain probability networks with
//!   complete tables and one observer covering everything, so inference
//!   succeeds on every state.
//! * [`random_document_text`] — raw `.potx` text with scrambled item
//!   order, comments, and labels, for parser round-trip tests.

use potx_core::dsl::{
    CptDecl, Document, MeasureDecl, ModelDecl, ObserverDecl, RowDecl, StateDecl, TargetDecl,
};
use potx_core::graph::Physicality;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Size bounds for [`random_graph`].
#[derive(Debug, Clone)]
pub struct GraphConfig {
    pub max_measures: usize,
    pub max_states: usize,
    pub max_models: usize,
    pub max_observers: usize,
    /// Declare a `target transparent { … }` block.
    pub with_targets: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            max_measures: 4,
            max_states: 8,
            max_models: 6,
            max_observers: 4,
            with_targets: true,
        }
    }
}

/// A structurally valid random document: it parses, serializes, and
/// resolves, though its observers may well violate level rules (that is
/// intentional — analyses must cope with invalid observers).
pub fn random_graph(seed: u64, cfg: &GraphConfig) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_measures = rng.gen_range(1..=cfg.max_measures.max(1));
    let n_states = rng.gen_range(2..=cfg.max_states.max(2));
    let n_models = rng.gen_range(1..=cfg.max_models.max(1));

    let measures: Vec<MeasureDecl> = (0..n_measures)
        .map(|i| MeasureDecl {
            id: format!("m{i}"),
            label: maybe_label(&mut rng, "sensor"),
        })
        .collect();
    let states: Vec<StateDecl> = (0..n_states)
        .map(|i| StateDecl {
            id: format!("s{i}"),
            physicality: if rng.gen_bool(0.65) {
                Physicality::Physical
            } else {
                Physicality::NonPhysical
            },
            domain: None,
            label: maybe_label(&mut rng, "state"),
        })
        .collect();

    let state_ids: Vec<String> = states.iter().map(|s| s.id.clone()).collect();
    let measure_ids: Vec<String> = measures.iter().map(|m| m.id.clone()).collect();
    let mut input_pool: Vec<String> = measure_ids.iter().chain(&state_ids).cloned().collect();

    let mut models: Vec<ModelDecl> = Vec::new();
    for i in 0..n_models {
        input_pool.shuffle(&mut rng);
        let n_inputs = rng.gen_range(1..=3.min(input_pool.len()));
        let inputs: Vec<String> = input_pool[..n_inputs].to_vec();
        // Outputs are states not used as inputs by this same model.
        let mut output_pool: Vec<String> =
            state_ids.iter().filter(|s| !inputs.contains(s)).cloned().collect();
        if output_pool.is_empty() {
            continue;
        }
        output_pool.shuffle(&mut rng);
        let n_outputs = rng.gen_range(1..=2.min(output_pool.len()));
        models.push(ModelDecl {
            id: format!("f{i}"),
            inputs,
            outputs: output_pool[..n_outputs].to_vec(),
            goal: rng.gen_bool(0.12),
            alt_group: rng.gen_bool(0.1).then(|| format!("alt{}", rng.gen_range(0..2))),
        });
    }
    if models.is_empty() {
        // Guarantee at least one model so classification has work to do.
        models.push(ModelDecl {
            id: "f0".to_string(),
            inputs: vec![measure_ids[0].clone()],
            outputs: vec![state_ids[0].clone()],
            goal: false,
            alt_group: None,
        });
    }

    // Observers cover disjoint chunks of the content nodes, so any embed
    // shape is legal; a coin flip chains an observer into its
    // predecessor, yielding forests with both roots and chains.
    let mut coverable: Vec<String> = measure_ids
        .iter()
        .chain(&state_ids)
        .chain(models.iter().map(|m| &m.id))
        .cloned()
        .collect();
    coverable.shuffle(&mut rng);
    let n_observers = rng.gen_range(0..=cfg.max_observers);
    let mut observers: Vec<ObserverDecl> = Vec::new();
    let mut cursor = 0usize;
    for j in 0..n_observers {
        let take = rng.gen_range(0..=3.min(coverable.len().saturating_sub(cursor)));
        let covers: Vec<String> = coverable[cursor..cursor + take].to_vec();
        cursor += take;
        let embeds = if j > 0 && rng.gen_bool(0.5) {
            vec![format!("o{}", j - 1)]
        } else {
            Vec::new()
        };
        observers.push(ObserverDecl {
            id: format!("o{j}"),
            level: rng.gen_range(0..=5),
            experimentable: rng.gen_bool(0.3),
            covers,
            embeds,
        });
    }

    let targets = if cfg.with_targets {
        let mut pool = state_ids.clone();
        pool.shuffle(&mut rng);
        let take = rng.gen_range(1..=2.min(pool.len()));
        vec![TargetDecl { ids: pool[..take].to_vec() }]
    } else {
        Vec::new()
    };

    Document {
        name: format!("generated_{seed}"),
        measures,
        states,
        models,
        observers,
        cpts: Vec::new(),
        targets,
        expects: Vec::new(),
    }
}

/// An acyclic probability network: every state carries a binary domain,
/// produced states get one producing model with a complete table, root
/// states get priors, and the `watcher` observer covers all models and
/// root states so the whole network is transparent when it is deployed.
///
/// Probabilities are dyadic (multiples of 1/16) and never 0 or 1, so no
/// evidence assignment has zero mass.
pub fn random_bn(seed: u64, max_states: usize) -> Document {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_states.max(2));

    let states: Vec<StateDecl> = (0..n)
        .map(|i| StateDecl {
            id: format!("s{i}"),
            physicality: Physicality::Physical,
            domain: Some(vec!["low".to_string(), "high".to_string()]),
            label: None,
        })
        .collect();

    let mut models: Vec<ModelDecl> = Vec::new();
    let mut cpts: Vec<CptDecl> = Vec::new();
    let mut roots: Vec<String> = Vec::new();
    for i in 0..n {
        let id = format!("s{i}");
        let max_parents = i.min(3);
        let n_parents = if max_parents == 0 {
            0
        } else {
            // Bias toward 1–2 parents.
            *[0, 1, 1, 2, 2, max_parents].choose(&mut rng).unwrap() % (max_parents + 1)
        };
        if n_parents == 0 {
            roots.push(id.clone());
            cpts.push(CptDecl {
                node: id,
                rows: vec![RowDecl { parents: Vec::new(), entries: dyadic_row(&mut rng) }],
            });
        } else {
            let mut earlier: Vec<usize> = (0..i).collect();
            earlier.shuffle(&mut rng);
            let mut parent_idx: Vec<usize> = earlier[..n_parents].to_vec();
            parent_idx.sort_unstable();
            let parents: Vec<String> = parent_idx.iter().map(|p| format!("s{p}")).collect();
            let model_id = format!("p{i}");
            models.push(ModelDecl {
                id: model_id.clone(),
                inputs: parents.clone(),
                outputs: vec![id],
                goal: false,
                alt_group: None,
            });
            // One row per parent-value combination, low/high per parent.
            let mut rows = Vec::new();
            for combo in 0..(1usize << n_parents) {
                let values: Vec<String> = (0..n_parents)
                    .map(|b| {
                        if combo >> (n_parents - 1 - b) & 1 == 0 { "low" } else { "high" }
                            .to_string()
                    })
                    .collect();
                rows.push(RowDecl { parents: values, entries: dyadic_row(&mut rng) });
            }
            cpts.push(CptDecl { node: model_id, rows });
        }
    }

    let covers: Vec<String> =
        models.iter().map(|m| m.id.clone()).chain(roots.iter().cloned()).collect();
    let observers = vec![ObserverDecl {
        id: "watcher".to_string(),
        level: 3,
        experimentable: false,
        covers,
        embeds: Vec::new(),
    }];

    Document {
        name: format!("bn_{seed}"),
        measures: Vec::new(),
        states,
        models,
        observers,
        cpts,
        targets: vec![TargetDecl { ids: vec![format!("s{}", n - 1)] }],
        expects: Vec::new(),
    }
}

/// Raw document text with scrambled statement order, comments, irregular
/// whitespace, and labels — for exercising the parser and the round-trip
/// property on inputs far from canonical form.
pub fn random_document_text(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let doc = if rng.gen_bool(0.5) {
        random_graph(rng.gen(), &GraphConfig::default())
    } else {
        random_bn(rng.gen(), 6)
    };

    let mut items: Vec<String> = Vec::new();
    for m in &doc.measures {
        let label = m.label.as_deref().map(|l| format!(" \"{l}\"")).unwrap_or_default();
        items.push(format!("measure {}{label}", m.id));
    }
    for s in &doc.states {
        let phys = match s.physicality {
            Physicality::Physical => "physical",
            Physicality::NonPhysical => "nonphysical",
        };
        let domain = s
            .domain
            .as_ref()
            .map(|d| format!(" domain {{ {} }}", d.join(", ")))
            .unwrap_or_default();
        let label = s.label.as_deref().map(|l| format!(" \"{l}\"")).unwrap_or_default();
        items.push(format!("state {}  {phys}{domain}{label}", s.id));
    }
    for m in &doc.models {
        let mut tail = String::new();
        if m.goal {
            tail.push_str("; goal");
        }
        if let Some(group) = &m.alt_group {
            tail.push_str(&format!("; alt-of: {group}"));
        }
        items.push(format!(
            "model {} {{ in: {}; out: {}{tail} }}",
            m.id,
            m.inputs.join(", "),
            m.outputs.join(","),
        ));
    }
    for o in &doc.observers {
        let mut body = String::new();
        if !o.covers.is_empty() {
            body.push_str(&format!("covers: {}; ", o.covers.join(", ")));
        }
        if !o.embeds.is_empty() {
            body.push_str(&format!("embeds: {}; ", o.embeds.join(", ")));
        }
        let exp = if o.experimentable { " experimentable" } else { "" };
        items.push(format!("observer {} level {}{exp} {{ {body}}}", o.id, o.level));
    }
    for c in &doc.cpts {
        let mut body = String::new();
        for row in &c.rows {
            let entries: Vec<String> =
                row.entries.iter().map(|(v, p)| format!("{v}: {p}")).collect();
            body.push_str(&format!(
                "  row ({}) -> {{ {} }}\n",
                row.parents.join(", "),
                entries.join(", ")
            ));
        }
        items.push(format!("cpt {} {{\n{body}}}", c.node));
    }
    for t in &doc.targets {
        items.push(format!("target transparent {{ {} }}", t.ids.join(", ")));
    }

    items.shuffle(&mut rng);
    let mut text = String::new();
    if rng.gen_bool(0.5) {
        text.push_str("# generated document\n");
    }
    text.push_str(&format!("system {} {{\n", doc.name));
    for item in items {
        if rng.gen_bool(0.25) {
            text.push_str("  # noise comment\n");
        }
        let indent = if rng.gen_bool(0.3) { "      " } else { "  " };
        text.push_str(indent);
        text.push_str(&item);
        text.push('\n');
        if rng.gen_bool(0.15) {
            text.push('\n');
        }
    }
    text.push_str("}\n");
    text
}

/// One probability row over {low, high}: p and 1−p with p a multiple of
/// 1/16, never 0 or 1.
fn dyadic_row(rng: &mut ChaCha8Rng) -> Vec<(String, f64)> {
    let k = rng.gen_range(1..=15) as f64;
    vec![("low".to_string(), k / 16.0), ("high".to_string(), 1.0 - k / 16.0)]
}

fn maybe_label(rng: &mut ChaCha8Rng, noun: &str) -> Option<String> {
    rng.gen_bool(0.25).then(|| format!("{noun} {}", rng.gen_range(0..100)))
}
