//! Core data model: nodes, models, observers, and the resolved system graph.
//!
//! A [`SystemGraph`] is immutable after construction. [`resolve`] builds one
//! from a parsed [`crate::dsl::Document`] and rejects any declaration that
//! violates the structural rules; [`validate_structure`] re-checks the same
//! rules on an arbitrary graph (useful for graphs assembled with
//! [`SystemGraph::from_parts`]) and reports findings instead of failing.

mod resolve;
mod validate;

pub use resolve::{resolve, ResolveError};
pub use validate::{validate_structure, Finding, Severity, ValidationReport};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Identifier of a measure, state, model, or observer.
///
/// Identifiers are ASCII letters, digits, and underscores, not starting with
/// a digit, and are unique across all node categories of one system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True if `s` is a well-formed identifier.
    pub fn is_valid_identifier(s: &str) -> bool {
        let mut chars = s.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId::new(s)
    }
}

/// Observer level on the knowledge stairway, 0 through 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub const MIN: Level = Level(0);
    pub const MAX: Level = Level(5);

    pub fn new(value: u8) -> Option<Level> {
        (value <= 5).then_some(Level(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// One level below, or `None` at level 0.
    pub fn decrement(self) -> Option<Level> {
        self.0.checked_sub(1).map(Level)
    }
}

impl TryFrom<u8> for Level {
    type Error = u8;

    fn try_from(value: u8) -> Result<Self, u8> {
        Level::new(value).ok_or(value)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether a state is part of the physical world or internal to a human.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Physicality {
    Physical,
    NonPhysical,
}

/// Raw sensor channel or other directly perceivable symbol source.
///
/// Measures never have incoming edges; models consume them as inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub id: NodeId,
    pub label: Option<String>,
}

/// A state of the modeled system, physical or non-physical.
///
/// `domain` optionally lists the categorical values the state can take, in
/// declaration order; it must hold at least two values when present.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub id: NodeId,
    pub physicality: Physicality,
    pub domain: Option<Vec<String>>,
    pub label: Option<String>,
}

/// A model mapping inputs (measures or states) to output states.
///
/// `inputs` keeps declaration order because conditional probability tables
/// list parent values in that order. `alt_group` marks deliberately competing
/// models that explain the same output.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub id: NodeId,
    pub inputs: Vec<NodeId>,
    pub outputs: Vec<NodeId>,
    pub goal: bool,
    pub alt_group: Option<String>,
}

/// An observer with a stairway level, covering nodes and embedding observers.
///
/// Embeds form a forest: an observer has at most one parent and no embedding
/// cycles exist. Within one embedding tree all cover sets are disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Observer {
    pub id: NodeId,
    pub level: Level,
    pub experimentable: bool,
    pub covers: BTreeSet<NodeId>,
    pub embeds: BTreeSet<NodeId>,
}

/// Conditional probability table attached to a model, or a prior attached to
/// a root state (a state no model produces).
///
/// `parents` are the model's domain-carrying state inputs in declaration
/// order; rows cover the full parent-value product exactly once and each row
/// sums to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    /// The model this table describes, or the root state for a prior.
    pub node: NodeId,
    /// The state whose distribution the rows define.
    pub output: NodeId,
    pub parents: Vec<NodeId>,
    pub rows: BTreeMap<Vec<String>, BTreeMap<String, f64>>,
}

impl Cpt {
    /// Probability of `value` given the parent values, if the row exists.
    pub fn prob(&self, parent_values: &[String], value: &str) -> Option<f64> {
        let row = self.rows.get(parent_values)?;
        Some(row.get(value).copied().unwrap_or(0.0))
    }
}

/// Node category, for dispatching on an id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Measure,
    State,
    Model,
    Observer,
}

/// A resolved, immutable system model.
///
/// All references are resolved and, when built through [`resolve`], the
/// structural invariants hold. Graphs assembled with
/// [`SystemGraph::from_parts`] bypass those checks; run
/// [`validate_structure`] on them before trusting analysis results.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGraph {
    name: String,
    measures: BTreeMap<NodeId, Measure>,
    states: BTreeMap<NodeId, State>,
    models: BTreeMap<NodeId, Model>,
    observers: BTreeMap<NodeId, Observer>,
    cpts: BTreeMap<NodeId, Cpt>,
    targets: BTreeSet<NodeId>,
}

impl SystemGraph {
    /// Assembles a graph without structural validation.
    ///
    /// Entries are keyed by id; a repeated id within one category keeps the
    /// last entry. Intended for tests and generators; declarations parsed
    /// from text should go through [`resolve`] instead.
    pub fn from_parts(
        name: impl Into<String>,
        measures: Vec<Measure>,
        states: Vec<State>,
        models: Vec<Model>,
        observers: Vec<Observer>,
        cpts: Vec<Cpt>,
        targets: BTreeSet<NodeId>,
    ) -> SystemGraph {
        SystemGraph {
            name: name.into(),
            measures: measures.into_iter().map(|m| (m.id.clone(), m)).collect(),
            states: states.into_iter().map(|s| (s.id.clone(), s)).collect(),
            models: models.into_iter().map(|m| (m.id.clone(), m)).collect(),
            observers: observers.into_iter().map(|o| (o.id.clone(), o)).collect(),
            cpts: cpts.into_iter().map(|c| (c.node.clone(), c)).collect(),
            targets,
        }
    }

    /// Copy of this graph with additional observers, e.g. instantiated
    /// suggestions from gap analysis. No validation is performed.
    pub fn with_observers(&self, extra: Vec<Observer>) -> SystemGraph {
        let mut graph = self.clone();
        for observer in extra {
            graph.observers.insert(observer.id.clone(), observer);
        }
        graph
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn measures(&self) -> impl Iterator<Item = &Measure> {
        self.measures.values()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.states.values()
    }

    pub fn models(&self) -> impl Iterator<Item = &Model> {
        self.models.values()
    }

    pub fn observers(&self) -> impl Iterator<Item = &Observer> {
        self.observers.values()
    }

    pub fn cpts(&self) -> impl Iterator<Item = &Cpt> {
        self.cpts.values()
    }

    pub fn measure(&self, id: &NodeId) -> Option<&Measure> {
        self.measures.get(id)
    }

    pub fn state(&self, id: &NodeId) -> Option<&State> {
        self.states.get(id)
    }

    pub fn model(&self, id: &NodeId) -> Option<&Model> {
        self.models.get(id)
    }

    pub fn observer(&self, id: &NodeId) -> Option<&Observer> {
        self.observers.get(id)
    }

    /// Table attached to `id`, which names a model or a root state.
    pub fn cpt(&self, id: &NodeId) -> Option<&Cpt> {
        self.cpts.get(id)
    }

    pub fn targets(&self) -> &BTreeSet<NodeId> {
        &self.targets
    }

    pub fn node_kind(&self, id: &NodeId) -> Option<NodeKind> {
        if self.measures.contains_key(id) {
            Some(NodeKind::Measure)
        } else if self.states.contains_key(id) {
            Some(NodeKind::State)
        } else if self.models.contains_key(id) {
            Some(NodeKind::Model)
        } else if self.observers.contains_key(id) {
            Some(NodeKind::Observer)
        } else {
            None
        }
    }

    /// Measures, states, and models (the nodes subject to transparency),
    /// in sorted order.
    pub fn content_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .measures
            .keys()
            .chain(self.states.keys())
            .chain(self.models.keys())
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    /// Models that output the given state, in sorted order.
    pub fn producers_of(&self, state: &NodeId) -> Vec<&Model> {
        self.models
            .values()
            .filter(|m| m.outputs.contains(state))
            .collect()
    }

    /// Models that take the given node as input, in sorted order.
    pub fn consumers_of(&self, node: &NodeId) -> Vec<&Model> {
        self.models
            .values()
            .filter(|m| m.inputs.contains(node))
            .collect()
    }

    /// Map from embedded observer to its embedding parent.
    pub fn observer_parents(&self) -> BTreeMap<NodeId, NodeId> {
        let mut parents = BTreeMap::new();
        for observer in self.observers.values() {
            for child in &observer.embeds {
                parents.insert(child.clone(), observer.id.clone());
            }
        }
        parents
    }

    /// Root of the embedding tree containing `id`.
    ///
    /// Stops at the first repeated observer so malformed graphs with
    /// embedding cycles cannot loop forever.
    pub fn observer_root(&self, id: &NodeId) -> NodeId {
        let parents = self.observer_parents();
        let mut current = id.clone();
        let mut seen = BTreeSet::new();
        while let Some(parent) = parents.get(&current) {
            if !seen.insert(current.clone()) {
                break;
            }
            current = parent.clone();
        }
        current
    }

    /// The observer and every observer transitively embedded below it,
    /// in sorted order.
    pub fn observer_subtree(&self, id: &NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![id.clone()];
        while let Some(current) = stack.pop() {
            if !seen.insert(current.clone()) {
                continue;
            }
            if let Some(observer) = self.observers.get(&current) {
                stack.extend(observer.embeds.iter().cloned());
            }
        }
        seen.into_iter().collect()
    }

    /// Observers on the embedding path from the tree root down to `id`,
    /// inclusive.
    pub fn observer_chain(&self, id: &NodeId) -> Vec<NodeId> {
        let parents = self.observer_parents();
        let mut chain = vec![id.clone()];
        let mut seen = BTreeSet::new();
        seen.insert(id.clone());
        let mut current = id.clone();
        while let Some(parent) = parents.get(&current) {
            if !seen.insert(parent.clone()) {
                break;
            }
            chain.push(parent.clone());
            current = parent.clone();
        }
        chain.reverse();
        chain
    }
}
