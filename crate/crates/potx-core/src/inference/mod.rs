//! Exact discrete inference over the transparent part of a system model.
//!
//! Domain-carrying states form a Bayesian network: each produced state's
//! conditional distribution comes from its producing model's probability
//! table, and each root state carries a prior. [`infer`] answers queries
//! by variable elimination but refuses to touch anything the deployed
//! observers leave opaque; [`brute_force_joint`] enumerates the full
//! joint instead and ignores transparency — it exists as an independent
//! oracle for testing.

mod factor;

use crate::exec::accumulate_indexed;
use crate::graph::{Cpt, NodeId, SystemGraph};
use crate::transparency::{opacity_map, OpacityMap, TransparencyError};
use factor::Factor;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

/// Observed values, one per evidence state.
pub type Evidence = BTreeMap<NodeId, String>;

/// Posterior over one state's domain, in domain declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    entries: Vec<(String, f64)>,
}

impl Distribution {
    pub fn get(&self, value: &str) -> Option<f64> {
        self.entries.iter().find(|(v, _)| v == value).map(|(_, p)| *p)
    }

    /// Value/probability pairs in domain declaration order.
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, f64)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferError {
    #[error("no state named {0}")]
    UnknownNode(NodeId),
    #[error("state {0} declares no domain")]
    NoDomain(NodeId),
    /// The query, an evidence state, or a node on the connecting paths is
    /// outside every deployed observer's region.
    #[error("node {0} is opaque to the deployed observers")]
    OpaqueQuery(NodeId),
    #[error("state {node} has no domain value named {value}")]
    UnknownValue { node: NodeId, value: String },
    #[error("state {0} is produced by more than one model; its distribution is ambiguous")]
    MultipleProducers(NodeId),
    /// Names the node that should carry the missing table: the producing
    /// model, or the root state itself for a prior.
    #[error("no probability table covers {0}")]
    MissingCpt(NodeId),
    #[error("the probability network contains a cycle through {0}")]
    CyclicModel(NodeId),
    #[error("the evidence assignment has zero probability")]
    ZeroProbabilityEvidence,
    #[error("joint enumeration refused: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Transparency(#[from] TransparencyError),
}

/// Maximum number of domained states [`brute_force_joint`] enumerates.
const ORACLE_MAX_STATES: usize = 20;
/// Maximum domain size [`brute_force_joint`] accepts.
const ORACLE_MAX_DOMAIN: usize = 4;

/// One network node: its domain and the table defining its distribution.
struct BnNode<'g> {
    domain: &'g [String],
    cpt: &'g Cpt,
}

/// Exact posterior of `query` given `evidence`, computed by variable
/// elimination over the states and models the deployed observers render
/// transparent. Elimination runs in reverse topological order with
/// alphabetical tie-breaking, so results are deterministic.
pub fn infer(
    graph: &SystemGraph,
    deployed: &BTreeSet<NodeId>,
    evidence: &Evidence,
    query: &NodeId,
) -> Result<Distribution, InferError> {
    let query_state = graph.state(query).ok_or_else(|| InferError::UnknownNode(query.clone()))?;
    let opacity = opacity_map(graph, deployed)?;
    if !opacity.is_transparent(query) {
        return Err(InferError::OpaqueQuery(query.clone()));
    }
    let query_domain =
        query_state.domain.as_deref().ok_or_else(|| InferError::NoDomain(query.clone()))?;
    validate_evidence(graph, evidence)?;

    let closure = transparent_closure(graph, &opacity, evidence, query)?;
    let order = topological_order(&closure)?;

    // One factor per network node, restricted by the evidence up front.
    let mut factors: Vec<Factor> = Vec::with_capacity(order.len());
    for id in &order {
        let node = &closure[id];
        let mut factor = node_factor(graph, id, node)?;
        for (observed, value) in evidence {
            if factor.has_var(observed) {
                let domain = closure[observed].domain;
                let index = domain
                    .iter()
                    .position(|v| v == value)
                    .expect("evidence values were validated against the domain");
                factor = factor.restrict(observed, index);
            }
        }
        factors.push(factor);
    }

    // Eliminate hidden variables leaf-first.
    for hidden in order.iter().rev() {
        if hidden == query || evidence.contains_key(hidden) {
            continue;
        }
        let (with_var, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.has_var(hidden));
        factors = rest;
        if !with_var.is_empty() {
            let joined = with_var.iter().fold(Factor::unit(), |acc, f| acc.product(f));
            factors.push(joined.sum_out(hidden));
        }
    }
    let result = factors.iter().fold(Factor::unit(), |acc, f| acc.product(f));
    let mass = result.sum();
    if mass <= 0.0 {
        return Err(InferError::ZeroProbabilityEvidence);
    }

    if let Some(observed) = evidence.get(query) {
        // Fully conditioned query: the posterior is an indicator, but only
        // after confirming the evidence as a whole has positive mass.
        let entries =
            query_domain.iter().map(|v| (v.clone(), f64::from(v == observed))).collect();
        return Ok(Distribution { entries });
    }
    debug_assert_eq!(result.vars, vec![query.clone()]);
    let entries = query_domain
        .iter()
        .zip(&result.values)
        .map(|(value, p)| (value.clone(), p / mass))
        .collect();
    Ok(Distribution { entries })
}

/// Posterior of `query` by full joint enumeration over every domained
/// state, ignoring observers entirely. Exponential in the state count,
/// so the size limits are hard errors.
pub fn brute_force_joint(
    graph: &SystemGraph,
    evidence: &Evidence,
    query: &NodeId,
) -> Result<Distribution, InferError> {
    let query_state = graph.state(query).ok_or_else(|| InferError::UnknownNode(query.clone()))?;
    let query_domain =
        query_state.domain.as_deref().ok_or_else(|| InferError::NoDomain(query.clone()))?;
    validate_evidence(graph, evidence)?;

    let ids: Vec<NodeId> =
        graph.states().filter(|s| s.domain.is_some()).map(|s| s.id.clone()).collect();
    if ids.len() > ORACLE_MAX_STATES {
        return Err(InferError::TooLarge(format!(
            "{} domained states exceed the {ORACLE_MAX_STATES}-state limit",
            ids.len()
        )));
    }
    for id in &ids {
        let domain = graph.state(id).and_then(|s| s.domain.as_deref()).unwrap_or_default();
        if domain.len() > ORACLE_MAX_DOMAIN {
            return Err(InferError::TooLarge(format!(
                "domain of {id} holds {} values, more than the {ORACLE_MAX_DOMAIN}-value limit",
                domain.len()
            )));
        }
    }

    let mut nodes: BTreeMap<NodeId, BnNode<'_>> = BTreeMap::new();
    for id in &ids {
        nodes.insert(id.clone(), resolve_node(graph, id)?);
    }
    let order = topological_order(&nodes)?;
    drop(order);

    // Mixed-radix enumeration over all domained states, alphabetical,
    // first id most significant.
    let card: Vec<usize> = ids.iter().map(|id| nodes[id].domain.len()).collect();
    let mut strides = vec![1usize; ids.len()];
    for i in (0..ids.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * card[i + 1];
    }
    let total: usize = card.iter().product();
    let position: BTreeMap<&NodeId, usize> =
        ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let query_pos = position[query];
    // Parent positions per node, aligned with its table's parent order.
    let parent_positions: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| nodes[id].cpt.parents.iter().map(|p| position[p]).collect())
        .collect();
    let evidence_digits: Vec<(usize, usize)> = evidence
        .iter()
        .map(|(id, value)| {
            let pos = position[id];
            let digit = nodes[id]
                .domain
                .iter()
                .position(|v| v == value)
                .expect("evidence values were validated against the domain");
            (pos, digit)
        })
        .collect();

    let buckets = accumulate_indexed(total, query_domain.len(), |flat| {
        let digit_at = |pos: usize| (flat / strides[pos]) % card[pos];
        for &(pos, digit) in &evidence_digits {
            if digit_at(pos) != digit {
                return (0, 0.0);
            }
        }
        let mut p = 1.0;
        for (i, id) in ids.iter().enumerate() {
            let node = &nodes[id];
            let parent_values: Vec<String> = parent_positions[i]
                .iter()
                .map(|&pp| nodes[&ids[pp]].domain[digit_at(pp)].clone())
                .collect();
            let own = &node.domain[digit_at(i)];
            p *= node.cpt.prob(&parent_values, own).unwrap_or(0.0);
        }
        (digit_at(query_pos), p)
    });

    let mass: f64 = buckets.iter().sum();
    if mass <= 0.0 {
        return Err(InferError::ZeroProbabilityEvidence);
    }
    let entries =
        query_domain.iter().zip(&buckets).map(|(v, p)| (v.clone(), p / mass)).collect();
    Ok(Distribution { entries })
}

/// Checks that every evidence node is a domained state and every value
/// belongs to the node's domain.
fn validate_evidence(graph: &SystemGraph, evidence: &Evidence) -> Result<(), InferError> {
    for (id, value) in evidence {
        let state = graph.state(id).ok_or_else(|| InferError::UnknownNode(id.clone()))?;
        let domain = state.domain.as_deref().ok_or_else(|| InferError::NoDomain(id.clone()))?;
        if !domain.iter().any(|v| v == value) {
            return Err(InferError::UnknownValue { node: id.clone(), value: value.clone() });
        }
    }
    Ok(())
}

/// Finds the domain and defining table for one state.
fn resolve_node<'g>(graph: &'g SystemGraph, id: &NodeId) -> Result<BnNode<'g>, InferError> {
    let state = graph.state(id).ok_or_else(|| InferError::UnknownNode(id.clone()))?;
    let domain =
        state.domain.as_deref().ok_or_else(|| InferError::NoDomain(id.clone()))? as &[String];
    let producers = graph.producers_of(id);
    let cpt = match producers.len() {
        0 => graph.cpt(id).ok_or_else(|| InferError::MissingCpt(id.clone()))?,
        1 => {
            let model = producers[0];
            let cpt =
                graph.cpt(&model.id).ok_or_else(|| InferError::MissingCpt(model.id.clone()))?;
            if cpt.output != *id {
                // The producer's table describes a different output state.
                return Err(InferError::MissingCpt(id.clone()));
            }
            cpt
        }
        _ => return Err(InferError::MultipleProducers(id.clone())),
    };
    Ok(BnNode { domain, cpt })
}

/// Collects the network nodes the query and evidence depend on,
/// breadth-first, erring on the first opaque state or model discovered.
fn transparent_closure<'g>(
    graph: &'g SystemGraph,
    opacity: &OpacityMap,
    evidence: &Evidence,
    query: &NodeId,
) -> Result<BTreeMap<NodeId, BnNode<'g>>, InferError> {
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    queue.push_back(query.clone());
    queue.extend(evidence.keys().cloned());
    let mut closure: BTreeMap<NodeId, BnNode<'g>> = BTreeMap::new();
    while let Some(id) = queue.pop_front() {
        if closure.contains_key(&id) {
            continue;
        }
        if !opacity.is_transparent(&id) {
            return Err(InferError::OpaqueQuery(id));
        }
        if let [model] = graph.producers_of(&id)[..] {
            if !opacity.is_transparent(&model.id) {
                return Err(InferError::OpaqueQuery(model.id.clone()));
            }
        }
        let node = resolve_node(graph, &id)?;
        queue.extend(node.cpt.parents.iter().cloned());
        closure.insert(id, node);
    }
    Ok(closure)
}

/// Parents-before-children order over the collected nodes, alphabetical
/// among ready nodes. Errs with the alphabetically first node left on a
/// cycle.
fn topological_order(nodes: &BTreeMap<NodeId, BnNode<'_>>) -> Result<Vec<NodeId>, InferError> {
    let mut in_degree: BTreeMap<&NodeId, usize> = BTreeMap::new();
    let mut children: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for (id, node) in nodes {
        let relevant =
            node.cpt.parents.iter().filter(|p| nodes.contains_key(*p)).count();
        in_degree.insert(id, relevant);
        for parent in &node.cpt.parents {
            if nodes.contains_key(parent) {
                children.entry(parent).or_default().push(id);
            }
        }
    }
    let mut ready: BTreeSet<&NodeId> =
        in_degree.iter().filter(|(_, &d)| d == 0).map(|(id, _)| *id).collect();
    let mut order: Vec<NodeId> = Vec::with_capacity(nodes.len());
    while let Some(id) = ready.pop_first() {
        order.push(id.clone());
        for &child in children.get(id).into_iter().flatten() {
            let degree = in_degree.get_mut(child).expect("child is a collected node");
            *degree -= 1;
            if *degree == 0 {
                ready.insert(child);
            }
        }
    }
    if order.len() < nodes.len() {
        let stuck = nodes
            .keys()
            .find(|id| !order.contains(id))
            .expect("some node is left when the order is short");
        return Err(InferError::CyclicModel(stuck.clone()));
    }
    Ok(order)
}

/// Builds the conditional-probability factor for one network node, with
/// variables ordered parents-then-child.
fn node_factor(
    graph: &SystemGraph,
    id: &NodeId,
    node: &BnNode<'_>,
) -> Result<Factor, InferError> {
    let mut vars: Vec<NodeId> = node.cpt.parents.clone();
    vars.push(id.clone());
    let card: Vec<usize> = vars
        .iter()
        .map(|v| {
            graph
                .state(v)
                .and_then(|s| s.domain.as_ref())
                .map(|d| d.len())
                .ok_or_else(|| InferError::NoDomain(v.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut strides = vec![1usize; card.len()];
    for i in (0..card.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * card[i + 1];
    }
    let total: usize = card.iter().product();
    let mut values = vec![0.0; total];
    for (flat, slot) in values.iter_mut().enumerate() {
        let parent_values: Vec<String> = node
            .cpt
            .parents
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let digit = (flat / strides[i]) % card[i];
                graph.state(p).and_then(|s| s.domain.as_ref()).expect("parents are domained")
                    [digit]
                    .clone()
            })
            .collect();
        let child_digit = (flat / strides[card.len() - 1]) % card[card.len() - 1];
        let value = &node.domain[child_digit];
        let Some(p) = node.cpt.prob(&parent_values, value) else {
            // A row is missing; the table does not cover its parents.
            return Err(InferError::MissingCpt(node.cpt.node.clone()));
        };
        *slot = p;
    }
    Ok(Factor::new(vars, card, values))
}
