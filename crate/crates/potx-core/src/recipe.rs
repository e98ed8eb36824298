//! Gap analysis: compare desired transparency targets against what the
//! deployed observers actually render transparent, and suggest observers
//! that close the difference.
//!
//! The analysis runs in five steps: classify every state and model, start
//! from an all-opaque baseline, apply the deployed observers' regions,
//! find targets whose transparency falls short of their required level,
//! and propose a minimal observer per shortfall.

use crate::classify::{classify_all, level_abilities, ClassifyError};
use crate::exec::map_ordered;
use crate::graph::{Level, NodeId, SystemGraph};
use crate::transparency::{opacity_map, TransparencyError};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// How transparent a target currently is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentTransparency {
    Opaque,
    /// Transparent, but the covering chain peaks below the required
    /// level.
    TransparentAtLevel(Level),
}

/// One target whose transparency falls short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub node: NodeId,
    pub current: CurrentTransparency,
    pub required: Level,
    pub needs_experimentability: bool,
}

/// A proposed observer closing one gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverSuggestion {
    pub gap: NodeId,
    pub minimum_level: Level,
    /// What the proposed observer must be able to do, quoted from the
    /// proficiency table.
    pub abilities: &'static str,
    pub requires_experimentable_framework: bool,
    /// Nodes the proposed observer should cover: the models along the
    /// cheapest path from existing transparency to the gap (the whole
    /// upstream model chain when nothing helpful is transparent), or the
    /// node itself for a measure target.
    pub candidate_cover: BTreeSet<NodeId>,
    /// True when no measurement chain reaches the gap node at all; no
    /// cover is suggested then.
    pub unmeasurable: bool,
}

/// Outcome of a full gap analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub system: String,
    /// Gaps sorted by node id; `suggestions[i]` addresses `gaps[i]`.
    pub gaps: Vec<Gap>,
    pub suggestions: Vec<ObserverSuggestion>,
    /// Number of gaps per required level.
    pub level_counts: BTreeMap<Level, usize>,
}

impl GapReport {
    pub fn is_clear(&self) -> bool {
        self.gaps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecipeError {
    #[error("the document declares no transparency targets")]
    NoTargets,
    #[error(transparent)]
    Transparency(#[from] TransparencyError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Runs the five analysis steps over the declared targets.
pub fn analyze_gaps(
    graph: &SystemGraph,
    deployed: &BTreeSet<NodeId>,
) -> Result<GapReport, RecipeError> {
    if graph.targets().is_empty() {
        return Err(RecipeError::NoTargets);
    }
    let classification = classify_all(graph)?;
    let opacity = opacity_map(graph, deployed)?;
    let transparent = opacity.transparent_nodes();

    let targets: Vec<NodeId> = graph.targets().iter().cloned().collect();
    let outcomes = map_ordered(targets, |target| -> Result<_, RecipeError> {
        let required = classification
            .required(&target)
            .ok_or_else(|| ClassifyError::UnknownNode(target.clone()))?;
        let current = if opacity.is_transparent(&target) {
            let effective = opacity
                .effective_level(&target)
                .expect("transparent nodes carry an effective level");
            if effective >= required {
                return Ok(None);
            }
            CurrentTransparency::TransparentAtLevel(effective)
        } else {
            CurrentTransparency::Opaque
        };
        let gap = Gap {
            node: target.clone(),
            current,
            required,
            needs_experimentability: required.get() >= 4,
        };
        let suggestion = suggest_with_frontier(graph, &transparent, &gap);
        Ok(Some((gap, suggestion)))
    });

    let mut gaps = Vec::new();
    let mut suggestions = Vec::new();
    let mut level_counts: BTreeMap<Level, usize> = BTreeMap::new();
    for outcome in outcomes {
        if let Some((gap, suggestion)) = outcome? {
            *level_counts.entry(gap.required).or_default() += 1;
            gaps.push(gap);
            suggestions.push(suggestion);
        }
    }
    Ok(GapReport { system: graph.name().to_string(), gaps, suggestions, level_counts })
}

/// Proposes an observer for one gap, relative to what the deployed
/// observers already render transparent.
pub fn suggest_observer(
    graph: &SystemGraph,
    deployed: &BTreeSet<NodeId>,
    gap: &Gap,
) -> Result<ObserverSuggestion, RecipeError> {
    let opacity = opacity_map(graph, deployed)?;
    Ok(suggest_with_frontier(graph, &opacity.transparent_nodes(), gap))
}

fn suggest_with_frontier(
    graph: &SystemGraph,
    transparent: &BTreeSet<NodeId>,
    gap: &Gap,
) -> ObserverSuggestion {
    let (candidate_cover, unmeasurable) = candidate_cover(graph, transparent, &gap.node);
    ObserverSuggestion {
        gap: gap.node.clone(),
        minimum_level: gap.required,
        abilities: level_abilities(gap.required),
        requires_experimentable_framework: gap.required.get() >= 4,
        candidate_cover,
        unmeasurable,
    }
}

/// Everything upstream of `node` in the dataflow graph, including the
/// node itself: producer models, their input states, and so on down to
/// measures.
fn upstream_closure(graph: &SystemGraph, node: &NodeId) -> BTreeSet<NodeId> {
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut stack = vec![node.clone()];
    while let Some(current) = stack.pop() {
        if !seen.insert(current.clone()) {
            continue;
        }
        if graph.state(&current).is_some() {
            for producer in graph.producers_of(&current) {
                stack.push(producer.id.clone());
            }
        } else if let Some(model) = graph.model(&current) {
            stack.extend(model.inputs.iter().cloned());
        }
    }
    seen
}

/// Picks the nodes a new observer should cover to render `gap`
/// transparent, plus the unmeasurable flag.
fn candidate_cover(
    graph: &SystemGraph,
    transparent: &BTreeSet<NodeId>,
    gap: &NodeId,
) -> (BTreeSet<NodeId>, bool) {
    if graph.measure(gap).is_some() {
        // A measure is perceived directly; cover it as-is.
        return (BTreeSet::from([gap.clone()]), false);
    }
    let upstream = upstream_closure(graph, gap);
    if !upstream.iter().any(|id| graph.measure(id).is_some()) {
        return (BTreeSet::new(), true);
    }
    if let Some(cover) = shortest_path_cover(graph, transparent, gap) {
        return (cover, false);
    }
    // Nothing transparent reaches the gap: propose the whole upstream
    // model chain.
    let chain = upstream.into_iter().filter(|id| graph.model(id).is_some()).collect();
    (chain, false)
}

/// Cheapest model set connecting the transparency frontier to the gap.
///
/// Runs Dijkstra over the dataflow graph where entering a model costs 1
/// and entering a state costs 0, seeded with every transparent node. The
/// queue is ordered by (cost, node id), so equal-cost alternatives
/// resolve alphabetically and the result is deterministic. The returned
/// set holds the models entered along the path; for a state gap that
/// always includes the final producer, even when the producer itself was
/// already transparent (covering it again at a higher level is exactly
/// what lifts the state).
fn shortest_path_cover(
    graph: &SystemGraph,
    transparent: &BTreeSet<NodeId>,
    gap: &NodeId,
) -> Option<BTreeSet<NodeId>> {
    let mut queue: BTreeSet<(usize, NodeId)> = BTreeSet::new();
    let mut dist: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut pred: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for source in transparent {
        if source != gap {
            dist.insert(source.clone(), 0);
            queue.insert((0, source.clone()));
        }
    }
    if queue.is_empty() {
        return None;
    }

    while let Some((cost, node)) = queue.pop_first() {
        if dist.get(&node).copied() != Some(cost) {
            continue;
        }
        if node == *gap {
            break;
        }
        let successors: Vec<(NodeId, usize)> = if let Some(model) = graph.model(&node) {
            model.outputs.iter().map(|o| (o.clone(), 0)).collect()
        } else {
            graph.consumers_of(&node).into_iter().map(|m| (m.id.clone(), 1)).collect()
        };
        for (next, step) in successors {
            let next_cost = cost + step;
            if dist.get(&next).is_none_or(|&d| next_cost < d) {
                dist.insert(next.clone(), next_cost);
                pred.insert(next.clone(), node.clone());
                queue.insert((next_cost, next));
            }
        }
    }

    if !dist.contains_key(gap) {
        return None;
    }
    let mut path = vec![gap.clone()];
    let mut current = gap.clone();
    while let Some(previous) = pred.get(&current) {
        current = previous.clone();
        path.push(current.clone());
    }
    let source = path.last().cloned().expect("path holds at least the gap");
    let mut cover: BTreeSet<NodeId> = path
        .iter()
        .filter(|id| **id != source && graph.model(id).is_some())
        .cloned()
        .collect();
    if graph.state(gap).is_some() {
        if let Some(producer) = path.get(1) {
            if graph.model(producer).is_some() {
                cover.insert(producer.clone());
            }
        }
    }
    Some(cover)
}
