//! Observer-generated transparency regions and observer constraint checks.
//!
//! Deploying an observer renders part of the otherwise opaque system
//! comprehensible: its directly covered nodes, everything covered by
//! observers embedded in it, and the interface states of covered models.
//! An observer only contributes if it satisfies every level and
//! experimentability constraint; a violating observer is fully inert.

use crate::classify::{classify_model, direct_cover_level, required_level, ModelClass};
use crate::exec::map_ordered;
use crate::graph::{Level, NodeId, Observer, SystemGraph};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// The nodes a single observer tree declares transparent (covers plus
/// embedded observers' regions, without interface expansion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransparencyRegion {
    pub observer: NodeId,
    pub nodes: BTreeSet<NodeId>,
}

/// Constraint an observer can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationRule {
    /// A directly covered node needs a higher-level observer.
    LevelTooLow,
    /// A level-4+ observer over goal-level content lacks the
    /// experimentable-framework capability.
    ExperimentabilityMissing,
    /// An embedded observer outranks its parent.
    EmbedLevelExceedsParent,
    /// A covered bridge model's embedding chain never reaches level 3.
    BridgeChainTooShallow,
}

impl ViolationRule {
    pub fn name(self) -> &'static str {
        match self {
            ViolationRule::LevelTooLow => "LevelTooLow",
            ViolationRule::ExperimentabilityMissing => "ExperimentabilityMissing",
            ViolationRule::EmbedLevelExceedsParent => "EmbedLevelExceedsParent",
            ViolationRule::BridgeChainTooShallow => "BridgeChainTooShallow",
        }
    }

    pub fn from_name(name: &str) -> Option<ViolationRule> {
        match name {
            "LevelTooLow" => Some(ViolationRule::LevelTooLow),
            "ExperimentabilityMissing" => Some(ViolationRule::ExperimentabilityMissing),
            "EmbedLevelExceedsParent" => Some(ViolationRule::EmbedLevelExceedsParent),
            "BridgeChainTooShallow" => Some(ViolationRule::BridgeChainTooShallow),
            _ => None,
        }
    }
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One broken constraint, attributed to the responsible observer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObserverViolation {
    pub observer: NodeId,
    pub node: Option<NodeId>,
    pub rule: ViolationRule,
    pub detail: String,
}

impl fmt::Display for ObserverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Some(node) => {
                write!(f, "{}: {} at {}: {}", self.observer, self.rule, node, self.detail)
            }
            None => write!(f, "{}: {}: {}", self.observer, self.rule, self.detail),
        }
    }
}

/// Whether a node is comprehensible, and to whom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Opacity {
    /// Transparent under the named deployed observer (alphabetically
    /// first if several cover the node).
    Transparent(NodeId),
    Opaque,
}

/// Opacity of every measure, state, and model under a deployed observer
/// set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpacityMap {
    entries: BTreeMap<NodeId, Opacity>,
    effective: BTreeMap<NodeId, Level>,
}

impl OpacityMap {
    pub fn opacity(&self, id: &NodeId) -> Option<&Opacity> {
        self.entries.get(id)
    }

    pub fn is_transparent(&self, id: &NodeId) -> bool {
        matches!(self.entries.get(id), Some(Opacity::Transparent(_)))
    }

    /// Highest observer level along the embedding chain of any coverer
    /// that renders the node transparent. `None` for opaque nodes.
    pub fn effective_level(&self, id: &NodeId) -> Option<Level> {
        self.effective.get(id).copied()
    }

    /// All entries, sorted by node id.
    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &Opacity)> {
        self.entries.iter()
    }

    pub fn transparent_nodes(&self) -> BTreeSet<NodeId> {
        self.entries
            .iter()
            .filter(|(_, o)| matches!(o, Opacity::Transparent(_)))
            .map(|(id, _)| id.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransparencyError {
    #[error("no observer named {0}")]
    UnknownObserver(NodeId),
}

/// Region declared by the observer tree rooted at `observer`: its covers
/// plus every embedded observer's covers.
pub fn transparent_region(graph: &SystemGraph, observer: &Observer) -> TransparencyRegion {
    let mut nodes = BTreeSet::new();
    for member_id in graph.observer_subtree(&observer.id) {
        if let Some(member) = graph.observer(&member_id) {
            nodes.extend(member.covers.iter().cloned());
        }
    }
    TransparencyRegion { observer: observer.id.clone(), nodes }
}

/// What one observer (ignoring its embedded observers) renders
/// transparent: its covers plus the input and output states of every
/// covered model, whose values are the model's interface.
fn member_contribution(graph: &SystemGraph, member: &Observer) -> BTreeSet<NodeId> {
    let mut nodes: BTreeSet<NodeId> = member
        .covers
        .iter()
        .filter(|id| graph.observer(id).is_none())
        .cloned()
        .collect();
    for covered in &member.covers {
        if let Some(model) = graph.model(covered) {
            for input in &model.inputs {
                if graph.state(input).is_some() {
                    nodes.insert(input.clone());
                }
            }
            for output in &model.outputs {
                nodes.insert(output.clone());
            }
        }
    }
    nodes
}

/// Full transparent set of an observer tree: the region plus interface
/// states of covered models.
pub fn expanded_region(graph: &SystemGraph, observer: &Observer) -> BTreeSet<NodeId> {
    let mut nodes = BTreeSet::new();
    for member_id in graph.observer_subtree(&observer.id) {
        if let Some(member) = graph.observer(&member_id) {
            nodes.extend(member_contribution(graph, member));
        }
    }
    nodes
}

/// Highest level along the embedding chain from `id` up to its forest
/// root. Embedding is structural: the chain counts whether or not the
/// ancestors are deployed.
fn chain_max_level(graph: &SystemGraph, id: &NodeId) -> Level {
    graph
        .observer_chain(id)
        .iter()
        .filter_map(|member| graph.observer(member))
        .map(|o| o.level)
        .max()
        .unwrap_or(Level::MIN)
}

/// Checks the observer tree rooted at `observer` against all level and
/// experimentability constraints.
///
/// Four rules apply, each attributed to the observer that breaks it:
///
/// * every directly covered node's direct-cover level must not exceed
///   the covering observer's level ([`ViolationRule::LevelTooLow`]);
/// * a covered bridge model's embedding chain must reach level 3
///   somewhere ([`ViolationRule::BridgeChainTooShallow`]) — the bridge
///   itself is level-2 work, the chain it reports into is not;
/// * when an observer's contribution contains a node requiring level 4
///   or higher, every chain observer at level 4+ must be experimentable
///   ([`ViolationRule::ExperimentabilityMissing`]);
/// * an embedded observer must not outrank its parent
///   ([`ViolationRule::EmbedLevelExceedsParent`]).
///
/// Chains are structural (they extend through embedding parents even
/// above `observer`), so checking an embedded observer on its own sees
/// the same chain context as checking its root.
pub fn check_observer(graph: &SystemGraph, observer: &Observer) -> Vec<ObserverViolation> {
    let mut violations: BTreeSet<ObserverViolation> = BTreeSet::new();
    for member_id in graph.observer_subtree(&observer.id) {
        let Some(member) = graph.observer(&member_id) else { continue };

        for child_id in &member.embeds {
            if let Some(child) = graph.observer(child_id) {
                if child.level > member.level {
                    violations.insert(ObserverViolation {
                        observer: member.id.clone(),
                        node: None,
                        rule: ViolationRule::EmbedLevelExceedsParent,
                        detail: format!(
                            "embedded observer {} has level {}, above parent level {}",
                            child.id, child.level, member.level
                        ),
                    });
                }
            }
        }

        let chain = graph.observer_chain(&member_id);
        let chain_max = chain_max_level(graph, &member_id);

        for covered in &member.covers {
            if let Ok(direct) = direct_cover_level(graph, covered) {
                if direct > member.level {
                    violations.insert(ObserverViolation {
                        observer: member.id.clone(),
                        node: Some(covered.clone()),
                        rule: ViolationRule::LevelTooLow,
                        detail: format!(
                            "{covered} needs a level-{direct} coverer, {} has level {}",
                            member.id, member.level
                        ),
                    });
                }
            }
            if let Some(model) = graph.model(covered) {
                if classify_model(graph, model) == Ok(ModelClass::Bridge)
                    && chain_max < Level::new(3).unwrap()
                {
                    violations.insert(ObserverViolation {
                        observer: member.id.clone(),
                        node: Some(covered.clone()),
                        rule: ViolationRule::BridgeChainTooShallow,
                        detail: format!(
                            "bridge {covered} sits under a chain peaking at level {chain_max}, \
                             the border needs level 3"
                        ),
                    });
                }
            }
        }

        let needs_experimentation = member_contribution(graph, member).iter().any(|node| {
            required_level(graph, node).map(|l| l.get() >= 4).unwrap_or(false)
        });
        if needs_experimentation {
            for chain_id in &chain {
                if let Some(anchor) = graph.observer(chain_id) {
                    if anchor.level.get() >= 4 && !anchor.experimentable {
                        violations.insert(ObserverViolation {
                            observer: anchor.id.clone(),
                            node: None,
                            rule: ViolationRule::ExperimentabilityMissing,
                            detail: format!(
                                "level-{} observer over goal-level content must embed into \
                                 an experimentable framework",
                                anchor.level
                            ),
                        });
                    }
                }
            }
        }
    }
    violations.into_iter().collect()
}

/// Checks every observer in the graph; duplicated findings (a violation
/// visible from several roots) are reported once.
pub fn check_all_observers(graph: &SystemGraph) -> Vec<ObserverViolation> {
    let observers: Vec<&Observer> = graph.observers().collect();
    let per_observer = map_ordered(observers, |o| check_observer(graph, o));
    let merged: BTreeSet<ObserverViolation> = per_observer.into_iter().flatten().collect();
    merged.into_iter().collect()
}

/// Computes the opacity of every measure, state, and model under the
/// deployed observers.
///
/// Only violation-free observer trees contribute. When several deployed
/// observers render the same node transparent, attribution goes to the
/// alphabetically first; the recorded effective level is the highest
/// chain level among all contributing coverers.
pub fn opacity_map(
    graph: &SystemGraph,
    deployed: &BTreeSet<NodeId>,
) -> Result<OpacityMap, TransparencyError> {
    let mut roots: Vec<&Observer> = Vec::new();
    for id in deployed {
        match graph.observer(id) {
            Some(observer) => roots.push(observer),
            None => return Err(TransparencyError::UnknownObserver(id.clone())),
        }
    }
    roots.sort_by(|a, b| a.id.cmp(&b.id));

    let checked = map_ordered(roots, |observer| {
        (observer, check_observer(graph, observer).is_empty())
    });

    let mut entries: BTreeMap<NodeId, Opacity> = graph
        .content_ids()
        .into_iter()
        .map(|id| (id, Opacity::Opaque))
        .collect();
    let mut effective: BTreeMap<NodeId, Level> = BTreeMap::new();

    for (observer, valid) in checked {
        if !valid {
            continue;
        }
        for member_id in graph.observer_subtree(&observer.id) {
            let Some(member) = graph.observer(&member_id) else { continue };
            let chain_max = chain_max_level(graph, &member_id);
            for node in member_contribution(graph, member) {
                if let Some(slot) = entries.get_mut(&node) {
                    if matches!(slot, Opacity::Opaque) {
                        *slot = Opacity::Transparent(observer.id.clone());
                    }
                    let level = effective.entry(node).or_insert(chain_max);
                    *level = (*level).max(chain_max);
                }
            }
        }
    }
    Ok(OpacityMap { entries, effective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::graph::resolve;

    pub(crate) const LANDSCAPE: &str = r#"
        system work_engagement_landscape {
          measure a
          measure b
          measure c
          measure d
          measure e
          measure f
          state rgb_image physical
          state blood_color physical
          state oxygen_level physical
          state imu_motion physical
          state body_movement physical
          state physiological_fatigue physical
          state psychological_fatigue nonphysical
          state work_engagement nonphysical
          model color_syntax { in: a, b, c; out: rgb_image, blood_color }
          model oxygen_interp { in: blood_color; out: oxygen_level }
          model movement_interp { in: d, e, f; out: imu_motion, body_movement }
          model fatigue_detect { in: oxygen_level, body_movement; out: physiological_fatigue }
          model fatigue_bridge { in: physiological_fatigue; out: psychological_fatigue }
          model motivation { in: psychological_fatigue; out: work_engagement; goal }
          observer i level 2 { covers: fatigue_bridge; }
          observer g level 3 { covers: color_syntax, fatigue_detect, movement_interp, oxygen_interp; embeds: i; }
          observer h level 4 experimentable { covers: motivation, work_engagement; }
          target transparent { work_engagement }
        }
    "#;

    fn graph(source: &str) -> SystemGraph {
        resolve(&parse(source).expect("parse")).expect("resolve")
    }

    fn ids(names: &[&str]) -> BTreeSet<NodeId> {
        names.iter().map(|n| NodeId::from(*n)).collect()
    }

    #[test]
    fn embedded_region_rolls_up_into_the_parent() {
        let g = graph(LANDSCAPE);
        let region_i = transparent_region(&g, g.observer(&NodeId::from("i")).unwrap());
        assert_eq!(region_i.nodes, ids(&["fatigue_bridge"]));
        let region_g = transparent_region(&g, g.observer(&NodeId::from("g")).unwrap());
        assert_eq!(
            region_g.nodes,
            ids(&["color_syntax", "fatigue_detect", "fatigue_bridge", "movement_interp", "oxygen_interp"])
        );
        assert!(region_g.nodes.is_superset(&region_i.nodes));
    }

    #[test]
    fn empty_observer_has_empty_region() {
        let g = graph("system s { observer idle level 1 { } }");
        let region = transparent_region(&g, g.observer(&NodeId::from("idle")).unwrap());
        assert!(region.nodes.is_empty());
    }

    #[test]
    fn landscape_observers_are_violation_free() {
        let g = graph(LANDSCAPE);
        assert_eq!(check_all_observers(&g), Vec::new());
    }

    #[test]
    fn goal_level_cover_without_experimentability_is_flagged_once() {
        let source = LANDSCAPE.replace("level 4 experimentable", "level 4");
        let g = graph(&source);
        let violations = check_all_observers(&g);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::ExperimentabilityMissing);
        assert_eq!(violations[0].observer, NodeId::from("h"));
        assert_eq!(violations[0].node, None);
    }

    #[test]
    fn embedded_observer_must_not_outrank_parent() {
        let g = graph(
            r#"
            system s {
              observer child level 5 experimentable { }
              observer parent level 3 { embeds: child; }
            }
            "#,
        );
        let violations = check_observer(&g, g.observer(&NodeId::from("parent")).unwrap());
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::EmbedLevelExceedsParent);
        assert_eq!(violations[0].observer, NodeId::from("parent"));
    }

    #[test]
    fn unembedded_bridge_coverer_needs_a_level_three_chain() {
        let source = LANDSCAPE.replace("embeds: i;", "");
        let g = graph(&source);
        let violations = check_observer(&g, g.observer(&NodeId::from("i")).unwrap());
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::BridgeChainTooShallow);
        assert_eq!(violations[0].node, Some(NodeId::from("fatigue_bridge")));
    }

    #[test]
    fn cover_above_own_level_is_too_low() {
        let g = graph(
            r#"
            system s {
              state x physical
              state y physical
              state z physical
              model networked { in: x, y; out: z }
              observer weak level 1 { covers: networked; }
            }
            "#,
        );
        let violations = check_observer(&g, g.observer(&NodeId::from("weak")).unwrap());
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, ViolationRule::LevelTooLow);
        assert_eq!(violations[0].node, Some(NodeId::from("networked")));
    }

    #[test]
    fn full_deployment_renders_every_model_transparent() {
        let g = graph(LANDSCAPE);
        let map = opacity_map(&g, &ids(&["g", "h", "i"])).unwrap();
        for model in g.models() {
            assert!(map.is_transparent(&model.id), "{} should be transparent", model.id);
        }
        for state in g.states() {
            assert!(map.is_transparent(&state.id), "{} should be transparent", state.id);
        }
        // Attribution prefers the alphabetically first deployed observer.
        assert_eq!(
            map.opacity(&NodeId::from("fatigue_bridge")),
            Some(&Opacity::Transparent(NodeId::from("g")))
        );
    }

    #[test]
    fn partial_deployment_leaves_the_goal_chain_opaque() {
        let g = graph(LANDSCAPE);
        let map = opacity_map(&g, &ids(&["g"])).unwrap();
        assert_eq!(
            map.transparent_nodes(),
            ids(&[
                "color_syntax",
                "oxygen_interp",
                "movement_interp",
                "fatigue_detect",
                "fatigue_bridge",
                "rgb_image",
                "blood_color",
                "oxygen_level",
                "imu_motion",
                "body_movement",
                "physiological_fatigue",
                "psychological_fatigue",
            ])
        );
        assert!(!map.is_transparent(&NodeId::from("motivation")));
        assert!(!map.is_transparent(&NodeId::from("work_engagement")));
    }

    #[test]
    fn no_deployment_keeps_everything_opaque() {
        let g = graph(LANDSCAPE);
        let map = opacity_map(&g, &BTreeSet::new()).unwrap();
        assert!(map.transparent_nodes().is_empty());
        assert_eq!(map.opacity(&NodeId::from("motivation")), Some(&Opacity::Opaque));
    }

    #[test]
    fn violating_observer_contributes_nothing() {
        let source = LANDSCAPE.replace("level 4 experimentable", "level 4");
        let g = graph(&source);
        let map = opacity_map(&g, &ids(&["h"])).unwrap();
        assert!(map.transparent_nodes().is_empty());
    }

    #[test]
    fn deploying_an_embedded_observer_twice_changes_nothing() {
        let g = graph(LANDSCAPE);
        let once = opacity_map(&g, &ids(&["g"])).unwrap();
        let with_child = opacity_map(&g, &ids(&["g", "i"])).unwrap();
        assert_eq!(once.transparent_nodes(), with_child.transparent_nodes());
        // g still wins attribution alphabetically.
        assert_eq!(
            with_child.opacity(&NodeId::from("fatigue_bridge")),
            Some(&Opacity::Transparent(NodeId::from("g")))
        );
    }

    #[test]
    fn effective_level_follows_the_embedding_chain() {
        let g = graph(LANDSCAPE);
        let map = opacity_map(&g, &ids(&["i"])).unwrap();
        // i alone is level 2, but it reports into g (level 3) structurally.
        assert_eq!(map.effective_level(&NodeId::from("fatigue_bridge")), Some(Level::new(3).unwrap()));
        assert_eq!(map.effective_level(&NodeId::from("motivation")), None);
    }

    #[test]
    fn unknown_deployed_observer_is_rejected() {
        let g = graph(LANDSCAPE);
        let err = opacity_map(&g, &ids(&["ghost"])).unwrap_err();
        assert_eq!(err, TransparencyError::UnknownObserver(NodeId::from("ghost")));
    }

    #[test]
    fn violation_rule_names_round_trip() {
        for rule in [
            ViolationRule::LevelTooLow,
            ViolationRule::ExperimentabilityMissing,
            ViolationRule::EmbedLevelExceedsParent,
            ViolationRule::BridgeChainTooShallow,
        ] {
            assert_eq!(ViolationRule::from_name(rule.name()), Some(rule));
        }
        assert_eq!(ViolationRule::from_name("NoSuchRule"), None);
    }
}
