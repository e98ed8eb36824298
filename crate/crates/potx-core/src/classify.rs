//! Perspective membership and observer-level requirements.
//!
//! States split into two perspectives by their physicality: physical
//! states form the exteroperspective, non-physical (mental, psychological)
//! states the introperspective. Models classify by the states they
//! connect: all-extero models are extero, all-intro models are intro, and
//! a model touching both perspectives is a bridge.
//!
//! Every measure, state, and model additionally carries a *required
//! level*: the minimum proficiency an observer needs before the node can
//! become transparent under it. The level scale runs from 0 (perceiving
//! raw symbols) to 5 (finding the goal that motivates observed states);
//! see [`LEVEL_ABILITIES`].

use crate::exec::map_ordered;
use crate::graph::{Level, Model, NodeId, Physicality, State, SystemGraph};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Which side of the physical/non-physical split a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Perspective {
    Intro,
    Extero,
}

impl Perspective {
    pub fn as_str(self) -> &'static str {
        match self {
            Perspective::Intro => "intro",
            Perspective::Extero => "extero",
        }
    }

    /// The long-form name used in prose reports.
    pub fn full_name(self) -> &'static str {
        match self {
            Perspective::Intro => "introperspective",
            Perspective::Extero => "exteroperspective",
        }
    }
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification outcome for a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelClass {
    Intro,
    Extero,
    Bridge,
}

impl ModelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelClass::Intro => "intro",
            ModelClass::Extero => "extero",
            ModelClass::Bridge => "bridge",
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Proficiency names for levels 0 through 5.
pub const LEVEL_NAMES: [&str; 6] = [
    "Symbols",
    "Data",
    "Information",
    "Knowledge",
    "Understanding actions",
    "Competence",
];

/// What an observer at each level is able to do, levels 0 through 5.
pub const LEVEL_ABILITIES: [&str; 6] = [
    "perceive/measure symbols or physical entities",
    "establish syntax between symbols; typically not effected by uncertainty",
    "interpret data including time series of data; typically impacted by uncertainty",
    "interconnect information from different sources and establish a knowledge network",
    "establish goal models that motivate observed states",
    "find the correct goal which motivates the observed states",
];

pub fn level_name(level: Level) -> &'static str {
    LEVEL_NAMES[level.get() as usize]
}

pub fn level_abilities(level: Level) -> &'static str {
    LEVEL_ABILITIES[level.get() as usize]
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    /// A model connected only to measures has no perspective. Graphs from
    /// the resolver never contain one (outputs are always states); this
    /// guards hand-assembled graphs.
    #[error("model {0} connects to no state; perspective undefined")]
    NoStateConnection(NodeId),
    #[error("no measure, state, or model named {0}")]
    UnknownNode(NodeId),
}

/// Perspective of a single state: physical states are extero,
/// non-physical states intro.
pub fn classify_state(state: &State) -> Perspective {
    match state.physicality {
        Physicality::Physical => Perspective::Extero,
        Physicality::NonPhysical => Perspective::Intro,
    }
}

/// Classifies one model by the perspectives of its connected states.
pub fn classify_model(graph: &SystemGraph, model: &Model) -> Result<ModelClass, ClassifyError> {
    let mut touches_intro = false;
    let mut touches_extero = false;
    for id in model.inputs.iter().chain(&model.outputs) {
        if let Some(state) = graph.state(id) {
            match classify_state(state) {
                Perspective::Intro => touches_intro = true,
                Perspective::Extero => touches_extero = true,
            }
        }
    }
    match (touches_intro, touches_extero) {
        (true, true) => Ok(ModelClass::Bridge),
        (true, false) => Ok(ModelClass::Intro),
        (false, true) => Ok(ModelClass::Extero),
        (false, false) => Err(ClassifyError::NoStateConnection(model.id.clone())),
    }
}

/// Class plus the two level numbers of one model.
///
/// `required` is the level an observer chain must reach somewhere above
/// the node; `direct` is what the immediately covering observer needs.
/// The two differ only for bridge models: interpreting the bridge itself
/// is level-2 work, but the chain it sits in must connect knowledge
/// across the perspective border, which is level 3.
fn model_levels(
    graph: &SystemGraph,
    model: &Model,
) -> Result<(ModelClass, Level, Level), ClassifyError> {
    let class = classify_model(graph, model)?;
    let (required, direct) = match class {
        ModelClass::Bridge => (3, 2),
        ModelClass::Intro => {
            let alternatives = model
                .alt_group
                .as_deref()
                .map(|group| {
                    graph.models().filter(|m| m.alt_group.as_deref() == Some(group)).count()
                })
                .unwrap_or(0);
            if alternatives >= 2 {
                (5, 5)
            } else {
                (4, 4)
            }
        }
        ModelClass::Extero => {
            let state_inputs =
                model.inputs.iter().filter(|i| graph.state(i).is_some()).count();
            match state_inputs {
                0 => (1, 1),
                1 => (2, 2),
                _ => (3, 3),
            }
        }
    };
    Ok((class, Level::new(required).unwrap(), Level::new(direct).unwrap()))
}

/// Levels of a state: produced states inherit the minimum over their
/// producing models, root states fall back to their physicality (a
/// physical root is directly perceivable, a non-physical root needs
/// goal-level understanding).
fn state_levels(graph: &SystemGraph, state: &State) -> Result<(Level, Level), ClassifyError> {
    let producers = graph.producers_of(&state.id);
    if producers.is_empty() {
        let level = match state.physicality {
            Physicality::Physical => Level::new(0).unwrap(),
            Physicality::NonPhysical => Level::new(4).unwrap(),
        };
        return Ok((level, level));
    }
    let mut required = Level::MAX;
    let mut direct = Level::MAX;
    for producer in producers {
        let (_, r, d) = model_levels(graph, producer)?;
        required = required.min(r);
        direct = direct.min(d);
    }
    Ok((required, direct))
}

/// Minimum observer-chain level for one node.
pub fn required_level(graph: &SystemGraph, node: &NodeId) -> Result<Level, ClassifyError> {
    if graph.measure(node).is_some() {
        return Ok(Level::new(0).unwrap());
    }
    if let Some(state) = graph.state(node) {
        return Ok(state_levels(graph, state)?.0);
    }
    if let Some(model) = graph.model(node) {
        return Ok(model_levels(graph, model)?.1);
    }
    Err(ClassifyError::UnknownNode(node.clone()))
}

/// Minimum level for the observer that covers the node directly.
pub fn direct_cover_level(graph: &SystemGraph, node: &NodeId) -> Result<Level, ClassifyError> {
    if graph.measure(node).is_some() {
        return Ok(Level::new(0).unwrap());
    }
    if let Some(state) = graph.state(node) {
        return Ok(state_levels(graph, state)?.1);
    }
    if let Some(model) = graph.model(node) {
        return Ok(model_levels(graph, model)?.2);
    }
    Err(ClassifyError::UnknownNode(node.clone()))
}

/// Classification of every state and model plus per-node levels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassificationMap {
    perspectives: BTreeMap<NodeId, Perspective>,
    classes: BTreeMap<NodeId, ModelClass>,
    required: BTreeMap<NodeId, Level>,
    direct: BTreeMap<NodeId, Level>,
}

impl ClassificationMap {
    pub fn perspective(&self, id: &NodeId) -> Option<Perspective> {
        self.perspectives.get(id).copied()
    }

    pub fn class(&self, id: &NodeId) -> Option<ModelClass> {
        self.classes.get(id).copied()
    }

    pub fn required(&self, id: &NodeId) -> Option<Level> {
        self.required.get(id).copied()
    }

    pub fn direct_cover(&self, id: &NodeId) -> Option<Level> {
        self.direct.get(id).copied()
    }

    /// States with their perspectives, sorted by id.
    pub fn states(&self) -> impl Iterator<Item = (&NodeId, Perspective)> {
        self.perspectives.iter().map(|(id, p)| (id, *p))
    }

    /// Models with their classes, sorted by id.
    pub fn models(&self) -> impl Iterator<Item = (&NodeId, ModelClass)> {
        self.classes.iter().map(|(id, c)| (id, *c))
    }

    /// Number of (intro, extero, bridge) models.
    pub fn class_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for class in self.classes.values() {
            match class {
                ModelClass::Intro => counts.0 += 1,
                ModelClass::Extero => counts.1 += 1,
                ModelClass::Bridge => counts.2 += 1,
            }
        }
        counts
    }
}

/// Classifies every state and model and derives all levels.
pub fn classify_all(graph: &SystemGraph) -> Result<ClassificationMap, ClassifyError> {
    let models: Vec<&Model> = graph.models().collect();
    let classified = map_ordered(models, |model| {
        model_levels(graph, model).map(|levels| (model.id.clone(), levels))
    });

    let mut map = ClassificationMap::default();
    for result in classified {
        let (id, (class, required, direct)) = result?;
        map.classes.insert(id.clone(), class);
        map.required.insert(id.clone(), required);
        map.direct.insert(id, direct);
    }
    let zero = Level::new(0).unwrap();
    for measure in graph.measures() {
        map.required.insert(measure.id.clone(), zero);
        map.direct.insert(measure.id.clone(), zero);
    }
    for state in graph.states() {
        map.perspectives.insert(state.id.clone(), classify_state(state));
        let producers = graph.producers_of(&state.id);
        let (required, direct) = if producers.is_empty() {
            let level = match state.physicality {
                Physicality::Physical => zero,
                Physicality::NonPhysical => Level::new(4).unwrap(),
            };
            (level, level)
        } else {
            let mut required = Level::MAX;
            let mut direct = Level::MAX;
            for producer in producers {
                required = required.min(map.required[&producer.id]);
                direct = direct.min(map.direct[&producer.id]);
            }
            (required, direct)
        };
        map.required.insert(state.id.clone(), required);
        map.direct.insert(state.id.clone(), direct);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::graph::resolve;

    fn graph(source: &str) -> SystemGraph {
        resolve(&parse(source).expect("parse")).expect("resolve")
    }

    fn level(n: u8) -> Level {
        Level::new(n).unwrap()
    }

    const CHAIN: &str = r#"
        system fatigue {
          measure rgb_r
          measure rgb_g
          state blood_color physical
          state oxygen_level physical
          state body_movement physical
          state physiological_fatigue physical
          state psychological_fatigue nonphysical
          state work_engagement nonphysical
          model color_syntax { in: rgb_r, rgb_g; out: blood_color }
          model oxygen_interp { in: blood_color; out: oxygen_level }
          model fatigue_detect { in: oxygen_level, body_movement; out: physiological_fatigue }
          model fatigue_bridge { in: physiological_fatigue; out: psychological_fatigue }
          model motivation { in: psychological_fatigue; out: work_engagement; goal }
        }
    "#;

    #[test]
    fn physicality_decides_state_perspective() {
        let g = graph(CHAIN);
        let blood = g.state(&NodeId::from("blood_color")).unwrap();
        let fatigue = g.state(&NodeId::from("psychological_fatigue")).unwrap();
        assert_eq!(classify_state(blood), Perspective::Extero);
        assert_eq!(classify_state(fatigue), Perspective::Intro);
    }

    #[test]
    fn model_class_follows_connected_states() {
        let g = graph(CHAIN);
        let class_of = |name: &str| {
            classify_model(&g, g.model(&NodeId::from(name)).unwrap()).unwrap()
        };
        assert_eq!(class_of("oxygen_interp"), ModelClass::Extero);
        assert_eq!(class_of("fatigue_bridge"), ModelClass::Bridge);
        assert_eq!(class_of("motivation"), ModelClass::Intro);
    }

    #[test]
    fn level_mapping_on_the_fatigue_chain() {
        let g = graph(CHAIN);
        let required = |name: &str| required_level(&g, &NodeId::from(name)).unwrap();
        assert_eq!(required("rgb_r"), level(0));
        // All inputs are measures: syntax work.
        assert_eq!(required("color_syntax"), level(1));
        // Exactly one state input: interpretation.
        assert_eq!(required("oxygen_interp"), level(2));
        // Two state inputs: knowledge networking.
        assert_eq!(required("fatigue_detect"), level(3));
        assert_eq!(required("fatigue_bridge"), level(3));
        assert_eq!(required("motivation"), level(4));
        // States inherit their producer's level.
        assert_eq!(required("blood_color"), level(1));
        assert_eq!(required("work_engagement"), level(4));
        // A physical root state is directly perceivable.
        assert_eq!(required("body_movement"), level(0));
    }

    #[test]
    fn bridge_direct_cover_is_one_below_its_chain_requirement() {
        let g = graph(CHAIN);
        let bridge = NodeId::from("fatigue_bridge");
        assert_eq!(required_level(&g, &bridge).unwrap(), level(3));
        assert_eq!(direct_cover_level(&g, &bridge).unwrap(), level(2));
        // Non-bridge models keep one level for both views.
        let detect = NodeId::from("fatigue_detect");
        assert_eq!(direct_cover_level(&g, &detect).unwrap(), level(3));
    }

    #[test]
    fn competing_goal_models_escalate_to_level_five() {
        let g = graph(
            r#"
            system s {
              state mood nonphysical
              state drive nonphysical
              model fast_judge { in: mood; out: drive; goal; alt-of: engagement }
              model slow_judge { in: mood; out: drive; goal; alt-of: engagement }
            }
            "#,
        );
        assert_eq!(required_level(&g, &NodeId::from("fast_judge")).unwrap(), level(5));
        assert_eq!(required_level(&g, &NodeId::from("slow_judge")).unwrap(), level(5));
        // The produced state inherits level 5 as well.
        assert_eq!(required_level(&g, &NodeId::from("drive")).unwrap(), level(5));
    }

    #[test]
    fn lone_alt_group_member_stays_at_level_four() {
        let g = graph(
            r#"
            system s {
              state mood nonphysical
              state drive nonphysical
              model only_judge { in: mood; out: drive; alt-of: engagement }
            }
            "#,
        );
        assert_eq!(required_level(&g, &NodeId::from("only_judge")).unwrap(), level(4));
    }

    #[test]
    fn nonphysical_root_state_needs_goal_understanding() {
        let g = graph("system s { state intention nonphysical }");
        assert_eq!(required_level(&g, &NodeId::from("intention")).unwrap(), level(4));
    }

    #[test]
    fn classify_all_counts_the_chain() {
        let g = graph(CHAIN);
        let map = classify_all(&g).unwrap();
        let (intro, extero, bridge) = map.class_counts();
        assert_eq!((intro, extero, bridge), (1, 3, 1));
        assert_eq!(map.perspective(&NodeId::from("oxygen_level")), Some(Perspective::Extero));
        assert_eq!(map.required(&NodeId::from("motivation")), Some(level(4)));
        assert_eq!(map.direct_cover(&NodeId::from("fatigue_bridge")), Some(level(2)));
    }

    #[test]
    fn all_physical_system_has_no_intro_or_bridge() {
        let g = graph(
            r#"
            system s {
              measure m
              state a physical
              state b physical
              model first { in: m; out: a }
              model second { in: a; out: b }
            }
            "#,
        );
        let map = classify_all(&g).unwrap();
        let (intro, _, bridge) = map.class_counts();
        assert_eq!(intro, 0);
        assert_eq!(bridge, 0);
        assert!(map.states().all(|(_, p)| p == Perspective::Extero));
    }

    #[test]
    fn state_with_competing_producers_takes_the_minimum() {
        let g = graph(
            r#"
            system s {
              measure m
              state raw physical
              state deep physical
              state verdict physical
              model cheap { in: m; out: raw }
              model direct_read { in: raw; out: verdict }
              model networked { in: raw, deep; out: verdict }
            }
            "#,
        );
        // direct_read is level 2, networked is level 3; the state takes 2.
        assert_eq!(required_level(&g, &NodeId::from("verdict")).unwrap(), level(2));
    }
}
