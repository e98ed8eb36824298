//! Abstract syntax of a parsed document, unresolved.

use crate::graph::Physicality;

/// A parsed `.potx` document.
///
/// Declaration order within each category is preserved. Equality is
/// order-insensitive: two documents are equal when their canonical forms
/// (entries sorted by id, target blocks merged, expect blocks flattened)
/// match, so `parse(serialize(parse(t))) == parse(t)` holds even though the
/// serializer reorders statements.
#[derive(Debug, Clone)]
pub struct Document {
    pub name: String,
    pub measures: Vec<MeasureDecl>,
    pub states: Vec<StateDecl>,
    pub models: Vec<ModelDecl>,
    pub observers: Vec<ObserverDecl>,
    pub cpts: Vec<CptDecl>,
    pub targets: Vec<TargetDecl>,
    pub expects: Vec<ExpectDecl>,
}

#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct MeasureDecl {
    pub id: String,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDecl {
    pub id: String,
    pub physicality: Physicality,
    pub domain: Option<Vec<String>>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDecl {
    pub id: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub goal: bool,
    pub alt_group: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverDecl {
    pub id: String,
    pub level: u8,
    pub experimentable: bool,
    pub covers: Vec<String>,
    pub embeds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CptDecl {
    pub node: String,
    pub rows: Vec<RowDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowDecl {
    pub parents: Vec<String>,
    pub entries: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDecl {
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectDecl {
    pub assertions: Vec<Assertion>,
}

/// Model class named in an `expect` assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelClassName {
    Intro,
    Extero,
    Bridge,
}

impl ModelClassName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelClassName::Intro => "intro",
            ModelClassName::Extero => "extero",
            ModelClassName::Bridge => "bridge",
        }
    }
}

/// One assertion inside an `expect` block.
#[derive(Debug, Clone, PartialEq)]
pub enum Assertion {
    ModelIs { model: String, class: ModelClassName },
    ObserverOk { observer: String },
    ObserverViolates { observer: String, rule: String },
    GapLevel { node: String, level: u8 },
}

impl Assertion {
    /// Stable sort key for canonical ordering.
    fn key(&self) -> (u8, &str, String) {
        match self {
            Assertion::ModelIs { model, class } => (0, model, class.as_str().to_string()),
            Assertion::ObserverOk { observer } => (1, observer, String::new()),
            Assertion::ObserverViolates { observer, rule } => (1, observer, rule.clone()),
            Assertion::GapLevel { node, level } => (2, node, level.to_string()),
        }
    }
}

impl Document {
    /// Canonical projection used for equality and by the serializer: every
    /// category sorted by id, observer cover/embed lists sorted, cpt rows
    /// sorted by parent tuple with entries sorted by value, all target
    /// blocks merged into one sorted set, all expect blocks flattened into
    /// one sorted list. Model input/output order and domain value order are
    /// semantic and stay untouched.
    pub(crate) fn canonical(&self) -> Document {
        let mut measures = self.measures.clone();
        measures.sort_by(|a, b| a.id.cmp(&b.id));
        let mut states = self.states.clone();
        states.sort_by(|a, b| a.id.cmp(&b.id));
        let mut models = self.models.clone();
        models.sort_by(|a, b| a.id.cmp(&b.id));
        let mut observers: Vec<ObserverDecl> = self
            .observers
            .iter()
            .map(|o| {
                let mut covers = o.covers.clone();
                covers.sort();
                covers.dedup();
                let mut embeds = o.embeds.clone();
                embeds.sort();
                embeds.dedup();
                ObserverDecl { covers, embeds, ..o.clone() }
            })
            .collect();
        observers.sort_by(|a, b| a.id.cmp(&b.id));
        let mut cpts: Vec<CptDecl> = self
            .cpts
            .iter()
            .map(|c| {
                let mut rows: Vec<RowDecl> = c
                    .rows
                    .iter()
                    .map(|r| {
                        let mut entries = r.entries.clone();
                        entries.sort_by(|a, b| a.0.cmp(&b.0));
                        RowDecl { parents: r.parents.clone(), entries }
                    })
                    .collect();
                rows.sort_by(|a, b| a.parents.cmp(&b.parents));
                CptDecl { node: c.node.clone(), rows }
            })
            .collect();
        cpts.sort_by(|a, b| a.node.cmp(&b.node));
        let mut target_ids: Vec<String> =
            self.targets.iter().flat_map(|t| t.ids.iter().cloned()).collect();
        target_ids.sort();
        target_ids.dedup();
        let targets = if target_ids.is_empty() {
            vec![]
        } else {
            vec![TargetDecl { ids: target_ids }]
        };
        let mut assertions: Vec<Assertion> =
            self.expects.iter().flat_map(|e| e.assertions.iter().cloned()).collect();
        assertions.sort_by(|a, b| {
            a.key().cmp(&b.key()).then_with(|| format!("{a:?}").cmp(&format!("{b:?}")))
        });
        let expects =
            if assertions.is_empty() { vec![] } else { vec![ExpectDecl { assertions }] };
        Document {
            name: self.name.clone(),
            measures,
            states,
            models,
            observers,
            cpts,
            targets,
            expects,
        }
    }

}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.name == b.name
            && a.measures == b.measures
            && a.states == b.states
            && a.models == b.models
            && a.observers == b.observers
            && a.cpts == b.cpts
            && a.targets == b.targets
            && a.expects == b.expects
    }
}
