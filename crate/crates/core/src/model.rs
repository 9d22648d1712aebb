//! Component business model: components laid out by competency and
//! accountability, typed weighted relations between them, and the
//! people/resources/data layers hanging underneath.
//!
//! Models are values. Every mutation returns a new model whose revision is
//! one higher than the input's.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WeightedGraph;

/// Opaque identifier of a component or layer entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Accountability {
    Direct,
    Control,
    Execute,
}

impl Accountability {
    pub const ALL: [Accountability; 3] = [Self::Direct, Self::Control, Self::Execute];
}

impl fmt::Display for Accountability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Direct => "Direct",
            Self::Control => "Control",
            Self::Execute => "Execute",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Competency {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: NodeId,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub processes: Vec<String>,
    pub competency_id: String,
    pub accountability: Accountability,
    /// Heatmap overlays keyed by view name (e.g. "financial").
    #[serde(default)]
    pub view_values: BTreeMap<String, f64>,
    /// Feature tags cached by the impact pipeline.
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Component {
    pub fn new(
        id: impl Into<NodeId>,
        name: impl Into<String>,
        competency_id: impl Into<String>,
        accountability: Accountability,
    ) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            description: String::new(),
            processes: Vec::new(),
            competency_id: competency_id.into(),
            accountability,
            view_values: BTreeMap::new(),
            tags: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationType {
    pub name: String,
    pub directed: bool,
    pub default_weight: f64,
}

impl RelationType {
    pub fn new(name: impl Into<String>, directed: bool, default_weight: f64) -> Self {
        Self {
            name: name.into(),
            directed,
            default_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub relation_type: String,
    /// Falls back to the relation type's default weight when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl Edge {
    pub fn new(
        source: impl Into<NodeId>,
        target: impl Into<NodeId>,
        relation_type: impl Into<String>,
        weight: Option<f64>,
    ) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            relation_type: relation_type.into(),
            weight,
        }
    }

    fn key(&self) -> (&NodeId, &NodeId, &str) {
        (&self.source, &self.target, &self.relation_type)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    People,
    Resources,
    Data,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::People => "People",
            Self::Resources => "Resources",
            Self::Data => "Data",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerEntity {
    pub id: NodeId,
    pub name: String,
    pub component_id: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    #[serde(default)]
    pub entities: Vec<LayerEntity>,
    #[serde(default)]
    pub intra_layer_edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub name: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbmModel {
    pub meta: ModelMeta,
    #[serde(default)]
    pub competencies: Vec<Competency>,
    #[serde(default)]
    pub components: Vec<Component>,
    #[serde(default)]
    pub relation_types: Vec<RelationType>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub layers: Vec<Layer>,
}

/// The rule a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DuplicateCompetency,
    DuplicateComponent,
    UnknownCompetency,
    NonFiniteViewValue,
    DuplicateRelationType,
    NonPositiveDefaultWeight,
    DanglingEdgeSource,
    DanglingEdgeTarget,
    UnknownRelationType,
    NonPositiveWeight,
    SelfLoop,
    DuplicateEdge,
    DuplicateLayer,
    DuplicateEntity,
    DanglingEntityOwner,
    CrossLayerEdge,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::DuplicateCompetency => "duplicate competency id",
            Self::DuplicateComponent => "duplicate component id",
            Self::UnknownCompetency => "unknown competency",
            Self::NonFiniteViewValue => "non-finite view value",
            Self::DuplicateRelationType => "duplicate relation type",
            Self::NonPositiveDefaultWeight => "non-positive default weight",
            Self::DanglingEdgeSource => "dangling edge source",
            Self::DanglingEdgeTarget => "dangling edge target",
            Self::UnknownRelationType => "unknown relation type",
            Self::NonPositiveWeight => "non-positive weight",
            Self::SelfLoop => "self-loop",
            Self::DuplicateEdge => "duplicate edge",
            Self::DuplicateLayer => "duplicate layer",
            Self::DuplicateEntity => "duplicate layer entity",
            Self::DanglingEntityOwner => "dangling entity owner",
            Self::CrossLayerEdge => "intra-layer edge leaves its layer",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    /// Human-readable locator of the offending entity, e.g. `edge a->b (peers)`.
    pub entity: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("component id must not be empty")]
    EmptyId,
    #[error("unknown competency '{id}' in field `{field}`")]
    UnknownCompetency { field: &'static str, id: String },
    #[error("view value '{0}' is not finite")]
    NonFiniteViewValue(String),
    #[error("unknown component '{0}'")]
    UnknownComponent(NodeId),
    #[error("unknown relation type '{0}'")]
    UnknownRelationType(String),
    #[error("self-loop on '{0}': a component cannot relate to itself")]
    SelfLoop(NodeId),
    #[error("weight must be positive and finite, got {0}")]
    NonPositiveWeight(f64),
    #[error("no edge {from} -> {to} of type '{relation_type}'")]
    UnknownEdge {
        from: NodeId,
        to: NodeId,
        relation_type: String,
    },
    #[error("no {0} layer in model")]
    MissingLayer(LayerKind),
    #[error("edge {from} -> {to} references an unknown endpoint")]
    DanglingEdge { from: NodeId, to: NodeId },
    #[error("layer entity '{0}' references an unknown component")]
    DanglingEntity(NodeId),
    #[error("layer edge {from} -> {to} leaves the {kind} layer")]
    CrossLayerEdge {
        kind: LayerKind,
        from: NodeId,
        to: NodeId,
    },
    #[error("competency id must not be empty")]
    EmptyCompetencyId,
}

fn positive(w: f64) -> bool {
    w.is_finite() && w > 0.0
}

fn edge_label(e: &Edge) -> String {
    format!("edge {}->{} ({})", e.source, e.target, e.relation_type)
}

impl CbmModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            meta: ModelMeta {
                name: name.into(),
                revision: 1,
            },
            competencies: Vec::new(),
            components: Vec::new(),
            relation_types: Vec::new(),
            edges: Vec::new(),
            layers: Vec::new(),
        }
    }

    pub fn revision(&self) -> u64 {
        self.meta.revision
    }

    pub fn component(&self, id: &NodeId) -> Option<&Component> {
        self.components.iter().find(|c| &c.id == id)
    }

    pub fn competency(&self, id: &str) -> Option<&Competency> {
        self.competencies.iter().find(|c| c.id == id)
    }

    pub fn relation_type(&self, name: &str) -> Option<&RelationType> {
        self.relation_types.iter().find(|t| t.name == name)
    }

    pub fn layer(&self, kind: LayerKind) -> Option<&Layer> {
        self.layers.iter().find(|l| l.kind == kind)
    }

    /// Weight of `edge`, resolving an absent weight to its type's default.
    pub fn effective_weight(&self, edge: &Edge) -> Option<f64> {
        edge.weight
            .or_else(|| self.relation_type(&edge.relation_type).map(|t| t.default_weight))
    }

    /// Checks every referential and value invariant. An empty result means
    /// the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |rule, entity: String| out.push(Violation { rule, entity });

        let mut competencies = HashSet::new();
        for c in &self.competencies {
            if !competencies.insert(c.id.as_str()) {
                push(Rule::DuplicateCompetency, format!("competency {}", c.id));
            }
        }

        let mut components = HashSet::new();
        for c in &self.components {
            let who = format!("component {}", c.id);
            if !components.insert(&c.id) {
                push(Rule::DuplicateComponent, who.clone());
            }
            if !competencies.contains(c.competency_id.as_str()) {
                push(Rule::UnknownCompetency, who.clone());
            }
            for (view, v) in &c.view_values {
                if !v.is_finite() {
                    push(Rule::NonFiniteViewValue, format!("{who} view {view}"));
                }
            }
        }

        let mut types = HashMap::new();
        for t in &self.relation_types {
            if types.insert(t.name.as_str(), t).is_some() {
                push(Rule::DuplicateRelationType, format!("relation type {}", t.name));
            }
            if !positive(t.default_weight) {
                push(Rule::NonPositiveDefaultWeight, format!("relation type {}", t.name));
            }
        }

        let check_edge = |e: &Edge, nodes: &dyn Fn(&NodeId) -> bool, push: &mut dyn FnMut(Rule, String)| {
            let who = edge_label(e);
            if !nodes(&e.source) {
                push(Rule::DanglingEdgeSource, who.clone());
            }
            if !nodes(&e.target) {
                push(Rule::DanglingEdgeTarget, who.clone());
            }
            if e.source == e.target {
                push(Rule::SelfLoop, who.clone());
            }
            if !types.contains_key(e.relation_type.as_str()) {
                push(Rule::UnknownRelationType, who.clone());
            }
            if let Some(w) = e.weight {
                if !positive(w) {
                    push(Rule::NonPositiveWeight, who);
                }
            }
        };

        let mut seen_edges = HashSet::new();
        let is_component = |id: &NodeId| components.contains(id);
        for e in &self.edges {
            check_edge(e, &is_component, &mut push);
            if !seen_edges.insert(e.key()) {
                push(Rule::DuplicateEdge, edge_label(e));
            }
        }

        let every_entity: HashSet<&NodeId> = self
            .layers
            .iter()
            .flat_map(|l| l.entities.iter().map(|e| &e.id))
            .collect();
        let known_elsewhere = |id: &NodeId| components.contains(id) || every_entity.contains(id);
        let mut kinds = HashSet::new();
        let mut all_entities = HashSet::new();
        for layer in &self.layers {
            if !kinds.insert(layer.kind) {
                push(Rule::DuplicateLayer, format!("layer {}", layer.kind));
            }
            let mut members = HashSet::new();
            for ent in &layer.entities {
                let who = format!("{} entity {}", layer.kind, ent.id);
                if !all_entities.insert(&ent.id) || components.contains(&ent.id) {
                    push(Rule::DuplicateEntity, who.clone());
                }
                members.insert(&ent.id);
                if !components.contains(&ent.component_id) {
                    push(Rule::DanglingEntityOwner, who);
                }
            }
            let in_layer = |id: &NodeId| members.contains(id);
            let mut seen = HashSet::new();
            for e in &layer.intra_layer_edges {
                let mut local = Vec::new();
                check_edge(e, &in_layer, &mut |r, s| local.push((r, s)));
                for (rule, entity) in local {
                    let rule = match rule {
                        Rule::DanglingEdgeSource if known_elsewhere(&e.source) => Rule::CrossLayerEdge,
                        Rule::DanglingEdgeTarget if known_elsewhere(&e.target) => Rule::CrossLayerEdge,
                        r => r,
                    };
                    push(rule, format!("{} {}", layer.kind, entity));
                }
                if !seen.insert(e.key()) {
                    push(Rule::DuplicateEdge, format!("{} {}", layer.kind, edge_label(e)));
                }
            }
        }

        out
    }

    fn bumped(&self) -> Self {
        let mut m = self.clone();
        m.meta.revision += 1;
        m
    }

    /// Inserts `component`, or replaces the component with the same id in place.
    pub fn upsert_component(&self, component: Component) -> Result<Self, ModelError> {
        if component.id.as_str().is_empty() {
            return Err(ModelError::EmptyId);
        }
        if self.competency(&component.competency_id).is_none() {
            return Err(ModelError::UnknownCompetency {
                field: "competency_id",
                id: component.competency_id,
            });
        }
        if let Some((view, _)) = component.view_values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::NonFiniteViewValue(view.clone()));
        }
        let mut m = self.bumped();
        match m.components.iter_mut().find(|c| c.id == component.id) {
            Some(slot) => *slot = component,
            None => m.components.push(component),
        }
        Ok(m)
    }

    /// Removes a component together with its incident edges, its layer
    /// entities and every layer edge touching those entities.
    pub fn remove_component(&self, id: &NodeId) -> Result<Self, ModelError> {
        if self.component(id).is_none() {
            return Err(ModelError::UnknownComponent(id.clone()));
        }
        let mut m = self.bumped();
        m.components.retain(|c| &c.id != id);
        m.edges.retain(|e| &e.source != id && &e.target != id);
        for layer in &mut m.layers {
            let gone: HashSet<NodeId> = layer
                .entities
                .iter()
                .filter(|ent| &ent.component_id == id)
                .map(|ent| ent.id.clone())
                .collect();
            layer.entities.retain(|ent| !gone.contains(&ent.id));
            layer
                .intra_layer_edges
                .retain(|e| !gone.contains(&e.source) && !gone.contains(&e.target));
        }
        Ok(m)
    }

    pub fn upsert_competency(&self, competency: Competency) -> Result<Self, ModelError> {
        if competency.id.is_empty() {
            return Err(ModelError::EmptyCompetencyId);
        }
        let mut m = self.bumped();
        match m.competencies.iter_mut().find(|c| c.id == competency.id) {
            Some(slot) => *slot = competency,
            None => m.competencies.push(competency),
        }
        Ok(m)
    }

    pub fn upsert_relation_type(&self, relation_type: RelationType) -> Result<Self, ModelError> {
        if !positive(relation_type.default_weight) {
            return Err(ModelError::NonPositiveWeight(relation_type.default_weight));
        }
        let mut m = self.bumped();
        match m.relation_types.iter_mut().find(|t| t.name == relation_type.name) {
            Some(slot) => *slot = relation_type,
            None => m.relation_types.push(relation_type),
        }
        Ok(m)
    }

    /// Adds a relation between two distinct components. An existing edge with
    /// the same (source, target, type) is replaced.
    pub fn connect(
        &self,
        source: &NodeId,
        target: &NodeId,
        relation_type: &str,
        weight: Option<f64>,
    ) -> Result<Self, ModelError> {
        for id in [source, target] {
            if self.component(id).is_none() {
                return Err(ModelError::UnknownComponent(id.clone()));
            }
        }
        if source == target {
            return Err(ModelError::SelfLoop(source.clone()));
        }
        let kind = self
            .relation_type(relation_type)
            .ok_or_else(|| ModelError::UnknownRelationType(relation_type.to_owned()))?;
        let weight = weight.unwrap_or(kind.default_weight);
        if !positive(weight) {
            return Err(ModelError::NonPositiveWeight(weight));
        }
        let edge = Edge::new(source.clone(), target.clone(), relation_type, Some(weight));
        let mut m = self.bumped();
        match m.edges.iter_mut().find(|e| e.key() == edge.key()) {
            Some(slot) => *slot = edge,
            None => m.edges.push(edge),
        }
        Ok(m)
    }

    pub fn disconnect(&self, source: &NodeId, target: &NodeId, relation_type: &str) -> Result<Self, ModelError> {
        let pos = self
            .edges
            .iter()
            .position(|e| e.key() == (source, target, relation_type))
            .ok_or_else(|| ModelError::UnknownEdge {
                from: source.clone(),
                to: target.clone(),
                relation_type: relation_type.to_owned(),
            })?;
        let mut m = self.bumped();
        m.edges.remove(pos);
        Ok(m)
    }

    /// Inserts or replaces the layer of `layer.kind`.
    pub fn upsert_layer(&self, layer: Layer) -> Result<Self, ModelError> {
        let members: HashSet<&NodeId> = layer.entities.iter().map(|e| &e.id).collect();
        for ent in &layer.entities {
            if self.component(&ent.component_id).is_none() {
                return Err(ModelError::DanglingEntity(ent.id.clone()));
            }
        }
        for e in &layer.intra_layer_edges {
            if !members.contains(&e.source) || !members.contains(&e.target) {
                return Err(ModelError::CrossLayerEdge {
                    kind: layer.kind,
                    from: e.source.clone(),
                    to: e.target.clone(),
                });
            }
            if e.source == e.target {
                return Err(ModelError::SelfLoop(e.source.clone()));
            }
            if self.relation_type(&e.relation_type).is_none() {
                return Err(ModelError::UnknownRelationType(e.relation_type.clone()));
            }
            if let Some(w) = e.weight.filter(|w| !positive(*w)) {
                return Err(ModelError::NonPositiveWeight(w));
            }
        }
        let mut m = self.bumped();
        match m.layers.iter_mut().find(|l| l.kind == layer.kind) {
            Some(slot) => *slot = layer,
            None => m.layers.push(layer),
        }
        Ok(m)
    }

    /// Adjacency view over all components, in model order.
    ///
    /// `edge_types` restricts the relations considered; `None` takes all.
    /// Relations of several selected types between the same pair add up.
    /// With `symmetrize` the result is `(A + Aᵀ) / 2` and undirected.
    pub fn build_graph(
        &self,
        edge_types: Option<&BTreeSet<String>>,
        symmetrize: bool,
    ) -> Result<WeightedGraph, ModelError> {
        if let Some(filter) = edge_types {
            if let Some(unknown) = filter.iter().find(|t| self.relation_type(t).is_none()) {
                return Err(ModelError::UnknownRelationType(unknown.clone()));
            }
        }
        let ids: Vec<NodeId> = self.components.iter().map(|c| c.id.clone()).collect();
        let index: HashMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let selected = |t: &str| edge_types.is_none_or(|f| f.contains(t));
        let edges = self.edges.iter().filter(|e| selected(&e.relation_type));
        let (a, directed) = self.accumulate(ids.len(), &index, edges)?;
        let graph = WeightedGraph::new(ids, a, directed).expect("accumulated adjacency is well formed");
        Ok(if symmetrize { graph.symmetrized() } else { graph })
    }

    fn accumulate<'a>(
        &self,
        n: usize,
        index: &HashMap<&NodeId, usize>,
        edges: impl Iterator<Item = &'a Edge>,
    ) -> Result<(DMatrix<f64>, bool), ModelError> {
        let mut a = DMatrix::zeros(n, n);
        let mut directed = false;
        for e in edges {
            let kind = self
                .relation_type(&e.relation_type)
                .ok_or_else(|| ModelError::UnknownRelationType(e.relation_type.clone()))?;
            let (Some(&i), Some(&j)) = (index.get(&e.source), index.get(&e.target)) else {
                return Err(ModelError::DanglingEdge {
                    from: e.source.clone(),
                    to: e.target.clone(),
                });
            };
            if i == j {
                return Err(ModelError::SelfLoop(e.source.clone()));
            }
            let w = e.weight.unwrap_or(kind.default_weight);
            if !positive(w) {
                return Err(ModelError::NonPositiveWeight(w));
            }
            a[(i, j)] += w;
            if kind.directed {
                directed = true;
            } else {
                a[(j, i)] += w;
            }
        }
        Ok((a, directed))
    }

    /// Graph of one sub-entity layer.
    ///
    /// Without projection the nodes are the layer's entities joined by the
    /// intra-layer edges. With projection the nodes are all components and
    /// `weight(i, j)` counts the intra-layer edges joining an entity owned by
    /// `i` with one owned by `j`.
    pub fn layer_graph(&self, kind: LayerKind, projection: bool) -> Result<WeightedGraph, ModelError> {
        let layer = self.layer(kind).ok_or(ModelError::MissingLayer(kind))?;
        if !projection {
            let ids: Vec<NodeId> = layer.entities.iter().map(|e| e.id.clone()).collect();
            let index: HashMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
            let (a, directed) = self.accumulate(ids.len(), &index, layer.intra_layer_edges.iter())?;
            return Ok(WeightedGraph::new(ids, a, directed).expect("accumulated adjacency is well formed"));
        }

        let ids: Vec<NodeId> = self.components.iter().map(|c| c.id.clone()).collect();
        let comp_index: HashMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let owner: HashMap<&NodeId, usize> = layer
            .entities
            .iter()
            .map(|ent| {
                comp_index
                    .get(&ent.component_id)
                    .map(|&c| (&ent.id, c))
                    .ok_or_else(|| ModelError::DanglingEntity(ent.id.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut a = DMatrix::zeros(ids.len(), ids.len());
        for e in &layer.intra_layer_edges {
            let (Some(&i), Some(&j)) = (owner.get(&e.source), owner.get(&e.target)) else {
                return Err(ModelError::CrossLayerEdge {
                    kind,
                    from: e.source.clone(),
                    to: e.target.clone(),
                });
            };
            if i != j {
                a[(i, j)] += 1.0;
                a[(j, i)] += 1.0;
            }
        }
        Ok(WeightedGraph::new(ids, a, false).expect("projection is symmetric"))
    }
}
