//! Graph analytics for component business models.
//!
//! A [`CbmModel`] is turned into a [`WeightedGraph`] (optionally filtered by
//! relation type), which feeds the [`analytics`], [`community`] and
//! [`diffusion`] routines. The [`feed`] module scores external news items
//! against components and hands the result to diffusion as seeds.

pub mod analytics;
pub mod community;
pub mod diffusion;
pub mod feed;
pub mod graph;
pub mod model;

pub use graph::{GraphError, WeightedGraph};
pub use model::{
    Accountability, CbmModel, Competency, Component, Edge, Layer, LayerEntity, LayerKind, ModelError,
    ModelMeta, NodeId, RelationType, Rule, Violation,
};
pub use nalgebra;
