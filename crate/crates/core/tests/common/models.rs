//! Random valid CBM models for property and round-trip tests.

#![allow(dead_code)]

use archgraph_core::{
    Accountability, CbmModel, Competency, Component, Edge, Layer, LayerEntity, LayerKind, RelationType,
};
use rand::seq::IndexedRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "logistics", "freight", "billing", "payroll", "customer", "pricing", "supply", "inventory", "marketing",
    "compliance", "risk", "treasury", "sourcing", "analytics", "service", "quality", "the", "and", "of",
];

fn sentence<R: Rng>(rng: &mut R, max_words: usize) -> String {
    let n = rng.random_range(0..=max_words);
    (0..n).map(|_| *WORDS.choose(rng).expect("nonempty")).collect::<Vec<_>>().join(" ")
}

/// A model that passes validation: up to `max_components` components, a
/// few relation types of both kinds, random edges without self-loops and
/// optionally layers with intra-layer edges.
pub fn random_model<R: Rng>(rng: &mut R, max_components: usize) -> CbmModel {
    let mut m = CbmModel::new(format!("model-{}", rng.random_range(0..1000)));
    m.meta.revision = rng.random_range(1..50);
    let competencies = rng.random_range(1..=4);
    for k in 0..competencies {
        m.competencies.push(Competency {
            id: format!("comp{k}"),
            name: format!("Competency {k}"),
            order: k as u32,
        });
    }
    m.relation_types.push(RelationType::new("peer", false, 1.0));
    m.relation_types.push(RelationType::new("feeds", true, 0.5));
    if rng.random_bool(0.5) {
        m.relation_types.push(RelationType::new("shares-data", false, 2.0));
    }

    let n = rng.random_range(0..=max_components);
    for i in 0..n {
        let mut c = Component::new(
            format!("c{i:02}"),
            format!("Component {i}"),
            format!("comp{}", rng.random_range(0..competencies)),
            Accountability::ALL[rng.random_range(0..3)],
        );
        c.description = sentence(rng, 8);
        c.processes = (0..rng.random_range(0..3)).map(|_| sentence(rng, 3)).collect();
        if rng.random_bool(0.5) {
            c.view_values.insert("financial".into(), rng.random_range(-10.0..10.0));
        }
        m.components.push(c);
    }

    let types: Vec<String> = m.relation_types.iter().map(|t| t.name.clone()).collect();
    if n >= 2 {
        for _ in 0..rng.random_range(0..=2 * n) {
            let s = rng.random_range(0..n);
            let t = rng.random_range(0..n);
            if s == t {
                continue;
            }
            let ty = types.choose(rng).expect("types").clone();
            let src = m.components[s].id.clone();
            let dst = m.components[t].id.clone();
            if m.edges.iter().any(|e| e.source == src && e.target == dst && e.relation_type == ty) {
                continue;
            }
            let weight = rng.random_bool(0.7).then(|| rng.random_range(0.1..5.0));
            m.edges.push(Edge::new(src, dst, ty, weight));
        }
    }

    if n >= 1 {
        for kind in [LayerKind::People, LayerKind::Resources, LayerKind::Data] {
            if !rng.random_bool(0.4) {
                continue;
            }
            let mut layer = Layer {
                kind,
                entities: Vec::new(),
                intra_layer_edges: Vec::new(),
            };
            let count = rng.random_range(1..=4);
            for e in 0..count {
                layer.entities.push(LayerEntity {
                    id: format!("{kind}-{e}").to_lowercase().into(),
                    name: format!("{kind} {e}"),
                    component_id: m.components[rng.random_range(0..n)].id.clone(),
                });
            }
            for a in 0..count {
                for b in a + 1..count {
                    if rng.random_bool(0.4) {
                        layer.intra_layer_edges.push(Edge::new(
                            layer.entities[a].id.clone(),
                            layer.entities[b].id.clone(),
                            "peer",
                            None,
                        ));
                    }
                }
            }
            m.layers.push(layer);
        }
    }
    debug_assert!(m.validate().is_empty(), "{:?}", m.validate());
    m
}
