use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use archgraph_core::{CbmModel, Edge, ModelError};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    CsvEdges,
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            Self::Dot => "text/vnd.graphviz; charset=utf-8",
            Self::CsvEdges => "text/csv; charset=utf-8",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(Self::Dot),
            "csv-edges" => Ok(Self::CsvEdges),
            other => Err(ExportError::UnknownFormat(other.to_owned())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("unknown export format '{0}' (expected dot or csv-edges)")]
    UnknownFormat(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graph document of the model restricted to `filter`. Nodes are listed by
/// id, edges by (source, target, relation type); weights are the effective
/// edge weights.
pub fn export_graph(
    model: &CbmModel,
    filter: Option<&BTreeSet<String>>,
    format: ExportFormat,
) -> Result<String, ExportError> {
    if let Some(unknown) = filter.and_then(|f| f.iter().find(|t| model.relation_type(t).is_none())) {
        return Err(ModelError::UnknownRelationType(unknown.clone()).into());
    }
    let mut edges: Vec<(&Edge, f64, bool)> = model
        .edges
        .iter()
        .filter(|e| filter.is_none_or(|f| f.contains(&e.relation_type)))
        .map(|e| {
            let kind = model
                .relation_type(&e.relation_type)
                .ok_or_else(|| ModelError::UnknownRelationType(e.relation_type.clone()))?;
            Ok((e, e.weight.unwrap_or(kind.default_weight), kind.directed))
        })
        .collect::<Result<_, ModelError>>()?;
    edges.sort_by(|a, b| {
        (&a.0.source, &a.0.target, &a.0.relation_type).cmp(&(&b.0.source, &b.0.target, &b.0.relation_type))
    });
    Ok(match format {
        ExportFormat::Dot => dot(model, &edges),
        ExportFormat::CsvEdges => csv_edges(&edges),
    })
}

fn dot(model: &CbmModel, edges: &[(&Edge, f64, bool)]) -> String {
    let mut nodes: Vec<_> = model.components.iter().collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::from("digraph cbm {\n");
    for c in nodes {
        let _ = writeln!(
            out,
            "  {} [label={}, competency={}, accountability={}];",
            quote(c.id.as_str()),
            quote(&c.name),
            quote(&c.competency_id),
            quote(&c.accountability.to_string()),
        );
    }
    for (e, w, directed) in edges {
        let dir = if *directed { "" } else { ", dir=none" };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, weight={w}{dir}];",
            quote(e.source.as_str()),
            quote(e.target.as_str()),
            quote(&e.relation_type),
        );
    }
    out.push_str("}\n");
    out
}

fn csv_edges(edges: &[(&Edge, f64, bool)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "target", "relation_type", "weight", "directed"])
        .expect("in-memory write");
    for (e, weight, directed) in edges {
        w.write_record([
            e.source.as_str(),
            e.target.as_str(),
            &e.relation_type,
            &weight.to_string(),
            if *directed { "true" } else { "false" },
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
