//! Request-level operations shared by the CLI and the HTTP API.
//!
//! Every operation reads its graph and kernel artifacts through
//! [`Artifacts`], so a caching snapshot and a plain model give the same
//! results.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;
use std::sync::Arc;

use archgraph_core::analytics::{
    betweenness_centrality, closeness_centrality, degree_centrality, degree_histogram, edge_betweenness,
    eigenvector_centrality, pagerank, AnalyticsError, CentralityKind, CentralityScores, DegreeHistogram, DistanceMode,
    MetricParams,
};
use archgraph_core::community::{girvan_newman, label_propagation, CommunityError, StopRule};
use archgraph_core::diffusion::{
    exp_kernel, laplacian, lexp_kernel, propagate, rl_kernel, rwr_kernel, DiffusionError, ImpactVector, KernelKind,
    KernelMatrix, KernelParams,
};
use archgraph_core::feed::{score_items, FeedError, FeedItem, Lexicon, PipelineOutput, Sentiment, Stopwords};
use archgraph_core::{Accountability, CbmModel, ModelError, NodeId, WeightedGraph};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_RESTART: f64 = 0.15;
pub const DEFAULT_EXP_ALPHA: f64 = 1.0;
pub const DEFAULT_LPA_SWEEPS: usize = 100;
pub const DEFAULT_TAGS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Feed(#[from] FeedError),
    #[error("{0}")]
    Invalid(String),
}

/// Edge-type filter; `None` selects every relation type.
pub type TypeFilter = Option<BTreeSet<String>>;

/// Parses a comma-separated type list. Empty input selects every type.
pub fn parse_types(list: Option<&str>) -> TypeFilter {
    let list = list?.trim();
    if list.is_empty() {
        return None;
    }
    Some(list.split(',').map(|t| t.trim().to_owned()).filter(|t| !t.is_empty()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub alpha: Option<f64>,
    pub restart: Option<f64>,
    pub normalize: bool,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        Self {
            kind,
            alpha: None,
            restart: None,
            normalize: false,
        }
    }
}

/// Source of derived graphs and kernels for one model revision.
pub trait Artifacts {
    fn model(&self) -> &CbmModel;
    fn graph(&self, filter: &TypeFilter, symmetrize: bool) -> Result<Arc<WeightedGraph>, OpsError>;
    fn kernel(&self, filter: &TypeFilter, spec: &KernelSpec) -> Result<Arc<KernelMatrix>, OpsError>;
}

/// Computes every artifact on demand.
pub struct Direct<'a>(pub &'a CbmModel);

impl Artifacts for Direct<'_> {
    fn model(&self) -> &CbmModel {
        self.0
    }

    fn graph(&self, filter: &TypeFilter, symmetrize: bool) -> Result<Arc<WeightedGraph>, OpsError> {
        Ok(Arc::new(self.0.build_graph(filter.as_ref(), symmetrize)?))
    }

    fn kernel(&self, filter: &TypeFilter, spec: &KernelSpec) -> Result<Arc<KernelMatrix>, OpsError> {
        build_kernel(self, filter, spec).map(Arc::new)
    }
}

/// Builds a kernel. Random walks follow relation direction; the other
/// kinds run on the symmetrized graph.
pub fn build_kernel(art: &dyn Artifacts, filter: &TypeFilter, spec: &KernelSpec) -> Result<KernelMatrix, OpsError> {
    let k = match spec.kind {
        KernelKind::RandomWalkRestart => {
            let g = art.graph(filter, false)?;
            rwr_kernel(&g, spec.restart.unwrap_or(DEFAULT_RESTART))?
        }
        KernelKind::RegularizedLaplacian => {
            let b = laplacian(&*art.graph(filter, true)?)?;
            let alpha = spec.alpha.unwrap_or_else(|| b.default_alpha());
            rl_kernel(&b, alpha)?
        }
        KernelKind::ExponentialDiffusion => exp_kernel(&*art.graph(filter, true)?, spec.alpha.unwrap_or(DEFAULT_EXP_ALPHA))?,
        KernelKind::LaplacianExponential => {
            let b = laplacian(&*art.graph(filter, true)?)?;
            lexp_kernel(&b, spec.alpha.unwrap_or(DEFAULT_EXP_ALPHA))?
        }
    };
    Ok(if spec.normalize { k.normalized() } else { k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeRequest {
    pub metric: CentralityKind,
    pub edge_types: TypeFilter,
    pub distance: DistanceMode,
    pub weighted: bool,
    pub normalized: bool,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl AnalyzeRequest {
    pub fn new(metric: CentralityKind) -> Self {
        Self {
            metric,
            edge_types: None,
            distance: DistanceMode::Hop,
            weighted: false,
            normalized: false,
            damping: DEFAULT_DAMPING,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subject {
    Node { id: NodeId },
    Edge { source: NodeId, target: NodeId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub rank: usize,
    #[serde(flatten)]
    pub subject: Subject,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub metric: CentralityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_types: TypeFilter,
    pub parameters: MetricParams,
    pub directed: bool,
    /// Highest score first.
    pub results: Vec<ScoreRow>,
    pub generated_at: DateTime<Utc>,
    pub revision: u64,
}

fn rows(scores: &CentralityScores) -> Vec<ScoreRow> {
    scores
        .ranking()
        .into_iter()
        .enumerate()
        .map(|(rank, k)| ScoreRow {
            rank: rank + 1,
            subject: if scores.is_edge_scores() {
                let (i, j) = scores.edges[k];
                Subject::Edge {
                    source: scores.node_ids[i].clone(),
                    target: scores.node_ids[j].clone(),
                }
            } else {
                Subject::Node {
                    id: scores.node_ids[k].clone(),
                }
            },
            score: scores.scores[k],
        })
        .collect()
}

pub fn centrality(art: &dyn Artifacts, req: &AnalyzeRequest) -> Result<CentralityScores, OpsError> {
    let symmetrize = req.metric == CentralityKind::Eigenvector;
    let g = art.graph(&req.edge_types, symmetrize)?;
    Ok(match req.metric {
        CentralityKind::Degree => degree_centrality(&g, req.weighted),
        CentralityKind::Closeness => closeness_centrality(&g, req.distance),
        CentralityKind::Betweenness => betweenness_centrality(&g, req.distance, req.normalized),
        CentralityKind::EdgeBetweenness => edge_betweenness(&g, req.distance, req.normalized),
        CentralityKind::Eigenvector => eigenvector_centrality(&g, req.tol, req.max_iter)?,
        CentralityKind::PageRank => pagerank(&g, req.damping, req.tol, req.max_iter)?,
    })
}

pub fn analyze(art: &dyn Artifacts, req: &AnalyzeRequest, generated_at: DateTime<Utc>) -> Result<AnalyticsReport, OpsError> {
    let scores = centrality(art, req)?;
    Ok(AnalyticsReport {
        metric: req.metric,
        edge_types: req.edge_types.clone(),
        parameters: scores.params.clone(),
        directed: scores.directed,
        results: rows(&scores),
        generated_at,
        revision: art.model().revision(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_types: TypeFilter,
    pub histogram: DegreeHistogram,
    pub generated_at: DateTime<Utc>,
    pub revision: u64,
}

pub fn histogram(art: &dyn Artifacts, edge_types: &TypeFilter, generated_at: DateTime<Utc>) -> Result<HistogramReport, OpsError> {
    let g = art.graph(edge_types, false)?;
    Ok(HistogramReport {
        edge_types: edge_types.clone(),
        histogram: degree_histogram(&degree_centrality(&g, false))?,
        generated_at,
        revision: art.model().revision(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommunityMethod {
    Gn,
    Lpa,
}

impl FromStr for CommunityMethod {
    type Err = OpsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gn" | "girvan-newman" => Ok(Self::Gn),
            "lpa" | "label-propagation" => Ok(Self::Lpa),
            other => Err(OpsError::Invalid(format!("unknown community method '{other}' (expected gn or lpa)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommunityRequest {
    pub method: CommunityMethod,
    /// Target community count for Girvan–Newman; `None` maximizes modularity.
    pub k: Option<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub edge_types: TypeFilter,
}

impl CommunityRequest {
    pub fn new(method: CommunityMethod) -> Self {
        Self {
            method,
            k: None,
            seed: 0,
            max_iter: DEFAULT_LPA_SWEEPS,
            edge_types: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: NodeId,
    pub name: String,
    pub competency_id: String,
    pub accountability: Accountability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Community {
    pub id: usize,
    pub members: Vec<Member>,
    pub competencies: BTreeSet<String>,
    pub accountabilities: BTreeSet<Accountability>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityReport {
    pub method: CommunityMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_types: TypeFilter,
    pub count: usize,
    pub modularity: f64,
    pub communities: Vec<Community>,
    pub generated_at: DateTime<Utc>,
    pub revision: u64,
}

pub fn communities(art: &dyn Artifacts, req: &CommunityRequest, generated_at: DateTime<Utc>) -> Result<CommunityReport, OpsError> {
    let g = art.graph(&req.edge_types, true)?;
    let partition = match req.method {
        CommunityMethod::Gn => {
            let stop = req.k.map_or(StopRule::MaxModularity, StopRule::TargetCommunities);
            girvan_newman(&g, stop)?
        }
        CommunityMethod::Lpa => label_propagation(&g, req.seed, req.max_iter),
    };
    let model = art.model();
    let communities = partition
        .communities()
        .into_iter()
        .enumerate()
        .map(|(id, nodes)| {
            let members: Vec<Member> = nodes
                .iter()
                .map(|&i| {
                    let c = &model.components[i];
                    Member {
                        id: c.id.clone(),
                        name: c.name.clone(),
                        competency_id: c.competency_id.clone(),
                        accountability: c.accountability,
                    }
                })
                .collect();
            Community {
                id,
                competencies: members.iter().map(|m| m.competency_id.clone()).collect(),
                accountabilities: members.iter().map(|m| m.accountability).collect(),
                members,
            }
        })
        .collect();
    Ok(CommunityReport {
        method: req.method,
        k: req.k.filter(|_| req.method == CommunityMethod::Gn),
        seed: (req.method == CommunityMethod::Lpa).then_some(req.seed),
        edge_types: req.edge_types.clone(),
        count: partition.count,
        modularity: partition.modularity,
        communities,
        generated_at,
        revision: model.revision(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_types: TypeFilter,
    pub kernel: KernelKind,
    pub parameters: KernelParams,
    /// Upper bound on α for the regularized Laplacian kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_max: Option<f64>,
    pub impact: ImpactVector,
    pub generated_at: DateTime<Utc>,
    pub revision: u64,
}

pub fn diffuse(
    art: &dyn Artifacts,
    edge_types: &TypeFilter,
    spec: &KernelSpec,
    seeds: &BTreeMap<NodeId, f64>,
    generated_at: DateTime<Utc>,
) -> Result<DiffusionReport, OpsError> {
    let kernel = art.kernel(edge_types, spec)?;
    let impact = propagate(&kernel, seeds)?;
    let alpha_max = match spec.kind {
        KernelKind::RegularizedLaplacian => {
            let b = laplacian(&*art.graph(edge_types, true)?)?;
            b.alpha_max.is_finite().then_some(b.alpha_max)
        }
        _ => None,
    };
    Ok(DiffusionReport {
        edge_types: edge_types.clone(),
        kernel: kernel.kind,
        parameters: kernel.params,
        alpha_max,
        impact,
        generated_at,
        revision: art.model().revision(),
    })
}

/// Settings of the feed scoring stage.
#[derive(Debug, Clone)]
pub struct ImpactSettings {
    pub lexicon: Lexicon,
    pub stopwords: Stopwords,
    pub tags_per_component: usize,
    pub polarity: Option<Sentiment>,
}

impl Default for ImpactSettings {
    fn default() -> Self {
        Self {
            lexicon: Lexicon::default(),
            stopwords: Stopwords::default(),
            tags_per_component: DEFAULT_TAGS,
            polarity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub items: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub scoring: PipelineOutput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<DiffusionReport>,
    pub generated_at: DateTime<Utc>,
    pub revision: u64,
}

/// Scores `items` against the model and, when `diffusion` is given and
/// any seeds result, spreads the seeds through that kernel.
pub fn impact(
    art: &dyn Artifacts,
    items: &[FeedItem],
    warnings: Vec<String>,
    settings: &ImpactSettings,
    diffusion: Option<(&TypeFilter, &KernelSpec)>,
    generated_at: DateTime<Utc>,
) -> Result<ImpactReport, OpsError> {
    let scoring = score_items(
        art.model(),
        items,
        &settings.stopwords,
        &settings.lexicon,
        settings.tags_per_component,
        settings.polarity,
    )?;
    let diffusion = match diffusion {
        Some((filter, spec)) if !scoring.seeds.is_empty() => Some(diffuse(art, filter, spec, &scoring.seeds, generated_at)?),
        _ => None,
    };
    Ok(ImpactReport {
        items: items.len(),
        warnings,
        scoring,
        diffusion,
        generated_at,
        revision: art.model().revision(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeView {
    pub id: NodeId,
    pub name: String,
    pub competency_id: String,
    pub accountability: Accountability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub source: NodeId,
    pub target: NodeId,
    pub relation_type: String,
    pub weight: f64,
    pub directed: bool,
}

/// Typed node and edge lists of the model restricted to an edge-type filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_types: TypeFilter,
    pub directed: bool,
    pub nodes: Vec<NodeView>,
    pub edges: Vec<EdgeView>,
    pub revision: u64,
}

pub fn graph_view(art: &dyn Artifacts, edge_types: &TypeFilter) -> Result<GraphView, OpsError> {
    let g = art.graph(edge_types, false)?;
    let model = art.model();
    let edges = model
        .edges
        .iter()
        .filter(|e| edge_types.as_ref().is_none_or(|f| f.contains(&e.relation_type)))
        .map(|e| {
            let kind = model
                .relation_type(&e.relation_type)
                .ok_or_else(|| ModelError::UnknownRelationType(e.relation_type.clone()))?;
            Ok(EdgeView {
                source: e.source.clone(),
                target: e.target.clone(),
                relation_type: e.relation_type.clone(),
                weight: e.weight.unwrap_or(kind.default_weight),
                directed: kind.directed,
            })
        })
        .collect::<Result<_, ModelError>>()?;
    Ok(GraphView {
        edge_types: edge_types.clone(),
        directed: g.is_directed(),
        nodes: model
            .components
            .iter()
            .map(|c| NodeView {
                id: c.id.clone(),
                name: c.name.clone(),
                competency_id: c.competency_id.clone(),
                accountability: c.accountability,
            })
            .collect(),
        edges,
        revision: model.revision(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use archgraph_core::{Competency, Component, Edge, RelationType};

    fn path3() -> CbmModel {
        let mut m = CbmModel::new("p");
        m.competencies.push(Competency { id: "x".into(), name: "X".into(), order: 0 });
        m.competencies.push(Competency { id: "y".into(), name: "Y".into(), order: 1 });
        m.components.push(Component::new("a", "A", "x", Accountability::Direct));
        m.components.push(Component::new("b", "B", "x", Accountability::Control));
        m.components.push(Component::new("c", "C", "y", Accountability::Execute));
        m.relation_types.push(RelationType::new("peer", false, 1.0));
        m.relation_types.push(RelationType::new("feeds", true, 1.0));
        m.edges.push(Edge::new("a", "b", "peer", None));
        m.edges.push(Edge::new("b", "c", "peer", None));
        m
    }

    fn at() -> DateTime<Utc> {
        DateTime::from_timestamp(0, 0).unwrap()
    }

    #[test]
    fn type_lists() {
        assert_eq!(parse_types(None), None);
        assert_eq!(parse_types(Some(" ")), None);
        assert_eq!(parse_types(Some("a, b,,")), Some(["a".to_string(), "b".to_string()].into()));
    }

    #[test]
    fn analyze_ranks_the_middle_first() {
        let m = path3();
        let r = analyze(&Direct(&m), &AnalyzeRequest::new(CentralityKind::Betweenness), at()).unwrap();
        assert_eq!(r.results[0].subject, Subject::Node { id: "b".into() });
        assert_eq!(r.results[0].score, 1.0);
        assert_eq!(r.revision, 1);

        let r = analyze(&Direct(&m), &AnalyzeRequest::new(CentralityKind::EdgeBetweenness), at()).unwrap();
        assert_eq!(r.results.len(), 2);
        assert_eq!(r.results[0].score, 2.0);
    }

    #[test]
    fn communities_report_competencies() {
        let m = path3();
        let mut req = CommunityRequest::new(CommunityMethod::Gn);
        req.k = Some(2);
        let r = communities(&Direct(&m), &req, at()).unwrap();
        assert_eq!(r.count, 2);
        let all: BTreeSet<String> = r.communities.iter().flat_map(|c| c.competencies.clone()).collect();
        assert_eq!(all.len(), 2);
        assert!("kmeans".parse::<CommunityMethod>().is_err());
    }

    #[test]
    fn diffusion_defaults_to_half_the_bound() {
        let m = path3();
        let seeds = BTreeMap::from([(NodeId::from("a"), 1.0)]);
        let r = diffuse(&Direct(&m), &None, &KernelSpec::new(KernelKind::RegularizedLaplacian), &seeds, at()).unwrap();
        let bound = r.alpha_max.unwrap();
        assert!((r.parameters.alpha.unwrap() - bound / 2.0).abs() < 1e-15);
        let total: f64 = r.impact.scores.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_filter_type_is_rejected() {
        let m = path3();
        let mut req = AnalyzeRequest::new(CentralityKind::Degree);
        req.edge_types = parse_types(Some("nope"));
        assert!(matches!(analyze(&Direct(&m), &req, at()), Err(OpsError::Model(_))));
    }

    #[test]
    fn graph_view_filters_edges() {
        let m = path3();
        let v = graph_view(&Direct(&m), &parse_types(Some("feeds"))).unwrap();
        assert_eq!(v.nodes.len(), 3);
        assert!(v.edges.is_empty());
    }
}
