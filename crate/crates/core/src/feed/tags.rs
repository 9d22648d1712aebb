use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::text::{tokenize, Stopwords};
use super::FeedError;
use crate::model::{CbmModel, Component, NodeId};

/// Top terms of one component by tf-idf, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagSet {
    pub component_id: NodeId,
    pub tags: Vec<(String, f64)>,
    pub revision: u64,
}

impl TagSet {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(|(t, _)| t.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

fn component_terms(c: &Component, stopwords: &Stopwords) -> Vec<String> {
    let mut text = String::new();
    text.push_str(&c.name);
    text.push(' ');
    text.push_str(&c.description);
    for p in &c.processes {
        text.push(' ');
        text.push_str(p);
    }
    tokenize(&text)
        .into_iter()
        .filter(|t| t.chars().count() >= 3 && !stopwords.contains(t))
        .collect()
}

/// Document frequencies over every component of a model.
struct TermIndex {
    docs: f64,
    df: HashMap<String, usize>,
}

impl TermIndex {
    fn new(model: &CbmModel, stopwords: &Stopwords) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for c in &model.components {
            let unique: HashSet<String> = component_terms(c, stopwords).into_iter().collect();
            for t in unique {
                *df.entry(t).or_default() += 1;
            }
        }
        Self {
            docs: model.components.len() as f64,
            df,
        }
    }

    fn tags(&self, target: &Component, k: usize, stopwords: &Stopwords, revision: u64) -> TagSet {
        let terms = component_terms(target, stopwords);
        let total = terms.len() as f64;
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in terms {
            *tf.entry(t).or_default() += 1;
        }
        let mut scored: Vec<(String, f64)> = tf
            .into_iter()
            .map(|(t, count)| {
                let idf = (self.docs / self.df[&t] as f64).ln();
                let score = count as f64 / total * idf;
                (t, score)
            })
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        TagSet {
            component_id: target.id.clone(),
            tags: scored,
            revision,
        }
    }
}

/// Feature tags of one component: term frequency over its name, description
/// and processes, times `ln(N / df)` with document frequency counted over
/// every component of the model. Terms present in all components score 0
/// and are never tags. Ties are broken alphabetically.
pub fn extract_tags(model: &CbmModel, component_id: &NodeId, k: usize, stopwords: &Stopwords) -> Result<TagSet, FeedError> {
    if k == 0 {
        return Err(FeedError::ZeroTags);
    }
    let target = model
        .component(component_id)
        .ok_or_else(|| FeedError::UnknownComponent(component_id.clone()))?;
    Ok(TermIndex::new(model, stopwords).tags(target, k, stopwords, model.revision()))
}

/// [`extract_tags`] for every component, in model order.
pub fn extract_all_tags(model: &CbmModel, k: usize, stopwords: &Stopwords) -> Result<Vec<TagSet>, FeedError> {
    if k == 0 {
        return Err(FeedError::ZeroTags);
    }
    let index = TermIndex::new(model, stopwords);
    Ok(model
        .components
        .iter()
        .map(|c| index.tags(c, k, stopwords, model.revision()))
        .collect())
}

/// Copy of the model with every component's cached `tags` refreshed.
pub fn refresh_tags(model: &CbmModel, k: usize, stopwords: &Stopwords) -> Result<CbmModel, FeedError> {
    let mut out = model.clone();
    for (c, set) in out.components.iter_mut().zip(extract_all_tags(model, k, stopwords)?) {
        c.tags = set.terms().map(str::to_owned).collect();
    }
    out.meta.revision += 1;
    Ok(out)
}
