use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ingest::FeedItem;
use super::tags::{extract_all_tags, TagSet};
use super::text::{tokenize, Lexicon, Stopwords};
use super::FeedError;
use crate::model::{CbmModel, NodeId};

/// A tag found in an item's title counts this many times its weight.
pub const TITLE_WEIGHT: f64 = 2.0;
/// Scores at or above this are positive, at or below its negation negative.
pub const SENTIMENT_THRESHOLD: f64 = 1.0;
pub const NEGATORS: [&str; 3] = ["not", "no", "never"];

/// Distinct title and body tokens of one item.
struct ItemTerms {
    title: HashSet<String>,
    body: HashSet<String>,
}

impl ItemTerms {
    fn new(item: &FeedItem) -> Self {
        Self {
            title: tokenize(&item.title).into_iter().collect(),
            body: tokenize(&item.body).into_iter().collect(),
        }
    }

    fn relevance(&self, tags: &TagSet) -> f64 {
        let total: f64 = tags.tags.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let hit: f64 = tags
            .tags
            .iter()
            .map(|(t, w)| {
                if self.title.contains(t) {
                    TITLE_WEIGHT * w
                } else if self.body.contains(t) {
                    *w
                } else {
                    0.0
                }
            })
            .sum();
        (hit / (TITLE_WEIGHT * total)).clamp(0.0, 1.0)
    }
}

/// Share of the tag weight an item covers: tags in the title count double,
/// tags only in the body once, normalized by twice the total tag weight.
pub fn relevance(tags: &TagSet, item: &FeedItem) -> f64 {
    ItemTerms::new(item).relevance(tags)
}

/// Items with nonzero relevance to `tags`, in input order.
pub fn match_items<'a>(tags: &TagSet, items: &'a [FeedItem]) -> Vec<(&'a FeedItem, f64)> {
    items
        .iter()
        .map(|item| (item, relevance(tags, item)))
        .filter(|(_, r)| *r > 0.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

impl Sentiment {
    pub fn from_score(score: f64) -> Self {
        if score >= SENTIMENT_THRESHOLD {
            Self::Positive
        } else if score <= -SENTIMENT_THRESHOLD {
            Self::Negative
        } else {
            Self::Neutral
        }
    }
}

/// Pluggable text polarity scorer.
pub trait SentimentScorer {
    fn score(&self, text: &str) -> f64;
}

impl SentimentScorer for Lexicon {
    /// Sum of lexicon polarities. A negator flips the sign of the next
    /// lexicon hit after it.
    fn score(&self, text: &str) -> f64 {
        let mut total = 0.0;
        let mut negate = false;
        for token in tokenize(text) {
            if NEGATORS.contains(&token.as_str()) {
                negate = true;
                continue;
            }
            if let Some(p) = self.polarity(&token) {
                total += if negate { -p } else { p };
                negate = false;
            }
        }
        total
    }
}

/// Sentiment of an item's title followed by its body.
pub fn sentiment(item: &FeedItem, scorer: &dyn SentimentScorer) -> (Sentiment, f64) {
    let text = format!("{} {}", item.title, item.body);
    let score = scorer.score(&text);
    (Sentiment::from_score(score), score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactSignal {
    pub component_id: NodeId,
    pub item_id: String,
    pub relevance: f64,
    pub sentiment: Sentiment,
    pub sentiment_score: f64,
    /// `relevance × |sentiment_score|`
    pub importance: f64,
}

impl ImpactSignal {
    pub fn new(component_id: NodeId, item_id: String, relevance: f64, sentiment_score: f64) -> Self {
        Self {
            component_id,
            item_id,
            relevance,
            sentiment: Sentiment::from_score(sentiment_score),
            sentiment_score,
            importance: relevance * sentiment_score.abs(),
        }
    }
}

/// Signals by descending importance; equal importance keeps item id order,
/// then component id order.
pub fn rank_signals(mut signals: Vec<ImpactSignal>) -> Vec<ImpactSignal> {
    signals.sort_by(|a, b| {
        b.importance
            .total_cmp(&a.importance)
            .then_with(|| a.item_id.cmp(&b.item_id))
            .then_with(|| a.component_id.cmp(&b.component_id))
    });
    signals
}

/// Diffusion seeds: summed importance per component, optionally restricted
/// to one polarity. Components with zero total importance are left out.
pub fn to_seeds(signals: &[ImpactSignal], polarity: Option<Sentiment>) -> BTreeMap<NodeId, f64> {
    let mut seeds = BTreeMap::new();
    for s in signals.iter().filter(|s| polarity.is_none_or(|p| s.sentiment == p)) {
        *seeds.entry(s.component_id.clone()).or_insert(0.0) += s.importance;
    }
    seeds.retain(|_, v| *v > 0.0);
    seeds
}

/// Fixed scoring constants, reported alongside pipeline output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringMetadata {
    pub tags_per_component: usize,
    pub title_weight: f64,
    pub sentiment_threshold: f64,
    pub negators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub revision: u64,
    pub metadata: ScoringMetadata,
    pub tags: Vec<TagSet>,
    pub signals: Vec<ImpactSignal>,
    pub seeds: BTreeMap<NodeId, f64>,
}

/// Tags every component, matches the items against the tags, scores the
/// matches and ranks the resulting signals. `polarity` filters the seeds.
pub fn score_items(
    model: &CbmModel,
    items: &[FeedItem],
    stopwords: &Stopwords,
    scorer: &dyn SentimentScorer,
    tags_per_component: usize,
    polarity: Option<Sentiment>,
) -> Result<PipelineOutput, FeedError> {
    let tags = extract_all_tags(model, tags_per_component, stopwords)?;
    let terms: Vec<ItemTerms> = items.iter().map(ItemTerms::new).collect();
    let mut scores: Vec<Option<f64>> = vec![None; items.len()];
    let mut signals = Vec::new();
    for set in &tags {
        for (k, item) in items.iter().enumerate() {
            let rel = terms[k].relevance(set);
            if rel > 0.0 {
                let score = *scores[k].get_or_insert_with(|| sentiment(item, scorer).1);
                signals.push(ImpactSignal::new(set.component_id.clone(), item.id.clone(), rel, score));
            }
        }
    }
    let signals = rank_signals(signals);
    let seeds = to_seeds(&signals, polarity);
    Ok(PipelineOutput {
        revision: model.revision(),
        metadata: ScoringMetadata {
            tags_per_component,
            title_weight: TITLE_WEIGHT,
            sentiment_threshold: SENTIMENT_THRESHOLD,
            negators: NEGATORS.iter().map(|s| s.to_string()).collect(),
        },
        tags,
        signals,
        seeds,
    })
}
