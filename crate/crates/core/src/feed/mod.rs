//! External impact pipeline: feature tags per component, RSS/Atom ingestion,
//! relevance matching, lexicon sentiment and the hand-off of per-component
//! seed intensities to diffusion.

mod ingest;
mod score;
mod tags;
mod text;

use thiserror::Error;

use crate::model::NodeId;

pub use ingest::{ingest, ingest_all, item_id, parse_feed, parse_feed_list, FeedBatch, FeedItem, FeedSource};
pub use score::{
    match_items, rank_signals, relevance, score_items, sentiment, to_seeds, ImpactSignal, PipelineOutput,
    ScoringMetadata, Sentiment, SentimentScorer, NEGATORS, SENTIMENT_THRESHOLD, TITLE_WEIGHT,
};
pub use tags::{extract_all_tags, extract_tags, refresh_tags, TagSet};
pub use text::{tokenize, Lexicon, Stopwords};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeedError {
    #[error("unknown component '{0}'")]
    UnknownComponent(NodeId),
    #[error("tag count must be at least 1")]
    ZeroTags,
    #[error("feed source {source_id} is unreachable: {reason}")]
    Unreachable { source_id: String, reason: String },
    #[error("feed source {source_id} is not a readable RSS/Atom document: {reason}")]
    Unparseable { source_id: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("lexicon line {line} is not `token<TAB>polarity`: {content}")]
    Lexicon { line: usize, content: String },
}
