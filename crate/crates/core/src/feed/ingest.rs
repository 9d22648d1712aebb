use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use roxmltree::{Document, Node};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::FeedError;

/// One news item from an RSS or Atom feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedItem {
    /// Hex digest of the source identifier and the item's guid.
    pub id: String,
    pub title: String,
    pub body: String,
    pub published: Option<DateTime<Utc>>,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
}

/// Items of one document plus the reasons any items were skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeedBatch {
    pub items: Vec<FeedItem>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeedSource {
    Url(String),
    File(PathBuf),
}

impl FeedSource {
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if s.starts_with("http://") || s.starts_with("https://") {
            Self::Url(s.to_owned())
        } else {
            Self::File(PathBuf::from(s))
        }
    }

    pub fn identifier(&self) -> String {
        match self {
            Self::Url(u) => u.clone(),
            Self::File(p) => p.display().to_string(),
        }
    }

    fn fetch(&self) -> Result<String, FeedError> {
        let unreachable = |reason: String| FeedError::Unreachable {
            source_id: self.identifier(),
            reason,
        };
        match self {
            Self::File(p) => std::fs::read_to_string(p).map_err(|e| unreachable(e.to_string())),
            Self::Url(u) => ureq::get(u)
                .call()
                .map_err(|e| unreachable(e.to_string()))?
                .body_mut()
                .read_to_string()
                .map_err(|e| unreachable(e.to_string())),
        }
    }
}

/// Feed list file: one source per line, `#` starts a comment line.
pub fn parse_feed_list(text: &str) -> Vec<FeedSource> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(FeedSource::parse)
        .collect()
}

pub fn item_id(source: &str, guid: &str) -> String {
    let mut h = Sha256::new();
    h.update(source.as_bytes());
    h.update(b"\n");
    h.update(guid.as_bytes());
    h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
}

static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[^>]*>").expect("valid regex"));

/// Drops markup embedded in descriptions and collapses whitespace.
fn plain_text(s: &str) -> String {
    let stripped = TAG.replace_all(s, " ");
    let decoded = stripped
        .replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&");
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn child<'a>(node: Node<'a, 'a>, name: &str) -> Option<Node<'a, 'a>> {
    node.children().find(|c| c.is_element() && c.tag_name().name() == name)
}

fn child_text(node: Node, name: &str) -> Option<String> {
    child(node, name)
        .map(|c| c.descendants().filter(|d| d.is_text()).filter_map(|d| d.text()).collect::<String>())
        .map(|t| t.trim().to_owned())
        .filter(|t| !t.is_empty())
}

struct RawItem {
    title: Option<String>,
    body: Option<String>,
    date: Option<String>,
    guid: Option<String>,
    link: Option<String>,
}

fn rss_item(node: Node) -> RawItem {
    RawItem {
        title: child_text(node, "title"),
        body: child_text(node, "description").or_else(|| child_text(node, "encoded")),
        date: child_text(node, "pubDate"),
        guid: child_text(node, "guid"),
        link: child_text(node, "link"),
    }
}

fn atom_entry(node: Node) -> RawItem {
    let link = node
        .children()
        .filter(|c| c.is_element() && c.tag_name().name() == "link")
        .find(|c| c.attribute("rel").is_none_or(|r| r == "alternate"))
        .and_then(|c| c.attribute("href"))
        .map(str::to_owned);
    RawItem {
        title: child_text(node, "title"),
        body: child_text(node, "content").or_else(|| child_text(node, "summary")),
        date: child_text(node, "updated").or_else(|| child_text(node, "published")),
        guid: child_text(node, "id"),
        link,
    }
}

fn parse_date(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc2822(s)
        .or_else(|_| DateTime::parse_from_rfc3339(s))
        .ok()
        .map(|d| d.with_timezone(&Utc))
}

/// Parses an RSS 2.0 or Atom 1.0 document.
///
/// Items without a title are skipped with a warning; an unparseable date is
/// warned about and left empty. Items repeating an earlier id are dropped.
pub fn parse_feed(source: &str, xml: &str) -> Result<FeedBatch, FeedError> {
    let unparseable = |reason: String| FeedError::Unparseable {
        source_id: source.to_owned(),
        reason,
    };
    let doc = Document::parse(xml).map_err(|e| unparseable(e.to_string()))?;
    let root = doc.root_element();
    let raw: Vec<RawItem> = match root.tag_name().name() {
        "rss" => {
            let channel = child(root, "channel").ok_or_else(|| unparseable("rss document without channel".into()))?;
            channel
                .children()
                .filter(|c| c.is_element() && c.tag_name().name() == "item")
                .map(rss_item)
                .collect()
        }
        "feed" => root
            .children()
            .filter(|c| c.is_element() && c.tag_name().name() == "entry")
            .map(atom_entry)
            .collect(),
        other => return Err(unparseable(format!("root element <{other}> is neither rss nor feed"))),
    };

    let mut batch = FeedBatch::default();
    let mut seen = HashSet::new();
    for (pos, item) in raw.into_iter().enumerate() {
        let n = pos + 1;
        let Some(title) = item.title.as_deref().map(plain_text).filter(|t| !t.is_empty()) else {
            batch.warnings.push(format!("{source}: item {n} skipped: missing title"));
            continue;
        };
        let published = match item.date.as_deref() {
            Some(d) => {
                let parsed = parse_date(d);
                if parsed.is_none() {
                    batch.warnings.push(format!("{source}: item {n}: unparseable date '{d}'"));
                }
                parsed
            }
            None => None,
        };
        let guid = item.guid.clone().or_else(|| item.link.clone()).unwrap_or_else(|| title.clone());
        let id = item_id(source, &guid);
        if !seen.insert(id.clone()) {
            continue;
        }
        batch.items.push(FeedItem {
            id,
            title,
            body: item.body.as_deref().map(plain_text).unwrap_or_default(),
            published,
            source: source.to_owned(),
            link: item.link,
        });
    }
    Ok(batch)
}

/// Fetches and parses one feed.
pub fn ingest(source: &FeedSource) -> Result<FeedBatch, FeedError> {
    let xml = source.fetch()?;
    parse_feed(&source.identifier(), &xml)
}

/// Ingests every source, merging items by id. A failing source adds a
/// warning instead of aborting the others.
pub fn ingest_all(sources: &[FeedSource]) -> FeedBatch {
    let mut out = FeedBatch::default();
    let mut seen = HashSet::new();
    for s in sources {
        match ingest(s) {
            Ok(batch) => {
                out.warnings.extend(batch.warnings);
                for item in batch.items {
                    if seen.insert(item.id.clone()) {
                        out.items.push(item);
                    }
                }
            }
            Err(e) => out.warnings.push(e.to_string()),
        }
    }
    out
}
