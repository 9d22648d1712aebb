//! Single-writer model store.
//!
//! Readers take an immutable [`Snapshot`] of one revision and compute
//! against it; mutations are serialized, checked against the caller's last
//! seen revision, persisted and then published as a fresh snapshot. Derived
//! graphs and kernels are cached per snapshot, so a mutation drops them.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use archgraph_core::diffusion::{KernelKind, KernelMatrix};
use archgraph_core::feed::{ingest_all, FeedItem, FeedSource};
use archgraph_core::{CbmModel, ModelError, Violation, WeightedGraph};
use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::ops::{self, Artifacts, ImpactReport, ImpactSettings, KernelSpec, OpsError, TypeFilter};
use crate::persist::{self, PersistError};

/// Where committed revisions are written.
pub trait Storage: Send + Sync {
    fn persist(&self, model: &CbmModel) -> Result<(), PersistError>;
}

/// Rewrites one model file on every commit.
#[derive(Debug, Clone)]
pub struct FileStorage {
    path: PathBuf,
}

impl FileStorage {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Storage for FileStorage {
    fn persist(&self, model: &CbmModel) -> Result<(), PersistError> {
        persist::save(model, &self.path)
    }
}

/// Keeps the last committed model in memory only.
#[derive(Debug, Default)]
pub struct MemoryStorage {
    last: Mutex<Option<CbmModel>>,
}

impl MemoryStorage {
    pub fn last(&self) -> Option<CbmModel> {
        self.last.lock().expect("storage lock").clone()
    }
}

impl Storage for MemoryStorage {
    fn persist(&self, model: &CbmModel) -> Result<(), PersistError> {
        *self.last.lock().expect("storage lock") = Some(model.clone());
        Ok(())
    }
}

impl<S: Storage + ?Sized> Storage for Arc<S> {
    fn persist(&self, model: &CbmModel) -> Result<(), PersistError> {
        (**self).persist(model)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("revision conflict: request is based on revision {expected}, current revision is {current}")]
    Conflict { expected: u64, current: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("model is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("{0}")]
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct KernelKey {
    filter: TypeFilter,
    kind: KernelKind,
    alpha: Option<u64>,
    restart: Option<u64>,
    normalize: bool,
}

impl KernelKey {
    fn new(filter: &TypeFilter, spec: &KernelSpec) -> Self {
        Self {
            filter: filter.clone(),
            kind: spec.kind,
            alpha: spec.alpha.map(f64::to_bits),
            restart: spec.restart.map(f64::to_bits),
            normalize: spec.normalize,
        }
    }
}

/// One revision of the model plus artifacts derived from it.
pub struct Snapshot {
    model: Arc<CbmModel>,
    committed_at: DateTime<Utc>,
    caching: Arc<AtomicBool>,
    graphs: Mutex<HashMap<(TypeFilter, bool), Arc<WeightedGraph>>>,
    kernels: Mutex<HashMap<KernelKey, Arc<KernelMatrix>>>,
    signals: Mutex<Option<Arc<ImpactReport>>>,
}

impl Snapshot {
    fn new(model: CbmModel, committed_at: DateTime<Utc>, caching: Arc<AtomicBool>) -> Self {
        Self {
            model: Arc::new(model),
            committed_at,
            caching,
            graphs: Mutex::default(),
            kernels: Mutex::default(),
            signals: Mutex::default(),
        }
    }

    pub fn revision(&self) -> u64 {
        self.model.revision()
    }

    pub fn model_arc(&self) -> Arc<CbmModel> {
        Arc::clone(&self.model)
    }

    /// Time this revision was committed; report timestamps use it.
    pub fn committed_at(&self) -> DateTime<Utc> {
        self.committed_at
    }

    fn caching(&self) -> bool {
        self.caching.load(Ordering::Relaxed)
    }

    pub fn cached_graphs(&self) -> usize {
        self.graphs.lock().expect("cache lock").len()
    }

    pub fn cached_kernels(&self) -> usize {
        self.kernels.lock().expect("cache lock").len()
    }
}

impl Artifacts for Snapshot {
    fn model(&self) -> &CbmModel {
        &self.model
    }

    fn graph(&self, filter: &TypeFilter, symmetrize: bool) -> Result<Arc<WeightedGraph>, OpsError> {
        let key = (filter.clone(), symmetrize);
        if self.caching() {
            if let Some(g) = self.graphs.lock().expect("cache lock").get(&key) {
                return Ok(Arc::clone(g));
            }
        }
        let g = Arc::new(self.model.build_graph(filter.as_ref(), symmetrize)?);
        if self.caching() {
            self.graphs.lock().expect("cache lock").insert(key, Arc::clone(&g));
        }
        Ok(g)
    }

    fn kernel(&self, filter: &TypeFilter, spec: &KernelSpec) -> Result<Arc<KernelMatrix>, OpsError> {
        let key = KernelKey::new(filter, spec);
        if self.caching() {
            if let Some(k) = self.kernels.lock().expect("cache lock").get(&key) {
                return Ok(Arc::clone(k));
            }
        }
        let k = Arc::new(ops::build_kernel(self, filter, spec)?);
        if self.caching() {
            self.kernels.lock().expect("cache lock").insert(key, Arc::clone(&k));
        }
        Ok(k)
    }
}

#[derive(Debug, Default)]
struct FeedState {
    items: Vec<FeedItem>,
    seen: HashSet<String>,
    warnings: Vec<String>,
}

pub struct StoreOptions {
    pub caching: bool,
    pub feeds: Vec<FeedSource>,
    pub impact: ImpactSettings,
}

impl Default for StoreOptions {
    fn default() -> Self {
        Self {
            caching: true,
            feeds: Vec::new(),
            impact: ImpactSettings::default(),
        }
    }
}

pub struct ModelStore {
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    storage: Box<dyn Storage>,
    caching: Arc<AtomicBool>,
    feeds: Vec<FeedSource>,
    impact: ImpactSettings,
    feed_state: RwLock<FeedState>,
}

impl ModelStore {
    pub fn new(model: CbmModel, storage: impl Storage + 'static, options: StoreOptions) -> Self {
        let caching = Arc::new(AtomicBool::new(options.caching));
        Self {
            current: RwLock::new(Arc::new(Snapshot::new(model, Utc::now(), Arc::clone(&caching)))),
            writer: Mutex::new(()),
            storage: Box::new(storage),
            caching,
            feeds: options.feeds,
            impact: options.impact,
            feed_state: RwLock::default(),
        }
    }

    /// Store over an in-memory model with default options.
    pub fn in_memory(model: CbmModel) -> Self {
        Self::new(model, MemoryStorage::default(), StoreOptions::default())
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().expect("snapshot lock"))
    }

    pub fn revision(&self) -> u64 {
        self.snapshot().revision()
    }

    pub fn set_caching(&self, on: bool) {
        self.caching.store(on, Ordering::Relaxed);
    }

    pub fn caching(&self) -> bool {
        self.caching.load(Ordering::Relaxed)
    }

    /// Applies `change` to the current model. `expected` is the revision the
    /// caller last saw; a mismatch is a conflict and nothing is written.
    pub fn mutate<F, E>(&self, expected: Option<u64>, change: F) -> Result<Arc<Snapshot>, StoreError>
    where
        F: FnOnce(&CbmModel) -> Result<CbmModel, E>,
        E: Into<StoreError>,
    {
        let _guard = self.writer.lock().expect("writer lock");
        let current = self.snapshot();
        check_expected(expected, current.revision())?;
        let next = change(&current.model).map_err(Into::into)?;
        self.commit(next)
    }

    /// Replaces the whole model. The new revision follows the current one
    /// regardless of the revision stored in `model`.
    pub fn replace(&self, expected: Option<u64>, mut model: CbmModel) -> Result<Arc<Snapshot>, StoreError> {
        let violations = model.validate();
        if !violations.is_empty() {
            return Err(StoreError::Invalid(violations));
        }
        let _guard = self.writer.lock().expect("writer lock");
        let current = self.snapshot().revision();
        check_expected(expected, current)?;
        model.meta.revision = current + 1;
        self.commit(model)
    }

    fn commit(&self, model: CbmModel) -> Result<Arc<Snapshot>, StoreError> {
        self.storage.persist(&model)?;
        let snap = Arc::new(Snapshot::new(model, Utc::now(), Arc::clone(&self.caching)));
        *self.current.write().expect("snapshot lock") = Arc::clone(&snap);
        Ok(snap)
    }

    pub fn feeds(&self) -> &[FeedSource] {
        &self.feeds
    }

    pub fn item_count(&self) -> usize {
        self.feed_state.read().expect("feed lock").items.len()
    }

    /// Merges `items` into the stored set by id and returns how many were new.
    pub fn add_items(&self, items: Vec<FeedItem>, warnings: Vec<String>) -> usize {
        let mut state = self.feed_state.write().expect("feed lock");
        state.warnings = warnings;
        let before = state.items.len();
        for item in items {
            if state.seen.insert(item.id.clone()) {
                state.items.push(item);
            }
        }
        state.items.len() - before
    }

    /// Polls `sources`, or the configured feeds when `sources` is empty.
    pub fn ingest(&self, sources: &[FeedSource]) -> usize {
        let sources = if sources.is_empty() { &self.feeds[..] } else { sources };
        let batch = ingest_all(sources);
        self.add_items(batch.items, batch.warnings)
    }

    /// Impact signals of the stored items against `snap`.
    pub fn signals(&self, snap: &Snapshot) -> Result<Arc<ImpactReport>, OpsError> {
        if snap.caching() {
            if let Some(r) = snap.signals.lock().expect("cache lock").as_ref() {
                return Ok(Arc::clone(r));
            }
        }
        let report = {
            let state = self.feed_state.read().expect("feed lock");
            Arc::new(ops::impact(
                snap,
                &state.items,
                state.warnings.clone(),
                &self.impact,
                None,
                snap.committed_at(),
            )?)
        };
        if snap.caching() {
            *snap.signals.lock().expect("cache lock") = Some(Arc::clone(&report));
        }
        Ok(report)
    }

    /// Drops cached signals of the current snapshot after new items arrive.
    pub fn invalidate_signals(&self) {
        *self.snapshot().signals.lock().expect("cache lock") = None;
    }
}

fn check_expected(expected: Option<u64>, current: u64) -> Result<(), StoreError> {
    match expected {
        Some(e) if e != current => Err(StoreError::Conflict { expected: e, current }),
        _ => Ok(()),
    }
}
