//! Model persistence, shared analysis operations and the HTTP API.

pub mod api;
pub mod export;
pub mod jobs;
pub mod ops;
pub mod persist;
pub mod store;

pub use api::{router, serve, ServeError, REVISION_HEADER};
pub use export::{export_graph, ExportError, ExportFormat};
pub use persist::{load, save, ParseMode, PersistError};
pub use store::{ModelStore, Snapshot, StoreError, StoreOptions};
