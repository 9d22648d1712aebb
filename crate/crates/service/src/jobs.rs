//! Background jobs for slow analytics.
//!
//! A job runs on the blocking thread pool. Cancelling marks the job
//! cancelled at once; whatever the computation returns afterwards is
//! discarded.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Running,
    Succeeded,
    Failed,
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub id: u64,
    pub kind: String,
    pub state: JobState,
    /// Model revision the job computes against.
    pub revision: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Default)]
pub struct Jobs {
    next: AtomicU64,
    table: Mutex<BTreeMap<u64, JobStatus>>,
}

impl Jobs {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    /// Starts `work` in the background and returns the new job's id.
    /// Must be called from within a tokio runtime.
    pub fn spawn<F>(self: &Arc<Self>, kind: &str, revision: u64, work: F) -> u64
    where
        F: FnOnce() -> Result<serde_json::Value, String> + Send + 'static,
    {
        let id = self.next.fetch_add(1, Ordering::Relaxed) + 1;
        self.table.lock().expect("jobs lock").insert(
            id,
            JobStatus {
                id,
                kind: kind.to_owned(),
                state: JobState::Running,
                revision,
                result: None,
                error: None,
            },
        );
        let jobs = Arc::clone(self);
        tokio::task::spawn_blocking(move || {
            let outcome = work();
            let mut table = jobs.table.lock().expect("jobs lock");
            if let Some(job) = table.get_mut(&id).filter(|j| j.state == JobState::Running) {
                match outcome {
                    Ok(v) => {
                        job.state = JobState::Succeeded;
                        job.result = Some(v);
                    }
                    Err(e) => {
                        job.state = JobState::Failed;
                        job.error = Some(e);
                    }
                }
            }
        });
        id
    }

    pub fn status(&self, id: u64) -> Option<JobStatus> {
        self.table.lock().expect("jobs lock").get(&id).cloned()
    }

    /// Cancels a running job. Finished jobs keep their state.
    pub fn cancel(&self, id: u64) -> Option<JobStatus> {
        let mut table = self.table.lock().expect("jobs lock");
        let job = table.get_mut(&id)?;
        if job.state == JobState::Running {
            job.state = JobState::Cancelled;
        }
        Some(job.clone())
    }
}
