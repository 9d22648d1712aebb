#![allow(dead_code)]

use std::sync::Arc;

use archgraph_core::CbmModel;
use archgraph_service::persist::{self, ParseMode};
use archgraph_service::{router, ModelStore, REVISION_HEADER};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn retail() -> CbmModel {
    persist::load(std::path::Path::new(&fixture("retail.json")), ParseMode::Strict).expect("fixture model loads")
}

pub struct Reply {
    pub status: StatusCode,
    pub revision: Option<u64>,
    pub content_type: String,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", self.body))
    }
}

pub struct Client {
    pub store: Arc<ModelStore>,
    app: Router,
}

impl Client {
    pub fn new(model: CbmModel) -> Self {
        Self::with_store(Arc::new(ModelStore::in_memory(model)))
    }

    pub fn with_store(store: Arc<ModelStore>) -> Self {
        let app = router(Arc::clone(&store));
        Self { store, app }
    }

    pub async fn send(&self, method: Method, uri: &str, if_match: Option<&str>, body: Option<&str>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(tag) = if_match {
            req = req.header("if-match", tag);
        }
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        let req = req.body(Body::from(body.unwrap_or_default().to_owned())).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let revision = resp
            .headers()
            .get(REVISION_HEADER)
            .map(|v| v.to_str().unwrap().parse().unwrap());
        let content_type = resp
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_owned())
            .unwrap_or_default();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        Reply {
            status,
            revision,
            content_type,
            body: String::from_utf8(bytes.to_vec()).unwrap(),
        }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Method::GET, uri, None, None).await
    }
}
