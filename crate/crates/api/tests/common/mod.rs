#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use capstone_api::{router, AppState, VERSION_HEADER};
use capstone_core::store::{self, SemesterSnapshot};
use capstone_core::Semester;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

pub fn load(name: &str) -> SemesterSnapshot {
    store::load(fixture(name)).unwrap()
}

pub fn app_for(snapshot: SemesterSnapshot) -> Router {
    router(Arc::new(AppState::ephemeral(
        Semester::from_snapshot(snapshot).unwrap(),
    )))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or(Value::Null)
    }

    pub fn version(&self) -> Option<u64> {
        self.headers
            .get(VERSION_HEADER)?
            .to_str()
            .ok()?
            .parse()
            .ok()
    }
}

pub async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    version: Option<u64>,
    body: Option<Value>,
) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(v) = version {
        req = req.header(VERSION_HEADER, v.to_string());
    }
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        headers,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, None, None).await
}

pub async fn post(app: &Router, uri: &str, version: Option<u64>, body: Value) -> Reply {
    call(app, Method::POST, uri, version, Some(body)).await
}
