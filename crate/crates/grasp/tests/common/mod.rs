#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

use grasp_core::corpus::{ingest_pretagged, Augmenter};
use grasp_core::{fit, Label, MinerConfig, ResultBundle};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

pub fn spam_config() -> MinerConfig {
    MinerConfig {
        num_patterns: 200,
        gaps_allowed: Some(2),
        alphabet_size: 200,
        include_standard: ["TEXT", "POS", "NER", "SENTIMENT"].iter().map(|s| s.to_string()).collect(),
        ..MinerConfig::default()
    }
}

pub fn spam_bundle() -> ResultBundle {
    let aug = Augmenter::passthrough();
    let pos = ingest_pretagged(&data("spam_pos.jsonl"), Label::Positive, &aug).unwrap();
    let neg = ingest_pretagged(&data("spam_neg.jsonl"), Label::Negative, &aug).unwrap();
    fit(&pos, &neg, &spam_config()).unwrap()
}

pub fn spam_router() -> (Router, Arc<ResultBundle>) {
    let b = Arc::new(spam_bundle());
    (grasp::server::router(b.clone(), None), b)
}

pub async fn get(router: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().uri(uri).body(Body::empty()).unwrap();
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body)
}

pub async fn get_json(router: &Router, uri: &str) -> (StatusCode, serde_json::Value) {
    let (status, body) = get(router, uri).await;
    (status, serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null))
}

/// Column comparison used to check sorted tables.
pub fn cmp_cell(a: &serde_json::Value, b: &serde_json::Value) -> std::cmp::Ordering {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.as_str().unwrap().cmp(b.as_str().unwrap()),
    }
}
