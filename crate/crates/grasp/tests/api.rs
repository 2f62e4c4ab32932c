mod common;

use std::cmp::Ordering;

use axum::http::StatusCode;
use common::{cmp_cell, get, get_json, spam_router};
use grasp_core::bundle::{PatternRecord, CSV_HEADER};
use grasp_core::report::{ExampleDetail, ExamplePage, Highlight, PatternDetail, Summary};

#[tokio::test]
async fn summary_payload() {
    let (router, b) = spam_router();
    let (status, body) = get(&router, "/api/summary").await;
    assert_eq!(status, StatusCode::OK);
    let s: Summary = serde_json::from_slice(&body).unwrap();
    assert_eq!(s.configuration, b.configuration);
    assert_eq!((s.dataset.num_positive, s.dataset.num_negative), (3, 5));
    assert_eq!(s.num_patterns, b.patterns.len());
}

#[tokio::test]
async fn every_column_sorts_to_a_total_order() {
    let (router, b) = spam_router();
    let (_, body) = get(&router, "/api/patterns").await;
    let rows: Vec<PatternRecord> = serde_json::from_slice(&body).unwrap();
    assert_eq!(rows, b.patterns);

    for column in CSV_HEADER {
        for dir in ["asc", "desc"] {
            let (status, v) = get_json(&router, &format!("/api/patterns?sort={column}&dir={dir}")).await;
            assert_eq!(status, StatusCode::OK);
            let rows = v.as_array().unwrap();
            assert_eq!(rows.len(), b.patterns.len());
            for pair in rows.windows(2) {
                let mut o = cmp_cell(&pair[0][column], &pair[1][column]);
                if dir == "desc" {
                    o = o.reverse();
                }
                let ranks = (pair[0]["rank"].as_u64(), pair[1]["rank"].as_u64());
                assert!(o == Ordering::Less || (o == Ordering::Equal && ranks.0 < ranks.1), "{column} {dir}");
            }
        }
    }
}

#[tokio::test]
async fn bad_sort_requests() {
    let (router, _) = spam_router();
    let (status, v) = get_json(&router, "/api/patterns?sort=colour").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let msg = v["error"].as_str().unwrap();
    assert!(CSV_HEADER.iter().all(|c| msg.contains(c)), "{msg}");
    let (status, _) = get(&router, "/api/patterns?dir=sideways").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn pattern_detail_for_the_top_spam_pattern() {
    let (router, _) = spam_router();
    let (status, body) = get(&router, "/api/patterns/1").await;
    assert_eq!(status, StatusCode::OK);
    let d: PatternDetail = serde_json::from_slice(&body).unwrap();
    assert_eq!(d.pattern.pattern.to_string(), "[SENTIMENT:pos, POS:DET, POS:PROPN]");
    assert_eq!((d.positive.len(), d.negative.len()), (3, 0));
    assert_eq!(d.positive[0].occurrences, vec![vec![2, 3, 4]]);
    for uri in ["/api/patterns/0", "/api/patterns/9999", "/api/patterns/first"] {
        assert_eq!(get(&router, uri).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn example_pages_and_detail() {
    let (router, b) = spam_router();
    let (status, body) = get(&router, "/api/examples?label=pos&page=1").await;
    assert_eq!(status, StatusCode::OK);
    let page: ExamplePage = serde_json::from_slice(&body).unwrap();
    assert_eq!((page.page, page.num_pages, page.examples.len()), (1, 1, 3));
    let first = &page.examples[0];
    let classes: Vec<Highlight> = first.tokens.iter().map(|t| t.highlight).collect();
    assert_eq!(classes[2], Highlight::Positive);
    assert!(first.tokens[2].patterns.contains(&1));

    let (_, body) = get(&router, "/api/examples?label=neg&page=40").await;
    let clamped: ExamplePage = serde_json::from_slice(&body).unwrap();
    assert_eq!((clamped.page, clamped.examples.len()), (1, 5));
    assert_eq!(get(&router, "/api/examples?label=maybe").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&router, "/api/examples?label=pos&page=x").await.0, StatusCode::BAD_REQUEST);

    let (status, body) = get(&router, "/api/examples/pos/0").await;
    assert_eq!(status, StatusCode::OK);
    let d: ExampleDetail = serde_json::from_slice(&body).unwrap();
    assert_eq!(d.example.raw_text, b.dataset.positive[0].raw_text);
    assert!(d.positive_patterns.iter().any(|p| p.rank == 1));
    assert!(d.positive_patterns.iter().all(|p| p.polarity == grasp_core::Label::Positive));
    assert!(d.negative_patterns.iter().all(|p| p.polarity == grasp_core::Label::Negative));
    for uri in ["/api/examples/neg/5", "/api/examples/pos/x"] {
        assert_eq!(get(&router, uri).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
    assert_eq!(get(&router, "/api/examples/both/0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&router, "/api/nothing").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_reads_match_serial_reads() {
    let (router, _) = spam_router();
    let uris = [
        "/api/summary",
        "/api/patterns?sort=f1&dir=desc",
        "/api/patterns/2",
        "/api/examples?label=neg",
        "/api/examples/pos/1",
    ];
    let mut serial = Vec::new();
    for u in uris {
        serial.push(get(&router, u).await);
    }
    let handles: Vec<_> = (0..40)
        .map(|i| {
            let r = router.clone();
            let u = uris[i % uris.len()];
            tokio::spawn(async move { (i, get(&r, u).await) })
        })
        .collect();
    for h in handles {
        let (i, got) = h.await.unwrap();
        assert_eq!(got, serial[i % uris.len()]);
    }
}

#[tokio::test]
async fn static_assets_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>explorer</html>").unwrap();
    let b = std::sync::Arc::new(common::spam_bundle());
    let router = grasp::server::router(b, Some(dir.path().to_path_buf()));
    let (status, body) = get(&router, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>explorer</html>");
    assert_eq!(get(&router, "/api/summary").await.0, StatusCode::OK);
}
