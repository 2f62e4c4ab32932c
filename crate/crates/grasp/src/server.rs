//! Read-only HTTP API over one loaded bundle.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use grasp_core::report;
use grasp_core::{Error, Label, ResultBundle};

type Shared = Arc<ResultBundle>;

/// JSON error body: `{"error": "..."}`.
pub struct ApiError(Error);

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::BadRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            error: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

fn parse_label(s: &str) -> Result<Label, ApiError> {
    s.parse::<Label>().map_err(ApiError)
}

async fn summary(State(b): State<Shared>) -> Json<report::Summary> {
    Json(report::summary(&b))
}

#[derive(Debug, Deserialize)]
struct SortQuery {
    sort: Option<String>,
    dir: Option<String>,
}

async fn patterns(State(b): State<Shared>, Query(q): Query<SortQuery>) -> ApiResult<Vec<grasp_core::bundle::PatternRecord>> {
    Ok(Json(report::patterns(&b, q.sort.as_deref(), q.dir.as_deref())?))
}

async fn pattern_detail(State(b): State<Shared>, Path(rank): Path<String>) -> ApiResult<report::PatternDetail> {
    let rank: usize = rank
        .parse()
        .map_err(|_| Error::NotFound(format!("pattern rank {rank}")))?;
    Ok(Json(report::pattern_detail(&b, rank)?))
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    label: Option<String>,
    page: Option<String>,
}

async fn examples(State(b): State<Shared>, Query(q): Query<PageQuery>) -> ApiResult<report::ExamplePage> {
    let label = parse_label(q.label.as_deref().unwrap_or("pos"))?;
    let page = match q.page.as_deref() {
        None => 1,
        Some(p) => p
            .parse()
            .map_err(|_| Error::BadRequest(format!("invalid page `{p}`")))?,
    };
    Ok(Json(report::examples_page(&b, label, page)))
}

async fn example_detail(State(b): State<Shared>, Path((label, id)): Path<(String, String)>) -> ApiResult<report::ExampleDetail> {
    let label = parse_label(&label)?;
    let id: usize = id
        .parse()
        .map_err(|_| Error::NotFound(format!("{} example {id}", label.short())))?;
    Ok(Json(report::example_detail(&b, label, id)?))
}

async fn not_found() -> ApiError {
    ApiError(Error::NotFound("no such endpoint".into()))
}

pub fn router(bundle: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/summary", get(summary))
        .route("/api/patterns", get(patterns))
        .route("/api/patterns/:rank", get(pattern_detail))
        .route("/api/examples", get(examples))
        .route("/api/examples/:label/:id", get(example_detail))
        .route("/api/*rest", get(not_found))
        .with_state(bundle);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

pub async fn serve(bundle: Shared, addr: &str, static_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("serving on http://{}", listener.local_addr()?);
    axum::serve(listener, router(bundle, static_dir)).await?;
    Ok(())
}
