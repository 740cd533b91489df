//! HTTP API over one analysed session.
//!
//! Reads share an `RwLock`; `POST /api/recompute` takes the write half, so
//! recomputes are serialized and the last one wins.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::services::{ServeDir, ServeFile};

use swingdiff_core::{
    load_pose_sequence, report_to_json, AnalysisReport, DiscrepancyResult, ErrorKind, FrameComparison, Point,
    PoseSequence,
};

/// A report plus, when the referenced pose files are still readable, the two
/// pose sequences it was computed from.
pub struct Session {
    pub report: AnalysisReport,
    pub poses: Option<SessionPoses>,
}

pub struct SessionPoses {
    pub user: PoseSequence,
    pub expert: PoseSequence,
}

impl Session {
    pub fn new(report: AnalysisReport, poses: Option<SessionPoses>) -> Self {
        let poses = poses.filter(|p| {
            p.user.len() == report.comparisons.len()
                && report.comparisons.iter().all(|c| c.expert_frame < p.expert.len())
        });
        Self { report, poses }
    }

    /// Loads the pose files named in the report's config echo. Missing or
    /// inconsistent files only disable skeleton and image output.
    pub fn with_echoed_poses(report: AnalysisReport) -> Self {
        let cfg = &report.config;
        let poses = match (
            load_pose_sequence(&cfg.user_pose_path),
            load_pose_sequence(&cfg.expert_pose_path),
        ) {
            (Ok(user), Ok(expert)) => Some(SessionPoses { user, expert }),
            (u, e) => {
                if let Some(err) = u.err().or(e.err()) {
                    tracing::warn!("serving without skeletons: {err}");
                }
                None
            }
        };
        Self::new(report, poses)
    }
}

#[derive(Clone)]
pub struct AppState {
    session: Arc<RwLock<Session>>,
}

impl AppState {
    pub fn new(session: Session) -> Self {
        Self {
            session: Arc::new(RwLock::new(session)),
        }
    }

    pub async fn report(&self) -> AnalysisReport {
        self.session.read().await.report.clone()
    }
}

/// Machine-readable error body: `{code, message, context}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub context: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>, context: Value) -> Self {
        Self {
            status,
            code: code.into(),
            message: message.into(),
            context,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BAD_REQUEST", message, Value::Null)
    }
}

impl From<swingdiff_core::Error> for ApiError {
    fn from(err: swingdiff_core::Error) -> Self {
        let status = match err.kind() {
            ErrorKind::Validation => StatusCode::BAD_REQUEST,
            ErrorKind::Io | ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut context = serde_json::Map::new();
        let mut cur = &err;
        while let swingdiff_core::Error::Context {
            stage,
            file,
            frame,
            source,
        } = cur
        {
            context.entry("stage").or_insert_with(|| json!(stage));
            if let Some(f) = file {
                context.entry("file").or_insert_with(|| json!(f));
            }
            if let Some(f) = frame {
                context.entry("frame").or_insert_with(|| json!(f));
            }
            cur = source;
        }
        Self::new(status, err.code(), err.to_string(), Value::Object(context))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "context": self.context });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SignalResponse {
    pub frames: Vec<usize>,
    pub values: Vec<f64>,
    pub threshold: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Skeleton {
    pub joints: Vec<Point>,
    pub club: Option<[Point; 2]>,
}

impl Skeleton {
    fn of(pose: &swingdiff_core::Pose) -> Self {
        Self {
            joints: pose.joints().to_vec(),
            club: pose.club().copied(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FrameResponse {
    #[serde(flatten)]
    pub comparison: FrameComparison,
    pub user_image: Option<String>,
    pub expert_image: Option<String>,
    pub user_skeleton: Option<Skeleton>,
    /// Expert pose after the frame's similarity transform, in user space.
    pub expert_skeleton_aligned: Option<Skeleton>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecomputeRequest {
    pub threshold_k: Option<f64>,
    pub min_gap: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RecomputeResponse {
    pub threshold: f64,
    pub discrepancy: DiscrepancyResult,
}

async fn report(State(state): State<AppState>) -> Response {
    let body = report_to_json(&state.session.read().await.report);
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn signal(State(state): State<AppState>) -> Json<SignalResponse> {
    let session = state.session.read().await;
    let values = session.report.signal().to_vec();
    Json(SignalResponse {
        frames: (0..values.len()).collect(),
        values,
        threshold: session.report.threshold,
    })
}

async fn frame(State(state): State<AppState>, Path(raw): Path<String>) -> ApiResult<Json<FrameResponse>> {
    let i: usize = raw
        .parse()
        .map_err(|_| ApiError::bad_request(format!("frame index must be a non-negative integer, got {raw:?}")))?;
    let session = state.session.read().await;
    let count = session.report.comparisons.len();
    let comparison = session.report.comparisons.get(i).cloned().ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "NOT_FOUND",
            format!("frame {i} is out of range for a {count}-frame session"),
            json!({ "frame": i, "frame_count": count }),
        )
    })?;
    let mut out = FrameResponse {
        comparison,
        user_image: None,
        expert_image: None,
        user_skeleton: None,
        expert_skeleton_aligned: None,
    };
    if let Some(p) = &session.poses {
        let j = out.comparison.expert_frame;
        out.user_image = p.user.frame_images().map(|v| v[i].clone());
        out.expert_image = p.expert.frame_images().map(|v| v[j].clone());
        out.user_skeleton = Some(Skeleton::of(&p.user.frames()[i]));
        let aligned = out.comparison.transform.apply_pose(&p.expert.frames()[j])?;
        out.expert_skeleton_aligned = Some(Skeleton::of(&aligned));
    }
    Ok(Json(out))
}

async fn recompute(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<RecomputeResponse>> {
    let req: RecomputeRequest = if body.iter().all(u8::is_ascii_whitespace) {
        RecomputeRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid recompute body: {e}")))?
    };
    let mut session = state.session.write().await;
    session.report.recompute_discrepancy(req.threshold_k, req.min_gap)?;
    Ok(Json(RecomputeResponse {
        threshold: session.report.threshold,
        discrepancy: session.report.discrepancy.clone(),
    }))
}

async fn meta(State(state): State<AppState>) -> Json<Value> {
    let session = state.session.read().await;
    Json(json!({
        "versions": session.report.versions,
        "config": session.report.config,
        "frame_count": session.report.comparisons.len(),
        "has_skeletons": session.poses.is_some(),
    }))
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such endpoint", Value::Null)
}

const PLACEHOLDER_PAGE: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>swingdiff</title></head>
<body><p>The swingdiff viewer is not bundled with this build. The API is available under <code>/api/</code>.</p></body></html>
";

/// Builds the router. With `ui_dir`, static assets are served from that
/// directory (falling back to its `index.html`); otherwise `/` returns a
/// placeholder page.
pub fn app(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/report", get(report))
        .route("/signal", get(signal))
        .route("/frame/:i", get(frame))
        .route("/recompute", post(recompute))
        .route("/meta", get(meta))
        .fallback(api_not_found)
        .with_state(state);
    let router = Router::new().nest("/api", api);
    match ui_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            router.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => router.route("/", get(|| async { Html(PLACEHOLDER_PAGE) })),
    }
}
