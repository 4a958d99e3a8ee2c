//! HTTP sidecar: per-submission risk prediction over a pre-trained artifact.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use xoj_core::advice::Factor;
use xoj_core::predictor::{PredictionRequest, Predictor};
use xoj_core::{AssignmentId, BagKey, Error as CoreError, Timestamp};

use crate::ingest::parse_timestamp;

/// Request body of `POST /v1/predict`. Timestamps are RFC 3339.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRequest {
    pub student_id: String,
    pub assignment: AssignmentId,
    pub submitted_at: String,
    /// Earlier submissions, oldest first. With the session store enabled an
    /// empty history means "use what the server has seen".
    #[serde(default)]
    pub history: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub success_probability: f64,
    pub risk_score: f64,
    /// Largest `|phi|` first.
    pub top_factors: Vec<Factor>,
    pub advice: Vec<String>,
    pub advice_ids: Vec<String>,
    pub cohort: Option<String>,
    pub model_version: String,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PredictError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    AfterDeadline(String),
}

impl PredictError {
    pub fn status(&self) -> StatusCode {
        match self {
            PredictError::Invalid(_) => StatusCode::BAD_REQUEST,
            PredictError::AfterDeadline(_) => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl From<CoreError> for PredictError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::AfterDeadline { .. } => PredictError::AfterDeadline(e.to_string()),
            _ => PredictError::Invalid(e.to_string()),
        }
    }
}

fn timestamp(text: &str) -> Result<Timestamp, PredictError> {
    parse_timestamp(text).ok_or_else(|| PredictError::Invalid(format!("unparseable timestamp `{text}`")))
}

impl WireRequest {
    pub fn to_core(&self) -> Result<PredictionRequest, PredictError> {
        Ok(PredictionRequest {
            student_id: self.student_id.clone(),
            assignment: self.assignment,
            submitted_at: timestamp(&self.submitted_at)?,
            history: self.history.iter().map(|t| timestamp(t)).collect::<Result<_, _>>()?,
        })
    }
}

/// Shared by the service and the offline `predict` command.
pub fn predict(predictor: &Predictor, request: &PredictionRequest) -> Result<PredictionResponse, PredictError> {
    let report = predictor.predict(request)?;
    Ok(PredictionResponse {
        success_probability: report.success_probability,
        risk_score: report.risk_score,
        top_factors: report.top_factors,
        advice: report.advice.iter().map(|a| a.message.clone()).collect(),
        advice_ids: report.advice.iter().map(|a| a.id.as_str().to_string()).collect(),
        cohort: report.cohort,
        model_version: predictor.model_version.clone(),
    })
}

/// Submission times seen per (student, assignment).
#[derive(Debug, Default)]
pub struct SessionStore {
    inner: Mutex<HashMap<BagKey, Vec<Timestamp>>>,
}

impl SessionStore {
    /// Predicts with the stored history when the request brings none, and
    /// records the submission on success. The lock is held throughout so
    /// concurrent requests for one student append atomically.
    fn predict(&self, predictor: &Predictor, mut request: PredictionRequest) -> Result<PredictionResponse, PredictError> {
        let key = BagKey {
            student_id: request.student_id.clone(),
            assignment: request.assignment,
        };
        let mut sessions = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        if request.history.is_empty() {
            request.history = sessions.get(&key).cloned().unwrap_or_default();
        }
        let response = predict(predictor, &request)?;
        let mut seen = request.history;
        seen.push(request.submitted_at);
        sessions.insert(key, seen);
        Ok(response)
    }

    /// Drops sessions of assignments whose deadline is before `now`.
    pub fn flush_expired(&self, predictor: &Predictor, now: Timestamp) -> usize {
        let mut sessions = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        let before = sessions.len();
        sessions.retain(|key, _| {
            predictor
                .configs
                .iter()
                .find(|c| c.assignment == key.assignment)
                .is_some_and(|c| c.deadline >= now)
        });
        before - sessions.len()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Default)]
pub struct AppState {
    pub predictor: Option<Arc<Predictor>>,
    pub sessions: Option<SessionStore>,
}

impl AppState {
    pub fn new(predictor: Predictor, sessions: bool) -> Self {
        AppState {
            predictor: Some(Arc::new(predictor)),
            sessions: sessions.then(SessionStore::default),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: message.into() })).into_response()
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Health {
    pub status: String,
    pub model_version: Option<String>,
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    match &state.predictor {
        Some(p) => Json(Health {
            status: "ok".into(),
            model_version: Some(p.model_version.clone()),
        })
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(Health {
                status: "unavailable".into(),
                model_version: None,
            }),
        )
            .into_response(),
    }
}

async fn predict_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let Some(predictor) = state.predictor.clone() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "model not loaded");
    };
    let wire: WireRequest = match serde_json::from_slice(&body) {
        Ok(w) => w,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let result = wire.to_core().and_then(|request| match &state.sessions {
        Some(store) => store.predict(&predictor, request),
        None => predict(&predictor, &request),
    });
    match result {
        Ok(response) => Json(response).into_response(),
        Err(e) => error(e.status(), e.to_string()),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/predict", post(predict_handler))
        .with_state(state)
}

/// Serves until Ctrl-C. Expired sessions are flushed once a minute.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    if let (Some(predictor), true) = (state.predictor.clone(), state.sessions.is_some()) {
        let state = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(std::time::Duration::from_secs(60));
            loop {
                tick.tick().await;
                if let Some(store) = &state.sessions {
                    let now = Timestamp(chrono::Utc::now().timestamp());
                    let dropped = store.flush_expired(&predictor, now);
                    if dropped > 0 {
                        log::info!("flushed {dropped} expired sessions");
                    }
                }
            }
        });
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
