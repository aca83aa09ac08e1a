//! Routes, wire types and error mapping.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use ats_core::{
    AffectPoint, ClipObservation, ClipState, CognitiveStyle, CourseModel, Engine, Error,
    FrameCounts, LearnerRecord, LearnerReport, Lesson, LessonState, StateCounts, TestView,
};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

const TOKEN_PREFIX: &str = "token/";

/// Every response body: `ok` plus either the payload fields or `error`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
    #[serde(flatten)]
    pub body: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<u64>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                frame: None,
            },
        }
    }

    fn unauthorized() -> Self {
        Self::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing or unknown bearer token",
        )
    }

    fn forbidden(message: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Validation(_) => Self::new(StatusCode::BAD_REQUEST, "validation", message),
            Error::IncompleteFrame { frame, .. } => {
                let mut err = Self::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "incomplete_frame",
                    message,
                );
                err.body.frame = Some(frame);
                err
            }
            Error::Access(_) => Self::forbidden(message),
            Error::NotFound(_) => Self::new(StatusCode::NOT_FOUND, "not_found", message),
            Error::NoData(_) => Self::new(StatusCode::CONFLICT, "no_data", message),
            Error::InvalidCourse(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_course", message)
            }
            Error::Config(_) | Error::Storage(_) | Error::Io(_) | Error::Json(_) => {
                tracing::error!("internal error: {message}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let env: Envelope<()> = Envelope {
            ok: false,
            error: Some(self.body),
            body: None,
        };
        (self.status, Json(env)).into_response()
    }
}

type ApiResult<T> = Result<Json<Envelope<T>>, ApiError>;

fn ok<T>(body: T) -> ApiResult<T> {
    Ok(Json(Envelope {
        ok: true,
        error: None,
        body: Some(body),
    }))
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed",
            format!("malformed request body: {e}"),
        )
    })
}

// ---- wire types --------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipResponse {
    pub clip_id: String,
    pub clip_state: ClipState,
    pub duplicate: bool,
    pub frame_counts: FrameCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_affect: Option<AffectPoint>,
    pub dropped_frames: u32,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonCompletion {
    pub lesson_id: String,
    pub lesson_state: LessonState,
    pub message: String,
    pub supplementary: Vec<String>,
    pub clip_counts: StateCounts,
    pub watch_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub title: String,
    pub accessible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionList {
    pub sessions: Vec<SessionSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LessonList {
    pub session_id: String,
    pub lessons: Vec<Lesson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestBody {
    pub session_id: String,
    pub test: TestView,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSubmission {
    pub answers: Vec<usize>,
    /// Defaults to the server clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempted_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestResult {
    pub score: u32,
    pub passed: bool,
    pub next_session_unlocked: bool,
    pub revealed_supplementary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseAck {
    pub course_id: String,
    pub sessions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerRequest {
    pub learner_id: String,
    pub course_id: String,
    pub cognitive_style: CognitiveStyle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerToken {
    pub learner_id: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub report: LearnerReport,
    pub record: LearnerRecord,
    pub text: String,
    pub csv: String,
}

// ---- state ---------------------------------------------------------------

enum Caller {
    Admin,
    Learner(String),
}

struct Inner {
    engine: Arc<Engine>,
    admin_token: String,
    tokens: RwLock<HashMap<String, String>>,
    workers: Semaphore,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// Wraps an engine, restoring learner tokens kept in its store.
    pub fn new(engine: Arc<Engine>, admin_token: &str, workers: usize) -> ats_core::Result<Self> {
        let mut tokens = HashMap::new();
        for key in engine.store().keys(TOKEN_PREFIX)? {
            if let Some(serde_json::Value::String(learner)) = engine.store().get(&key)? {
                tokens.insert(key[TOKEN_PREFIX.len()..].to_owned(), learner);
            }
        }
        Ok(Self(Arc::new(Inner {
            engine,
            admin_token: admin_token.to_owned(),
            tokens: RwLock::new(tokens),
            workers: Semaphore::new(workers.max(1)),
        })))
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.0.engine
    }

    fn caller(&self, headers: &HeaderMap) -> Result<Caller, ApiError> {
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(ApiError::unauthorized)?;
        if token == self.0.admin_token {
            return Ok(Caller::Admin);
        }
        let tokens = self.0.tokens.read().expect("token table lock");
        tokens
            .get(token)
            .cloned()
            .map(Caller::Learner)
            .ok_or_else(ApiError::unauthorized)
    }

    fn learner(&self, headers: &HeaderMap) -> Result<String, ApiError> {
        match self.caller(headers)? {
            Caller::Learner(id) => Ok(id),
            Caller::Admin => Err(ApiError::forbidden("this endpoint is for learner accounts")),
        }
    }

    fn admin(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        match self.caller(headers)? {
            Caller::Admin => Ok(()),
            Caller::Learner(_) => Err(ApiError::forbidden("admin role required")),
        }
    }

    /// Runs engine work off the async executor.
    async fn run<T, F>(&self, f: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&Engine) -> ats_core::Result<T> + Send + 'static,
    {
        let engine = Arc::clone(&self.0.engine);
        tokio::task::spawn_blocking(move || f(&engine))
            .await
            .map_err(|e| {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            })?
            .map_err(ApiError::from)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/clips", post(ingest_clip))
        .route("/api/lessons/{lesson_id}/complete", post(complete_lesson))
        .route("/api/sessions", get(list_sessions))
        .route("/api/sessions/{session_id}/lessons", get(session_lessons))
        .route(
            "/api/sessions/{session_id}/test",
            get(get_test).post(submit_test),
        )
        .route("/api/admin/courses", post(define_course))
        .route("/api/admin/learners", post(create_learner))
        .route("/api/admin/reports/{learner_id}", get(learner_report))
        .with_state(state)
}

// ---- handlers --------------------------------------------------------------

async fn health() -> ApiResult<()> {
    ok(())
}

async fn ingest_clip(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<ClipResponse> {
    let learner = state.learner(&headers)?;
    let clip: ClipObservation = parse(&body)?;
    if clip.learner_id != learner {
        return Err(ApiError::forbidden(format!(
            "clip belongs to learner {}",
            clip.learner_id
        )));
    }
    let _permit = state
        .0
        .workers
        .acquire()
        .await
        .expect("worker pool is never closed");
    let ack = state.run(move |e| e.ingest_clip(&clip)).await?;
    ok(ClipResponse {
        clip_id: ack.result.clip_id,
        clip_state: ack.result.state,
        duplicate: ack.duplicate,
        frame_counts: ack.result.frame_counts,
        mean_affect: ack.result.mean_affect,
        dropped_frames: ack.result.dropped_frames,
        warnings: ack.result.warnings,
    })
}

async fn complete_lesson(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(lesson_id): Path<String>,
) -> ApiResult<LessonCompletion> {
    let learner = state.learner(&headers)?;
    let id = lesson_id.clone();
    let out = state.run(move |e| e.complete_lesson(&learner, &id)).await?;
    ok(LessonCompletion {
        lesson_id,
        lesson_state: out.state,
        message: out.message,
        supplementary: out.recommended_supplementary,
        clip_counts: out.clip_counts,
        watch_minutes: out.watch_minutes,
    })
}

async fn list_sessions(
    State(state): State<AppState>,
    headers: HeaderMap,
) -> ApiResult<SessionList> {
    let learner = state.learner(&headers)?;
    let sessions = state
        .run(move |e| {
            let rec = e.learner(&learner)?;
            let course = e.course(&rec.course_id)?;
            let open = rec.accessible_sessions(&course);
            Ok(course
                .sessions
                .iter()
                .map(|s| SessionSummary {
                    id: s.id.clone(),
                    title: s.title.clone(),
                    accessible: open.contains(&s.id.as_str()),
                })
                .collect())
        })
        .await?;
    ok(SessionList { sessions })
}

async fn session_lessons(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(session_id): Path<String>,
) -> ApiResult<LessonList> {
    let learner = state.learner(&headers)?;
    let id = session_id.clone();
    let lessons = state.run(move |e| e.lessons_for(&learner, &id)).await?;
    ok(LessonList {
        session_id,
        lessons,
    })
}

async fn get_test(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(session_id): Path<String>,
) -> ApiResult<TestBody> {
    let learner = state.learner(&headers)?;
    let id = session_id.clone();
    let test = state.run(move |e| e.test_for(&learner, &id)).await?;
    ok(TestBody { session_id, test })
}

async fn submit_test(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(session_id): Path<String>,
    body: Bytes,
) -> ApiResult<TestResult> {
    let learner = state.learner(&headers)?;
    let sub: TestSubmission = parse(&body)?;
    let at = sub.attempted_at.unwrap_or_else(Utc::now);
    let out = state
        .run(move |e| e.submit_test_attempt(&learner, &session_id, &sub.answers, at))
        .await?;
    ok(TestResult {
        score: out.score,
        passed: out.passed,
        next_session_unlocked: out.next_session_unlocked,
        revealed_supplementary: out.revealed_supplementary,
    })
}

async fn define_course(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<CourseAck> {
    state.admin(&headers)?;
    let course: CourseModel = parse(&body)?;
    let ack = CourseAck {
        course_id: course.id.clone(),
        sessions: course.sessions.len(),
    };
    state.run(move |e| e.define_course(course)).await?;
    ok(ack)
}

async fn create_learner(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<LearnerToken> {
    state.admin(&headers)?;
    let req: LearnerRequest = parse(&body)?;
    let token = uuid::Uuid::new_v4().simple().to_string();
    let (learner_id, t) = (req.learner_id.clone(), token.clone());
    state
        .run(move |e| {
            e.enroll(&req.learner_id, &req.course_id, req.cognitive_style)?;
            e.store().put(
                &format!("{TOKEN_PREFIX}{t}"),
                serde_json::Value::String(req.learner_id),
            )
        })
        .await?;
    state
        .0
        .tokens
        .write()
        .expect("token table lock")
        .insert(token.clone(), learner_id.clone());
    ok(LearnerToken { learner_id, token })
}

async fn learner_report(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(learner_id): Path<String>,
) -> ApiResult<ReportBody> {
    state.admin(&headers)?;
    let body = state
        .run(move |e| {
            let record = e.learner(&learner_id)?;
            let course = e.course(&record.course_id)?;
            let report = LearnerReport::build(&course, &record);
            Ok(ReportBody {
                text: report.render_text(),
                csv: report.to_csv(),
                report,
                record,
            })
        })
        .await?;
    ok(body)
}
