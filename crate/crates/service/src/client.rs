//! Blocking HTTP client that drives a running service as a [`TutorBackend`].
//!
//! Must not be used from inside an async runtime.

use std::collections::HashMap;
use std::sync::Mutex;

use ats_core::{
    AttemptOutcome, ClipObservation, ClipState, CognitiveStyle, CourseModel, Error, LearnerRecord,
    LessonOutcome, Result, TutorBackend,
};
use chrono::{DateTime, Utc};
use reqwest::blocking::{Client, RequestBuilder};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::api::{
    ClipResponse, ErrorBody, LearnerRequest, LearnerToken, LessonCompletion, ReportBody,
    TestResult, TestSubmission,
};

pub struct HttpBackend {
    base: String,
    admin_token: String,
    client: Client,
    tokens: Mutex<HashMap<String, String>>,
}

fn remote(e: ErrorBody) -> Error {
    let msg = e.message;
    match e.code.as_str() {
        "validation" | "malformed" => Error::Validation(msg),
        "incomplete_frame" => Error::IncompleteFrame {
            frame: e.frame.unwrap_or_default(),
            reason: msg,
        },
        "forbidden" => Error::Access(msg),
        "not_found" => Error::NotFound(msg),
        "no_data" => Error::NoData(msg),
        "invalid_course" => Error::InvalidCourse(msg),
        _ => Error::Storage(format!("{}: {msg}", e.code)),
    }
}

fn transport(e: reqwest::Error) -> Error {
    Error::Storage(format!("http: {e}"))
}

impl HttpBackend {
    pub fn new(base_url: &str, admin_token: &str) -> Result<Self> {
        let client = Client::builder().build().map_err(transport)?;
        Ok(Self {
            base: base_url.trim_end_matches('/').to_owned(),
            admin_token: admin_token.to_owned(),
            client,
            tokens: Mutex::new(HashMap::new()),
        })
    }

    pub fn learner_token(&self, learner_id: &str) -> Result<String> {
        self.tokens
            .lock()
            .expect("token cache lock")
            .get(learner_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("no token for learner {learner_id}")))
    }

    fn send<T: DeserializeOwned>(&self, req: RequestBuilder, token: &str) -> Result<T> {
        let resp = req.bearer_auth(token).send().map_err(transport)?;
        let status = resp.status();
        let value: serde_json::Value = resp.json().map_err(transport)?;
        if value.get("ok").and_then(|v| v.as_bool()) == Some(true) {
            return Ok(serde_json::from_value(value)?);
        }
        match value
            .get("error")
            .cloned()
            .map(serde_json::from_value::<ErrorBody>)
        {
            Some(Ok(body)) => Err(remote(body)),
            _ => Err(Error::Storage(format!(
                "unexpected {status} response: {value}"
            ))),
        }
    }

    fn post<B: Serialize, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
        token: &str,
    ) -> Result<T> {
        self.send(
            self.client.post(format!("{}{path}", self.base)).json(body),
            token,
        )
    }

    fn get<T: DeserializeOwned>(&self, path: &str, token: &str) -> Result<T> {
        self.send(self.client.get(format!("{}{path}", self.base)), token)
    }

    pub fn report(&self, learner_id: &str) -> Result<ReportBody> {
        self.get(
            &format!("/api/admin/reports/{learner_id}"),
            &self.admin_token,
        )
    }
}

impl TutorBackend for HttpBackend {
    fn define_course(&self, course: &CourseModel) -> Result<()> {
        let _: serde_json::Value = self.post("/api/admin/courses", course, &self.admin_token)?;
        Ok(())
    }

    fn enroll(&self, learner_id: &str, course_id: &str, style: CognitiveStyle) -> Result<()> {
        let req = LearnerRequest {
            learner_id: learner_id.to_owned(),
            course_id: course_id.to_owned(),
            cognitive_style: style,
        };
        let t: LearnerToken = self.post("/api/admin/learners", &req, &self.admin_token)?;
        self.tokens
            .lock()
            .expect("token cache lock")
            .insert(t.learner_id, t.token);
        Ok(())
    }

    fn ingest_clip(&self, clip: &ClipObservation) -> Result<ClipState> {
        let token = self.learner_token(&clip.learner_id)?;
        let r: ClipResponse = self.post("/api/clips", clip, &token)?;
        Ok(r.clip_state)
    }

    fn complete_lesson(&self, learner_id: &str, lesson_id: &str) -> Result<LessonOutcome> {
        let token = self.learner_token(learner_id)?;
        let r: LessonCompletion = self.post(
            &format!("/api/lessons/{lesson_id}/complete"),
            &serde_json::json!({}),
            &token,
        )?;
        Ok(LessonOutcome {
            state: r.lesson_state,
            message: r.message,
            recommended_supplementary: r.supplementary,
            clip_counts: r.clip_counts,
            watch_minutes: r.watch_minutes,
        })
    }

    fn submit_test(
        &self,
        learner_id: &str,
        session_id: &str,
        answers: &[usize],
        at: DateTime<Utc>,
    ) -> Result<AttemptOutcome> {
        let token = self.learner_token(learner_id)?;
        let sub = TestSubmission {
            answers: answers.to_vec(),
            attempted_at: Some(at),
        };
        let r: TestResult = self.post(&format!("/api/sessions/{session_id}/test"), &sub, &token)?;
        Ok(AttemptOutcome {
            score: r.score,
            passed: r.passed,
            next_session_unlocked: r.next_session_unlocked,
            revealed_supplementary: r.revealed_supplementary,
        })
    }

    fn learner_record(&self, learner_id: &str) -> Result<LearnerRecord> {
        Ok(self.report(learner_id)?.record)
    }
}
