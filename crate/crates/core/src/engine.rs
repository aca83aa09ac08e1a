//! The tutoring engine: course catalog, learner records, clip ingestion,
//! lesson completion, tests and session gating.
//!
//! Every learner has an append-only event stream in the [`Store`]. Writes to
//! one learner are serialized behind that learner's mutex and become durable
//! before the in-memory record changes, so anything acknowledged is visible
//! to later calls. Different learners never contend.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::aggregator::aggregate;
use crate::clip::{analyze_clip_with, AnalyzerMode, ClipObservation, ClipResult};
use crate::config::ThresholdConfig;
use crate::course::{grade_test, CognitiveStyle, CourseModel, Lesson, LessonLocation, TestView};
use crate::error::{Error, Result};
use crate::feedback::{select_feedback, FeedbackCatalog};
use crate::record::{LearnerEvent, LearnerRecord, LessonOutcome, TestAttempt};
use crate::storage::{MemoryStore, Store};

const COURSE_PREFIX: &str = "course/";
const LEARNER_PREFIX: &str = "learner/";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipAck {
    pub result: ClipResult,
    /// The clip id was already stored; nothing was written.
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptOutcome {
    pub score: u32,
    pub passed: bool,
    pub next_session_unlocked: bool,
    pub revealed_supplementary: Vec<String>,
}

type LearnerSlot = Arc<Mutex<LearnerRecord>>;

pub struct Engine {
    store: Arc<dyn Store>,
    config: ThresholdConfig,
    catalog: FeedbackCatalog,
    mode: AnalyzerMode,
    courses: RwLock<BTreeMap<String, Arc<CourseModel>>>,
    learners: RwLock<HashMap<String, LearnerSlot>>,
}

fn poisoned<T>(_: T) -> Error {
    Error::Storage("engine lock poisoned".into())
}

impl Engine {
    /// Opens an engine over `store`, loading every stored course and learner.
    pub fn open(
        store: Arc<dyn Store>,
        config: ThresholdConfig,
        catalog: FeedbackCatalog,
    ) -> Result<Self> {
        config.validate()?;
        let mut courses = BTreeMap::new();
        for key in store.keys(COURSE_PREFIX)? {
            let value = store.get(&key)?.expect("listed key exists");
            let course: CourseModel = serde_json::from_value(value)?;
            courses.insert(course.id.clone(), Arc::new(course));
        }
        let mut learners = HashMap::new();
        for stream in store.streams(LEARNER_PREFIX)? {
            let events = store
                .read_stream(&stream)?
                .into_iter()
                .map(serde_json::from_value)
                .collect::<std::result::Result<Vec<LearnerEvent>, _>>()?;
            let record = LearnerRecord::replay(&events)?;
            learners.insert(record.learner_id.clone(), Arc::new(Mutex::new(record)));
        }
        Ok(Self {
            store,
            config,
            catalog,
            mode: AnalyzerMode::Strict,
            courses: RwLock::new(courses),
            learners: RwLock::new(learners),
        })
    }

    /// Engine over a fresh in-memory store with default thresholds and catalog.
    pub fn in_memory() -> Self {
        Self::open(
            Arc::new(MemoryStore::new()),
            ThresholdConfig::default(),
            FeedbackCatalog::default(),
        )
        .expect("defaults are valid")
    }

    pub fn with_mode(mut self, mode: AnalyzerMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn config(&self) -> &ThresholdConfig {
        &self.config
    }

    pub fn catalog(&self) -> &FeedbackCatalog {
        &self.catalog
    }

    pub fn store(&self) -> &Arc<dyn Store> {
        &self.store
    }

    // ---- courses -------------------------------------------------------

    /// Validates and stores a course, replacing any course with the same id.
    pub fn define_course(&self, course: CourseModel) -> Result<()> {
        course.validate()?;
        self.store.put(
            &format!("{COURSE_PREFIX}{}", course.id),
            serde_json::to_value(&course)?,
        )?;
        self.courses
            .write()
            .map_err(poisoned)?
            .insert(course.id.clone(), Arc::new(course));
        Ok(())
    }

    pub fn course(&self, course_id: &str) -> Result<Arc<CourseModel>> {
        self.courses
            .read()
            .map_err(poisoned)?
            .get(course_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("course {course_id}")))
    }

    pub fn course_ids(&self) -> Result<Vec<String>> {
        Ok(self
            .courses
            .read()
            .map_err(poisoned)?
            .keys()
            .cloned()
            .collect())
    }

    // ---- learners ------------------------------------------------------

    /// Enrolls a learner. Re-enrolling with identical details is a no-op.
    pub fn enroll(&self, learner_id: &str, course_id: &str, style: CognitiveStyle) -> Result<()> {
        if learner_id.is_empty() {
            return Err(Error::validation("learner id must not be empty"));
        }
        self.course(course_id)?;
        let mut learners = self.learners.write().map_err(poisoned)?;
        if let Some(existing) = learners.get(learner_id) {
            let rec = existing.lock().map_err(poisoned)?;
            return if rec.course_id == course_id && rec.cognitive_style == style {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "learner {learner_id} is already enrolled in {} as {}",
                    rec.course_id, rec.cognitive_style
                )))
            };
        }
        let event = LearnerEvent::Enrolled {
            learner_id: learner_id.to_owned(),
            course_id: course_id.to_owned(),
            cognitive_style: style,
        };
        self.store
            .append(&stream_key(learner_id), serde_json::to_value(&event)?)?;
        learners.insert(
            learner_id.to_owned(),
            Arc::new(Mutex::new(LearnerRecord::new(learner_id, course_id, style))),
        );
        Ok(())
    }

    fn slot(&self, learner_id: &str) -> Result<LearnerSlot> {
        self.learners
            .read()
            .map_err(poisoned)?
            .get(learner_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("learner {learner_id}")))
    }

    /// Snapshot of a learner's record.
    pub fn learner(&self, learner_id: &str) -> Result<LearnerRecord> {
        let slot = self.slot(learner_id)?;
        let rec = slot.lock().map_err(poisoned)?;
        Ok(rec.clone())
    }

    pub fn learner_ids(&self) -> Result<Vec<String>> {
        let mut ids: Vec<_> = self
            .learners
            .read()
            .map_err(poisoned)?
            .keys()
            .cloned()
            .collect();
        ids.sort();
        Ok(ids)
    }

    pub fn learners(&self) -> Result<Vec<LearnerRecord>> {
        self.learner_ids()?
            .iter()
            .map(|id| self.learner(id))
            .collect()
    }

    fn commit(&self, rec: &mut MutexGuard<'_, LearnerRecord>, event: LearnerEvent) -> Result<()> {
        self.store
            .append(&stream_key(&rec.learner_id), serde_json::to_value(&event)?)?;
        rec.apply(&event)
    }

    // ---- access --------------------------------------------------------

    fn session_access(
        rec: &LearnerRecord,
        course: &CourseModel,
        session_id: &str,
    ) -> Result<usize> {
        let idx = course
            .session_index(session_id)
            .ok_or_else(|| Error::NotFound(format!("session {session_id}")))?;
        if !rec.session_unlocked(course, idx) {
            return Err(Error::Access(format!(
                "session {session_id} is locked until the previous session's test is passed"
            )));
        }
        Ok(idx)
    }

    fn lesson_access<'c>(
        rec: &LearnerRecord,
        course: &'c CourseModel,
        lesson_id: &str,
    ) -> Result<LessonLocation<'c>> {
        let loc = course
            .locate_lesson(lesson_id)
            .ok_or_else(|| Error::NotFound(format!("lesson {lesson_id}")))?;
        if loc.style != rec.cognitive_style {
            return Err(Error::Access(format!(
                "lesson {lesson_id} belongs to the {} group",
                loc.style
            )));
        }
        if !rec.session_unlocked(course, loc.session_index) {
            return Err(Error::Access(format!(
                "lesson {lesson_id} is in locked session {}",
                course.sessions[loc.session_index].id
            )));
        }
        Ok(loc)
    }

    /// Checks that the learner may post clips for the lesson.
    pub fn check_lesson_access(&self, learner_id: &str, lesson_id: &str) -> Result<()> {
        let slot = self.slot(learner_id)?;
        let rec = slot.lock().map_err(poisoned)?;
        let course = self.course(&rec.course_id)?;
        Self::lesson_access(&rec, &course, lesson_id).map(|_| ())
    }

    pub fn accessible_sessions(&self, learner_id: &str) -> Result<Vec<String>> {
        let rec = self.learner(learner_id)?;
        let course = self.course(&rec.course_id)?;
        Ok(rec
            .accessible_sessions(&course)
            .into_iter()
            .map(str::to_owned)
            .collect())
    }

    /// The learner's own lessons for a session. Supplementary refs are only
    /// included once they have been revealed to this learner.
    pub fn lessons_for(&self, learner_id: &str, session_id: &str) -> Result<Vec<Lesson>> {
        let rec = self.learner(learner_id)?;
        let course = self.course(&rec.course_id)?;
        let idx = Self::session_access(&rec, &course, session_id)?;
        Ok(course.sessions[idx]
            .content(rec.cognitive_style)
            .lessons
            .iter()
            .map(|l| {
                let mut lesson = l.clone();
                if !rec.visible_supplementary.contains(&l.id) {
                    lesson.supplementary.clear();
                }
                lesson
            })
            .collect())
    }

    pub fn test_for(&self, learner_id: &str, session_id: &str) -> Result<TestView> {
        let rec = self.learner(learner_id)?;
        let course = self.course(&rec.course_id)?;
        let idx = Self::session_access(&rec, &course, session_id)?;
        Ok(course.sessions[idx]
            .content(rec.cognitive_style)
            .test
            .view())
    }

    // ---- clips ---------------------------------------------------------

    /// Analyzes and stores a clip. Idempotent on clip id: a repeated id
    /// returns the stored result without re-analysis.
    pub fn ingest_clip(&self, clip: &ClipObservation) -> Result<ClipAck> {
        {
            let slot = self.slot(&clip.learner_id)?;
            let rec = slot.lock().map_err(poisoned)?;
            if let Some((_, stored)) = rec.find_clip(&clip.clip_id) {
                return Ok(ClipAck {
                    result: stored.clone(),
                    duplicate: true,
                });
            }
            let course = self.course(&rec.course_id)?;
            Self::lesson_access(&rec, &course, &clip.lesson_id)?;
        }
        // analysis runs outside the learner lock
        let result = analyze_clip_with(clip, &self.config, self.mode)?;
        self.record_clip_result(&clip.learner_id, &clip.lesson_id, result)
    }

    pub fn record_clip_result(
        &self,
        learner_id: &str,
        lesson_id: &str,
        result: ClipResult,
    ) -> Result<ClipAck> {
        let slot = self.slot(learner_id)?;
        let mut rec = slot.lock().map_err(poisoned)?;
        if let Some((_, stored)) = rec.find_clip(&result.clip_id) {
            return Ok(ClipAck {
                result: stored.clone(),
                duplicate: true,
            });
        }
        let course = self.course(&rec.course_id)?;
        Self::lesson_access(&rec, &course, lesson_id)?;
        let event = LearnerEvent::ClipRecorded {
            lesson_id: lesson_id.to_owned(),
            result: result.clone(),
        };
        self.commit(&mut rec, event)?;
        Ok(ClipAck {
            result,
            duplicate: false,
        })
    }

    // ---- lessons -------------------------------------------------------

    /// Aggregates every stored clip of the lesson into an outcome and
    /// records it. Completing again recomputes from the full clip log.
    pub fn complete_lesson(&self, learner_id: &str, lesson_id: &str) -> Result<LessonOutcome> {
        let slot = self.slot(learner_id)?;
        let mut rec = slot.lock().map_err(poisoned)?;
        let course = self.course(&rec.course_id)?;
        let loc = Self::lesson_access(&rec, &course, lesson_id)?;
        let lesson_log = rec
            .lessons
            .get(lesson_id)
            .filter(|l| !l.clips.is_empty())
            .ok_or_else(|| Error::NoData(format!("no clips recorded for lesson {lesson_id}")))?;

        let counts = lesson_log.clip_counts();
        let state = aggregate(&counts, &self.config);
        let feedback = select_feedback(state, !loc.lesson.supplementary.is_empty(), &self.catalog);
        let outcome = LessonOutcome {
            state,
            message: feedback.message,
            recommended_supplementary: if feedback.recommend_supplementary {
                loc.lesson.supplementary.clone()
            } else {
                Vec::new()
            },
            clip_counts: counts,
            watch_minutes: lesson_log.watch_minutes(),
        };
        let event = LearnerEvent::LessonCompleted {
            lesson_id: lesson_id.to_owned(),
            outcome: outcome.clone(),
        };
        self.commit(&mut rec, event)?;
        Ok(outcome)
    }

    // ---- tests ---------------------------------------------------------

    pub fn submit_test_attempt(
        &self,
        learner_id: &str,
        session_id: &str,
        answers: &[usize],
        at: DateTime<Utc>,
    ) -> Result<AttemptOutcome> {
        let slot = self.slot(learner_id)?;
        let mut rec = slot.lock().map_err(poisoned)?;
        let course = self.course(&rec.course_id)?;
        let idx = Self::session_access(&rec, &course, session_id)?;
        let content = course.sessions[idx].content(rec.cognitive_style);
        let grade = grade_test(answers, &content.test)?;

        let (revealed_lessons, revealed_supplementary) = if grade.passed {
            (Vec::new(), Vec::new())
        } else {
            let lessons = content
                .lessons
                .iter()
                .filter(|l| !l.supplementary.is_empty());
            (
                lessons.clone().map(|l| l.id.clone()).collect(),
                lessons
                    .flat_map(|l| l.supplementary.iter().cloned())
                    .collect(),
            )
        };
        let event = LearnerEvent::TestAttempted {
            session_id: session_id.to_owned(),
            attempt: TestAttempt {
                attempted_at: at,
                answers: answers.to_vec(),
                score: grade.score,
                passed: grade.passed,
            },
            revealed_lessons,
        };
        self.commit(&mut rec, event)?;
        Ok(AttemptOutcome {
            score: grade.score,
            passed: grade.passed,
            next_session_unlocked: grade.passed && idx + 1 < course.sessions.len(),
            revealed_supplementary,
        })
    }
}

fn stream_key(learner_id: &str) -> String {
    format!("{LEARNER_PREFIX}{learner_id}")
}
