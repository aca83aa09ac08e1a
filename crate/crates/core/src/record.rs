//! Learner records, rebuilt by folding an append-only event log.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::aggregator::{LessonState, StateCounts};
use crate::clip::ClipResult;
use crate::course::{CognitiveStyle, CourseModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonOutcome {
    pub state: LessonState,
    pub message: String,
    /// Supplementary refs recommended with this outcome; empty unless the
    /// state involves confusion and the lesson has supplementary content.
    pub recommended_supplementary: Vec<String>,
    pub clip_counts: StateCounts,
    pub watch_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestAttempt {
    pub attempted_at: DateTime<Utc>,
    pub answers: Vec<usize>,
    pub score: u32,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LessonRecord {
    pub clips: Vec<ClipResult>,
    pub outcomes: Vec<LessonOutcome>,
}

impl LessonRecord {
    pub fn clip_counts(&self) -> StateCounts {
        self.clips.iter().map(|c| c.state).collect()
    }

    pub fn latest_outcome(&self) -> Option<&LessonOutcome> {
        self.outcomes.last()
    }

    /// Minutes between the start of the first clip and the end of the last.
    pub fn watch_minutes(&self) -> f64 {
        let first = self.clips.iter().map(|c| c.recorded_at).min();
        let last_end = self
            .clips
            .iter()
            .map(|c| (c.recorded_at, c.duration_secs))
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        match (first, last_end) {
            (Some(first), Some((last, dur))) => {
                let span_ms = (last - first).num_milliseconds() as f64;
                (span_ms / 1000.0 + dur) / 60.0
            }
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub attempts: Vec<TestAttempt>,
}

impl SessionRecord {
    pub fn passed(&self) -> bool {
        self.attempts.iter().any(|a| a.passed)
    }

    /// 1-based number of the first passing attempt.
    pub fn attempts_to_pass(&self) -> Option<usize> {
        self.attempts.iter().position(|a| a.passed).map(|i| i + 1)
    }

    pub fn first_passing_score(&self) -> Option<u32> {
        self.attempts.iter().find(|a| a.passed).map(|a| a.score)
    }
}

/// Everything that happens to a learner, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LearnerEvent {
    Enrolled {
        learner_id: String,
        course_id: String,
        cognitive_style: CognitiveStyle,
    },
    ClipRecorded {
        lesson_id: String,
        result: ClipResult,
    },
    LessonCompleted {
        lesson_id: String,
        outcome: LessonOutcome,
    },
    TestAttempted {
        session_id: String,
        attempt: TestAttempt,
        /// Lessons whose supplementary content this attempt revealed.
        revealed_lessons: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerRecord {
    pub learner_id: String,
    pub course_id: String,
    pub cognitive_style: CognitiveStyle,
    #[serde(default)]
    pub lessons: BTreeMap<String, LessonRecord>,
    #[serde(default)]
    pub sessions: BTreeMap<String, SessionRecord>,
    /// Lessons whose supplementary content the learner can see.
    #[serde(default)]
    pub visible_supplementary: BTreeSet<String>,
}

impl LearnerRecord {
    pub fn new(learner_id: &str, course_id: &str, style: CognitiveStyle) -> Self {
        Self {
            learner_id: learner_id.to_owned(),
            course_id: course_id.to_owned(),
            cognitive_style: style,
            lessons: BTreeMap::new(),
            sessions: BTreeMap::new(),
            visible_supplementary: BTreeSet::new(),
        }
    }

    /// Rebuilds a record from its event log. The first event must be the enrollment.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a LearnerEvent>) -> Result<Self> {
        let mut events = events.into_iter();
        let mut record = match events.next() {
            Some(LearnerEvent::Enrolled {
                learner_id,
                course_id,
                cognitive_style,
            }) => LearnerRecord::new(learner_id, course_id, *cognitive_style),
            Some(other) => {
                return Err(Error::Storage(format!(
                    "learner log must start with enrollment, found {other:?}"
                )))
            }
            None => return Err(Error::Storage("empty learner log".into())),
        };
        for e in events {
            record.apply(e)?;
        }
        Ok(record)
    }

    pub fn apply(&mut self, event: &LearnerEvent) -> Result<()> {
        match event {
            LearnerEvent::Enrolled { learner_id, .. } => {
                return Err(Error::Storage(format!(
                    "learner {learner_id} enrolled twice"
                )));
            }
            LearnerEvent::ClipRecorded { lesson_id, result } => {
                self.lessons
                    .entry(lesson_id.clone())
                    .or_default()
                    .clips
                    .push(result.clone());
            }
            LearnerEvent::LessonCompleted { lesson_id, outcome } => {
                if !outcome.recommended_supplementary.is_empty() {
                    self.visible_supplementary.insert(lesson_id.clone());
                }
                self.lessons
                    .entry(lesson_id.clone())
                    .or_default()
                    .outcomes
                    .push(outcome.clone());
            }
            LearnerEvent::TestAttempted {
                session_id,
                attempt,
                revealed_lessons,
            } => {
                self.visible_supplementary
                    .extend(revealed_lessons.iter().cloned());
                self.sessions
                    .entry(session_id.clone())
                    .or_default()
                    .attempts
                    .push(attempt.clone());
            }
        }
        Ok(())
    }

    pub fn find_clip(&self, clip_id: &str) -> Option<(&str, &ClipResult)> {
        self.lessons.iter().find_map(|(lesson, rec)| {
            rec.clips
                .iter()
                .find(|c| c.clip_id == clip_id)
                .map(|c| (lesson.as_str(), c))
        })
    }

    pub fn has_passed(&self, session_id: &str) -> bool {
        self.sessions
            .get(session_id)
            .is_some_and(SessionRecord::passed)
    }

    /// Session ids the learner may open: the course prefix ending at the
    /// first session without a passing attempt.
    pub fn accessible_sessions<'c>(&self, course: &'c CourseModel) -> Vec<&'c str> {
        let mut open = Vec::new();
        for session in &course.sessions {
            open.push(session.id.as_str());
            if !self.has_passed(&session.id) {
                break;
            }
        }
        open
    }

    pub fn session_unlocked(&self, course: &CourseModel, session_index: usize) -> bool {
        course.sessions[..session_index]
            .iter()
            .all(|s| self.has_passed(&s.id))
    }
}
