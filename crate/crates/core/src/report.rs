//! Per-learner analyzer reports for administrators.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aggregator::{LessonState, StateCounts};
use crate::clip::ClipState;
use crate::course::{CognitiveStyle, CourseModel};
use crate::metrics::csv_table;
use crate::record::{LearnerRecord, LessonOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonReport {
    pub session_id: String,
    pub lesson_id: String,
    pub title: String,
    pub clip_histogram: StateCounts,
    pub clip_count: u32,
    pub lesson_state: Option<LessonState>,
    pub outcomes: Vec<LessonOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub score: u32,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub session_id: String,
    pub attempts: Vec<AttemptSummary>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub learner_id: String,
    pub course_id: String,
    pub cognitive_style: CognitiveStyle,
    pub lessons: Vec<LessonReport>,
    pub sessions: Vec<SessionReport>,
}

impl LearnerReport {
    /// Builds the report from stored data only. Lessons without clips are skipped.
    pub fn build(course: &CourseModel, record: &LearnerRecord) -> Self {
        let mut lessons = Vec::new();
        let mut sessions = Vec::new();
        for session in &course.sessions {
            for lesson in &session.content(record.cognitive_style).lessons {
                let Some(log) = record.lessons.get(&lesson.id) else {
                    continue;
                };
                if log.clips.is_empty() && log.outcomes.is_empty() {
                    continue;
                }
                let histogram = log.clip_counts();
                lessons.push(LessonReport {
                    session_id: session.id.clone(),
                    lesson_id: lesson.id.clone(),
                    title: lesson.title.clone(),
                    clip_count: histogram.total(),
                    clip_histogram: histogram,
                    lesson_state: log.latest_outcome().map(|o| o.state),
                    outcomes: log.outcomes.clone(),
                });
            }
            if let Some(s) = record.sessions.get(&session.id) {
                sessions.push(SessionReport {
                    session_id: session.id.clone(),
                    attempts: s
                        .attempts
                        .iter()
                        .map(|a| AttemptSummary {
                            score: a.score,
                            passed: a.passed,
                        })
                        .collect(),
                    passed: s.passed(),
                });
            }
        }
        Self {
            learner_id: record.learner_id.clone(),
            course_id: record.course_id.clone(),
            cognitive_style: record.cognitive_style,
            lessons,
            sessions,
        }
    }

    /// Text report with a character-cell histogram per lesson.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Learner {} ({}, course {})",
            self.learner_id, self.cognitive_style, self.course_id
        );
        for l in &self.lessons {
            let state = l.lesson_state.map_or("not completed", LessonState::name);
            let _ = writeln!(
                out,
                "\n  Lesson {} [{}] {} -> {state}",
                l.lesson_id, l.session_id, l.title
            );
            for s in ClipState::ALL {
                let n = l.clip_histogram.get(s);
                if n > 0 {
                    let _ = writeln!(out, "    {:<14}{} {n}", s.name(), "#".repeat(n as usize));
                }
            }
        }
        for s in &self.sessions {
            let scores: Vec<String> = s
                .attempts
                .iter()
                .map(|a| format!("{}{}", a.score, if a.passed { "*" } else { "" }))
                .collect();
            let _ = writeln!(
                out,
                "\n  Session {} test attempts: {}",
                s.session_id,
                scores.join(", ")
            );
        }
        out
    }

    /// One row per (lesson, clip state) with a nonzero count.
    pub fn to_csv(&self) -> String {
        let header = [
            "learner",
            "session",
            "lesson",
            "lesson_state",
            "clip_state",
            "clips",
        ];
        let rows = self.lessons.iter().flat_map(|l| {
            let state = l.lesson_state.map_or("", LessonState::name);
            l.clip_histogram
                .iter()
                .filter(|&(_, n)| n > 0)
                .map(move |(s, n)| {
                    vec![
                        self.learner_id.clone(),
                        l.session_id.clone(),
                        l.lesson_id.clone(),
                        state.to_owned(),
                        s.name().to_owned(),
                        n.to_string(),
                    ]
                })
        });
        csv_table(&header, rows)
    }
}
