//! Replays recorded clip streams through a tutor backend.
//!
//! The same driver runs against the in-process [`Engine`] and against the
//! HTTP service, so both must yield identical reports for the same input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::aggregator::LessonState;
use crate::clip::{ClipObservation, ClipState};
use crate::course::{CognitiveStyle, CourseModel};
use crate::engine::{AttemptOutcome, Engine};
use crate::error::{Error, Result};
use crate::metrics::{compute_course_metrics, csv_table, CourseMetrics};
use crate::record::{LearnerRecord, LessonOutcome};
use crate::stream::{find_clip_files, read_clip_file};
use crate::synth::{LearnerScript, Scenario, ATTEMPT_GAP_SECS, SCENARIO_FILE};

/// The operations the replay driver needs from a tutor.
pub trait TutorBackend {
    fn define_course(&self, course: &CourseModel) -> Result<()>;
    fn enroll(&self, learner_id: &str, course_id: &str, style: CognitiveStyle) -> Result<()>;
    fn ingest_clip(&self, clip: &ClipObservation) -> Result<ClipState>;
    fn complete_lesson(&self, learner_id: &str, lesson_id: &str) -> Result<LessonOutcome>;
    fn submit_test(
        &self,
        learner_id: &str,
        session_id: &str,
        answers: &[usize],
        at: DateTime<Utc>,
    ) -> Result<AttemptOutcome>;
    fn learner_record(&self, learner_id: &str) -> Result<LearnerRecord>;
}

impl TutorBackend for Engine {
    fn define_course(&self, course: &CourseModel) -> Result<()> {
        Engine::define_course(self, course.clone())
    }

    fn enroll(&self, learner_id: &str, course_id: &str, style: CognitiveStyle) -> Result<()> {
        Engine::enroll(self, learner_id, course_id, style)
    }

    fn ingest_clip(&self, clip: &ClipObservation) -> Result<ClipState> {
        Ok(Engine::ingest_clip(self, clip)?.result.state)
    }

    fn complete_lesson(&self, learner_id: &str, lesson_id: &str) -> Result<LessonOutcome> {
        Engine::complete_lesson(self, learner_id, lesson_id)
    }

    fn submit_test(
        &self,
        learner_id: &str,
        session_id: &str,
        answers: &[usize],
        at: DateTime<Utc>,
    ) -> Result<AttemptOutcome> {
        Engine::submit_test_attempt(self, learner_id, session_id, answers, at)
    }

    fn learner_record(&self, learner_id: &str) -> Result<LearnerRecord> {
        Engine::learner(self, learner_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LessonReplay {
    pub session_id: String,
    pub lesson_id: String,
    pub clip_states: Vec<ClipState>,
    pub lesson_state: LessonState,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub supplementary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptReplay {
    pub score: u32,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReplay {
    pub session_id: String,
    pub attempts: Vec<AttemptReplay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerReplay {
    pub learner_id: String,
    pub style: CognitiveStyle,
    pub group: String,
    pub lessons: Vec<LessonReplay>,
    pub sessions: Vec<SessionReplay>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub course_id: String,
    pub learners: Vec<LearnerReplay>,
    pub metrics: CourseMetrics,
}

impl ReplayReport {
    pub fn clip_count(&self) -> usize {
        self.learners
            .iter()
            .flat_map(|l| &l.lessons)
            .map(|l| l.clip_states.len())
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// One row per completed lesson.
    pub fn to_csv(&self) -> String {
        let header = [
            "learner",
            "group",
            "style",
            "session",
            "lesson",
            "clip_states",
            "lesson_state",
            "supplementary",
        ];
        let rows = self.learners.iter().flat_map(|l| {
            l.lessons.iter().map(move |r| {
                let states: Vec<&str> = r.clip_states.iter().map(|s| s.name()).collect();
                vec![
                    l.learner_id.clone(),
                    l.group.clone(),
                    l.style.to_string(),
                    r.session_id.clone(),
                    r.lesson_id.clone(),
                    states.join(";"),
                    r.lesson_state.to_string(),
                    r.supplementary.join(";"),
                ]
            })
        });
        csv_table(&header, rows)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("Course {}\n\n", self.course_id);
        for l in &self.learners {
            let _ = writeln!(out, "{} ({}, group {})", l.learner_id, l.style, l.group);
            for r in &l.lessons {
                let _ = writeln!(
                    out,
                    "  {:<8} {:<28} {} clips",
                    r.lesson_id,
                    r.lesson_state.to_string(),
                    r.clip_states.len()
                );
            }
            for s in &l.sessions {
                let scores: Vec<String> = s
                    .attempts
                    .iter()
                    .map(|a| format!("{}{}", a.score, if a.passed { " pass" } else { "" }))
                    .collect();
                let _ = writeln!(out, "  test {}: {}", s.session_id, scores.join(", "));
            }
            for n in &l.notes {
                let _ = writeln!(out, "  note: {n}");
            }
            out.push('\n');
        }
        out.push_str(&self.metrics.render_text());
        out
    }
}

struct LearnerInput {
    script: LearnerScript,
    clips: BTreeMap<String, Vec<ClipObservation>>,
}

fn infer_style(
    course: &CourseModel,
    learner_id: &str,
    clips: &[ClipObservation],
) -> Result<CognitiveStyle> {
    let mut styles: Vec<CognitiveStyle> = clips
        .iter()
        .filter_map(|c| course.locate_lesson(&c.lesson_id))
        .map(|l| l.style)
        .collect();
    styles.sort();
    styles.dedup();
    match styles.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::validation(format!(
            "cannot infer a cognitive style for {learner_id}: clips span {} groups",
            styles.len()
        ))),
    }
}

fn load_inputs(
    stream_dir: &Path,
    course: &CourseModel,
) -> Result<(Option<Scenario>, Vec<LearnerInput>)> {
    let mut by_learner: BTreeMap<String, BTreeMap<String, Vec<ClipObservation>>> = BTreeMap::new();
    let mut unresolved = Vec::new();
    for path in find_clip_files(stream_dir)? {
        if path.file_name().is_some_and(|n| n == SCENARIO_FILE) {
            continue;
        }
        let clip = read_clip_file(&path)?;
        if course.locate_lesson(&clip.lesson_id).is_none() {
            unresolved.push(format!("{} ({})", clip.lesson_id, path.display()));
            continue;
        }
        by_learner
            .entry(clip.learner_id.clone())
            .or_default()
            .entry(clip.lesson_id.clone())
            .or_default()
            .push(clip);
    }
    if !unresolved.is_empty() {
        return Err(Error::validation(format!(
            "clips reference lessons not in course {}: {}",
            course.id,
            unresolved.join(", ")
        )));
    }
    let scenario_path = stream_dir.join(SCENARIO_FILE);
    let scenario = if scenario_path.is_file() {
        let s = Scenario::load(&scenario_path)?;
        s.validate(course)?;
        Some(s)
    } else {
        None
    };
    for lessons in by_learner.values_mut() {
        for clips in lessons.values_mut() {
            clips.sort_by(|a, b| {
                a.recorded_at
                    .cmp(&b.recorded_at)
                    .then_with(|| a.clip_id.cmp(&b.clip_id))
            });
        }
    }

    let mut inputs = Vec::new();
    if let Some(s) = &scenario {
        for script in &s.learners {
            let clips = by_learner.remove(&script.learner_id).unwrap_or_default();
            inputs.push(LearnerInput {
                script: script.clone(),
                clips,
            });
        }
    }
    for (learner_id, clips) in by_learner {
        let all: Vec<ClipObservation> = clips.values().flatten().cloned().collect();
        let style = infer_style(course, &learner_id, &all)?;
        let profile = crate::synth::LearnerProfile::engaged(style, 0);
        inputs.push(LearnerInput {
            script: LearnerScript::new(&learner_id, profile),
            clips,
        });
    }
    inputs.sort_by(|a, b| a.script.learner_id.cmp(&b.script.learner_id));
    Ok((scenario, inputs))
}

fn replay_learner(
    input: &LearnerInput,
    course: &CourseModel,
    start: DateTime<Utc>,
    backend: &dyn TutorBackend,
) -> Result<LearnerReplay> {
    let script = &input.script;
    let learner_id = script.learner_id.as_str();
    let style = script.profile.style;
    backend.enroll(learner_id, &course.id, style)?;
    let mut out = LearnerReplay {
        learner_id: learner_id.to_owned(),
        style,
        group: script.group_label(),
        lessons: Vec::new(),
        sessions: Vec::new(),
        notes: Vec::new(),
    };

    for lesson_id in input.clips.keys() {
        if course
            .locate_lesson(lesson_id)
            .is_some_and(|l| l.style != style)
        {
            out.notes.push(format!(
                "clips for {lesson_id} belong to another style group; skipped"
            ));
        }
    }

    let mut clock = start;
    for session in &course.sessions {
        let content = session.content(style);
        for lesson in &content.lessons {
            let Some(clips) = input.clips.get(&lesson.id) else {
                continue;
            };
            let mut states = Vec::with_capacity(clips.len());
            let mut denied = None;
            for clip in clips {
                match backend.ingest_clip(clip) {
                    Ok(s) => states.push(s),
                    Err(Error::Access(msg)) => {
                        denied = Some(msg);
                        break;
                    }
                    Err(e) => return Err(e),
                }
                let end = clip.recorded_at
                    + Duration::milliseconds((clip.duration_secs() * 1000.0) as i64);
                clock = clock.max(end);
            }
            if let Some(msg) = denied {
                out.notes
                    .push(format!("lesson {} skipped: {msg}", lesson.id));
                continue;
            }
            let outcome = backend.complete_lesson(learner_id, &lesson.id)?;
            out.lessons.push(LessonReplay {
                session_id: session.id.clone(),
                lesson_id: lesson.id.clone(),
                clip_states: states,
                lesson_state: outcome.state,
                message: outcome.message,
                supplementary: outcome.recommended_supplementary,
            });
        }

        let Some(sheets) = script.tests.get(&session.id) else {
            continue;
        };
        let mut attempts = Vec::new();
        for sheet in sheets {
            clock += Duration::seconds(ATTEMPT_GAP_SECS);
            match backend.submit_test(learner_id, &session.id, sheet, clock) {
                Ok(a) => attempts.push(AttemptReplay {
                    score: a.score,
                    passed: a.passed,
                }),
                Err(Error::Access(msg)) => {
                    out.notes
                        .push(format!("test {} skipped: {msg}", session.id));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        out.sessions.push(SessionReplay {
            session_id: session.id.clone(),
            attempts,
        });
    }
    Ok(out)
}

/// Replays every clip stream under `stream_dir` through `backend`.
///
/// With a `scenario.json` present, learners, styles, groups and test answers
/// come from it; otherwise learners are inferred from the clips and grouped
/// by style. Clips are ingested lesson by lesson in course order, each
/// lesson is completed after its last clip, then the session's scripted test
/// attempts are submitted.
pub fn run_replay(
    stream_dir: &Path,
    course: &CourseModel,
    backend: &dyn TutorBackend,
) -> Result<ReplayReport> {
    course.validate()?;
    let (scenario, inputs) = load_inputs(stream_dir, course)?;
    backend.define_course(course)?;
    let start = scenario.as_ref().map_or_else(
        || DateTime::from_timestamp(0, 0).expect("epoch"),
        |s| s.start,
    );

    let mut learners = Vec::with_capacity(inputs.len());
    let mut records = Vec::with_capacity(inputs.len());
    let mut grouping = BTreeMap::new();
    for input in &inputs {
        let replay = replay_learner(input, course, start, backend)?;
        records.push(backend.learner_record(&replay.learner_id)?);
        grouping.insert(replay.learner_id.clone(), replay.group.clone());
        learners.push(replay);
    }
    let metrics = compute_course_metrics(course, &records, &grouping)?;
    Ok(ReplayReport {
        course_id: course.id.clone(),
        learners,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::write_clip_file;
    use crate::synth::generate_streams;

    #[test]
    fn demo_replay_is_deterministic() {
        let course = CourseModel::canonical();
        let dir = tempfile::tempdir().unwrap();
        generate_streams(&Scenario::demo(&course, 5), &course, dir.path()).unwrap();
        let a = run_replay(dir.path(), &course, &Engine::in_memory()).unwrap();
        let b = run_replay(dir.path(), &course, &Engine::in_memory()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.clip_count() > 0);

        let ben = a.learners.iter().find(|l| l.learner_id == "ben").unwrap();
        assert!(ben
            .lessons
            .iter()
            .all(|l| l.lesson_state == LessonState::Unfocused));
        assert_eq!(ben.sessions[0].attempts.len(), 2);
        assert!(!ben.sessions[0].attempts[0].passed && ben.sessions[0].attempts[1].passed);

        let cara = a.learners.iter().find(|l| l.learner_id == "cara").unwrap();
        assert!(cara
            .lessons
            .iter()
            .any(|l| l.lesson_state == LessonState::Confused));
    }

    #[test]
    fn empty_directory_gives_empty_report() {
        let course = CourseModel::canonical();
        let dir = tempfile::tempdir().unwrap();
        let r = run_replay(dir.path(), &course, &Engine::in_memory()).unwrap();
        assert!(r.learners.is_empty());
    }

    #[test]
    fn unknown_lessons_are_listed() {
        let course = CourseModel::canonical();
        let dir = tempfile::tempdir().unwrap();
        let profile = crate::synth::LearnerProfile::engaged(CognitiveStyle::Wholistic, 1);
        let plan = crate::synth::LessonPlan {
            lesson_id: "nowhere-1".into(),
            duration_secs: 10,
            starts_at: DateTime::from_timestamp(0, 0).unwrap(),
        };
        let clip = &crate::synth::generate_synthetic("zed", &profile, &plan).unwrap()[0];
        write_clip_file(clip, dir.path().join("zed.jsonl")).unwrap();
        match run_replay(dir.path(), &course, &Engine::in_memory()) {
            Err(Error::Validation(msg)) => assert!(msg.contains("nowhere-1"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn learners_are_inferred_without_a_scenario() {
        let course = CourseModel::canonical();
        let dir = tempfile::tempdir().unwrap();
        generate_streams(&Scenario::demo(&course, 5), &course, dir.path()).unwrap();
        std::fs::remove_file(dir.path().join(SCENARIO_FILE)).unwrap();
        let r = run_replay(dir.path(), &course, &Engine::in_memory()).unwrap();
        let dev = r.learners.iter().find(|l| l.learner_id == "dev").unwrap();
        assert_eq!(dev.style, CognitiveStyle::Middle);
        assert_eq!(dev.group, "middle");
        // dev's session 2 clips are refused without the scripted pass
        assert!(dev.notes.iter().any(|n| n.contains("skipped")));
    }
}
