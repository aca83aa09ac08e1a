mod common;

use std::sync::Arc;

use ats_core::{
    AnalyzerMode, ClipState, CognitiveStyle, CourseModel, Engine, Error, FeedbackCatalog,
    FeedbackVariant, FileStore, LessonState, ThresholdConfig,
};
use chrono::Duration;
use common::*;

fn engine_with(learner: &str, style: CognitiveStyle) -> Engine {
    let engine = Engine::in_memory();
    engine.define_course(CourseModel::canonical()).unwrap();
    engine.enroll(learner, "ai-for-everyone", style).unwrap();
    engine
}

fn key(session: usize, style: CognitiveStyle) -> Vec<usize> {
    CourseModel::canonical().sessions[session]
        .content(style)
        .test
        .answer_key()
}

fn ingest_n(engine: &Engine, learner: &str, lesson: &str, kind: Kind, n: usize, offset: i64) {
    for i in 0..n {
        let id = format!("{learner}-{lesson}-{}", offset + i as i64);
        engine
            .ingest_clip(&uniform_clip(&id, learner, lesson, offset + i as i64, kind))
            .unwrap();
    }
}

#[test]
fn confused_lesson_with_supplementary_recommends_it() {
    let e = engine_with("cara", CognitiveStyle::Wholistic);
    let before = e.lessons_for("cara", "s1").unwrap();
    assert!(before.iter().all(|l| l.supplementary.is_empty()));

    ingest_n(&e, "cara", "s1-w1", CONFUSED, 3, 0);
    let out = e.complete_lesson("cara", "s1-w1").unwrap();
    assert_eq!(out.state, LessonState::Confused);
    let catalog = FeedbackCatalog::default();
    assert_eq!(
        out.message,
        catalog
            .message(LessonState::Confused, FeedbackVariant::WithSupplementary)
            .unwrap()
    );
    assert_eq!(out.recommended_supplementary.len(), 2);

    let after = e.lessons_for("cara", "s1").unwrap();
    let w1 = after.iter().find(|l| l.id == "s1-w1").unwrap();
    assert_eq!(w1.supplementary, out.recommended_supplementary);
    assert!(after
        .iter()
        .filter(|l| l.id != "s1-w1")
        .all(|l| l.supplementary.is_empty()));
}

#[test]
fn confused_lesson_without_supplementary_gets_plain_message() {
    let e = engine_with("ben", CognitiveStyle::Analytical);
    ingest_n(&e, "ben", "s1-a5", CONFUSED, 3, 0);
    let out = e.complete_lesson("ben", "s1-a5").unwrap();
    assert_eq!(out.state, LessonState::Confused);
    assert!(out.recommended_supplementary.is_empty());
    assert_eq!(
        out.message,
        FeedbackCatalog::default()
            .message(LessonState::Confused, FeedbackVariant::Plain)
            .unwrap()
    );
}

#[test]
fn worked_lesson_examples() {
    let e = engine_with("a", CognitiveStyle::Middle);
    ingest_n(&e, "a", "s1-m1", TIRED, 3, 0);
    ingest_n(&e, "a", "s1-m1", CONFUSED, 3, 10);
    assert_eq!(
        e.complete_lesson("a", "s1-m1").unwrap().state,
        LessonState::TiredConfused
    );

    ingest_n(&e, "a", "s1-m2", ENGAGED, 2, 0);
    let out = e.complete_lesson("a", "s1-m2").unwrap();
    assert_eq!(
        (out.state, out.message.as_str()),
        (LessonState::Engaged, "Excellent! Keep it up.")
    );

    ingest_n(&e, "a", "s1-m3", Kind::NoFace, 5, 0);
    assert_eq!(
        e.complete_lesson("a", "s1-m3").unwrap().state,
        LessonState::NumerousNoFaces
    );

    ingest_n(&e, "a", "s1-m4", NEUTRAL, 1, 0);
    ingest_n(&e, "a", "s1-m4", DISENGAGED, 1, 5);
    assert_eq!(
        e.complete_lesson("a", "s1-m4").unwrap().state,
        LessonState::Disengaged
    );
}

#[test]
fn completing_without_clips_is_no_data() {
    let e = engine_with("a", CognitiveStyle::Wholistic);
    assert!(matches!(
        e.complete_lesson("a", "s1-w2"),
        Err(Error::NoData(_))
    ));
}

#[test]
fn recompletion_recomputes_from_all_clips() {
    let e = engine_with("a", CognitiveStyle::Wholistic);
    ingest_n(&e, "a", "s1-w1", ENGAGED, 2, 0);
    assert_eq!(
        e.complete_lesson("a", "s1-w1").unwrap().state,
        LessonState::Engaged
    );
    ingest_n(&e, "a", "s1-w1", TIRED, 3, 10);
    assert_eq!(
        e.complete_lesson("a", "s1-w1").unwrap().state,
        LessonState::EngagedTired
    );
    let rec = e.learner("a").unwrap();
    assert_eq!(rec.lessons["s1-w1"].outcomes.len(), 2);
}

#[test]
fn duplicate_clip_ids_are_idempotent() {
    let e = engine_with("a", CognitiveStyle::Wholistic);
    let clip = uniform_clip("c1", "a", "s1-w1", 0, ENGAGED);
    let first = e.ingest_clip(&clip).unwrap();
    assert!(!first.duplicate);
    // a different payload under the same id still returns the stored result
    let mut other = uniform_clip("c1", "a", "s1-w1", 0, TIRED);
    other.fps = 30.0;
    let again = e.ingest_clip(&other).unwrap();
    assert!(again.duplicate);
    assert_eq!(again.result, first.result);
    assert_eq!(e.learner("a").unwrap().lessons["s1-w1"].clips.len(), 1);
}

#[test]
fn failing_then_passing_unlocks_next_session() {
    let style = CognitiveStyle::Wholistic;
    let e = engine_with("ana", style);
    assert_eq!(e.accessible_sessions("ana").unwrap(), ["s1"]);
    assert!(matches!(e.lessons_for("ana", "s2"), Err(Error::Access(_))));
    let locked = uniform_clip("x", "ana", "s2-w1", 0, ENGAGED);
    assert!(matches!(e.ingest_clip(&locked), Err(Error::Access(_))));

    let mut wrong = key(0, style);
    wrong[0] = (wrong[0] + 1) % 4;
    wrong[1] = (wrong[1] + 1) % 4;
    let at = t0();
    let first = e.submit_test_attempt("ana", "s1", &wrong, at).unwrap();
    assert_eq!(
        (first.score, first.passed, first.next_session_unlocked),
        (67, false, false)
    );
    let n_supp: usize = CourseModel::canonical().sessions[0]
        .content(style)
        .lessons
        .iter()
        .map(|l| l.supplementary.len())
        .sum();
    assert_eq!(first.revealed_supplementary.len(), n_supp);
    assert!(e
        .lessons_for("ana", "s1")
        .unwrap()
        .iter()
        .all(|l| !l.supplementary.is_empty()));

    let second = e
        .submit_test_attempt("ana", "s1", &key(0, style), at + Duration::minutes(5))
        .unwrap();
    assert_eq!(
        (second.score, second.passed, second.next_session_unlocked),
        (100, true, true)
    );
    assert!(second.revealed_supplementary.is_empty());
    assert_eq!(e.accessible_sessions("ana").unwrap(), ["s1", "s2"]);
    assert_eq!(e.lessons_for("ana", "s2").unwrap().len(), 3);

    let rec = e.learner("ana").unwrap();
    let s1 = &rec.sessions["s1"];
    assert_eq!(
        (s1.attempts_to_pass(), s1.first_passing_score()),
        (Some(2), Some(100))
    );
}

#[test]
fn other_style_lessons_are_forbidden_and_unknown_ones_not_found() {
    let e = engine_with("a", CognitiveStyle::Analytical);
    let clip = uniform_clip("x", "a", "s1-w1", 0, ENGAGED);
    assert!(matches!(e.ingest_clip(&clip), Err(Error::Access(_))));
    let clip = uniform_clip("y", "a", "nope", 0, ENGAGED);
    assert!(matches!(e.ingest_clip(&clip), Err(Error::NotFound(_))));
    let clip = uniform_clip("z", "ghost", "s1-a1", 0, ENGAGED);
    assert!(matches!(e.ingest_clip(&clip), Err(Error::NotFound(_))));
    assert!(matches!(e.test_for("a", "s9"), Err(Error::NotFound(_))));
}

#[test]
fn test_view_carries_no_answers() {
    let e = engine_with("a", CognitiveStyle::Middle);
    let view = serde_json::to_value(e.test_for("a", "s1").unwrap()).unwrap();
    let text = view.to_string();
    assert!(!text.contains("answer"), "{text}");
    assert_eq!(view["questions"].as_array().unwrap().len(), 6);
}

#[test]
fn reenrollment_rules() {
    let e = engine_with("a", CognitiveStyle::Middle);
    e.enroll("a", "ai-for-everyone", CognitiveStyle::Middle)
        .unwrap();
    assert!(matches!(
        e.enroll("a", "ai-for-everyone", CognitiveStyle::Wholistic),
        Err(Error::Validation(_))
    ));
    assert!(matches!(
        e.enroll("b", "other", CognitiveStyle::Middle),
        Err(Error::NotFound(_))
    ));
}

#[test]
fn incomplete_frames_fail_in_strict_mode_only() {
    let e = engine_with("a", CognitiveStyle::Wholistic);
    let mut clip = uniform_clip("c", "a", "s1-w1", 0, ENGAGED);
    clip.frames[12].pose = None;
    match e.ingest_clip(&clip) {
        Err(Error::IncompleteFrame { frame, .. }) => assert_eq!(frame, 12),
        other => panic!("expected incomplete frame, got {other:?}"),
    }
    let lenient = Engine::in_memory().with_mode(AnalyzerMode::Lenient);
    lenient.define_course(CourseModel::canonical()).unwrap();
    lenient
        .enroll("a", "ai-for-everyone", CognitiveStyle::Wholistic)
        .unwrap();
    let ack = lenient.ingest_clip(&clip).unwrap();
    assert_eq!(ack.result.dropped_frames, 1);
    assert_eq!(ack.result.state, ClipState::Engaged);
}

#[test]
fn file_store_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let open = || {
        Engine::open(
            Arc::new(FileStore::open(&path).unwrap()),
            ThresholdConfig::default(),
            FeedbackCatalog::default(),
        )
        .unwrap()
    };
    let style = CognitiveStyle::Wholistic;
    let before = {
        let e = open();
        e.define_course(CourseModel::canonical()).unwrap();
        e.enroll("ana", "ai-for-everyone", style).unwrap();
        ingest_n(&e, "ana", "s1-w1", CONFUSED, 3, 0);
        e.complete_lesson("ana", "s1-w1").unwrap();
        e.submit_test_attempt("ana", "s1", &key(0, style), t0())
            .unwrap();
        e.learner("ana").unwrap()
    };
    let e = open();
    assert_eq!(e.course_ids().unwrap(), ["ai-for-everyone"]);
    assert_eq!(e.learner("ana").unwrap(), before);
    assert_eq!(e.accessible_sessions("ana").unwrap(), ["s1", "s2"]);
    // the duplicate check also holds across restarts
    let again = e
        .ingest_clip(&uniform_clip("ana-s1-w1-0", "ana", "s1-w1", 0, TIRED))
        .unwrap();
    assert!(again.duplicate);
}

#[test]
fn concurrent_learners_do_not_interfere() {
    let e = Arc::new(Engine::in_memory());
    e.define_course(CourseModel::canonical()).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|i| {
            let e = Arc::clone(&e);
            std::thread::spawn(move || {
                let learner = format!("l{i}");
                e.enroll(&learner, "ai-for-everyone", CognitiveStyle::Wholistic)
                    .unwrap();
                ingest_n(&e, &learner, "s1-w1", ENGAGED, 20, 0);
                e.complete_lesson(&learner, "s1-w1").unwrap().state
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), LessonState::Engaged);
    }
    for rec in e.learners().unwrap() {
        assert_eq!(rec.lessons["s1-w1"].clips.len(), 20);
    }
}
