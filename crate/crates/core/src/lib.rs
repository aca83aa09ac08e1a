//! Affective tutoring engine.
//!
//! Per-frame face, head-pose and affect predictions are reduced to one of
//! eight clip states, clip states are aggregated into one of 21 lesson
//! states, and lesson states drive feedback, supplementary content and the
//! session gating of a cognitive-style aware course.
//!
//! The pipeline, bottom up:
//!
//! - [`affect`]: circumplex classification and the head-pose focus gate
//! - [`clip`]: frame labels and clip analysis
//! - [`aggregator`]: lesson states in priority order
//! - [`feedback`]: the message catalog
//! - [`course`], [`record`], [`engine`]: courses, learner records and the tutor
//! - [`metrics`], [`report`]: academic-success tables and analyzer reports
//! - [`synth`], [`replay`], [`oracle`]: synthetic learners, replay and verification

pub mod affect;
pub mod aggregator;
pub mod clip;
pub mod config;
pub mod course;
pub mod engine;
pub mod error;
pub mod feedback;
pub mod metrics;
pub mod oracle;
pub mod record;
pub mod replay;
pub mod report;
pub mod storage;
pub mod stream;
pub mod synth;

pub use affect::{
    classify_emotion, is_focused, mean_affect, AffectPoint, EmotionalState, HeadPose,
};
pub use aggregator::{aggregate, LessonState, StateCounts};
pub use clip::{
    analyze_clip, analyze_clip_with, label_frame, AnalyzerMode, ClipObservation, ClipResult,
    ClipState, FaceBox, FaceDetection, FrameCounts, FrameLabel, FramePrediction,
};
pub use config::{AggregatorKey, AggregatorThresholds, AngleRange, ThresholdConfig};
pub use course::{grade_test, CognitiveStyle, CourseModel, Grade, Lesson, Test, TestView};
pub use engine::{AttemptOutcome, ClipAck, Engine};
pub use error::{Error, Result};
pub use feedback::{select_feedback, Feedback, FeedbackCatalog, FeedbackVariant};
pub use metrics::{compute_course_metrics, CourseMetrics};
pub use oracle::{verify_against_oracle, VerifySummary};
pub use record::{LearnerRecord, LessonOutcome, TestAttempt};
pub use replay::{run_replay, ReplayReport, TutorBackend};
pub use report::LearnerReport;
pub use storage::{FileStore, MemoryStore, Store};
pub use synth::{generate_streams, generate_synthetic, LearnerProfile, LessonPlan, Scenario};
