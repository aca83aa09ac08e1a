#![allow(dead_code)]

use ats_core::{AffectPoint, ClipObservation, FaceBox, FaceDetection, FramePrediction, HeadPose};
use chrono::{DateTime, Duration, Utc};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    NoFace,
    Multi,
    Away,
    Focused(f64, f64),
}

fn face(conf: f64) -> FaceDetection {
    FaceDetection {
        bbox: FaceBox {
            x: 0.3,
            y: 0.2,
            w: 0.3,
            h: 0.4,
        },
        confidence: conf,
    }
}

pub fn frame(i: usize, kind: Kind) -> FramePrediction {
    let frame_index = i as u64;
    match kind {
        Kind::NoFace => FramePrediction {
            frame_index,
            faces: vec![],
            pose: None,
            affect: None,
        },
        Kind::Multi => FramePrediction {
            frame_index,
            faces: vec![face(0.9), face(0.85)],
            pose: None,
            affect: None,
        },
        Kind::Away => FramePrediction {
            frame_index,
            faces: vec![face(0.9)],
            pose: Some(HeadPose::new(40.0, 0.0, 0.0)),
            affect: Some(AffectPoint::new(0.0, 0.0)),
        },
        Kind::Focused(v, a) => FramePrediction {
            frame_index,
            faces: vec![face(0.9)],
            pose: Some(HeadPose::new(0.0, 0.0, 0.0)),
            affect: Some(AffectPoint::new(v, a)),
        },
    }
}

pub fn t0() -> DateTime<Utc> {
    DateTime::from_timestamp(1_700_000_000, 0).unwrap()
}

pub fn clip_of(
    clip_id: &str,
    learner: &str,
    lesson: &str,
    seq: i64,
    kinds: &[Kind],
) -> ClipObservation {
    ClipObservation {
        clip_id: clip_id.to_owned(),
        learner_id: learner.to_owned(),
        lesson_id: lesson.to_owned(),
        recorded_at: t0() + Duration::seconds(20 * seq),
        fps: 15.0,
        frames: kinds
            .iter()
            .enumerate()
            .map(|(i, &k)| frame(i, k))
            .collect(),
    }
}

/// A 150-frame clip whose frames all have the same kind.
pub fn uniform_clip(
    clip_id: &str,
    learner: &str,
    lesson: &str,
    seq: i64,
    kind: Kind,
) -> ClipObservation {
    clip_of(clip_id, learner, lesson, seq, &vec![kind; 150])
}

pub const ENGAGED: Kind = Kind::Focused(5.0, 5.0);
pub const CONFUSED: Kind = Kind::Focused(-3.0, 2.0);
pub const TIRED: Kind = Kind::Focused(0.0, -6.0);
pub const DISENGAGED: Kind = Kind::Focused(-3.0, -1.5);
pub const NEUTRAL: Kind = Kind::Focused(0.0, 0.0);
