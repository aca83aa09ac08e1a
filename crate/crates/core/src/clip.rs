//! Per-frame labelling and per-clip analysis.
//!
//! A clip is a short (nominally 10 s at 15 fps) run of frame predictions.
//! Every frame is labelled `NoFace`, `MultipleFaces`, `Unfocused` or
//! `Focused`; the clip is then gated on the label ratios and, if it survives
//! every gate, classified from the mean affect of its focused frames.

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::affect::{
    classify_emotion, is_focused, mean_affect, AffectPoint, EmotionalState, HeadPose,
};
use crate::config::ThresholdConfig;
use crate::error::{Error, Result};

/// Nominal recording length of one clip.
pub const NOMINAL_CLIP_SECS: f64 = 10.0;
/// Nominal sampling rate of replayed clips.
pub const NOMINAL_FPS: f64 = 15.0;

const BOX_EPS: f64 = 1e-9;

/// Normalized face box `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct FaceBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for FaceBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<FaceBox> for [f64; 4] {
    fn from(b: FaceBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceDetection {
    #[serde(rename = "box")]
    pub bbox: FaceBox,
    #[serde(rename = "conf")]
    pub confidence: f64,
}

impl FaceDetection {
    pub fn validate(&self) -> Result<()> {
        let FaceBox { x, y, w, h } = self.bbox;
        let finite = [x, y, w, h].iter().all(|v| v.is_finite());
        if !finite
            || x < 0.0
            || y < 0.0
            || w < 0.0
            || h < 0.0
            || x + w > 1.0 + BOX_EPS
            || y + h > 1.0 + BOX_EPS
        {
            return Err(Error::validation(format!(
                "face box [{x}, {y}, {w}, {h}] is not a normalized rectangle"
            )));
        }
        if !(self.confidence.is_finite() && (0.0..=1.0).contains(&self.confidence)) {
            return Err(Error::validation(format!(
                "face confidence must lie in [0, 1], got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Detector, pose and affect outputs for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    #[serde(default)]
    pub faces: Vec<FaceDetection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<HeadPose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affect: Option<AffectPoint>,
}

impl FramePrediction {
    fn validate(&self) -> Result<()> {
        let at = |e: Error| Error::validation(format!("frame {}: {e}", self.frame_index));
        for face in &self.faces {
            face.validate().map_err(at)?;
        }
        if let Some(pose) = &self.pose {
            pose.validate().map_err(at)?;
        }
        if let Some(affect) = &self.affect {
            if !affect.is_finite() {
                return Err(at(Error::validation("affect values must be finite")));
            }
        }
        Ok(())
    }
}

/// Clip manifest as uploaded by a client or stored in a replay stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipObservation {
    pub clip_id: String,
    pub learner_id: String,
    pub lesson_id: String,
    pub recorded_at: DateTime<Utc>,
    pub fps: f64,
    pub frames: Vec<FramePrediction>,
}

impl ClipObservation {
    pub fn duration_secs(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    /// Structural checks. Returns warnings for acceptable oddities.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.clip_id.is_empty() {
            return Err(Error::validation("clip_id must not be empty"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::validation(format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        if self.frames.is_empty() {
            return Err(Error::validation(format!(
                "clip {} has no frames",
                self.clip_id
            )));
        }
        let mut seen = HashSet::with_capacity(self.frames.len());
        for frame in &self.frames {
            if !seen.insert(frame.frame_index) {
                return Err(Error::validation(format!(
                    "frame index {} appears twice in clip {}",
                    frame.frame_index, self.clip_id
                )));
            }
            frame.validate()?;
        }
        let mut warnings = Vec::new();
        // one frame of slack for clips cut at the boundary
        if self.frames.len() as f64 > NOMINAL_CLIP_SECS * self.fps + 1.0 {
            warnings.push(format!(
                "clip {} spans {:.1} s, longer than the nominal {NOMINAL_CLIP_SECS} s",
                self.clip_id,
                self.duration_secs()
            ));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClipState {
    NoFace,
    MultipleFaces,
    Unfocused,
    Engaged,
    Tired,
    Confused,
    Disengaged,
    Neutral,
}

impl ClipState {
    pub const ALL: [ClipState; 8] = [
        ClipState::NoFace,
        ClipState::MultipleFaces,
        ClipState::Unfocused,
        ClipState::Engaged,
        ClipState::Tired,
        ClipState::Confused,
        ClipState::Disengaged,
        ClipState::Neutral,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ClipState::NoFace => "NoFace",
            ClipState::MultipleFaces => "MultipleFaces",
            ClipState::Unfocused => "Unfocused",
            ClipState::Engaged => "Engaged",
            ClipState::Tired => "Tired",
            ClipState::Confused => "Confused",
            ClipState::Disengaged => "Disengaged",
            ClipState::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for ClipState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<EmotionalState> for ClipState {
    fn from(s: EmotionalState) -> Self {
        match s {
            EmotionalState::Engaged => ClipState::Engaged,
            EmotionalState::Tired => ClipState::Tired,
            EmotionalState::Confused => ClipState::Confused,
            EmotionalState::Disengaged => ClipState::Disengaged,
            EmotionalState::Neutral => ClipState::Neutral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameLabel {
    NoFace,
    MultipleFaces,
    Unfocused,
    Focused(AffectPoint),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub no_face: u32,
    pub multiple_faces: u32,
    pub single_face: u32,
    pub unfocused: u32,
    pub focused: u32,
}

impl FrameCounts {
    pub fn total(&self) -> u32 {
        self.no_face + self.multiple_faces + self.single_face
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzerMode {
    /// Single-face frames lacking pose or affect fail the whole clip.
    #[default]
    Strict,
    /// Such frames are dropped from every count and reported as a warning.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipResult {
    pub clip_id: String,
    pub recorded_at: DateTime<Utc>,
    pub duration_secs: f64,
    pub state: ClipState,
    pub frame_counts: FrameCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_affect: Option<AffectPoint>,
    #[serde(default)]
    pub dropped_frames: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn label_frame(frame: &FramePrediction, cfg: &ThresholdConfig) -> Result<FrameLabel> {
    let qualifying = frame
        .faces
        .iter()
        .filter(|f| f.confidence >= cfg.face_confidence_min)
        .count();
    match qualifying {
        0 => Ok(FrameLabel::NoFace),
        1 => {
            let missing = |what: &str| Error::IncompleteFrame {
                frame: frame.frame_index,
                reason: format!("single face detected but no {what} prediction"),
            };
            let pose = frame.pose.ok_or_else(|| missing("head pose"))?;
            let affect = frame.affect.ok_or_else(|| missing("affect"))?;
            if is_focused(&pose, cfg) {
                Ok(FrameLabel::Focused(affect))
            } else {
                Ok(FrameLabel::Unfocused)
            }
        }
        _ => Ok(FrameLabel::MultipleFaces),
    }
}

pub fn analyze_clip(clip: &ClipObservation, cfg: &ThresholdConfig) -> Result<ClipResult> {
    analyze_clip_with(clip, cfg, AnalyzerMode::Strict)
}

pub fn analyze_clip_with(
    clip: &ClipObservation,
    cfg: &ThresholdConfig,
    mode: AnalyzerMode,
) -> Result<ClipResult> {
    let mut warnings = clip.validate()?;

    let mut counts = FrameCounts::default();
    let mut focused = Vec::with_capacity(clip.frames.len());
    let mut dropped = 0u32;
    for frame in &clip.frames {
        let label = match (label_frame(frame, cfg), mode) {
            (Ok(label), _) => label,
            (Err(Error::IncompleteFrame { .. }), AnalyzerMode::Lenient) => {
                dropped += 1;
                continue;
            }
            (Err(e), _) => return Err(e),
        };
        match label {
            FrameLabel::NoFace => counts.no_face += 1,
            FrameLabel::MultipleFaces => counts.multiple_faces += 1,
            FrameLabel::Unfocused => {
                counts.single_face += 1;
                counts.unfocused += 1;
            }
            FrameLabel::Focused(p) => {
                counts.single_face += 1;
                counts.focused += 1;
                focused.push(p);
            }
        }
    }
    if dropped > 0 {
        warnings.push(format!("{dropped} incomplete single-face frames dropped"));
    }

    let total = counts.total();
    if total == 0 {
        return Err(Error::validation(format!(
            "clip {} has no analyzable frames",
            clip.clip_id
        )));
    }
    let ratio = |n: u32, d: u32| f64::from(n) / f64::from(d);

    let (state, mean) = if ratio(counts.no_face, total) > cfg.no_face_ratio_max {
        (ClipState::NoFace, None)
    } else if ratio(counts.multiple_faces, total) > cfg.multi_face_ratio_max {
        (ClipState::MultipleFaces, None)
    } else {
        if counts.single_face == 0 {
            // only reachable with ratio limits of 0.5 or more
            return Err(Error::validation(format!(
                "clip {} passed the presence gates without any single-face frame",
                clip.clip_id
            )));
        }
        if ratio(counts.unfocused, counts.single_face) > cfg.unfocused_ratio_max {
            (ClipState::Unfocused, None)
        } else {
            // focused is non-empty here unless unfocused_ratio_max >= 1
            let mean = mean_affect(&focused).map_err(|_| {
                Error::validation(format!("clip {} has no focused frames", clip.clip_id))
            })?;
            (ClipState::from(classify_emotion(mean, cfg)?), Some(mean))
        }
    };

    Ok(ClipResult {
        clip_id: clip.clip_id.clone(),
        recorded_at: clip.recorded_at,
        duration_secs: clip.duration_secs(),
        state,
        frame_counts: counts,
        mean_affect: mean,
        dropped_frames: dropped,
        warnings,
    })
}
