//! Circumplex emotion classification and head-pose focus gating.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::ThresholdConfig;
use crate::error::{Error, Result};

/// Bound of the valence/arousal scale.
pub const AFFECT_LIMIT: f64 = 10.0;

/// A point on the valence/arousal plane, each axis nominally in `[-10, 10]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffectPoint {
    pub valence: f64,
    pub arousal: f64,
}

impl AffectPoint {
    pub const fn new(valence: f64, arousal: f64) -> Self {
        Self { valence, arousal }
    }

    pub fn is_finite(&self) -> bool {
        self.valence.is_finite() && self.arousal.is_finite()
    }

    pub fn clamped(self) -> Self {
        Self {
            valence: self.valence.clamp(-AFFECT_LIMIT, AFFECT_LIMIT),
            arousal: self.arousal.clamp(-AFFECT_LIMIT, AFFECT_LIMIT),
        }
    }
}

/// Euler angles of the head relative to the camera, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadPose {
    pub yaw: f64,
    pub pitch: f64,
    /// Carried through but not used by the focus gate.
    pub roll: f64,
}

impl HeadPose {
    pub const fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, angle) in [
            ("yaw", self.yaw),
            ("pitch", self.pitch),
            ("roll", self.roll),
        ] {
            if !angle.is_finite() || angle.abs() > 180.0 {
                return Err(Error::validation(format!(
                    "head pose {name} must be finite and within [-180, 180], got {angle}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmotionalState {
    Engaged,
    Tired,
    Confused,
    Disengaged,
    Neutral,
}

impl EmotionalState {
    pub const ALL: [EmotionalState; 5] = [
        EmotionalState::Engaged,
        EmotionalState::Tired,
        EmotionalState::Confused,
        EmotionalState::Disengaged,
        EmotionalState::Neutral,
    ];
}

impl fmt::Display for EmotionalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Maps a (mean) affect reading onto one of the five learning emotions.
///
/// Both axes are scaled by the emotion multiplier and clamped to the affect
/// scale, then the first matching rule wins:
///
/// 1. `a <= α6` → Tired
/// 2. `v >= α2 && a >= α3` → Engaged
/// 3. `a >= α5 && v > α4` → Engaged
/// 4. `v <= α4 && a >= α3` → Confused
/// 5. `v <= α4 && a <= α1` → Disengaged
/// 6. otherwise Neutral
pub fn classify_emotion(point: AffectPoint, cfg: &ThresholdConfig) -> Result<EmotionalState> {
    if !point.is_finite() {
        return Err(Error::validation(format!(
            "affect point must be finite, got ({}, {})",
            point.valence, point.arousal
        )));
    }
    let AffectPoint {
        valence: v,
        arousal: a,
    } = AffectPoint::new(
        point.valence * cfg.emotion_multiplier,
        point.arousal * cfg.emotion_multiplier,
    )
    .clamped();

    // one branch per rule, in rule order
    #[allow(clippy::if_same_then_else)]
    let state = if a <= cfg.alpha6 {
        EmotionalState::Tired
    } else if v >= cfg.alpha2 && a >= cfg.alpha3 {
        EmotionalState::Engaged
    } else if a >= cfg.alpha5 && v > cfg.alpha4 {
        EmotionalState::Engaged
    } else if v <= cfg.alpha4 && a >= cfg.alpha3 {
        EmotionalState::Confused
    } else if v <= cfg.alpha4 && a <= cfg.alpha1 {
        EmotionalState::Disengaged
    } else {
        EmotionalState::Neutral
    };
    Ok(state)
}

/// True when yaw and pitch both fall inside the configured focus ranges
/// (bounds inclusive). Roll is ignored.
pub fn is_focused(pose: &HeadPose, cfg: &ThresholdConfig) -> bool {
    cfg.yaw_focus_range.contains(pose.yaw) && cfg.pitch_focus_range.contains(pose.pitch)
}

/// Componentwise arithmetic mean.
///
/// Each axis is summed in sorted order so the result is bit-identical for
/// any permutation of the input.
pub fn mean_affect(points: &[AffectPoint]) -> Result<AffectPoint> {
    if points.is_empty() {
        return Err(Error::validation("mean_affect needs at least one point"));
    }
    let n = points.len() as f64;
    let sorted_sum = |mut xs: Vec<f64>| {
        xs.sort_by(f64::total_cmp);
        xs.into_iter().sum::<f64>()
    };
    let sv = sorted_sum(points.iter().map(|p| p.valence).collect());
    let sa = sorted_sum(points.iter().map(|p| p.arousal).collect());
    Ok(AffectPoint::new(sv / n, sa / n))
}
