//! Analyzer and aggregator thresholds.
//!
//! Every constant the clip analyzer and lesson aggregator compare against
//! lives in [`ThresholdConfig`]. The compiled-in defaults are the reference
//! values; a TOML file may override any subset of them. Keys follow the
//! row names of the reference threshold table in snake case, e.g.
//!
//! ```toml
//! face_detection_confidence = 0.7
//! focus_yaw_range = [-29.0, 29.0]
//! alpha_5 = 6.0
//!
//! [aggregator]
//! numerous_no_faces = 4
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[low, high]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AngleRange {
    pub low: f64,
    pub high: f64,
}

impl AngleRange {
    pub const fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    #[inline]
    pub fn contains(&self, value: f64) -> bool {
        self.low <= value && value <= self.high
    }
}

impl From<[f64; 2]> for AngleRange {
    fn from([low, high]: [f64; 2]) -> Self {
        Self { low, high }
    }
}

impl From<AngleRange> for [f64; 2] {
    fn from(r: AngleRange) -> Self {
        [r.low, r.high]
    }
}

/// Keys of the per-state clip-count thresholds used by the aggregator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKey {
    Disengaged,
    Engaged,
    Tired,
    Confused,
    MultipleFaces,
    NoFace,
    NumerousNoFaces,
    Unfocused,
}

impl AggregatorKey {
    pub const ALL: [AggregatorKey; 8] = [
        AggregatorKey::Disengaged,
        AggregatorKey::Engaged,
        AggregatorKey::Tired,
        AggregatorKey::Confused,
        AggregatorKey::MultipleFaces,
        AggregatorKey::NoFace,
        AggregatorKey::NumerousNoFaces,
        AggregatorKey::Unfocused,
    ];
}

/// A lesson-level state fires when a clip state's count is strictly greater
/// than its threshold here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregatorThresholds {
    pub disengaged: u32,
    pub engaged: u32,
    pub tired: u32,
    pub confused: u32,
    pub multiple_faces: u32,
    pub no_face: u32,
    pub numerous_no_faces: u32,
    pub unfocused: u32,
}

impl Default for AggregatorThresholds {
    fn default() -> Self {
        Self {
            disengaged: 0,
            engaged: 1,
            tired: 2,
            confused: 2,
            multiple_faces: 2,
            no_face: 2,
            numerous_no_faces: 4,
            unfocused: 2,
        }
    }
}

impl AggregatorThresholds {
    pub fn get(&self, key: AggregatorKey) -> u32 {
        match key {
            AggregatorKey::Disengaged => self.disengaged,
            AggregatorKey::Engaged => self.engaged,
            AggregatorKey::Tired => self.tired,
            AggregatorKey::Confused => self.confused,
            AggregatorKey::MultipleFaces => self.multiple_faces,
            AggregatorKey::NoFace => self.no_face,
            AggregatorKey::NumerousNoFaces => self.numerous_no_faces,
            AggregatorKey::Unfocused => self.unfocused,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    /// Detections below this confidence are discarded.
    #[serde(rename = "face_detection_confidence")]
    pub face_confidence_min: f64,
    #[serde(rename = "no_face_over_total")]
    pub no_face_ratio_max: f64,
    #[serde(rename = "multiple_faces_over_total")]
    pub multi_face_ratio_max: f64,
    #[serde(rename = "unfocused_over_total")]
    pub unfocused_ratio_max: f64,
    #[serde(rename = "focus_yaw_range")]
    pub yaw_focus_range: AngleRange,
    #[serde(rename = "focus_pitch_range")]
    pub pitch_focus_range: AngleRange,
    #[serde(rename = "alpha_1")]
    pub alpha1: f64,
    #[serde(rename = "alpha_2")]
    pub alpha2: f64,
    #[serde(rename = "alpha_3")]
    pub alpha3: f64,
    #[serde(rename = "alpha_4")]
    pub alpha4: f64,
    #[serde(rename = "alpha_5")]
    pub alpha5: f64,
    #[serde(rename = "alpha_6")]
    pub alpha6: f64,
    pub emotion_multiplier: f64,
    #[serde(rename = "aggregator")]
    pub aggregator_counts: AggregatorThresholds,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            face_confidence_min: 0.7,
            no_face_ratio_max: 0.25,
            multi_face_ratio_max: 0.25,
            unfocused_ratio_max: 0.35,
            yaw_focus_range: AngleRange::new(-29.0, 29.0),
            pitch_focus_range: AngleRange::new(-37.0, 16.0),
            alpha1: -1.5,
            alpha2: 1.0,
            alpha3: 1.0,
            alpha4: -2.0,
            alpha5: 6.0,
            alpha6: -5.0,
            emotion_multiplier: 1.0,
            aggregator_counts: AggregatorThresholds::default(),
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("face_detection_confidence", self.face_confidence_min)?;
        unit("no_face_over_total", self.no_face_ratio_max)?;
        unit("multiple_faces_over_total", self.multi_face_ratio_max)?;
        unit("unfocused_over_total", self.unfocused_ratio_max)?;

        for (name, r) in [
            ("focus_yaw_range", self.yaw_focus_range),
            ("focus_pitch_range", self.pitch_focus_range),
        ] {
            if !(r.low.is_finite() && r.high.is_finite() && r.low <= r.high) {
                return Err(Error::Config(format!(
                    "{name} must be a finite range with low <= high, got [{}, {}]",
                    r.low, r.high
                )));
            }
        }

        let alphas = [
            self.alpha1,
            self.alpha2,
            self.alpha3,
            self.alpha4,
            self.alpha5,
            self.alpha6,
        ];
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("alpha thresholds must be finite".into()));
        }
        if !(self.alpha6 < self.alpha1 && self.alpha1 < self.alpha3 && self.alpha3 <= self.alpha5) {
            return Err(Error::Config(
                "alpha thresholds must satisfy alpha_6 < alpha_1 < alpha_3 <= alpha_5".into(),
            ));
        }
        if self.alpha4 >= self.alpha2 {
            return Err(Error::Config(
                "alpha thresholds must satisfy alpha_4 < alpha_2".into(),
            ));
        }
        if !(self.emotion_multiplier.is_finite() && self.emotion_multiplier > 0.0) {
            return Err(Error::Config(format!(
                "emotion_multiplier must be positive, got {}",
                self.emotion_multiplier
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ThresholdConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("threshold config is always representable as TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_table() {
        let c = ThresholdConfig::default();
        assert_eq!(c.face_confidence_min, 0.7);
        assert_eq!(c.no_face_ratio_max, 0.25);
        assert_eq!(c.multi_face_ratio_max, 0.25);
        assert_eq!(c.unfocused_ratio_max, 0.35);
        assert_eq!(c.yaw_focus_range, AngleRange::new(-29.0, 29.0));
        assert_eq!(c.pitch_focus_range, AngleRange::new(-37.0, 16.0));
        assert_eq!(
            [c.alpha1, c.alpha2, c.alpha3, c.alpha4, c.alpha5, c.alpha6],
            [-1.5, 1.0, 1.0, -2.0, 6.0, -5.0]
        );
        assert_eq!(c.emotion_multiplier, 1.0);
        let a = c.aggregator_counts;
        assert_eq!(
            [
                a.disengaged,
                a.engaged,
                a.tired,
                a.confused,
                a.multiple_faces,
                a.no_face,
                a.numerous_no_faces,
                a.unfocused
            ],
            [0, 1, 2, 2, 2, 2, 4, 2]
        );
        c.validate().unwrap();
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let c = ThresholdConfig::from_toml_str(
            "alpha_5 = 7.0\nfocus_yaw_range = [-20, 25]\n[aggregator]\nengaged = 3\n",
        )
        .unwrap();
        assert_eq!(c.alpha5, 7.0);
        assert_eq!(c.yaw_focus_range, AngleRange::new(-20.0, 25.0));
        assert_eq!(c.aggregator_counts.engaged, 3);
        assert_eq!(c.aggregator_counts.tired, 2);
        assert_eq!(c.alpha1, -1.5);
    }

    #[test]
    fn toml_round_trip() {
        let c = ThresholdConfig::default();
        let back = ThresholdConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            "face_detection_confidence = 1.5",
            "focus_pitch_range = [16, -37]",
            "alpha_6 = 0.0",
            "alpha_4 = 2.0",
            "emotion_multiplier = 0.0",
            "unknown_key = 1",
        ] {
            assert!(ThresholdConfig::from_toml_str(bad).is_err(), "{bad}");
        }
    }
}
