//! Synthetic learners.
//!
//! A [`LearnerProfile`] scripts what the face detector, pose and affect
//! networks would have reported for one learner: how often the learner is
//! missing or accompanied, how often they look away, and a piecewise-linear
//! affect path over the lesson with bounded uniform jitter. Generation is a
//! pure function of the profile, the seed and the lesson plan.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affect::{AffectPoint, HeadPose, AFFECT_LIMIT};
use crate::clip::{ClipObservation, FaceBox, FaceDetection, FramePrediction, NOMINAL_FPS};
use crate::course::{grade_test, CognitiveStyle, CourseModel};
use crate::error::{Error, Result};
use crate::stream::write_clip_file;

/// Seconds recorded per clip.
pub const RECORD_SECS: u32 = 10;
/// Seconds between the end of one clip and the start of the next.
pub const PAUSE_SECS: u32 = 10;
/// Idle time between consecutive lessons.
pub const LESSON_GAP_SECS: i64 = 60;
/// Time between consecutive test attempts.
pub const ATTEMPT_GAP_SECS: i64 = 300;

pub const SCENARIO_FILE: &str = "scenario.json";
pub const CLIPS_DIR: &str = "clips";

/// Fraction of each clip's frames with no face or with several faces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PresenceScript {
    pub no_face: f64,
    pub multiple_faces: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FocusScript {
    /// Centre of the head pose while attending.
    pub yaw: f64,
    pub pitch: f64,
    /// Half-width of the uniform pose noise, degrees.
    pub jitter_deg: f64,
    /// Fraction of single-face frames spent looking away.
    pub away_fraction: f64,
    pub away_yaw: f64,
    pub away_pitch: f64,
}

impl Default for FocusScript {
    fn default() -> Self {
        Self {
            yaw: 0.0,
            pitch: -5.0,
            jitter_deg: 6.0,
            away_fraction: 0.0,
            away_yaw: 40.0,
            away_pitch: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    /// Position in the lesson, 0 = start, 1 = end.
    pub at: f64,
    pub valence: f64,
    pub arousal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectTrajectory {
    pub keyframes: Vec<Keyframe>,
    /// Half-width of the per-frame uniform noise on both axes.
    #[serde(default)]
    pub jitter: f64,
}

impl AffectTrajectory {
    pub fn constant(valence: f64, arousal: f64, jitter: f64) -> Self {
        Self {
            keyframes: vec![Keyframe {
                at: 0.0,
                valence,
                arousal,
            }],
            jitter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.keyframes.is_empty() {
            return Err(Error::validation(
                "affect trajectory needs at least one keyframe",
            ));
        }
        let mut prev = f64::NEG_INFINITY;
        for k in &self.keyframes {
            if !(0.0..=1.0).contains(&k.at) || k.at < prev {
                return Err(Error::validation(
                    "keyframe positions must be sorted and lie in [0, 1]",
                ));
            }
            prev = k.at;
            for v in [k.valence, k.arousal] {
                if !(v.is_finite() && v.abs() <= AFFECT_LIMIT) {
                    return Err(Error::validation(format!(
                        "keyframe value {v} is outside [-10, 10]"
                    )));
                }
            }
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::validation("affect jitter must be non-negative"));
        }
        Ok(())
    }

    /// Piecewise-linear interpolation, held flat outside the keyframes.
    pub fn at(&self, t: f64) -> AffectPoint {
        let ks = &self.keyframes;
        let first = ks[0];
        if t <= first.at {
            return AffectPoint::new(first.valence, first.arousal);
        }
        for w in ks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if t <= b.at {
                let span = b.at - a.at;
                let f = if span > 0.0 { (t - a.at) / span } else { 1.0 };
                return AffectPoint::new(
                    a.valence + f * (b.valence - a.valence),
                    a.arousal + f * (b.arousal - a.arousal),
                );
            }
        }
        let last = ks[ks.len() - 1];
        AffectPoint::new(last.valence, last.arousal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerProfile {
    pub style: CognitiveStyle,
    #[serde(default)]
    pub presence: PresenceScript,
    #[serde(default)]
    pub focus: FocusScript,
    pub affect: AffectTrajectory,
    pub seed: u64,
}

impl LearnerProfile {
    fn preset(style: CognitiveStyle, seed: u64, valence: f64, arousal: f64) -> Self {
        Self {
            style,
            presence: PresenceScript::default(),
            focus: FocusScript::default(),
            affect: AffectTrajectory::constant(valence, arousal, 1.0),
            seed,
        }
    }

    /// Present, attentive and positively activated.
    pub fn engaged(style: CognitiveStyle, seed: u64) -> Self {
        Self::preset(style, seed, 5.0, 5.0)
    }

    /// Looks away in 45% of the frames.
    pub fn distracted(style: CognitiveStyle, seed: u64) -> Self {
        let mut p = Self::preset(style, seed, 2.0, 2.0);
        p.focus.away_fraction = 0.45;
        p.focus.away_yaw = 40.0;
        p.focus.jitter_deg = 0.0;
        p
    }

    /// Unpleasant but activated: the confusion quadrant.
    pub fn confused(style: CognitiveStyle, seed: u64) -> Self {
        Self::preset(style, seed, -4.0, 3.0)
    }

    pub fn tired(style: CognitiveStyle, seed: u64) -> Self {
        Self::preset(style, seed, 0.0, -7.0)
    }

    pub fn absent(style: CognitiveStyle, seed: u64) -> Self {
        let mut p = Self::preset(style, seed, 0.0, 0.0);
        p.presence.no_face = 0.6;
        p
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "{name} must lie in [0, 1], got {v}"
                )))
            }
        };
        unit("presence.no_face", self.presence.no_face)?;
        unit("presence.multiple_faces", self.presence.multiple_faces)?;
        unit("focus.away_fraction", self.focus.away_fraction)?;
        if self.presence.no_face + self.presence.multiple_faces > 1.0 {
            return Err(Error::validation("presence fractions sum to more than 1"));
        }
        let f = &self.focus;
        let angles = [f.yaw, f.pitch, f.away_yaw, f.away_pitch];
        if angles.iter().any(|a| !a.is_finite() || a.abs() > 180.0)
            || !(f.jitter_deg.is_finite() && f.jitter_deg >= 0.0)
        {
            return Err(Error::validation("focus angles must lie in [-180, 180]"));
        }
        self.affect.validate()
    }
}

/// When and for how long one lesson is watched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LessonPlan {
    pub lesson_id: String,
    pub duration_secs: u32,
    pub starts_at: DateTime<Utc>,
}

#[derive(Clone, Copy)]
enum Slot {
    NoFace,
    MultipleFaces,
    Away,
    Attending,
}

/// FNV-1a, used to derive per-clip seeds independent of platform hashers.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn uniform(rng: &mut ChaCha8Rng, center: f64, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.random_range(center - half_width..=center + half_width)
    } else {
        center
    }
}

fn face(rng: &mut ChaCha8Rng, confidence: f64) -> FaceDetection {
    let x = round3(rng.random_range(0.25..0.35));
    let y = round3(rng.random_range(0.15..0.25));
    FaceDetection {
        bbox: FaceBox {
            x,
            y,
            w: 0.3,
            h: 0.4,
        },
        confidence: round3(confidence),
    }
}

/// Clips for one lesson on the record/pause cadence at 15 fps.
///
/// Clip `k` starts `k * (RECORD_SECS + PAUSE_SECS)` seconds into the lesson;
/// a final clip cut short by the end of the lesson keeps its shorter length.
pub fn generate_synthetic(
    learner_id: &str,
    profile: &LearnerProfile,
    plan: &LessonPlan,
) -> Result<Vec<ClipObservation>> {
    profile.validate()?;
    let duration = plan.duration_secs.max(RECORD_SECS);
    let cadence = RECORD_SECS + PAUSE_SECS;
    let mut clips = Vec::new();
    let mut offset = 0u32;
    let mut k = 0u64;
    while offset < duration {
        let secs = RECORD_SECS.min(duration - offset);
        let n = (f64::from(secs) * NOMINAL_FPS).round() as usize;
        let seed = profile.seed
            ^ fnv1a(learner_id.as_bytes()).rotate_left(17)
            ^ fnv1a(plan.lesson_id.as_bytes())
            ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let n_nf = ((profile.presence.no_face * n as f64).round() as usize).min(n);
        let n_mf = ((profile.presence.multiple_faces * n as f64).round() as usize).min(n - n_nf);
        let single = n - n_nf - n_mf;
        let n_away = ((profile.focus.away_fraction * single as f64).round() as usize).min(single);
        let mut slots = Vec::with_capacity(n);
        slots.extend(std::iter::repeat_n(Slot::NoFace, n_nf));
        slots.extend(std::iter::repeat_n(Slot::MultipleFaces, n_mf));
        slots.extend(std::iter::repeat_n(Slot::Away, n_away));
        slots.extend(std::iter::repeat_n(Slot::Attending, single - n_away));
        slots.shuffle(&mut rng);

        let f = &profile.focus;
        let frames = slots
            .into_iter()
            .enumerate()
            .map(|(i, slot)| {
                let frame_index = i as u64;
                match slot {
                    Slot::NoFace => {
                        let faces = if rng.random_bool(0.5) {
                            let c = rng.random_range(0.3..0.69);
                            vec![face(&mut rng, c)]
                        } else {
                            Vec::new()
                        };
                        FramePrediction {
                            frame_index,
                            faces,
                            pose: None,
                            affect: None,
                        }
                    }
                    Slot::MultipleFaces => {
                        let (c1, c2) = (rng.random_range(0.8..0.99), rng.random_range(0.75..0.99));
                        let faces = vec![face(&mut rng, c1), face(&mut rng, c2)];
                        FramePrediction {
                            frame_index,
                            faces,
                            pose: None,
                            affect: None,
                        }
                    }
                    Slot::Away | Slot::Attending => {
                        let (cy, cp) = match slot {
                            Slot::Away => (f.away_yaw, f.away_pitch),
                            _ => (f.yaw, f.pitch),
                        };
                        let c = rng.random_range(0.75..0.99);
                        let faces = vec![face(&mut rng, c)];
                        let yaw = uniform(&mut rng, cy, f.jitter_deg).clamp(-180.0, 180.0);
                        let pitch = uniform(&mut rng, cp, f.jitter_deg).clamp(-180.0, 180.0);
                        let roll = uniform(&mut rng, 0.0, 5.0);
                        let t = (f64::from(offset) + i as f64 / NOMINAL_FPS) / f64::from(duration);
                        let base = profile.affect.at(t);
                        let j = profile.affect.jitter;
                        let affect = AffectPoint::new(
                            round3(uniform(&mut rng, base.valence, j)),
                            round3(uniform(&mut rng, base.arousal, j)),
                        )
                        .clamped();
                        FramePrediction {
                            frame_index,
                            faces,
                            pose: Some(HeadPose::new(round3(yaw), round3(pitch), round3(roll))),
                            affect: Some(affect),
                        }
                    }
                }
            })
            .collect();

        clips.push(ClipObservation {
            clip_id: format!("{learner_id}-{}-{k:03}", plan.lesson_id),
            learner_id: learner_id.to_owned(),
            lesson_id: plan.lesson_id.clone(),
            recorded_at: plan.starts_at + Duration::seconds(i64::from(offset)),
            fps: NOMINAL_FPS,
            frames,
        });
        offset += cadence;
        k += 1;
    }
    Ok(clips)
}

/// Per-lesson replacements for parts of a learner's profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LessonOverride {
    pub presence: Option<PresenceScript>,
    pub focus: Option<FocusScript>,
    pub affect: Option<AffectTrajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerScript {
    pub learner_id: String,
    /// Label used to group learners in the metrics table; defaults to the style.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub profile: LearnerProfile,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lessons: BTreeMap<String, LessonOverride>,
    /// Answer sheets per session, submitted in order.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tests: BTreeMap<String, Vec<Vec<usize>>>,
}

impl LearnerScript {
    pub fn new(learner_id: &str, profile: LearnerProfile) -> Self {
        Self {
            learner_id: learner_id.to_owned(),
            group: None,
            profile,
            lessons: BTreeMap::new(),
            tests: BTreeMap::new(),
        }
    }

    pub fn group_label(&self) -> String {
        self.group
            .clone()
            .unwrap_or_else(|| self.profile.style.to_string())
    }

    pub fn profile_for(&self, lesson_id: &str) -> LearnerProfile {
        let mut p = self.profile.clone();
        if let Some(o) = self.lessons.get(lesson_id) {
            if let Some(x) = o.presence {
                p.presence = x;
            }
            if let Some(x) = o.focus {
                p.focus = x;
            }
            if let Some(x) = &o.affect {
                p.affect = x.clone();
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub course_id: String,
    /// Simulated wall-clock start; every learner begins here.
    pub start: DateTime<Utc>,
    pub learners: Vec<LearnerScript>,
}

fn default_start() -> DateTime<Utc> {
    DateTime::from_timestamp(1_704_096_000, 0).expect("valid timestamp") // 2024-01-01T08:00:00Z
}

impl Scenario {
    pub fn new(course_id: &str) -> Self {
        Self {
            course_id: course_id.to_owned(),
            start: default_start(),
            learners: Vec::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self, course: &CourseModel) -> Result<()> {
        if self.course_id != course.id {
            return Err(Error::validation(format!(
                "scenario targets course {} but the fixture is {}",
                self.course_id, course.id
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &self.learners {
            if l.learner_id.is_empty() || !seen.insert(l.learner_id.as_str()) {
                return Err(Error::validation(format!(
                    "learner id {:?} is empty or duplicated",
                    l.learner_id
                )));
            }
            l.profile
                .validate()
                .map_err(|e| Error::validation(format!("{}: {e}", l.learner_id)))?;
            for lesson_id in l.lessons.keys() {
                match course.locate_lesson(lesson_id) {
                    Some(loc) if loc.style == l.profile.style => {}
                    _ => {
                        return Err(Error::validation(format!(
                            "{}: override for lesson {lesson_id} outside the {} group",
                            l.learner_id, l.profile.style
                        )))
                    }
                }
                l.profile_for(lesson_id).validate()?;
            }
            for session_id in l.tests.keys() {
                if course.session_index(session_id).is_none() {
                    return Err(Error::validation(format!(
                        "{}: test answers for unknown session {session_id}",
                        l.learner_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// A small mixed cohort on the given course: one engaged, one distracted,
    /// one confused and one tired learner, two of whom fail a first test.
    pub fn demo(course: &CourseModel, seed: u64) -> Self {
        use CognitiveStyle::*;
        let key = |session: usize, style: CognitiveStyle| {
            course.sessions[session].content(style).test.answer_key()
        };
        let with_wrong = |mut answers: Vec<usize>, n: usize| {
            for a in answers.iter_mut().take(n) {
                *a = (*a + 1) % 4;
            }
            answers
        };
        let all_sessions = |style: CognitiveStyle| -> BTreeMap<String, Vec<Vec<usize>>> {
            (0..course.sessions.len())
                .map(|i| (course.sessions[i].id.clone(), vec![key(i, style)]))
                .collect()
        };

        let mut ana = LearnerScript::new("ana", LearnerProfile::engaged(Wholistic, seed));
        ana.tests = all_sessions(Wholistic);

        let mut ben = LearnerScript::new("ben", LearnerProfile::distracted(Analytical, seed + 1));
        ben.tests = all_sessions(Analytical);
        ben.tests.insert(
            course.sessions[0].id.clone(),
            vec![with_wrong(key(0, Analytical), 2), key(0, Analytical)],
        );

        let mut cara = LearnerScript::new("cara", LearnerProfile::engaged(Wholistic, seed + 2));
        let confusing = &course.sessions[0].content(Wholistic).lessons[1].id;
        cara.lessons.insert(
            confusing.clone(),
            LessonOverride {
                affect: Some(AffectTrajectory::constant(-4.0, 3.0, 1.0)),
                ..Default::default()
            },
        );
        cara.tests = all_sessions(Wholistic);
        cara.tests.insert(
            course.sessions[0].id.clone(),
            vec![with_wrong(key(0, Wholistic), 2), key(0, Wholistic)],
        );

        let mut dev = LearnerScript::new("dev", LearnerProfile::tired(Middle, seed + 3));
        dev.tests
            .insert(course.sessions[0].id.clone(), vec![key(0, Middle)]);

        let mut s = Scenario::new(&course.id);
        s.learners = vec![ana, ben, cara, dev];
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub learners: usize,
    pub lessons: usize,
    pub clips: usize,
}

/// Lessons the learner will watch with their start times, stopping after the
/// first session their scripted answers never pass.
pub fn plan_lessons(
    script: &LearnerScript,
    course: &CourseModel,
    start: DateTime<Utc>,
) -> Result<Vec<LessonPlan>> {
    let style = script.profile.style;
    let mut cursor = start;
    let mut plans = Vec::new();
    for session in &course.sessions {
        let content = session.content(style);
        for lesson in &content.lessons {
            plans.push(LessonPlan {
                lesson_id: lesson.id.clone(),
                duration_secs: lesson.duration_secs,
                starts_at: cursor,
            });
            cursor += Duration::seconds(
                i64::from(lesson.duration_secs.max(RECORD_SECS)) + LESSON_GAP_SECS,
            );
        }
        let sheets = script
            .tests
            .get(&session.id)
            .map(Vec::as_slice)
            .unwrap_or_default();
        let mut passed = false;
        for sheet in sheets {
            cursor += Duration::seconds(ATTEMPT_GAP_SECS);
            passed |= grade_test(sheet, &content.test)
                .map_err(|e| Error::validation(format!("{}: {e}", script.learner_id)))?
                .passed;
        }
        if !passed {
            break;
        }
    }
    Ok(plans)
}

/// Writes `scenario.json` plus one `.jsonl` stream per clip under `out_dir`.
pub fn generate_streams(
    scenario: &Scenario,
    course: &CourseModel,
    out_dir: &Path,
) -> Result<GenerateSummary> {
    scenario.validate(course)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join(SCENARIO_FILE),
        serde_json::to_string_pretty(scenario)? + "\n",
    )?;
    let mut summary = GenerateSummary {
        learners: scenario.learners.len(),
        ..Default::default()
    };
    for script in &scenario.learners {
        for plan in plan_lessons(script, course, scenario.start)? {
            let clips = generate_synthetic(
                &script.learner_id,
                &script.profile_for(&plan.lesson_id),
                &plan,
            )?;
            summary.lessons += 1;
            for clip in &clips {
                let path = out_dir
                    .join(CLIPS_DIR)
                    .join(&script.learner_id)
                    .join(&plan.lesson_id)
                    .join(format!("{}.jsonl", clip.clip_id));
                write_clip_file(clip, path)?;
                summary.clips += 1;
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clip::{analyze_clip, ClipState};
    use crate::config::ThresholdConfig;

    fn plan(duration_secs: u32) -> LessonPlan {
        LessonPlan {
            lesson_id: "s1-w1".into(),
            duration_secs,
            starts_at: default_start(),
        }
    }

    fn states(profile: &LearnerProfile) -> Vec<ClipState> {
        let cfg = ThresholdConfig::default();
        generate_synthetic("x", profile, &plan(300))
            .unwrap()
            .iter()
            .map(|c| analyze_clip(c, &cfg).unwrap().state)
            .collect()
    }

    #[test]
    fn cadence_and_frame_counts() {
        let clips = generate_synthetic(
            "x",
            &LearnerProfile::engaged(CognitiveStyle::Wholistic, 1),
            &plan(95),
        )
        .unwrap();
        // starts at 0, 20, 40, 60, 80; the last one is cut to 10 s anyway
        assert_eq!(clips.len(), 5);
        assert!(clips.iter().all(|c| c.frames.len() == 150));
        let short = generate_synthetic(
            "x",
            &LearnerProfile::engaged(CognitiveStyle::Wholistic, 1),
            &plan(85),
        )
        .unwrap();
        assert_eq!(short.last().unwrap().frames.len(), 75);
        assert_eq!(
            (clips[1].recorded_at - clips[0].recorded_at).num_seconds(),
            20
        );
    }

    #[test]
    fn presets_reach_their_states() {
        use CognitiveStyle::Wholistic as W;
        assert!(states(&LearnerProfile::engaged(W, 7))
            .iter()
            .all(|&s| s == ClipState::Engaged));
        assert!(states(&LearnerProfile::distracted(W, 7))
            .iter()
            .all(|&s| s == ClipState::Unfocused));
        assert!(states(&LearnerProfile::confused(W, 7))
            .iter()
            .all(|&s| s == ClipState::Confused));
        assert!(states(&LearnerProfile::tired(W, 7))
            .iter()
            .all(|&s| s == ClipState::Tired));
        assert!(states(&LearnerProfile::absent(W, 7))
            .iter()
            .all(|&s| s == ClipState::NoFace));
    }

    #[test]
    fn same_seed_same_stream() {
        let p = LearnerProfile::confused(CognitiveStyle::Middle, 42);
        let a = serde_json::to_string(&generate_synthetic("x", &p, &plan(120)).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_synthetic("x", &p, &plan(120)).unwrap()).unwrap();
        assert_eq!(a, b);
        let mut q = p.clone();
        q.seed = 43;
        let c = serde_json::to_string(&generate_synthetic("x", &q, &plan(120)).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn trajectory_interpolates() {
        let t = AffectTrajectory {
            keyframes: vec![
                Keyframe {
                    at: 0.0,
                    valence: 0.0,
                    arousal: 0.0,
                },
                Keyframe {
                    at: 0.5,
                    valence: 4.0,
                    arousal: -2.0,
                },
            ],
            jitter: 0.0,
        };
        assert_eq!(t.at(0.25), AffectPoint::new(2.0, -1.0));
        assert_eq!(t.at(0.9), AffectPoint::new(4.0, -2.0));
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        let mut p = LearnerProfile::engaged(CognitiveStyle::Wholistic, 1);
        p.presence.no_face = 1.2;
        assert!(generate_synthetic("x", &p, &plan(60)).is_err());
        let mut p = LearnerProfile::engaged(CognitiveStyle::Wholistic, 1);
        p.affect = AffectTrajectory::constant(11.0, 0.0, 0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn demo_scenario_is_valid() {
        let course = CourseModel::canonical();
        Scenario::demo(&course, 1).validate(&course).unwrap();
    }

    #[test]
    fn planning_stops_at_first_unpassed_session() {
        let course = CourseModel::canonical();
        let s = Scenario::demo(&course, 1);
        let dev = s.learners.iter().find(|l| l.learner_id == "dev").unwrap();
        let plans = plan_lessons(dev, &course, s.start).unwrap();
        let middle = |i: usize| {
            course.sessions[i]
                .content(CognitiveStyle::Middle)
                .lessons
                .len()
        };
        assert_eq!(plans.len(), middle(0) + middle(1));
        let mut quiet = dev.clone();
        quiet.tests.clear();
        assert_eq!(
            plan_lessons(&quiet, &course, s.start).unwrap().len(),
            middle(0)
        );
    }
}
