//! Lesson-level aggregation of clip states.
//!
//! The 21 lesson states are checked in a fixed priority order. An entry
//! matches when every clip state it names was observed in strictly more
//! clips than that state's aggregator threshold; `Neutral` always matches.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clip::ClipState;
use crate::config::{AggregatorKey, ThresholdConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LessonState {
    NoFacePlusMultipleFaces,
    MultipleFaces,
    NumerousNoFaces,
    TiredUnfocused,
    TiredConfused,
    UnfocusedConfused,
    EngagedTired,
    EngagedConfused,
    DisengagedConfused,
    TiredNoFace,
    TiredDisengaged,
    EngagedNoFace,
    DisengagedNoFace,
    EngagedUnfocused,
    NoFace,
    Unfocused,
    Tired,
    Engaged,
    Confused,
    Disengaged,
    Neutral,
}

/// One constituent of a lesson state: `counts[state] > thresholds[key]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Condition {
    pub state: ClipState,
    pub key: AggregatorKey,
}

const fn cond(state: ClipState, key: AggregatorKey) -> Condition {
    Condition { state, key }
}

const NO_FACE: Condition = cond(ClipState::NoFace, AggregatorKey::NoFace);
const MULTI: Condition = cond(ClipState::MultipleFaces, AggregatorKey::MultipleFaces);
const NUMEROUS: Condition = cond(ClipState::NoFace, AggregatorKey::NumerousNoFaces);
const UNFOCUSED: Condition = cond(ClipState::Unfocused, AggregatorKey::Unfocused);
const ENGAGED: Condition = cond(ClipState::Engaged, AggregatorKey::Engaged);
const TIRED: Condition = cond(ClipState::Tired, AggregatorKey::Tired);
const CONFUSED: Condition = cond(ClipState::Confused, AggregatorKey::Confused);
const DISENGAGED: Condition = cond(ClipState::Disengaged, AggregatorKey::Disengaged);

impl LessonState {
    /// All states in priority order, highest first.
    pub const PRIORITY: [LessonState; 21] = [
        LessonState::NoFacePlusMultipleFaces,
        LessonState::MultipleFaces,
        LessonState::NumerousNoFaces,
        LessonState::TiredUnfocused,
        LessonState::TiredConfused,
        LessonState::UnfocusedConfused,
        LessonState::EngagedTired,
        LessonState::EngagedConfused,
        LessonState::DisengagedConfused,
        LessonState::TiredNoFace,
        LessonState::TiredDisengaged,
        LessonState::EngagedNoFace,
        LessonState::DisengagedNoFace,
        LessonState::EngagedUnfocused,
        LessonState::NoFace,
        LessonState::Unfocused,
        LessonState::Tired,
        LessonState::Engaged,
        LessonState::Confused,
        LessonState::Disengaged,
        LessonState::Neutral,
    ];

    pub fn priority(self) -> usize {
        self as usize
    }

    pub fn conditions(self) -> &'static [Condition] {
        use LessonState::*;
        match self {
            NoFacePlusMultipleFaces => &[NO_FACE, MULTI],
            MultipleFaces => &[MULTI],
            NumerousNoFaces => &[NUMEROUS],
            TiredUnfocused => &[TIRED, UNFOCUSED],
            TiredConfused => &[TIRED, CONFUSED],
            UnfocusedConfused => &[UNFOCUSED, CONFUSED],
            EngagedTired => &[ENGAGED, TIRED],
            EngagedConfused => &[ENGAGED, CONFUSED],
            DisengagedConfused => &[DISENGAGED, CONFUSED],
            TiredNoFace => &[TIRED, NO_FACE],
            TiredDisengaged => &[TIRED, DISENGAGED],
            EngagedNoFace => &[ENGAGED, NO_FACE],
            DisengagedNoFace => &[DISENGAGED, NO_FACE],
            EngagedUnfocused => &[ENGAGED, UNFOCUSED],
            NoFace => &[NO_FACE],
            Unfocused => &[UNFOCUSED],
            Tired => &[TIRED],
            Engaged => &[ENGAGED],
            Confused => &[CONFUSED],
            Disengaged => &[DISENGAGED],
            Neutral => &[],
        }
    }

    /// States whose feedback may point at supplementary content.
    pub fn involves_confusion(self) -> bool {
        matches!(
            self,
            LessonState::UnfocusedConfused
                | LessonState::EngagedConfused
                | LessonState::DisengagedConfused
                | LessonState::Confused
        )
    }

    pub fn name(self) -> &'static str {
        use LessonState::*;
        match self {
            NoFacePlusMultipleFaces => "NoFacePlusMultipleFaces",
            MultipleFaces => "MultipleFaces",
            NumerousNoFaces => "NumerousNoFaces",
            TiredUnfocused => "TiredUnfocused",
            TiredConfused => "TiredConfused",
            UnfocusedConfused => "UnfocusedConfused",
            EngagedTired => "EngagedTired",
            EngagedConfused => "EngagedConfused",
            DisengagedConfused => "DisengagedConfused",
            TiredNoFace => "TiredNoFace",
            TiredDisengaged => "TiredDisengaged",
            EngagedNoFace => "EngagedNoFace",
            DisengagedNoFace => "DisengagedNoFace",
            EngagedUnfocused => "EngagedUnfocused",
            NoFace => "NoFace",
            Unfocused => "Unfocused",
            Tired => "Tired",
            Engaged => "Engaged",
            Confused => "Confused",
            Disengaged => "Disengaged",
            Neutral => "Neutral",
        }
    }
}

impl fmt::Display for LessonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Number of clips observed in each clip state. Serialized as a map that
/// omits zero entries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "BTreeMap<ClipState, u32>", into = "BTreeMap<ClipState, u32>")]
pub struct StateCounts([u32; 8]);

impl StateCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_array(counts: [u32; 8]) -> Self {
        Self(counts)
    }

    pub fn as_array(&self) -> [u32; 8] {
        self.0
    }

    pub fn get(&self, state: ClipState) -> u32 {
        self.0[state.index()]
    }

    pub fn set(&mut self, state: ClipState, n: u32) {
        self.0[state.index()] = n;
    }

    pub fn add(&mut self, state: ClipState) {
        self.0[state.index()] += 1;
    }

    pub fn with(mut self, state: ClipState, n: u32) -> Self {
        self.set(state, n);
        self
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// True when every entry of `self` is at least the matching entry of `other`.
    pub fn dominates(&self, other: &StateCounts) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a >= b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClipState, u32)> + '_ {
        ClipState::ALL.iter().map(move |&s| (s, self.get(s)))
    }
}

impl FromIterator<ClipState> for StateCounts {
    fn from_iter<I: IntoIterator<Item = ClipState>>(iter: I) -> Self {
        let mut counts = StateCounts::new();
        for s in iter {
            counts.add(s);
        }
        counts
    }
}

impl From<BTreeMap<ClipState, u32>> for StateCounts {
    fn from(map: BTreeMap<ClipState, u32>) -> Self {
        let mut counts = StateCounts::new();
        for (s, n) in map {
            counts.set(s, n);
        }
        counts
    }
}

impl From<StateCounts> for BTreeMap<ClipState, u32> {
    fn from(c: StateCounts) -> Self {
        c.iter().filter(|&(_, n)| n > 0).collect()
    }
}

pub fn condition_holds(c: &Condition, counts: &StateCounts, cfg: &ThresholdConfig) -> bool {
    counts.get(c.state) > cfg.aggregator_counts.get(c.key)
}

/// First lesson state, in priority order, whose conditions all hold.
pub fn aggregate(counts: &StateCounts, cfg: &ThresholdConfig) -> LessonState {
    LessonState::PRIORITY
        .into_iter()
        .find(|s| {
            s.conditions()
                .iter()
                .all(|c| condition_holds(c, counts, cfg))
        })
        .unwrap_or(LessonState::Neutral)
}
