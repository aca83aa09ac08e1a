//! Independent re-statements of the classification and aggregation rules,
//! used to cross-check the main implementations.
//!
//! The aggregator oracle evaluates every lesson-state predicate longhand over
//! named counts and only then takes the first true one. The affect oracle
//! describes the plane as disjoint regions rather than ordered rules, so a
//! point that falls into two regions is reported as an overlap.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affect::{classify_emotion, AffectPoint, EmotionalState};
use crate::aggregator::{aggregate, LessonState, StateCounts};
use crate::clip::ClipState;
use crate::config::ThresholdConfig;
use crate::error::{Error, Result};

/// Largest per-state count drawn for random trials.
pub const MAX_TRIAL_COUNT: u32 = 6;
/// Grid points per axis: -10.0 to 10.0 in steps of 0.1.
pub const GRID_STEPS: i32 = 201;

struct Named {
    no_face: u32,
    multiple_faces: u32,
    unfocused: u32,
    engaged: u32,
    tired: u32,
    confused: u32,
    disengaged: u32,
}

/// All 21 predicates evaluated independently, then the first true one.
pub fn oracle_aggregate(counts: &StateCounts, cfg: &ThresholdConfig) -> LessonState {
    use LessonState as L;
    let c = Named {
        no_face: counts.get(ClipState::NoFace),
        multiple_faces: counts.get(ClipState::MultipleFaces),
        unfocused: counts.get(ClipState::Unfocused),
        engaged: counts.get(ClipState::Engaged),
        tired: counts.get(ClipState::Tired),
        confused: counts.get(ClipState::Confused),
        disengaged: counts.get(ClipState::Disengaged),
    };
    let t = &cfg.aggregator_counts;
    let nf = c.no_face > t.no_face;
    let many_nf = c.no_face > t.numerous_no_faces;
    let mf = c.multiple_faces > t.multiple_faces;
    let uf = c.unfocused > t.unfocused;
    let en = c.engaged > t.engaged;
    let ti = c.tired > t.tired;
    let co = c.confused > t.confused;
    let di = c.disengaged > t.disengaged;

    let table: [(bool, LessonState); 21] = [
        (nf && mf, L::NoFacePlusMultipleFaces),
        (mf, L::MultipleFaces),
        (many_nf, L::NumerousNoFaces),
        (ti && uf, L::TiredUnfocused),
        (ti && co, L::TiredConfused),
        (uf && co, L::UnfocusedConfused),
        (en && ti, L::EngagedTired),
        (en && co, L::EngagedConfused),
        (di && co, L::DisengagedConfused),
        (ti && nf, L::TiredNoFace),
        (ti && di, L::TiredDisengaged),
        (en && nf, L::EngagedNoFace),
        (di && nf, L::DisengagedNoFace),
        (en && uf, L::EngagedUnfocused),
        (nf, L::NoFace),
        (uf, L::Unfocused),
        (ti, L::Tired),
        (en, L::Engaged),
        (co, L::Confused),
        (di, L::Disengaged),
        (true, L::Neutral),
    ];
    table
        .iter()
        .find(|(hit, _)| *hit)
        .map(|&(_, s)| s)
        .expect("neutral always holds")
}

/// Region memberships of a point after scaling and clamping.
pub fn affect_regions(point: AffectPoint, cfg: &ThresholdConfig) -> Vec<EmotionalState> {
    let m = cfg.emotion_multiplier;
    let v = (point.valence * m).clamp(-10.0, 10.0);
    let a = (point.arousal * m).clamp(-10.0, 10.0);
    let mut hits = Vec::new();
    if a <= cfg.alpha6 {
        hits.push(EmotionalState::Tired);
    }
    let upper_right = v >= cfg.alpha2 && a >= cfg.alpha3;
    let very_high = v > cfg.alpha4 && a >= cfg.alpha5;
    if a > cfg.alpha6 && (upper_right || very_high) {
        hits.push(EmotionalState::Engaged);
    }
    if v <= cfg.alpha4 && a >= cfg.alpha3 && a > cfg.alpha6 {
        hits.push(EmotionalState::Confused);
    }
    if v <= cfg.alpha4 && a > cfg.alpha6 && a <= cfg.alpha1 {
        hits.push(EmotionalState::Disengaged);
    }
    if hits.is_empty() {
        hits.push(EmotionalState::Neutral);
    }
    hits
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatorMismatch {
    pub counts: StateCounts,
    pub implementation: LessonState,
    pub oracle: LessonState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub lower: StateCounts,
    pub upper: StateCounts,
    pub lower_state: LessonState,
    pub upper_state: LessonState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFinding {
    pub valence: f64,
    pub arousal: f64,
    pub implementation: EmotionalState,
    pub regions: Vec<EmotionalState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub name: String,
    pub implementation: String,
    pub oracle: String,
    /// Fixed expectation, only checked under the default configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub aggregator_trials: usize,
    pub aggregator_mismatches: usize,
    pub first_aggregator_mismatch: Option<AggregatorMismatch>,
    pub monotonicity_pairs: usize,
    pub monotonicity_violations: usize,
    pub first_monotonicity_violation: Option<MonotonicityViolation>,
    pub grid_points: usize,
    pub grid_findings: usize,
    pub first_grid_finding: Option<GridFinding>,
    pub probes: Vec<Probe>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.aggregator_mismatches == 0
            && self.monotonicity_violations == 0
            && self.grid_findings == 0
            && self.probes.iter().all(|p| p.ok)
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "aggregator  {:>6} trials, {} mismatches  {}",
            self.aggregator_trials,
            self.aggregator_mismatches,
            verdict(self.aggregator_mismatches == 0)
        );
        if let Some(m) = &self.first_aggregator_mismatch {
            let _ = writeln!(
                out,
                "  first: {} -> implementation {}, oracle {}",
                serde_json::to_string(&m.counts).unwrap_or_default(),
                m.implementation,
                m.oracle
            );
        }
        let _ = writeln!(
            out,
            "monotonic   {:>6} pairs, {} violations  {}",
            self.monotonicity_pairs,
            self.monotonicity_violations,
            verdict(self.monotonicity_violations == 0)
        );
        if let Some(m) = &self.first_monotonicity_violation {
            let _ = writeln!(
                out,
                "  first: {} ({}) <= {} ({})",
                serde_json::to_string(&m.lower).unwrap_or_default(),
                m.lower_state,
                serde_json::to_string(&m.upper).unwrap_or_default(),
                m.upper_state
            );
        }
        let _ = writeln!(
            out,
            "affect grid {:>6} points, {} findings  {}",
            self.grid_points,
            self.grid_findings,
            verdict(self.grid_findings == 0)
        );
        if let Some(g) = &self.first_grid_finding {
            let _ = writeln!(
                out,
                "  first: ({}, {}) -> implementation {}, regions {:?}",
                g.valence, g.arousal, g.implementation, g.regions
            );
        }
        for p in &self.probes {
            let _ = writeln!(
                out,
                "probe {:<34} {:<24} {}",
                p.name,
                p.implementation,
                verdict(p.ok)
            );
        }
        let _ = write!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        f.write_str(&out)
    }
}

fn random_counts(rng: &mut ChaCha8Rng) -> StateCounts {
    let mut arr = [0u32; 8];
    for c in &mut arr {
        *c = rng.random_range(0..=MAX_TRIAL_COUNT);
    }
    StateCounts::from_array(arr)
}

fn counts_of(pairs: &[(ClipState, u32)]) -> StateCounts {
    let mut c = StateCounts::new();
    for &(s, n) in pairs {
        c.set(s, n);
    }
    c
}

/// Cross-checks the aggregator and classifier against the oracles.
///
/// Runs `trials` random count vectors, `ceil(trials / 10)` pointwise
/// increasing pairs, the full affect grid and a fixed list of probes.
pub fn verify_against_oracle(
    trials: usize,
    seed: u64,
    cfg: &ThresholdConfig,
) -> Result<VerifySummary> {
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = VerifySummary {
        seed,
        aggregator_trials: trials,
        aggregator_mismatches: 0,
        first_aggregator_mismatch: None,
        monotonicity_pairs: trials.div_ceil(10),
        monotonicity_violations: 0,
        first_monotonicity_violation: None,
        grid_points: 0,
        grid_findings: 0,
        first_grid_finding: None,
        probes: Vec::new(),
    };

    for _ in 0..trials {
        let counts = random_counts(&mut rng);
        let (got, want) = (aggregate(&counts, cfg), oracle_aggregate(&counts, cfg));
        if got != want {
            summary.aggregator_mismatches += 1;
            summary
                .first_aggregator_mismatch
                .get_or_insert(AggregatorMismatch {
                    counts,
                    implementation: got,
                    oracle: want,
                });
        }
    }

    for _ in 0..summary.monotonicity_pairs {
        let lower = random_counts(&mut rng);
        let mut upper = lower;
        for s in ClipState::ALL {
            upper.set(s, upper.get(s) + rng.random_range(0..=3));
        }
        let (ls, us) = (aggregate(&lower, cfg), aggregate(&upper, cfg));
        if us.priority() > ls.priority() {
            summary.monotonicity_violations += 1;
            summary
                .first_monotonicity_violation
                .get_or_insert(MonotonicityViolation {
                    lower,
                    upper,
                    lower_state: ls,
                    upper_state: us,
                });
        }
    }

    let half = GRID_STEPS / 2;
    for i in -half..=half {
        for j in -half..=half {
            let point = AffectPoint::new(f64::from(i) / 10.0, f64::from(j) / 10.0);
            summary.grid_points += 1;
            let got = classify_emotion(point, cfg)?;
            let regions = affect_regions(point, cfg);
            if regions.len() != 1 || regions[0] != got {
                summary.grid_findings += 1;
                summary.first_grid_finding.get_or_insert(GridFinding {
                    valence: point.valence,
                    arousal: point.arousal,
                    implementation: got,
                    regions,
                });
            }
        }
    }

    let fixed = *cfg == ThresholdConfig::default();
    use ClipState as C;
    let lesson_probes: [(&[(ClipState, u32)], LessonState); 7] = [
        (&[(C::Disengaged, 1)], LessonState::Disengaged),
        (
            &[(C::Tired, 3), (C::Confused, 3)],
            LessonState::TiredConfused,
        ),
        (&[(C::NoFace, 5)], LessonState::NumerousNoFaces),
        (&[(C::NoFace, 3)], LessonState::NoFace),
        (&[(C::Engaged, 2)], LessonState::Engaged),
        (
            &[(C::Tired, 3), (C::Unfocused, 3), (C::Confused, 3)],
            LessonState::TiredUnfocused,
        ),
        (&[], LessonState::Neutral),
    ];
    for (pairs, expected) in lesson_probes {
        let counts = counts_of(pairs);
        let (got, want) = (aggregate(&counts, cfg), oracle_aggregate(&counts, cfg));
        summary.probes.push(Probe {
            name: serde_json::to_string(&counts)?,
            implementation: got.to_string(),
            oracle: want.to_string(),
            expected: fixed.then(|| expected.to_string()),
            ok: got == want && (!fixed || got == expected),
        });
    }
    let affect_probes = [
        ((0.0, 0.0), EmotionalState::Neutral),
        ((5.0, 5.0), EmotionalState::Engaged),
        ((-3.0, 2.0), EmotionalState::Confused),
        ((0.0, -6.0), EmotionalState::Tired),
        ((-3.0, -1.5), EmotionalState::Disengaged),
        ((-3.0, 0.0), EmotionalState::Neutral),
    ];
    for ((v, a), expected) in affect_probes {
        let point = AffectPoint::new(v, a);
        let got = classify_emotion(point, cfg)?;
        let regions = affect_regions(point, cfg);
        summary.probes.push(Probe {
            name: format!("({v}, {a})"),
            implementation: got.to_string(),
            oracle: format!("{regions:?}"),
            expected: fixed.then(|| expected.to_string()),
            ok: regions == [got] && (!fixed || got == expected),
        });
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_verifies_clean() {
        let s = verify_against_oracle(2_000, 11, &ThresholdConfig::default()).unwrap();
        assert!(s.passed(), "{s}");
        assert_eq!(s.grid_points, 201 * 201);
        assert_eq!(s.monotonicity_pairs, 200);
    }

    #[test]
    fn zero_trials_is_rejected() {
        assert!(verify_against_oracle(0, 1, &ThresholdConfig::default()).is_err());
    }

    #[test]
    fn oracle_catches_a_shifted_threshold() {
        // the oracle reads the same config, so a disagreement needs a
        // different config on one side
        let cfg = ThresholdConfig::default();
        let mut shifted = cfg.clone();
        shifted.aggregator_counts.engaged = 2;
        let counts = counts_of(&[(ClipState::Engaged, 2)]);
        assert_ne!(
            aggregate(&counts, &shifted),
            oracle_aggregate(&counts, &cfg)
        );
    }

    #[test]
    fn inconsistent_alphas_are_rejected() {
        // alpha_4 above alpha_2 would let the confusion and engagement regions overlap
        let cfg = ThresholdConfig {
            alpha4: 2.0,
            ..Default::default()
        };
        assert!(matches!(
            verify_against_oracle(10, 1, &cfg),
            Err(Error::Config(_))
        ));
    }
}
