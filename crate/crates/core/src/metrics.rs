//! Academic-success metrics per session and learner group.
//!
//! A learner takes part in a session once they have recorded a clip for one
//! of its lessons or attempted its test. For every (session, group) pair:
//!
//! * watch time: mean over participants of the summed lesson watch minutes
//! * attempts to pass: mean 1-based index of the first passing attempt,
//!   over participants who passed
//! * passing score: mean of each participant's first passing score
//! * first / second attempt score: mean over participants with at least
//!   one / two attempts

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::course::CourseModel;
use crate::error::{Error, Result};
use crate::record::LearnerRecord;

/// Column headers of the metrics table, in order.
pub const METRIC_COLUMNS: [&str; 5] = [
    "Mean time spent watching the contents (minutes)",
    "Mean number of attempts to earn a passing score",
    "Mean passing score (%)",
    "Mean score in the first attempt (%)",
    "Mean score in the second attempt (%)",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub group: String,
    pub participants: usize,
    pub mean_watch_minutes: Option<f64>,
    pub mean_attempts_to_pass: Option<f64>,
    pub mean_passing_score: Option<f64>,
    pub mean_first_attempt_score: Option<f64>,
    pub mean_second_attempt_score: Option<f64>,
}

impl GroupMetrics {
    pub fn columns(&self) -> [Option<f64>; 5] {
        [
            self.mean_watch_minutes,
            self.mean_attempts_to_pass,
            self.mean_passing_score,
            self.mean_first_attempt_score,
            self.mean_second_attempt_score,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub session_id: String,
    pub groups: Vec<GroupMetrics>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CourseMetrics {
    pub sessions: Vec<SessionMetrics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `grouping` maps every learner id in `records` to its group label.
pub fn compute_course_metrics(
    course: &CourseModel,
    records: &[LearnerRecord],
    grouping: &BTreeMap<String, String>,
) -> Result<CourseMetrics> {
    let mut by_group: BTreeMap<&str, Vec<&LearnerRecord>> = BTreeMap::new();
    for group in grouping.values() {
        by_group.entry(group.as_str()).or_default();
    }
    for rec in records.iter().filter(|r| r.course_id == course.id) {
        let group = grouping.get(&rec.learner_id).ok_or_else(|| {
            Error::validation(format!(
                "learner {} is not assigned to a group",
                rec.learner_id
            ))
        })?;
        by_group
            .get_mut(group.as_str())
            .expect("seeded above")
            .push(rec);
    }

    let mut out = CourseMetrics::default();
    for (group, members) in &by_group {
        if members.is_empty() {
            out.warnings.push(format!(
                "group {group} has no learners in course {}",
                course.id
            ));
        }
    }

    for session in &course.sessions {
        let mut groups = Vec::new();
        for (group, members) in &by_group {
            let participants: Vec<_> = members
                .iter()
                .filter_map(|rec| {
                    let lessons = &session.content(rec.cognitive_style).lessons;
                    let watch: f64 = lessons
                        .iter()
                        .filter_map(|l| rec.lessons.get(&l.id))
                        .filter(|l| !l.clips.is_empty())
                        .map(|l| l.watch_minutes())
                        .sum();
                    let watched = lessons
                        .iter()
                        .any(|l| rec.lessons.get(&l.id).is_some_and(|l| !l.clips.is_empty()));
                    let attempts = rec.sessions.get(&session.id);
                    let attempted = attempts.is_some_and(|s| !s.attempts.is_empty());
                    (watched || attempted).then_some((watch, attempts))
                })
                .collect();
            if participants.is_empty() {
                if !members.is_empty() {
                    out.warnings.push(format!(
                        "group {group} has no participants in session {}",
                        session.id
                    ));
                }
                continue;
            }
            let sessions = || participants.iter().filter_map(|(_, s)| *s);
            groups.push(GroupMetrics {
                group: (*group).to_owned(),
                participants: participants.len(),
                mean_watch_minutes: mean(participants.iter().map(|(w, _)| *w)),
                mean_attempts_to_pass: mean(
                    sessions()
                        .filter_map(|s| s.attempts_to_pass())
                        .map(|n| n as f64),
                ),
                mean_passing_score: mean(
                    sessions()
                        .filter_map(|s| s.first_passing_score())
                        .map(f64::from),
                ),
                mean_first_attempt_score: mean(
                    sessions()
                        .filter_map(|s| s.attempts.first())
                        .map(|a| f64::from(a.score)),
                ),
                mean_second_attempt_score: mean(
                    sessions()
                        .filter_map(|s| s.attempts.get(1))
                        .map(|a| f64::from(a.score)),
                ),
            });
        }
        out.sessions.push(SessionMetrics {
            session_id: session.id.clone(),
            groups,
        });
    }
    Ok(out)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.1}"))
}

/// Renders a header and rows as RFC 4180 CSV.
pub(crate) fn csv_table<R, F>(header: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = Vec<F>>,
    F: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let written = w
        .write_record(header)
        .and_then(|_| rows.into_iter().try_for_each(|r| w.write_record(r)));
    written.expect("writing CSV to memory cannot fail");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("fields are UTF-8")
}

impl CourseMetrics {
    pub fn session(&self, session_id: &str) -> Option<&SessionMetrics> {
        self.sessions.iter().find(|s| s.session_id == session_id)
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["session", "group", "participants"];
        header.extend(METRIC_COLUMNS);
        let rows = self.sessions.iter().flat_map(|s| {
            s.groups.iter().map(|g| {
                let mut row = vec![
                    s.session_id.clone(),
                    g.group.clone(),
                    g.participants.to_string(),
                ];
                row.extend(
                    g.columns()
                        .into_iter()
                        .map(|v| v.map_or_else(String::new, |v| format!("{v:.1}"))),
                );
                row
            })
        });
        csv_table(&header, rows)
    }

    /// One table per session, one row per group.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sessions {
            let _ = writeln!(out, "Session {}", s.session_id);
            let mut rows = vec![{
                let mut h = vec!["Group".to_owned()];
                h.extend(METRIC_COLUMNS.iter().map(|c| c.to_string()));
                h
            }];
            for g in &s.groups {
                let mut r = vec![g.group.clone()];
                r.extend(g.columns().into_iter().map(cell));
                rows.push(r);
            }
            let widths: Vec<usize> = (0..rows[0].len())
                .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
                .collect();
            for (n, r) in rows.iter().enumerate() {
                let line: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                let _ = writeln!(out, "| {} |", line.join(" | "));
                if n == 0 {
                    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
                }
            }
            out.push('\n');
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::course::CognitiveStyle;
    use crate::record::{SessionRecord, TestAttempt};
    use chrono::DateTime;

    fn learner(id: &str, scores: &[u32]) -> LearnerRecord {
        let mut r = LearnerRecord::new(id, "ai-for-everyone", CognitiveStyle::Wholistic);
        r.sessions.insert(
            "s1".into(),
            SessionRecord {
                attempts: scores
                    .iter()
                    .map(|&score| TestAttempt {
                        attempted_at: DateTime::from_timestamp(0, 0).unwrap(),
                        answers: vec![],
                        score,
                        passed: score >= 80,
                    })
                    .collect(),
            },
        );
        r
    }

    fn grouping(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(l, g)| (l.to_string(), g.to_string()))
            .collect()
    }

    #[test]
    fn single_learner_definitions() {
        let course = CourseModel::canonical();
        let m = compute_course_metrics(
            &course,
            &[learner("a", &[65, 85])],
            &grouping(&[("a", "test")]),
        )
        .unwrap();
        let g = &m.session("s1").unwrap().groups[0];
        assert_eq!(g.mean_attempts_to_pass, Some(2.0));
        assert_eq!(g.mean_passing_score, Some(85.0));
        assert_eq!(g.mean_first_attempt_score, Some(65.0));
        assert_eq!(g.mean_second_attempt_score, Some(85.0));
        assert_eq!(g.mean_watch_minutes, Some(0.0));
        // nobody reached session 2
        assert!(m.session("s2").unwrap().groups.is_empty());
    }

    #[test]
    fn means_across_learners() {
        let course = CourseModel::canonical();
        let recs = [learner("a", &[50, 90]), learner("b", &[50, 60, 80])];
        let m =
            compute_course_metrics(&course, &recs, &grouping(&[("a", "g"), ("b", "g")])).unwrap();
        let g = &m.session("s1").unwrap().groups[0];
        assert_eq!(g.mean_attempts_to_pass, Some(2.5));
        assert_eq!(g.mean_second_attempt_score, Some(75.0));
    }

    #[test]
    fn second_attempt_only_counts_retakers() {
        let course = CourseModel::canonical();
        let recs = [learner("a", &[100]), learner("b", &[40, 80])];
        let m =
            compute_course_metrics(&course, &recs, &grouping(&[("a", "g"), ("b", "g")])).unwrap();
        let g = &m.session("s1").unwrap().groups[0];
        assert_eq!(g.mean_second_attempt_score, Some(80.0));
        assert_eq!(g.mean_first_attempt_score, Some(70.0));
    }

    #[test]
    fn empty_group_is_omitted_with_warning() {
        let course = CourseModel::canonical();
        let mut g = grouping(&[("a", "test")]);
        g.insert("ghost".into(), "control".into());
        let m = compute_course_metrics(&course, &[learner("a", &[90])], &g).unwrap();
        assert_eq!(m.session("s1").unwrap().groups.len(), 1);
        assert!(m.warnings.iter().any(|w| w.contains("control")));
    }

    #[test]
    fn unassigned_learner_is_an_error() {
        let course = CourseModel::canonical();
        assert!(compute_course_metrics(&course, &[learner("a", &[90])], &BTreeMap::new()).is_err());
    }

    #[test]
    fn table_layout_has_five_metric_columns() {
        let course = CourseModel::canonical();
        let m = compute_course_metrics(
            &course,
            &[learner("a", &[65, 85])],
            &grouping(&[("a", "test")]),
        )
        .unwrap();
        let csv = m.to_csv();
        let header = csv.lines().next().unwrap();
        assert_eq!(header.split(',').count(), 3 + 5);
        assert!(csv.contains("s1,test,1,0.0,2.0,85.0,65.0,85.0"));
        let text = m.render_text();
        for c in METRIC_COLUMNS {
            assert!(text.contains(c));
        }
    }
}
