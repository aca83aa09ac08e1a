//! Course structure, tests and grading.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CANONICAL_COURSE: &str = include_str!("../data/ai_for_everyone.json");

pub const OPTIONS_PER_QUESTION: usize = 4;
pub const DEFAULT_PASSING_SCORE: u32 = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CognitiveStyle {
    Wholistic,
    Analytical,
    Middle,
}

impl CognitiveStyle {
    pub const ALL: [CognitiveStyle; 3] = [
        CognitiveStyle::Wholistic,
        CognitiveStyle::Analytical,
        CognitiveStyle::Middle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CognitiveStyle::Wholistic => "wholistic",
            CognitiveStyle::Analytical => "analytical",
            CognitiveStyle::Middle => "middle",
        }
    }
}

impl fmt::Display for CognitiveStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CognitiveStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CognitiveStyle::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::validation(format!("unknown cognitive style {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lesson {
    pub id: String,
    pub title: String,
    /// Reference to the main lesson video.
    pub content: String,
    /// Running time of the main content, used to plan recording cadence.
    #[serde(default)]
    pub duration_secs: u32,
    /// Hidden until confusion is detected or the session test is failed.
    #[serde(default)]
    pub supplementary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub options: Vec<String>,
    /// Index of the correct option.
    pub answer: usize,
}

fn default_passing_score() -> u32 {
    DEFAULT_PASSING_SCORE
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Test {
    pub questions: Vec<Question>,
    #[serde(default = "default_passing_score")]
    pub passing_score: u32,
}

/// Learner-facing copy of a question: no answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    pub text: String,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestView {
    pub questions: Vec<QuestionView>,
    pub passing_score: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grade {
    pub score: u32,
    pub passed: bool,
}

impl Test {
    pub fn validate(&self) -> Result<()> {
        if self.questions.is_empty() {
            return Err(Error::InvalidCourse(
                "a test needs at least one question".into(),
            ));
        }
        for (i, q) in self.questions.iter().enumerate() {
            if q.options.len() != OPTIONS_PER_QUESTION {
                return Err(Error::InvalidCourse(format!(
                    "question {} has {} options, expected {OPTIONS_PER_QUESTION}",
                    i + 1,
                    q.options.len()
                )));
            }
            if q.answer >= OPTIONS_PER_QUESTION {
                return Err(Error::InvalidCourse(format!(
                    "question {} has answer index {} out of range",
                    i + 1,
                    q.answer
                )));
            }
        }
        if self.passing_score > 100 {
            return Err(Error::InvalidCourse(format!(
                "passing score {} exceeds 100",
                self.passing_score
            )));
        }
        Ok(())
    }

    pub fn view(&self) -> TestView {
        TestView {
            questions: self
                .questions
                .iter()
                .map(|q| QuestionView {
                    text: q.text.clone(),
                    options: q.options.clone(),
                })
                .collect(),
            passing_score: self.passing_score,
        }
    }

    pub fn answer_key(&self) -> Vec<usize> {
        self.questions.iter().map(|q| q.answer).collect()
    }
}

/// Percentage of correct answers, rounded half up to an integer.
pub fn grade_test(answers: &[usize], test: &Test) -> Result<Grade> {
    let total = test.questions.len();
    if answers.len() != total {
        return Err(Error::validation(format!(
            "expected {total} answers, got {}",
            answers.len()
        )));
    }
    if let Some(bad) = answers.iter().find(|&&a| a >= OPTIONS_PER_QUESTION) {
        return Err(Error::validation(format!(
            "answer index {bad} out of range 0..=3"
        )));
    }
    let correct = answers
        .iter()
        .zip(&test.questions)
        .filter(|(a, q)| **a == q.answer)
        .count();
    // round(100 * correct / total) with halves rounded up, in integers
    let score = ((200 * correct + total) / (2 * total)) as u32;
    Ok(Grade {
        score,
        passed: score >= test.passing_score,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleContent {
    pub lessons: Vec<Lesson>,
    pub test: Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub groups: BTreeMap<CognitiveStyle, StyleContent>,
}

impl Session {
    pub fn content(&self, style: CognitiveStyle) -> &StyleContent {
        self.groups
            .get(&style)
            .expect("validated course has every style group")
    }
}

/// Where a lesson sits in the course.
#[derive(Debug, Clone, Copy)]
pub struct LessonLocation<'a> {
    pub session_index: usize,
    pub style: CognitiveStyle,
    pub lesson: &'a Lesson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseModel {
    pub id: String,
    pub title: String,
    pub sessions: Vec<Session>,
}

impl CourseModel {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidCourse("course id must not be empty".into()));
        }
        if self.sessions.is_empty() {
            return Err(Error::InvalidCourse(
                "a course needs at least one session".into(),
            ));
        }
        let mut session_ids = HashSet::new();
        let mut lesson_ids = HashSet::new();
        for session in &self.sessions {
            if session.id.is_empty() || !session_ids.insert(session.id.as_str()) {
                return Err(Error::InvalidCourse(format!(
                    "session id {:?} is empty or duplicated",
                    session.id
                )));
            }
            for style in CognitiveStyle::ALL {
                let Some(content) = session.groups.get(&style) else {
                    return Err(Error::InvalidCourse(format!(
                        "session {} has no content for the {style} group",
                        session.id
                    )));
                };
                if content.lessons.is_empty() {
                    return Err(Error::InvalidCourse(format!(
                        "session {} has no lessons for the {style} group",
                        session.id
                    )));
                }
                for lesson in &content.lessons {
                    if lesson.id.is_empty() || !lesson_ids.insert(lesson.id.as_str()) {
                        return Err(Error::InvalidCourse(format!(
                            "lesson id {:?} is empty or duplicated",
                            lesson.id
                        )));
                    }
                }
                content.test.validate().map_err(|e| match e {
                    Error::InvalidCourse(m) => {
                        Error::InvalidCourse(format!("session {} ({style}) test: {m}", session.id))
                    }
                    other => other,
                })?;
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let course: CourseModel = serde_json::from_str(text)
            .map_err(|e| Error::InvalidCourse(format!("malformed course document: {e}")))?;
        course.validate()?;
        Ok(course)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// The bundled "Artificial Intelligence for everyone" course.
    pub fn canonical() -> Self {
        Self::from_json_str(CANONICAL_COURSE).expect("bundled course fixture is valid")
    }

    pub fn canonical_json() -> &'static str {
        CANONICAL_COURSE
    }

    pub fn session_index(&self, session_id: &str) -> Option<usize> {
        self.sessions.iter().position(|s| s.id == session_id)
    }

    pub fn locate_lesson(&self, lesson_id: &str) -> Option<LessonLocation<'_>> {
        self.sessions
            .iter()
            .enumerate()
            .find_map(|(session_index, s)| {
                s.groups.iter().find_map(|(&style, content)| {
                    content
                        .lessons
                        .iter()
                        .find(|l| l.id == lesson_id)
                        .map(|lesson| LessonLocation {
                            session_index,
                            style,
                            lesson,
                        })
                })
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_question_test() -> Test {
        CourseModel::canonical().sessions[0]
            .content(CognitiveStyle::Wholistic)
            .test
            .clone()
    }

    #[test]
    fn grading_examples() {
        let t = six_question_test();
        let key = t.answer_key();
        assert_eq!(
            grade_test(&key, &t).unwrap(),
            Grade {
                score: 100,
                passed: true
            }
        );

        let wrong = |n: usize| {
            let mut a = key.clone();
            for x in a.iter_mut().take(n) {
                *x = (*x + 1) % 4;
            }
            a
        };
        assert_eq!(
            grade_test(&wrong(2), &t).unwrap(),
            Grade {
                score: 67,
                passed: false
            }
        );
        assert_eq!(
            grade_test(&wrong(1), &t).unwrap(),
            Grade {
                score: 83,
                passed: true
            }
        );
        assert_eq!(
            grade_test(&wrong(6), &t).unwrap(),
            Grade {
                score: 0,
                passed: false
            }
        );
    }

    #[test]
    fn rounding_is_half_up() {
        let q = |answer| Question {
            text: "q".into(),
            options: vec!["a".into(); 4],
            answer,
        };
        let t = Test {
            questions: vec![q(0); 8],
            passing_score: 80,
        };
        // 1/8 = 12.5% -> 13
        assert_eq!(grade_test(&[0, 1, 1, 1, 1, 1, 1, 1], &t).unwrap().score, 13);
        // 7/8 = 87.5% -> 88
        assert_eq!(grade_test(&[0, 0, 0, 0, 0, 0, 0, 1], &t).unwrap().score, 88);
    }

    #[test]
    fn grading_rejects_malformed_answers() {
        let t = six_question_test();
        assert!(grade_test(&[0; 5], &t).is_err());
        assert!(grade_test(&[0, 0, 0, 0, 0, 4], &t).is_err());
    }

    #[test]
    fn canonical_course_shape() {
        let c = CourseModel::canonical();
        assert_eq!(c.sessions.len(), 2);
        for s in &c.sessions {
            assert_eq!(s.groups.len(), 3);
        }
        let s1 = &c.sessions[0];
        assert_eq!(
            s1.content(CognitiveStyle::Wholistic).test.questions.len(),
            6
        );
        assert_eq!(
            c.sessions[1]
                .content(CognitiveStyle::Middle)
                .test
                .questions
                .len(),
            4
        );
        // groups may differ in lesson count
        assert_ne!(
            s1.content(CognitiveStyle::Wholistic).lessons.len(),
            s1.content(CognitiveStyle::Analytical).lessons.len()
        );
        let loc = c.locate_lesson("s2-a3").unwrap();
        assert_eq!(loc.session_index, 1);
        assert_eq!(loc.style, CognitiveStyle::Analytical);
    }

    #[test]
    fn missing_style_group_is_invalid() {
        let mut c = CourseModel::canonical();
        c.sessions[0].groups.remove(&CognitiveStyle::Middle);
        assert!(matches!(c.validate(), Err(Error::InvalidCourse(m)) if m.contains("middle")));
    }

    #[test]
    fn three_option_question_is_invalid() {
        let mut c = CourseModel::canonical();
        let g = c.sessions[1]
            .groups
            .get_mut(&CognitiveStyle::Analytical)
            .unwrap();
        g.test.questions[0].options.pop();
        assert!(c.validate().is_err());
    }

    #[test]
    fn duplicate_lesson_ids_are_invalid() {
        let mut c = CourseModel::canonical();
        let dup = c.sessions[0].content(CognitiveStyle::Wholistic).lessons[0].clone();
        c.sessions[1]
            .groups
            .get_mut(&CognitiveStyle::Middle)
            .unwrap()
            .lessons
            .push(dup);
        assert!(c.validate().is_err());
    }

    #[test]
    fn view_hides_answers() {
        let t = six_question_test();
        let json = serde_json::to_string(&t.view()).unwrap();
        assert!(!json.contains("answer"));
    }
}
