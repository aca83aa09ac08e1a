//! Feedback message catalog.
//!
//! The catalog is a list of `{state, variant, message}` records. Every lesson
//! state needs a `plain` message; the four confusion states also need a
//! `with_supplementary` message shown when the lesson has extra material.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregator::LessonState;
use crate::error::{Error, Result};

const DEFAULT_CATALOG: &str = include_str!("../data/feedback_catalog.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackVariant {
    Plain,
    WithSupplementary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub state: LessonState,
    pub variant: FeedbackVariant,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub message: String,
    pub recommend_supplementary: bool,
}

/// Validated, immutable state → message table.
#[derive(Debug, Clone)]
pub struct FeedbackCatalog {
    messages: HashMap<(LessonState, FeedbackVariant), String>,
}

impl FeedbackCatalog {
    pub fn from_records(records: Vec<CatalogRecord>) -> Result<Self> {
        let mut messages = HashMap::with_capacity(records.len());
        for r in records {
            if r.message.trim().is_empty() {
                return Err(Error::Config(format!(
                    "empty {:?} message for {}",
                    r.variant, r.state
                )));
            }
            if r.variant == FeedbackVariant::WithSupplementary && !r.state.involves_confusion() {
                return Err(Error::Config(format!(
                    "{} does not recommend supplementary content and cannot have a with_supplementary message",
                    r.state
                )));
            }
            if messages.insert((r.state, r.variant), r.message).is_some() {
                return Err(Error::Config(format!(
                    "duplicate {:?} message for {}",
                    r.variant, r.state
                )));
            }
        }
        for state in LessonState::PRIORITY {
            if !messages.contains_key(&(state, FeedbackVariant::Plain)) {
                return Err(Error::Config(format!("missing plain message for {state}")));
            }
            if state.involves_confusion()
                && !messages.contains_key(&(state, FeedbackVariant::WithSupplementary))
            {
                return Err(Error::Config(format!(
                    "missing with_supplementary message for {state}"
                )));
            }
        }
        Ok(Self { messages })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let records: Vec<CatalogRecord> =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("catalog: {e}")))?;
        Self::from_records(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn message(&self, state: LessonState, variant: FeedbackVariant) -> Option<&str> {
        self.messages.get(&(state, variant)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn select(&self, state: LessonState, lesson_has_supplementary: bool) -> Feedback {
        select_feedback(state, lesson_has_supplementary, self)
    }
}

impl Default for FeedbackCatalog {
    fn default() -> Self {
        Self::from_json_str(DEFAULT_CATALOG).expect("bundled feedback catalog is valid")
    }
}

pub fn select_feedback(
    state: LessonState,
    lesson_has_supplementary: bool,
    catalog: &FeedbackCatalog,
) -> Feedback {
    let recommend = state.involves_confusion() && lesson_has_supplementary;
    let variant = if recommend {
        FeedbackVariant::WithSupplementary
    } else {
        FeedbackVariant::Plain
    };
    let message = catalog
        .message(state, variant)
        .expect("catalog completeness is checked at load time")
        .to_owned();
    Feedback {
        message,
        recommend_supplementary: recommend,
    }
}
