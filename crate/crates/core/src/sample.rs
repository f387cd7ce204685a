//! Training records: one image, an ordered user/assistant conversation and
//! task metadata. A sample serializes directly as one dataset record line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    Grounding,
    Referring,
    OCR,
    HighlightBox,
    PageTitle,
    PageDescription,
    IconDescribe,
    IconGrounding,
    IconReferring,
    FunctionInference,
    DetailedDescription,
    ConversationIntention,
}

impl TaskKind {
    pub const ALL: [TaskKind; 12] = [
        TaskKind::Grounding,
        TaskKind::Referring,
        TaskKind::OCR,
        TaskKind::HighlightBox,
        TaskKind::PageTitle,
        TaskKind::PageDescription,
        TaskKind::IconDescribe,
        TaskKind::IconGrounding,
        TaskKind::IconReferring,
        TaskKind::FunctionInference,
        TaskKind::DetailedDescription,
        TaskKind::ConversationIntention,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Grounding => "Grounding",
            TaskKind::Referring => "Referring",
            TaskKind::OCR => "OCR",
            TaskKind::HighlightBox => "HighlightBox",
            TaskKind::PageTitle => "PageTitle",
            TaskKind::PageDescription => "PageDescription",
            TaskKind::IconDescribe => "IconDescribe",
            TaskKind::IconGrounding => "IconGrounding",
            TaskKind::IconReferring => "IconReferring",
            TaskKind::FunctionInference => "FunctionInference",
            TaskKind::DetailedDescription => "DetailedDescription",
            TaskKind::ConversationIntention => "ConversationIntention",
        }
    }

    /// Tasks whose answers are coordinates of an element.
    pub fn answers_with_coords(&self) -> bool {
        matches!(self, TaskKind::Grounding | TaskKind::IconGrounding)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

/// Where the pictured page came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Fineweb,
    TopDomains,
    Icon,
    Fixture,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Fineweb => "fineweb",
            Source::TopDomains => "top-domains",
            Source::Icon => "icon",
            Source::Fixture => "fixture",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Source::Fineweb, Source::TopDomains, Source::Icon, Source::Fixture]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown source {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

impl Turn {
    pub fn user(text: impl Into<String>) -> Self {
        Turn {
            role: Role::User,
            text: text.into(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Turn {
            role: Role::Assistant,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QASample {
    pub id: String,
    /// Content-addressed image path relative to the dataset root.
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub task: TaskKind,
    pub source: Source,
    pub turns: Vec<Turn>,
    pub meta: BTreeMap<String, Value>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("sample {id}: {reason}")]
pub struct SampleShapeError {
    pub id: String,
    pub reason: String,
}

impl QASample {
    /// Number of supervised QA pairs (assistant turns).
    pub fn qa_pairs(&self) -> usize {
        self.turns.iter().filter(|t| t.role == Role::Assistant).count()
    }

    pub fn url(&self) -> Option<&str> {
        self.meta.get("url").and_then(Value::as_str)
    }

    /// Turns alternate user/assistant, start with the user and end with the assistant.
    pub fn check_shape(&self) -> Result<(), SampleShapeError> {
        let fail = |reason: &str| SampleShapeError {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.turns.is_empty() || self.turns.len() % 2 != 0 {
            return Err(fail("conversation must hold whole user/assistant pairs"));
        }
        for (i, t) in self.turns.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if t.role != expected {
                return Err(fail("turns must alternate starting with the user"));
            }
        }
        if self.image.is_empty() {
            return Err(fail("sample references no image"));
        }
        Ok(())
    }
}
