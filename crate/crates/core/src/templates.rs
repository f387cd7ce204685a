//! Question templates per task.
//!
//! For multi-turn element tasks a template is the task description that opens
//! the conversation; for single-turn tasks it is the question itself.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use regex::Regex;
use std::sync::LazyLock;

use crate::sample::TaskKind;

pub const MIN_TEMPLATES_PER_TASK: usize = 3;

const DEFAULT_BANK: &str = include_str!("../assets/templates.json");

static PLACEHOLDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([^{}]*)\}").unwrap());

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("reading template file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("template file is not a JSON map of task name to string list: {0}")]
    Parse(String),
    #[error("unknown task name {0:?}")]
    UnknownTask(String),
    #[error("no templates for task {0}")]
    MissingTask(TaskKind),
    #[error("task {task} has {count} templates, at least {MIN_TEMPLATES_PER_TASK} required")]
    TooFew { task: TaskKind, count: usize },
    #[error("unknown placeholder {{{placeholder}}} in template for {task}")]
    UnknownPlaceholder { task: TaskKind, placeholder: String },
    #[error("placeholder {{{placeholder}}} cannot be filled for task {task}")]
    Unresolvable { task: TaskKind, placeholder: String },
}

/// Placeholders a task can fill.
fn resolvable(task: TaskKind) -> &'static [&'static str] {
    match task {
        TaskKind::Grounding
        | TaskKind::Referring
        | TaskKind::OCR
        | TaskKind::IconGrounding
        | TaskKind::IconReferring => &["mode"],
        _ => &[],
    }
}

const KNOWN_PLACEHOLDERS: [&str; 3] = ["description", "coords", "mode"];

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    templates: BTreeMap<TaskKind, Vec<String>>,
}

impl TemplateBank {
    /// Parses and validates a bank that must cover every task in `required`.
    pub fn from_json(text: &str, required: &[TaskKind]) -> Result<Self, TemplateError> {
        let raw: BTreeMap<String, Vec<String>> =
            serde_json::from_str(text).map_err(|e| TemplateError::Parse(e.to_string()))?;
        let mut templates = BTreeMap::new();
        for (name, list) in raw {
            let task: TaskKind = name.parse().map_err(|_| TemplateError::UnknownTask(name))?;
            templates.insert(task, list);
        }
        let bank = TemplateBank { templates };
        bank.validate(required)?;
        Ok(bank)
    }

    fn validate(&self, required: &[TaskKind]) -> Result<(), TemplateError> {
        for task in required {
            if !self.templates.contains_key(task) {
                return Err(TemplateError::MissingTask(*task));
            }
        }
        for (task, list) in &self.templates {
            if list.len() < MIN_TEMPLATES_PER_TASK {
                return Err(TemplateError::TooFew {
                    task: *task,
                    count: list.len(),
                });
            }
            for template in list {
                for cap in PLACEHOLDER.captures_iter(template) {
                    let name = &cap[1];
                    if !KNOWN_PLACEHOLDERS.contains(&name) {
                        return Err(TemplateError::UnknownPlaceholder {
                            task: *task,
                            placeholder: name.to_string(),
                        });
                    }
                    if !resolvable(*task).contains(&name) {
                        return Err(TemplateError::Unresolvable {
                            task: *task,
                            placeholder: name.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The bank shipped with the crate, covering all tasks.
    pub fn builtin() -> Self {
        TemplateBank::from_json(DEFAULT_BANK, &TaskKind::ALL).expect("built-in template bank is valid")
    }

    pub fn templates(&self, task: TaskKind) -> &[String] {
        self.templates.get(&task).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn tasks(&self) -> impl Iterator<Item = TaskKind> + '_ {
        self.templates.keys().copied()
    }

    /// Draws a template for `task` and fills `{mode}` with `mode_phrase`.
    /// Returns the template index alongside the rendered text.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        task: TaskKind,
        rng: &mut R,
        mode_phrase: &str,
    ) -> Result<(usize, String), TemplateError> {
        let list = self.templates(task);
        if list.is_empty() {
            return Err(TemplateError::MissingTask(task));
        }
        let i = rng.random_range(0..list.len());
        Ok((i, list[i].replace("{mode}", mode_phrase)))
    }
}

/// Loads a template file that must cover all twelve tasks.
pub fn load_templates(path: &Path) -> Result<TemplateBank, TemplateError> {
    let text = std::fs::read_to_string(path).map_err(|source| TemplateError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TemplateBank::from_json(&text, &TaskKind::ALL)
}
