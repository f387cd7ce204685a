//! Prompt assembly for the model-assisted tasks.

use std::path::Path;

use crate::annotate::PageAnnotation;
use crate::codec::CoordCodec;
use crate::sample::TaskKind;

use super::marks::MarkedScreenshot;
use super::AdvancedError;

pub const MIN_EXEMPLARS: usize = 2;

/// Sentence every conversation-intention prompt must carry.
pub const MARK_INSTRUCTION: &str =
    "Refer to elements only by their annotation number in square brackets, e.g. [2]; never output coordinates.";

/// Prompt texts, loaded from a directory or taken from the built-in set.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub shared: String,
    pub function_inference: String,
    pub detailed_description: String,
    pub conversation_intention: String,
    pub exemplars: Vec<String>,
}

impl PromptSet {
    pub fn builtin() -> Self {
        PromptSet {
            shared: include_str!("../../assets/prompts/shared.txt").trim().to_string(),
            function_inference: include_str!("../../assets/prompts/function_inference.txt")
                .trim()
                .to_string(),
            detailed_description: include_str!("../../assets/prompts/detailed_description.txt")
                .trim()
                .to_string(),
            conversation_intention: include_str!("../../assets/prompts/conversation_intention.txt")
                .trim()
                .to_string(),
            exemplars: split_exemplars(include_str!("../../assets/prompts/exemplars.txt")),
        }
    }

    /// Reads `shared.txt`, `function_inference.txt`, `detailed_description.txt`,
    /// `conversation_intention.txt` and `exemplars.txt` from `dir`.
    pub fn load(dir: &Path) -> Result<Self, std::io::Error> {
        let read = |name: &str| std::fs::read_to_string(dir.join(name)).map(|s| s.trim().to_string());
        Ok(PromptSet {
            shared: read("shared.txt")?,
            function_inference: read("function_inference.txt")?,
            detailed_description: read("detailed_description.txt")?,
            conversation_intention: read("conversation_intention.txt")?,
            exemplars: split_exemplars(&read("exemplars.txt")?),
        })
    }

    pub fn task_prompt(&self, task: TaskKind) -> Option<&str> {
        match task {
            TaskKind::FunctionInference => Some(&self.function_inference),
            TaskKind::DetailedDescription => Some(&self.detailed_description),
            TaskKind::ConversationIntention => Some(&self.conversation_intention),
            _ => None,
        }
    }
}

/// Exemplars are separated by blank lines.
pub fn split_exemplars(text: &str) -> Vec<String> {
    text.split("\n\n")
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub task: TaskKind,
    pub shared_prompt: String,
    pub task_prompt: String,
    /// One line per mark: number, kind, description, encoded bbox.
    pub screen_listing: String,
    pub exemplars: Vec<String>,
}

impl PromptBundle {
    /// Full text sent to the model.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{}\n\n{}\n\nScreen annotations:\n{}\n",
            self.shared_prompt, self.task_prompt, self.screen_listing
        );
        if !self.exemplars.is_empty() {
            out.push_str("\nExamples:\n");
            for ex in &self.exemplars {
                out.push_str(ex);
                out.push_str("\n\n");
            }
        }
        out
    }
}

pub fn screen_listing(
    page: &PageAnnotation,
    marked: &MarkedScreenshot,
    codec: &CoordCodec,
) -> Result<String, AdvancedError> {
    let mut lines = Vec::with_capacity(marked.len());
    for (i, &el) in marked.marks.iter().enumerate() {
        let e = &page.elements[el];
        let desc = if e.description.is_empty() {
            "(no description)"
        } else {
            e.description.as_str()
        };
        let coords = codec.encode_bbox(&e.bbox, page.viewport)?;
        lines.push(format!("[{}] {}: {} {}", i + 1, e.kind.as_str(), desc, coords));
    }
    Ok(lines.join("\n"))
}

pub fn build_prompt(
    page: &PageAnnotation,
    marked: &MarkedScreenshot,
    task: TaskKind,
    prompts: &PromptSet,
    exemplars: &[String],
    codec: &CoordCodec,
) -> Result<PromptBundle, AdvancedError> {
    let base = prompts.task_prompt(task).ok_or(AdvancedError::UnsupportedTask(task))?;
    let (task_prompt, exemplars) = if task == TaskKind::ConversationIntention {
        if exemplars.len() < MIN_EXEMPLARS {
            return Err(AdvancedError::TooFewExemplars(exemplars.len()));
        }
        (format!("{base}\n{MARK_INSTRUCTION}"), exemplars.to_vec())
    } else {
        (base.to_string(), Vec::new())
    };
    Ok(PromptBundle {
        task,
        shared_prompt: prompts.shared.clone(),
        task_prompt,
        screen_listing: screen_listing(page, marked, codec)?,
        exemplars,
    })
}
