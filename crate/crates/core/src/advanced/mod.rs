//! Model-assisted tasks: function inference, detailed description and
//! conversation intention, generated over a Set-of-Mark screenshot.
//!
//! The model only ever names elements by mark number; every `[k]` in its
//! output is replaced with the marked element's encoded bbox before a sample
//! is emitted. Items naming a mark that does not exist, or carrying
//! coordinates of their own, are rejected.

pub mod client;
pub mod marks;
pub mod prompt;

use std::sync::LazyLock;

use rand::Rng;
use regex::Regex;
use serde_json::json;

use crate::annotate::PageAnnotation;
use crate::codec::{CodecError, CoordCodec};
use crate::raster::{encode_png, sha256_hex};
use crate::sample::{QASample, TaskKind, Turn};
use crate::synth::SampleContext;
use crate::templates::{TemplateBank, TemplateError};

pub use client::{ClientError, GenerationClient, HttpClient, StubClient};
pub use marks::{render_marks, MarkedScreenshot};
pub use prompt::{build_prompt, PromptBundle, PromptSet};

pub const ADVANCED_TASKS: [TaskKind; 3] = [
    TaskKind::FunctionInference,
    TaskKind::DetailedDescription,
    TaskKind::ConversationIntention,
];

static MARK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[(\d+)\]").unwrap());
/// A parenthesized tuple of two or four numbers, as the codec writes them.
static RAW_COORDS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\(\s*\d+(\.\d+)?\s*(,\s*\d+(\.\d+)?\s*){1,3}\)").unwrap());
static Q_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*Q:\s*").unwrap());
static A_LINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*A:\s*").unwrap());
static A_INLINE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+A:\s*").unwrap());

#[derive(Debug, thiserror::Error)]
pub enum AdvancedError {
    #[error("page has {0} elements, at least {min} needed", min = marks::MIN_MARKED_ELEMENTS)]
    TooFewElements(usize),
    #[error("conversation intention needs at least {min} exemplars, got {0}", min = prompt::MIN_EXEMPLARS)]
    TooFewExemplars(usize),
    #[error("{0} is not an advanced task")]
    UnsupportedTask(TaskKind),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("response yielded no usable items ({} rejected)", .0.len())]
    EmptyYield(Vec<Rejection>),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl AdvancedError {
    /// Page-level skips, as opposed to failures.
    pub fn is_skip(&self) -> bool {
        matches!(self, AdvancedError::TooFewElements(_) | AdvancedError::EmptyYield(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    UnknownMark(usize),
    SelfCoordinates,
    Malformed(String),
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::UnknownMark(k) => write!(f, "unknown mark [{k}]"),
            RejectReason::SelfCoordinates => f.write_str("item carries its own coordinates"),
            RejectReason::Malformed(m) => write!(f, "malformed block: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub item: usize,
    pub reason: RejectReason,
}

/// One parsed block with marks still unresolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawItem {
    pub question: Option<String>,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedItem {
    pub question: Option<String>,
    pub answer: String,
    /// Element indices referenced, in order of appearance.
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvancedResponse {
    pub task: TaskKind,
    pub items: Vec<ResolvedItem>,
    pub rejected: Vec<Rejection>,
}

/// Splits a response into `Q: ... A: ...` blocks.
///
/// `A:` may follow on the same line as the question or start a later line;
/// both parts may continue over several lines. Text outside a block is a
/// malformed item. Prose with no `Q:` line at all is returned as a single
/// answer-only item.
pub fn parse_blocks(text: &str) -> Vec<Result<RawItem, String>> {
    let text = text.trim();
    if text.is_empty() {
        return Vec::new();
    }
    if !text.lines().any(|l| Q_LINE.is_match(l)) {
        if text.lines().any(|l| A_LINE.is_match(l)) {
            return vec![Err("answer without a question".into())];
        }
        return vec![Ok(RawItem {
            question: None,
            answer: text.to_string(),
        })];
    }

    let mut out = Vec::new();
    let mut preamble = Vec::new();
    let mut current: Option<(Vec<String>, Option<Vec<String>>)> = None;
    let finish = |cur: (Vec<String>, Option<Vec<String>>), out: &mut Vec<Result<RawItem, String>>| {
        let q = cur.0.join("\n").trim().to_string();
        match cur.1 {
            None => out.push(Err(format!("question without an answer: {q:?}"))),
            Some(a) => {
                let a = a.join("\n").trim().to_string();
                if q.is_empty() || a.is_empty() {
                    out.push(Err("empty question or answer".into()));
                } else {
                    out.push(Ok(RawItem {
                        question: Some(q),
                        answer: a,
                    }));
                }
            }
        }
    };

    for line in text.lines() {
        if let Some(m) = Q_LINE.find(line) {
            if let Some(cur) = current.take() {
                finish(cur, &mut out);
            }
            let rest = &line[m.end()..];
            current = Some(match A_INLINE.find(rest) {
                Some(a) => (
                    vec![rest[..a.start()].to_string()],
                    Some(vec![rest[a.end()..].to_string()]),
                ),
                None => (vec![rest.to_string()], None),
            });
        } else if let Some(cur) = current.as_mut() {
            match (&mut cur.1, A_LINE.find(line)) {
                (None, Some(m)) => cur.1 = Some(vec![line[m.end()..].to_string()]),
                (Some(_), Some(_)) => cur.1.as_mut().unwrap().push(line.to_string()),
                (Some(a), None) => a.push(line.to_string()),
                (None, None) => cur.0.push(line.to_string()),
            }
        } else if !line.trim().is_empty() {
            preamble.push(line.trim().to_string());
        }
    }
    if let Some(cur) = current.take() {
        finish(cur, &mut out);
    }
    if !preamble.is_empty() {
        out.insert(0, Err(format!("text outside any block: {:?}", preamble.join(" "))));
    }
    out
}

fn resolve_text(
    text: &str,
    page: &PageAnnotation,
    marked: &MarkedScreenshot,
    codec: &CoordCodec,
    elements: &mut Vec<usize>,
) -> Result<Result<String, RejectReason>, CodecError> {
    if RAW_COORDS.is_match(text) {
        return Ok(Err(RejectReason::SelfCoordinates));
    }
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for cap in MARK.captures_iter(text) {
        let whole = cap.get(0).unwrap();
        let k: usize = match cap[1].parse() {
            Ok(k) => k,
            Err(_) => return Ok(Err(RejectReason::UnknownMark(usize::MAX))),
        };
        let Some(el) = marked.element_for(k) else {
            return Ok(Err(RejectReason::UnknownMark(k)));
        };
        out.push_str(&text[last..whole.start()]);
        out.push_str(&codec.encode_bbox(&page.elements[el].bbox, page.viewport)?);
        elements.push(el);
        last = whole.end();
    }
    out.push_str(&text[last..]);
    Ok(Ok(out))
}

/// Parses a raw model response and resolves mark references.
///
/// Rejected items are logged at warn level and listed in the result.
pub fn parse_response(
    task: TaskKind,
    text: &str,
    page: &PageAnnotation,
    marked: &MarkedScreenshot,
    codec: &CoordCodec,
) -> Result<AdvancedResponse, AdvancedError> {
    let mut items = Vec::new();
    let mut rejected = Vec::new();
    let mut reject = |item: usize, reason: RejectReason| {
        tracing::warn!(url = %page.url, task = %task, item, %reason, "rejected generated item");
        rejected.push(Rejection { item, reason });
    };

    for (i, block) in parse_blocks(text).into_iter().enumerate() {
        let raw = match block {
            Ok(raw) => raw,
            Err(m) => {
                reject(i, RejectReason::Malformed(m));
                continue;
            }
        };
        if task == TaskKind::ConversationIntention && raw.question.is_none() {
            reject(i, RejectReason::Malformed("conversation items need a question".into()));
            continue;
        }
        let mut elements = Vec::new();
        let question = match &raw.question {
            None => None,
            Some(q) => match resolve_text(q, page, marked, codec, &mut elements)? {
                Ok(q) => Some(q),
                Err(r) => {
                    reject(i, r);
                    continue;
                }
            },
        };
        match resolve_text(&raw.answer, page, marked, codec, &mut elements)? {
            Ok(answer) => items.push(ResolvedItem {
                question,
                answer,
                elements,
            }),
            Err(r) => reject(i, r),
        }
    }
    Ok(AdvancedResponse { task, items, rejected })
}

/// Everything `run_advanced` needs besides the page.
pub struct AdvancedSynth<'a> {
    pub client: &'a dyn GenerationClient,
    pub prompts: &'a PromptSet,
    pub templates: &'a TemplateBank,
    pub codec: CoordCodec,
}

#[derive(Debug, Clone)]
pub struct AdvancedOutcome {
    pub samples: Vec<QASample>,
    pub rejected: Vec<Rejection>,
}

impl AdvancedSynth<'_> {
    /// Builds the prompt, queries the model with the marked screenshot and
    /// turns the response into samples over the unmarked screenshot `ctx`.
    ///
    /// Function inference and detailed description give one single-turn
    /// sample from the first usable item; conversation intention gives one
    /// multi-turn sample with every usable item.
    pub fn run<R: Rng + ?Sized>(
        &self,
        page: &PageAnnotation,
        marked: &MarkedScreenshot,
        marked_png: &[u8],
        task: TaskKind,
        rng: &mut R,
        ctx: &SampleContext,
    ) -> Result<AdvancedOutcome, AdvancedError> {
        if !ADVANCED_TASKS.contains(&task) {
            return Err(AdvancedError::UnsupportedTask(task));
        }
        let bundle = build_prompt(page, marked, task, self.prompts, &self.prompts.exemplars, &self.codec)?;
        let prompt_text = bundle.render();
        let response = client::request_with_retry(self.client, &prompt_text, &[marked_png.to_vec()])?;
        let parsed = parse_response(task, &response, page, marked, &self.codec)?;
        if parsed.items.is_empty() {
            return Err(AdvancedError::EmptyYield(parsed.rejected));
        }

        let (template_idx, opening) = self.templates.sample(task, rng, "")?;
        let (turns, used): (Vec<Turn>, Vec<&ResolvedItem>) = if task == TaskKind::ConversationIntention {
            let mut turns = Vec::with_capacity(2 * parsed.items.len());
            for (n, item) in parsed.items.iter().enumerate() {
                let q = item.question.as_deref().unwrap_or_default();
                let q = if n == 0 {
                    format!("{opening}\n{q}")
                } else {
                    q.to_string()
                };
                turns.push(Turn::user(q));
                turns.push(Turn::assistant(item.answer.clone()));
            }
            (turns, parsed.items.iter().collect())
        } else {
            let item = &parsed.items[0];
            (
                vec![Turn::user(opening), Turn::assistant(item.answer.clone())],
                vec![item],
            )
        };

        let mut sample = ctx.sample(page, task, "", turns);
        let targets: Vec<usize> = used.iter().flat_map(|i| i.elements.iter().copied()).collect();
        sample.meta.insert("template".into(), json!(template_idx));
        sample.meta.insert("targets".into(), json!(targets));
        sample.meta.insert("marks".into(), json!(marked.len()));
        sample
            .meta
            .insert("response_digest".into(), json!(sha256_hex(response.as_bytes())));
        sample
            .meta
            .insert("rejected_items".into(), json!(parsed.rejected.len()));
        Ok(AdvancedOutcome {
            samples: vec![sample],
            rejected: parsed.rejected,
        })
    }

    /// Renders marks once and runs every advanced task over the page.
    /// Per-task failures are returned alongside the samples.
    pub fn run_page<R: Rng + ?Sized>(
        &self,
        page: &PageAnnotation,
        screenshot: &image::RgbaImage,
        rng: &mut R,
        ctx: &SampleContext,
    ) -> Result<(Vec<QASample>, Vec<Rejection>, Vec<(TaskKind, AdvancedError)>), AdvancedError> {
        let marked = render_marks(page, screenshot)?;
        let png = encode_png(&marked.image);
        let mut samples = Vec::new();
        let mut rejected = Vec::new();
        let mut errors = Vec::new();
        for task in ADVANCED_TASKS {
            match self.run(page, &marked, &png, task, rng, ctx) {
                Ok(out) => {
                    samples.extend(out.samples);
                    rejected.extend(out.rejected);
                }
                Err(e) => errors.push((task, e)),
            }
        }
        Ok((samples, rejected, errors))
    }
}

/// True if `text` still holds a `[k]` mark token.
pub fn has_raw_mark(text: &str) -> bool {
    MARK.is_match(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{DescriptionSource, ElementAnnotation, ElementKind};
    use crate::codec::{decode_coords, Coords};
    use crate::geom::{BBox, Viewport};
    use crate::sample::{Role, Source};
    use image::{Rgba, RgbaImage};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn el(x: f64, y: f64, desc: &str) -> ElementAnnotation {
        ElementAnnotation {
            node_id: None,
            kind: ElementKind::Button,
            bbox: BBox::new(x, y, x + 80.0, y + 30.0).unwrap(),
            description: desc.into(),
            description_source: DescriptionSource::VisibleText,
            interactive: true,
        }
    }

    fn page(n: usize) -> PageAnnotation {
        PageAnnotation {
            snapshot: "s".into(),
            screenshot: "p.png".into(),
            url: "https://example.com/".into(),
            viewport: Viewport::new(400, 300),
            scroll_y: 0.0,
            capture_index: 0,
            title: "Example".into(),
            meta_description: String::new(),
            elements: (0..n)
                .map(|i| el(10.0 + 20.0 * i as f64, 10.0 + 40.0 * i as f64, &format!("b{i}")))
                .collect(),
        }
    }

    fn shot() -> RgbaImage {
        RgbaImage::from_pixel(400, 300, Rgba([255, 255, 255, 255]))
    }

    fn run(p: &PageAnnotation, task: TaskKind, response: &str) -> Result<AdvancedOutcome, AdvancedError> {
        let client = StubClient::new(BTreeMap::new(), Some(response.to_string()));
        let prompts = PromptSet::builtin();
        let templates = TemplateBank::builtin();
        let synth = AdvancedSynth {
            client: &client,
            prompts: &prompts,
            templates: &templates,
            codec: CoordCodec::default(),
        };
        let marked = render_marks(p, &shot()).unwrap();
        let png = encode_png(&marked.image);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        synth.run(
            p,
            &marked,
            &png,
            task,
            &mut rng,
            &SampleContext::new("p", "img", Source::Fixture, 1),
        )
    }

    #[test]
    fn marks_follow_reading_order() {
        let mut p = page(3);
        p.elements.swap(0, 2);
        let m = render_marks(&p, &shot()).unwrap();
        assert_eq!(m.marks, vec![2, 1, 0]);
        let mut sorted = m.marks.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
        for l in &m.labels {
            assert!(l.x1 <= 400 && l.y1 <= 300 && !l.is_empty());
        }
    }

    #[test]
    fn same_row_orders_by_x() {
        let mut p = page(3);
        p.elements[0].bbox = BBox::new(200.0, 10.0, 250.0, 30.0).unwrap();
        p.elements[1].bbox = BBox::new(20.0, 10.0, 60.0, 30.0).unwrap();
        let m = render_marks(&p, &shot()).unwrap();
        assert_eq!(m.element_for(1), Some(1));
        assert_eq!(m.element_for(2), Some(0));
    }

    #[test]
    fn two_elements_are_skipped() {
        assert!(matches!(
            render_marks(&page(2), &shot()),
            Err(AdvancedError::TooFewElements(2))
        ));
    }

    #[test]
    fn listing_and_exemplar_rules() {
        let p = page(5);
        let m = render_marks(&p, &shot()).unwrap();
        let prompts = PromptSet::builtin();
        let codec = CoordCodec::default();
        let fi = build_prompt(
            &p,
            &m,
            TaskKind::FunctionInference,
            &prompts,
            &prompts.exemplars,
            &codec,
        )
        .unwrap();
        assert!(fi.exemplars.is_empty());
        assert_eq!(fi.screen_listing.lines().count(), 5);
        let ci = build_prompt(
            &p,
            &m,
            TaskKind::ConversationIntention,
            &prompts,
            &prompts.exemplars,
            &codec,
        )
        .unwrap();
        assert!(ci.exemplars.len() >= 2);
        assert!(ci.render().contains(prompt::MARK_INSTRUCTION));
        assert!(matches!(
            build_prompt(
                &p,
                &m,
                TaskKind::ConversationIntention,
                &prompts,
                &prompts.exemplars[..1],
                &codec
            ),
            Err(AdvancedError::TooFewExemplars(1))
        ));
    }

    #[test]
    fn mark_resolves_to_encoded_bbox() {
        let p = page(5);
        let out = run(&p, TaskKind::ConversationIntention, "Q: click the search button A: [2]").unwrap();
        let s = &out.samples[0];
        let m = render_marks(&p, &shot()).unwrap();
        let b = &p.elements[m.element_for(2).unwrap()].bbox;
        let want = CoordCodec::default().encode_bbox(b, p.viewport).unwrap();
        assert_eq!(s.turns[1].role, Role::Assistant);
        assert_eq!(s.turns[1].text, want);
        assert!(s.turns[0].text.ends_with("\nclick the search button"));
        assert!(matches!(decode_coords(&s.turns[1].text), Ok(Coords::Bbox(_))));
    }

    #[test]
    fn unknown_mark_rejects_only_that_item() {
        let p = page(5);
        let text = "Q: open it\nA: use [99]\nQ: go home\nA: click [1] please";
        let out = run(&p, TaskKind::ConversationIntention, text).unwrap();
        assert_eq!(
            out.rejected,
            vec![Rejection {
                item: 0,
                reason: RejectReason::UnknownMark(99)
            }]
        );
        assert_eq!(out.samples[0].qa_pairs(), 1);
        assert!(out.samples[0].turns.iter().all(|t| !has_raw_mark(&t.text)));
    }

    #[test]
    fn all_rejected_is_empty_yield() {
        let p = page(5);
        match run(&p, TaskKind::ConversationIntention, "Q: x A: [99]") {
            Err(AdvancedError::EmptyYield(r)) => assert_eq!(r[0].reason, RejectReason::UnknownMark(99)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prose_is_accepted_for_function_inference() {
        let p = page(3);
        let out = run(
            &p,
            TaskKind::FunctionInference,
            "This page is a search engine front page.",
        )
        .unwrap();
        let s = &out.samples[0];
        assert_eq!(s.turns.len(), 2);
        assert_eq!(s.turns[1].text, "This page is a search engine front page.");
        assert!(TemplateBank::builtin()
            .templates(TaskKind::FunctionInference)
            .contains(&s.turns[0].text));
    }

    #[test]
    fn prose_is_malformed_for_conversation() {
        let p = page(3);
        assert!(matches!(
            run(&p, TaskKind::ConversationIntention, "Just prose."),
            Err(AdvancedError::EmptyYield(_))
        ));
    }

    #[test]
    fn self_generated_coordinates_are_rejected() {
        let p = page(3);
        let out = run(
            &p,
            TaskKind::ConversationIntention,
            "Q: a\nA: at (0.1,0.2)\nQ: b\nA: [3]",
        )
        .unwrap();
        assert_eq!(out.rejected[0].reason, RejectReason::SelfCoordinates);
        assert_eq!(out.samples[0].qa_pairs(), 1);
    }

    #[test]
    fn block_grammar() {
        let blocks = parse_blocks("intro\nQ: one\ntwo\nA: three\nfour\nQ: five\nQ: six A: seven");
        assert!(blocks[0].is_err());
        assert_eq!(
            blocks[1],
            Ok(RawItem {
                question: Some("one\ntwo".into()),
                answer: "three\nfour".into()
            })
        );
        assert!(blocks[2].is_err());
        assert_eq!(blocks[3].as_ref().unwrap().answer, "seven");
        assert!(parse_blocks("   ").is_empty());
        assert!(parse_blocks("A: orphan")[0].is_err());
    }

    struct Flaky {
        calls: AtomicUsize,
        fail: usize,
    }

    impl GenerationClient for Flaky {
        fn request(&self, _: &str, _: &[Vec<u8>]) -> Result<String, ClientError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.fail {
                Err(ClientError::Transport("reset".into()))
            } else {
                Ok("A page.".into())
            }
        }
    }

    #[test]
    fn one_retry_on_transport_failure() {
        let once = Flaky {
            calls: AtomicUsize::new(0),
            fail: 1,
        };
        assert_eq!(client::request_with_retry(&once, "p", &[]).unwrap(), "A page.");
        let twice = Flaky {
            calls: AtomicUsize::new(0),
            fail: 2,
        };
        assert!(client::request_with_retry(&twice, "p", &[]).is_err());
        assert_eq!(twice.calls.load(Ordering::SeqCst), 2);
        let stub = StubClient::default();
        assert!(matches!(stub.request("p", &[]), Err(ClientError::MissingFixture(_))));
    }
}
