//! Template-driven elementary tasks: element-level grounding, referring and
//! OCR as multi-turn conversations, plus page-level title and description QA.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::annotate::{DescriptionSource, ElementAnnotation, ElementKind, PageAnnotation};
use crate::codec::{CodecError, CoordCodec, CoordMode};
use crate::sample::{QASample, Source, TaskKind, Turn};
use crate::templates::{TemplateBank, TemplateError};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("no eligible elements for {0}")]
    NoEligible(TaskKind),
    /// The page lacks the field this task asks about; the sample is skipped.
    #[error("page has no {0} content, sample skipped")]
    EmptyField(TaskKind),
    #[error("{0} is not produced by this synthesizer")]
    UnsupportedTask(TaskKind),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

impl SynthError {
    /// Skips are expected for some pages and are not counted as failures.
    pub fn is_skip(&self) -> bool {
        matches!(self, SynthError::EmptyField(_) | SynthError::NoEligible(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub precision: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            k_min: 3,
            k_max: 10,
            precision: crate::codec::DEFAULT_PRECISION,
        }
    }
}

impl SynthConfig {
    pub fn codec(&self) -> CoordCodec {
        CoordCodec::new(self.precision)
    }
}

/// Identity of the image a sample is built on, plus provenance recorded in
/// the sample's metadata.
#[derive(Debug, Clone)]
pub struct SampleContext {
    pub id_prefix: String,
    /// Content-addressed image key; see [`crate::raster::image_key`].
    pub image: String,
    pub source: Source,
    pub seed: u64,
    /// Extra metadata merged into every sample (augmentation parameters etc).
    pub extra_meta: BTreeMap<String, Value>,
}

impl SampleContext {
    pub fn new(id_prefix: impl Into<String>, image: impl Into<String>, source: Source, seed: u64) -> Self {
        SampleContext {
            id_prefix: id_prefix.into(),
            image: image.into(),
            source,
            seed,
            extra_meta: BTreeMap::new(),
        }
    }

    pub fn sample(&self, page: &PageAnnotation, task: TaskKind, suffix: &str, turns: Vec<Turn>) -> QASample {
        let mut meta = BTreeMap::new();
        meta.insert("url".into(), json!(page.url));
        meta.insert("viewport".into(), json!(page.viewport.to_string()));
        meta.insert("scroll_y".into(), json!(page.scroll_y));
        meta.insert("capture_index".into(), json!(page.capture_index));
        meta.insert("seed".into(), json!(self.seed));
        meta.insert("source".into(), json!(self.source.as_str()));
        meta.extend(self.extra_meta.clone());
        let id = if suffix.is_empty() {
            format!("{}/{}", self.id_prefix, task)
        } else {
            format!("{}/{}/{}", self.id_prefix, task, suffix)
        };
        QASample {
            id,
            image: self.image.clone(),
            width: page.viewport.width,
            height: page.viewport.height,
            task,
            source: self.source,
            turns,
            meta,
        }
    }
}

fn has_description(e: &ElementAnnotation) -> bool {
    e.description_source != DescriptionSource::None && !e.description.is_empty()
}

/// Indices of elements usable for an element-level task.
///
/// Grounding-style tasks additionally require the description to be unique
/// on the page, so every question names exactly one target.
pub fn eligible(page: &PageAnnotation, task: TaskKind) -> Vec<usize> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in &page.elements {
        *counts.entry(e.description.as_str()).or_default() += 1;
    }
    let unique = |e: &ElementAnnotation| counts.get(e.description.as_str()) == Some(&1);
    page.elements
        .iter()
        .enumerate()
        .filter(|(_, e)| match task {
            TaskKind::Grounding => has_description(e) && unique(e),
            TaskKind::Referring => has_description(e),
            TaskKind::OCR => e.description_source == DescriptionSource::VisibleText && !e.description.is_empty(),
            TaskKind::IconGrounding => e.kind == ElementKind::Icon && has_description(e) && unique(e),
            TaskKind::IconReferring => e.kind == ElementKind::Icon && has_description(e),
            _ => false,
        })
        .map(|(i, _)| i)
        .collect()
}

pub fn sample_mode<R: Rng + ?Sized>(rng: &mut R) -> CoordMode {
    if rng.random_bool(0.5) {
        CoordMode::Point
    } else {
        CoordMode::Bbox
    }
}

/// Multi-turn element task over `k = min(|eligible|, uniform[k_min, k_max])`
/// distinct elements. The opening user turn carries the task description.
pub fn make_element_sample<R: Rng + ?Sized>(
    page: &PageAnnotation,
    task: TaskKind,
    bank: &TemplateBank,
    rng: &mut R,
    cfg: &SynthConfig,
    ctx: &SampleContext,
) -> Result<QASample, SynthError> {
    if !matches!(
        task,
        TaskKind::Grounding | TaskKind::Referring | TaskKind::OCR | TaskKind::IconGrounding | TaskKind::IconReferring
    ) {
        return Err(SynthError::UnsupportedTask(task));
    }
    let pool = eligible(page, task);
    if pool.is_empty() {
        return Err(SynthError::NoEligible(task));
    }
    let codec = cfg.codec();
    let mode = sample_mode(rng);
    let (template_idx, description) = bank.sample(task, rng, mode.phrase())?;
    let wanted = rng.random_range(cfg.k_min.min(cfg.k_max)..=cfg.k_max.max(cfg.k_min));
    let k = wanted.min(pool.len()).max(1);
    let picks: Vec<usize> = index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();

    let mut turns = Vec::with_capacity(2 * k);
    for (n, &i) in picks.iter().enumerate() {
        let e = &page.elements[i];
        let coords = codec.encode(&e.bbox, mode, page.viewport)?;
        let (q, a) = if task.answers_with_coords() {
            (e.description.clone(), coords)
        } else {
            (coords, e.description.clone())
        };
        let q = if n == 0 { format!("{description}\n{q}") } else { q };
        turns.push(Turn::user(q));
        turns.push(Turn::assistant(a));
    }

    let mut sample = ctx.sample(page, task, "", turns);
    sample.meta.insert("mode".into(), json!(mode));
    sample.meta.insert("template".into(), json!(template_idx));
    sample.meta.insert("targets".into(), json!(picks));
    Ok(sample)
}

/// Single-turn page-level QA about the title or the meta description.
pub fn make_page_sample<R: Rng + ?Sized>(
    page: &PageAnnotation,
    task: TaskKind,
    bank: &TemplateBank,
    rng: &mut R,
    ctx: &SampleContext,
) -> Result<QASample, SynthError> {
    let answer = match task {
        TaskKind::PageTitle => &page.title,
        TaskKind::PageDescription => &page.meta_description,
        other => return Err(SynthError::UnsupportedTask(other)),
    };
    if answer.trim().is_empty() {
        return Err(SynthError::EmptyField(task));
    }
    let (template_idx, question) = bank.sample(task, rng, "")?;
    let mut sample = ctx.sample(
        page,
        task,
        "",
        vec![Turn::user(question), Turn::assistant(answer.clone())],
    );
    sample.meta.insert("template".into(), json!(template_idx));
    Ok(sample)
}

pub const ELEMENTARY_TASKS: [TaskKind; 5] = [
    TaskKind::Grounding,
    TaskKind::Referring,
    TaskKind::OCR,
    TaskKind::PageTitle,
    TaskKind::PageDescription,
];

/// All elementary samples for one page, in task order. Skips are dropped;
/// other errors are returned with their task.
pub fn synthesize_page<R: Rng + ?Sized>(
    page: &PageAnnotation,
    bank: &TemplateBank,
    rng: &mut R,
    cfg: &SynthConfig,
    ctx: &SampleContext,
) -> (Vec<QASample>, Vec<(TaskKind, SynthError)>) {
    let mut samples = Vec::new();
    let mut errors = Vec::new();
    for task in ELEMENTARY_TASKS {
        let res = match task {
            TaskKind::PageTitle | TaskKind::PageDescription => make_page_sample(page, task, bank, rng, ctx),
            _ => make_element_sample(page, task, bank, rng, cfg, ctx),
        };
        match res {
            Ok(s) => samples.push(s),
            Err(e) if e.is_skip() => {}
            Err(e) => errors.push((task, e)),
        }
    }
    (samples, errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_coords, denormalize, Coords};
    use crate::geom::{BBox, Viewport};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn element(bbox: (f64, f64, f64, f64), desc: &str, source: DescriptionSource) -> ElementAnnotation {
        ElementAnnotation {
            node_id: None,
            kind: ElementKind::Link,
            bbox: BBox::new(bbox.0, bbox.1, bbox.2, bbox.3).unwrap(),
            description: desc.into(),
            description_source: source,
            interactive: true,
        }
    }

    fn page(elements: Vec<ElementAnnotation>) -> PageAnnotation {
        PageAnnotation {
            snapshot: "s".into(),
            screenshot: "p.png".into(),
            url: "https://www.google.com/".into(),
            viewport: Viewport::new(1920, 1080),
            scroll_y: 0.0,
            capture_index: 0,
            title: "Google".into(),
            meta_description: String::new(),
            elements,
        }
    }

    fn ctx() -> SampleContext {
        SampleContext::new("p0", "images/abc.png", Source::Fixture, 1)
    }

    #[test]
    fn single_eligible_element_gives_one_turn_pair() {
        let p = page(vec![
            element((192.0, 108.0, 384.0, 216.0), "Gmail", DescriptionSource::VisibleText),
            element((500.0, 500.0, 520.0, 520.0), "", DescriptionSource::None),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = make_element_sample(
            &p,
            TaskKind::Grounding,
            &TemplateBank::builtin(),
            &mut rng,
            &SynthConfig::default(),
            &ctx(),
        )
        .unwrap();
        assert_eq!(s.qa_pairs(), 1);
        s.check_shape().unwrap();
        assert!(s.turns[0].text.ends_with("\nGmail"));
    }

    #[test]
    fn grounding_point_answer() {
        let p = page(vec![element(
            (192.0, 108.0, 384.0, 216.0),
            "Gmail",
            DescriptionSource::VisibleText,
        )]);
        let bank = TemplateBank::builtin();
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = make_element_sample(
                &p,
                TaskKind::Grounding,
                &bank,
                &mut rng,
                &SynthConfig::default(),
                &ctx(),
            )
            .unwrap();
            let expected = if s.meta["mode"] == "point" {
                "(0.150,0.150)"
            } else {
                "(0.100,0.100,0.200,0.200)"
            };
            assert_eq!(s.turns[1].text, expected);
            let back = denormalize(decode_coords(&s.turns[1].text).unwrap(), p.viewport);
            match back {
                Coords::Point(pt) => assert_eq!((pt.x, pt.y), (288.0, 162.0)),
                Coords::Bbox(b) => assert_eq!(b, p.elements[0].bbox),
            }
        }
    }

    #[test]
    fn referring_answer_is_the_description() {
        let p = page(vec![element(
            (192.0, 108.0, 384.0, 216.0),
            "Gmail",
            DescriptionSource::VisibleText,
        )]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = make_element_sample(
            &p,
            TaskKind::Referring,
            &TemplateBank::builtin(),
            &mut rng,
            &SynthConfig::default(),
            &ctx(),
        )
        .unwrap();
        assert!(s.turns[0].text.contains("(0.1"));
        assert_eq!(s.turns[1].text, "Gmail");
    }

    #[test]
    fn ocr_needs_visible_text_and_grounding_needs_unique_descriptions() {
        let p = page(vec![
            element((0.0, 0.0, 10.0, 10.0), "Search", DescriptionSource::AriaLabel),
            element((20.0, 0.0, 30.0, 10.0), "More", DescriptionSource::VisibleText),
            element((40.0, 0.0, 50.0, 10.0), "More", DescriptionSource::VisibleText),
        ]);
        assert_eq!(eligible(&p, TaskKind::OCR), vec![1, 2]);
        assert_eq!(eligible(&p, TaskKind::Grounding), vec![0]);
        assert_eq!(eligible(&p, TaskKind::Referring), vec![0, 1, 2]);
    }

    #[test]
    fn k_is_within_range_and_elements_are_distinct() {
        let els: Vec<_> = (0..30)
            .map(|i| {
                element(
                    (i as f64 * 10.0, 0.0, i as f64 * 10.0 + 8.0, 8.0),
                    &format!("e{i}"),
                    DescriptionSource::VisibleText,
                )
            })
            .collect();
        let p = page(els);
        let bank = TemplateBank::builtin();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = make_element_sample(
                &p,
                TaskKind::Grounding,
                &bank,
                &mut rng,
                &SynthConfig::default(),
                &ctx(),
            )
            .unwrap();
            let k = s.qa_pairs();
            assert!((3..=10).contains(&k), "{k}");
            let targets: Vec<u64> = s.meta["targets"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap())
                .collect();
            let mut dedup = targets.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), targets.len());
        }
    }

    #[test]
    fn page_samples() {
        let p = page(vec![]);
        let bank = TemplateBank::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = make_page_sample(&p, TaskKind::PageTitle, &bank, &mut rng, &ctx()).unwrap();
        assert_eq!(s.turns.len(), 2);
        assert_eq!(s.turns[1].text, "Google");
        let err = make_page_sample(&p, TaskKind::PageDescription, &bank, &mut rng, &ctx()).unwrap_err();
        assert!(matches!(err, SynthError::EmptyField(TaskKind::PageDescription)));
        assert!(err.is_skip());
    }

    #[test]
    fn no_eligible_elements() {
        let p = page(vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = make_element_sample(
            &p,
            TaskKind::OCR,
            &TemplateBank::builtin(),
            &mut rng,
            &SynthConfig::default(),
            &ctx(),
        )
        .unwrap_err();
        assert!(matches!(err, SynthError::NoEligible(TaskKind::OCR)));
    }

    #[test]
    fn same_seed_same_bytes() {
        let p = page(vec![
            element((192.0, 108.0, 384.0, 216.0), "Gmail", DescriptionSource::VisibleText),
            element((400.0, 108.0, 500.0, 216.0), "Images", DescriptionSource::VisibleText),
        ]);
        let bank = TemplateBank::builtin();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let (s, _) = synthesize_page(&p, &bank, &mut rng, &SynthConfig::default(), &ctx());
            serde_json::to_string(&s).unwrap()
        };
        assert_eq!(run(), run());
    }
}
