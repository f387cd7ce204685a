//! Stage drivers over on-disk page directories.
//!
//! A page directory holds `snapshot.json`, `screenshot.png` and optionally
//! `capture.json` ([`CaptureInfo`]). The annotate stage adds
//! `annotation.json` next to copies of those files, so every later stage
//! reads only annotated page directories. Work within a stage runs in
//! parallel; output order follows the sorted page names, and every random
//! draw is seeded from `(seed, url, capture_index, stage)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::advanced::{AdvancedError, AdvancedSynth, GenerationClient, PromptSet};
use crate::annotate::{annotate_page, AnnotatorConfig, PageAnnotation};
use crate::augment::{
    embed_icons, make_highlight_sample, make_icon_pair_samples, random_crop, AugmentConfig, StoredImage,
};
use crate::capture::CapturedPage;
use crate::codec::CoordCodec;
use crate::config::PipelineConfig;
use crate::dataset::{dedup, split, write_dataset, DatasetError, Manifest};
use crate::icons::IconBank;
use crate::raster::{decode_png, image_key, png_dimensions};
use crate::sample::{QASample, Source, TaskKind};
use crate::seed::rng_for;
use crate::snapshot::{load_snapshot, PageSnapshot};
use crate::synth::{make_element_sample, synthesize_page, SampleContext, SynthConfig};
use crate::templates::TemplateBank;

pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const SCREENSHOT_FILE: &str = "screenshot.png";
pub const CAPTURE_FILE: &str = "capture.json";
pub const ANNOTATION_FILE: &str = "annotation.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn invalid(path: &Path, message: impl ToString) -> PipelineError {
    PipelineError::Invalid {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Sidecar recorded at capture time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureInfo {
    pub capture_index: usize,
    pub page_height: f64,
    pub source: Source,
}

/// Per-item failure inside a stage. Failures do not stop the stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemError {
    pub item: String,
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageSummary {
    pub items: usize,
    pub samples: usize,
    pub skipped: usize,
    pub rejected_items: usize,
    pub errors: Vec<ItemError>,
}

impl StageSummary {
    fn absorb(&mut self, other: StageSummary) {
        self.items += other.items;
        self.samples += other.samples;
        self.skipped += other.skipped;
        self.rejected_items += other.rejected_items;
        self.errors.extend(other.errors);
    }
}

/// Sorted page directories under `input`. A directory that itself holds
/// `file` is taken as a single page.
pub fn page_dirs(input: &Path, file: &str) -> Result<Vec<PathBuf>, PipelineError> {
    if input.join(file).is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut dirs = Vec::new();
    for entry in std::fs::read_dir(input).map_err(io_err(input))? {
        let path = entry.map_err(io_err(input))?.path();
        if path.join(file).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

fn page_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "page".into())
}

fn read(path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(io_err(path))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn to_json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

/// Writes one capture as a page directory named `name` under `out`.
pub fn write_capture(
    out: &Path,
    name: &str,
    captured: &CapturedPage,
    source: Source,
) -> Result<PathBuf, PipelineError> {
    let dir = out.join(name);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write(&dir.join(SNAPSHOT_FILE), captured.snapshot.to_json().as_bytes())?;
    write(&dir.join(SCREENSHOT_FILE), &captured.screenshot)?;
    let info = CaptureInfo {
        capture_index: captured.capture_index,
        page_height: captured.page_height,
        source,
    };
    write(&dir.join(CAPTURE_FILE), &to_json_bytes(&info))?;
    Ok(dir)
}

/// A raw page directory, loaded.
#[derive(Debug, Clone)]
pub struct RawPage {
    pub name: String,
    pub snapshot: PageSnapshot,
    pub png: Vec<u8>,
    pub info: CaptureInfo,
}

fn read_info(dir: &Path) -> Result<CaptureInfo, PipelineError> {
    let path = dir.join(CAPTURE_FILE);
    if !path.exists() {
        return Ok(CaptureInfo {
            capture_index: 0,
            page_height: 0.0,
            source: Source::Fixture,
        });
    }
    serde_json::from_slice(&read(&path)?).map_err(|e| invalid(&path, e))
}

pub fn load_raw_page(dir: &Path) -> Result<RawPage, PipelineError> {
    let snap_path = dir.join(SNAPSHOT_FILE);
    let snapshot = load_snapshot(&read(&snap_path)?).map_err(|e| invalid(&snap_path, e))?;
    let shot_path = dir.join(SCREENSHOT_FILE);
    let png = read(&shot_path)?;
    let (w, h) = png_dimensions(&png).map_err(|e| invalid(&shot_path, e))?;
    if (w, h) != (snapshot.viewport.width, snapshot.viewport.height) {
        return Err(invalid(
            &shot_path,
            format!("screenshot is {w}x{h}, snapshot viewport is {}", snapshot.viewport),
        ));
    }
    Ok(RawPage {
        name: page_name(dir),
        snapshot,
        png,
        info: read_info(dir)?,
    })
}

/// An annotated page: the unit every synthesis stage works on.
#[derive(Debug, Clone)]
pub struct AnnotatedPage {
    pub name: String,
    pub annotation: PageAnnotation,
    pub png: Vec<u8>,
    pub source: Source,
}

impl AnnotatedPage {
    fn context(&self, seed: u64, prefix: &str) -> SampleContext {
        SampleContext::new(prefix, self.annotation.screenshot.clone(), self.source, seed)
    }

    fn rng(&self, seed: u64, stage: &str) -> crate::seed::PipelineRng {
        let ci = self.annotation.capture_index.to_string();
        rng_for(seed, &[&self.annotation.url, &ci, stage])
    }
}

pub fn annotate_raw(page: &RawPage, cfg: &AnnotatorConfig) -> AnnotatedPage {
    let annotation = annotate_page(
        &page.snapshot,
        SNAPSHOT_FILE,
        &image_key(&page.png),
        page.info.capture_index,
        cfg,
    );
    AnnotatedPage {
        name: page.name.clone(),
        annotation,
        png: page.png.clone(),
        source: page.info.source,
    }
}

pub fn load_annotated_page(dir: &Path) -> Result<AnnotatedPage, PipelineError> {
    let ann_path = dir.join(ANNOTATION_FILE);
    let annotation: PageAnnotation = serde_json::from_slice(&read(&ann_path)?).map_err(|e| invalid(&ann_path, e))?;
    let png = read(&dir.join(SCREENSHOT_FILE))?;
    if image_key(&png) != annotation.screenshot {
        return Err(invalid(
            &ann_path,
            "screenshot does not match the annotation's image key",
        ));
    }
    Ok(AnnotatedPage {
        name: page_name(dir),
        annotation,
        png,
        source: read_info(dir)?.source,
    })
}

pub fn write_annotated_page(out: &Path, page: &AnnotatedPage, raw: &RawPage) -> Result<(), PipelineError> {
    let dir = out.join(&page.name);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write(&dir.join(ANNOTATION_FILE), &to_json_bytes(&page.annotation))?;
    write(&dir.join(SNAPSHOT_FILE), raw.snapshot.to_json().as_bytes())?;
    write(&dir.join(SCREENSHOT_FILE), &page.png)?;
    write(&dir.join(CAPTURE_FILE), &to_json_bytes(&raw.info))?;
    Ok(())
}

/// Loads every page under `input`, collecting failures per page.
fn load_all<T: Send>(
    dirs: &[PathBuf],
    stage: &'static str,
    f: impl Fn(&Path) -> Result<T, PipelineError> + Sync,
) -> (Vec<T>, Vec<ItemError>) {
    let results: Vec<_> = dirs.par_iter().map(|d| (d, f(d))).collect();
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (d, r) in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => errors.push(ItemError {
                item: page_name(d),
                stage,
                message: e.to_string(),
            }),
        }
    }
    (ok, errors)
}

/// `annotate` stage: raw page directories to annotated page directories.
pub fn annotate_stage(input: &Path, out: &Path, cfg: &AnnotatorConfig) -> Result<StageSummary, PipelineError> {
    let dirs = page_dirs(input, SNAPSHOT_FILE)?;
    let (raw, mut errors) = load_all(&dirs, "annotate", load_raw_page);
    let written: Vec<_> = raw
        .par_iter()
        .map(|r| {
            let page = annotate_raw(r, cfg);
            (
                r.name.clone(),
                page.annotation.elements.len(),
                write_annotated_page(out, &page, r),
            )
        })
        .collect();
    let mut summary = StageSummary {
        items: dirs.len(),
        ..StageSummary::default()
    };
    for (name, n, res) in written {
        match res {
            Ok(()) => summary.samples += n,
            Err(e) => errors.push(ItemError {
                item: name,
                stage: "annotate",
                message: e.to_string(),
            }),
        }
    }
    summary.errors = errors;
    Ok(summary)
}

/// Samples plus the images they reference.
#[derive(Debug, Clone, Default)]
pub struct StageOutput {
    pub samples: Vec<QASample>,
    pub images: BTreeMap<String, Vec<u8>>,
    pub summary: StageSummary,
}

impl StageOutput {
    fn add_image(&mut self, img: StoredImage) {
        self.images.entry(img.key).or_insert(img.png);
    }

    fn extend(&mut self, other: StageOutput) {
        self.samples.extend(other.samples);
        self.images.extend(other.images);
        self.summary.absorb(other.summary);
    }

    /// Drops images no remaining sample references.
    fn prune(&mut self) {
        let used: std::collections::HashSet<&str> = self.samples.iter().map(|s| s.image.as_str()).collect();
        self.images.retain(|k, _| used.contains(k.as_str()));
    }
}

/// Runs `f` over pages in parallel and concatenates results in page order.
fn per_page(pages: &[AnnotatedPage], f: impl Fn(&AnnotatedPage) -> StageOutput + Sync + Send) -> StageOutput {
    let parts: Vec<StageOutput> = pages.par_iter().map(f).collect();
    let mut out = StageOutput::default();
    for p in parts {
        out.extend(p);
    }
    out.summary.items = pages.len();
    out
}

fn item_error(
    page: &AnnotatedPage,
    stage: &'static str,
    task: Option<TaskKind>,
    e: impl std::fmt::Display,
) -> ItemError {
    ItemError {
        item: match task {
            Some(t) => format!("{}/{t}", page.name),
            None => page.name.clone(),
        },
        stage,
        message: e.to_string(),
    }
}

/// Elementary template tasks over the raw screenshots.
pub fn synthesize_pages(
    pages: &[AnnotatedPage],
    templates: &TemplateBank,
    cfg: &SynthConfig,
    seed: u64,
) -> StageOutput {
    per_page(pages, |page| {
        let mut out = StageOutput::default();
        let mut rng = page.rng(seed, "synthesize");
        let ctx = page.context(seed, &page.name);
        let (samples, errors) = synthesize_page(&page.annotation, templates, &mut rng, cfg, &ctx);
        if !samples.is_empty() {
            out.images.insert(page.annotation.screenshot.clone(), page.png.clone());
        }
        out.summary.samples = samples.len();
        out.summary.errors = errors
            .into_iter()
            .map(|(t, e)| item_error(page, "synthesize", Some(t), e))
            .collect();
        out.samples = samples;
        out
    })
}

/// Everything the augment stage reads besides the pages.
pub struct AugmentInputs<'a> {
    pub templates: &'a TemplateBank,
    pub icons: &'a IconBank,
    pub synth: SynthConfig,
    pub augment: AugmentConfig,
}

fn augment_page(page: &AnnotatedPage, inputs: &AugmentInputs<'_>, seed: u64) -> StageOutput {
    let mut out = StageOutput::default();
    let mut rng = page.rng(seed, "augment");
    if !rng.random_bool(inputs.augment.augment_fraction.clamp(0.0, 1.0)) {
        out.summary.skipped = 1;
        return out;
    }
    let cfg = &inputs.augment;
    let codec = inputs.synth.codec();
    let shot = match decode_png(&page.png) {
        Ok(s) => s,
        Err(e) => {
            out.summary.errors.push(item_error(page, "augment", None, e));
            return out;
        }
    };
    let ann = &page.annotation;

    // Random crop, then grounding and referring over the cropped view.
    if !ann.elements.is_empty() {
        match random_crop(ann, &shot, &mut rng, cfg) {
            Ok((img, cropped, spec)) => {
                let stored = StoredImage::from_rgba(&img);
                let mut ctx = page.context(seed, &format!("{}/crop", page.name));
                ctx.image = stored.key.clone();
                ctx.extra_meta.insert(
                    "crop".into(),
                    json!({
                        "x": spec.origin.x,
                        "y": spec.origin.y,
                        "width": spec.width,
                        "height": spec.height,
                        "keep_threshold": spec.keep_threshold,
                    }),
                );
                let mut used = false;
                for task in [TaskKind::Grounding, TaskKind::Referring] {
                    match make_element_sample(&cropped, task, inputs.templates, &mut rng, &inputs.synth, &ctx) {
                        Ok(s) => {
                            used = true;
                            out.samples.push(s);
                        }
                        Err(e) if e.is_skip() => {}
                        Err(e) => out.summary.errors.push(item_error(page, "augment", Some(task), e)),
                    }
                }
                if used {
                    out.add_image(stored);
                }
            }
            Err(e) => out.summary.errors.push(item_error(page, "augment", None, e)),
        }
    }

    // Highlighted element.
    let ctx = page.context(seed, &page.name);
    match make_highlight_sample(ann, &shot, inputs.templates, &mut rng, cfg, &codec, &ctx) {
        Ok((stored, s)) => {
            out.add_image(stored);
            out.samples.push(s);
        }
        Err(crate::augment::AugmentError::NoEligible) => {}
        Err(e) => out
            .summary
            .errors
            .push(item_error(page, "augment", Some(TaskKind::HighlightBox), e)),
    }

    // Embedded icons, then icon grounding and referring over them.
    if !inputs.icons.is_empty() {
        match embed_icons(ann, &shot, inputs.icons, &mut rng, cfg.icons_per_page, cfg) {
            Ok((img, placed)) if !placed.is_empty() => {
                let stored = StoredImage::from_rgba(&img);
                let mut ctx = page.context(seed, &format!("{}/icons", page.name));
                ctx.image = stored.key.clone();
                ctx.extra_meta.insert(
                    "embedded".into(),
                    json!(placed
                        .iter()
                        .map(|e| json!({"bbox": [e.bbox.x1, e.bbox.y1, e.bbox.x2, e.bbox.y2], "description": e.description}))
                        .collect::<Vec<_>>()),
                );
                let mut with_icons = ann.clone();
                with_icons.screenshot = stored.key.clone();
                with_icons.elements.extend(placed);
                let mut used = false;
                for task in [TaskKind::IconGrounding, TaskKind::IconReferring] {
                    match make_element_sample(&with_icons, task, inputs.templates, &mut rng, &inputs.synth, &ctx) {
                        Ok(s) => {
                            used = true;
                            out.samples.push(s);
                        }
                        Err(e) if e.is_skip() => {}
                        Err(e) => out.summary.errors.push(item_error(page, "augment", Some(task), e)),
                    }
                }
                if used {
                    out.add_image(stored);
                }
            }
            Ok(_) => {}
            Err(e) => out.summary.errors.push(item_error(page, "augment", None, e)),
        }
    }
    out.summary.samples = out.samples.len();
    out
}

/// Crops, highlight overlays and icon embedding on a seeded share of pages,
/// plus one icon-description sample per bank entry.
pub fn augment_pages(pages: &[AnnotatedPage], inputs: &AugmentInputs<'_>, seed: u64) -> StageOutput {
    let mut out = per_page(pages, |p| augment_page(p, inputs, seed));
    let mut rng = rng_for(seed, &["icon-pairs"]);
    match make_icon_pair_samples(inputs.icons, inputs.templates, &mut rng, seed) {
        Ok(pairs) => {
            for (img, s) in pairs {
                out.add_image(img);
                out.samples.push(s);
                out.summary.samples += 1;
            }
        }
        Err(e) => out.summary.errors.push(ItemError {
            item: "icon-bank".into(),
            stage: "augment",
            message: e.to_string(),
        }),
    }
    out
}

/// Model-assisted tasks over Set-of-Mark renderings; `workers` bounds the
/// number of concurrent client requests.
pub fn advanced_pages(
    pages: &[AnnotatedPage],
    client: &dyn GenerationClient,
    prompts: &PromptSet,
    templates: &TemplateBank,
    codec: CoordCodec,
    seed: u64,
    workers: usize,
) -> StageOutput {
    let synth = AdvancedSynth {
        client,
        prompts,
        templates,
        codec,
    };
    let run = || {
        per_page(pages, |page| {
            let mut out = StageOutput::default();
            let shot = match decode_png(&page.png) {
                Ok(s) => s,
                Err(e) => {
                    out.summary.errors.push(item_error(page, "advanced", None, e));
                    return out;
                }
            };
            let mut rng = page.rng(seed, "advanced");
            let ctx = page.context(seed, &page.name);
            match synth.run_page(&page.annotation, &shot, &mut rng, &ctx) {
                Ok((samples, rejected, errors)) => {
                    if !samples.is_empty() {
                        out.images.insert(page.annotation.screenshot.clone(), page.png.clone());
                    }
                    out.summary.samples = samples.len();
                    out.summary.rejected_items = rejected.len();
                    for (task, e) in errors {
                        if let AdvancedError::EmptyYield(r) = &e {
                            out.summary.rejected_items += r.len();
                            out.summary.skipped += 1;
                            continue;
                        }
                        out.summary.errors.push(item_error(page, "advanced", Some(task), e));
                    }
                    out.samples = samples;
                }
                Err(e) if e.is_skip() => out.summary.skipped = 1,
                Err(e) => out.summary.errors.push(item_error(page, "advanced", None, e)),
            }
            out
        })
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

/// Loads annotated page directories, collecting per-page failures.
pub fn load_annotated(input: &Path) -> Result<(Vec<AnnotatedPage>, Vec<ItemError>), PipelineError> {
    let dirs = page_dirs(input, ANNOTATION_FILE)?;
    Ok(load_all(&dirs, "load", load_annotated_page))
}

/// Loads raw page directories and annotates them in memory.
pub fn load_and_annotate(
    input: &Path,
    cfg: &AnnotatorConfig,
) -> Result<(Vec<AnnotatedPage>, Vec<ItemError>), PipelineError> {
    let dirs = page_dirs(input, SNAPSHOT_FILE)?;
    let (raw, errors) = load_all(&dirs, "annotate", load_raw_page);
    Ok((raw.par_iter().map(|r| annotate_raw(r, cfg)).collect(), errors))
}

/// Which stages a fused run includes after annotation and synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub augment: bool,
    pub advanced: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        augment: true,
        advanced: true,
    };
    pub const ELEMENTARY: Stages = Stages {
        augment: false,
        advanced: false,
    };
}

/// Shared inputs of the synthesis stages, loaded once from a config.
pub struct Resources {
    pub templates: TemplateBank,
    pub icons: IconBank,
    pub prompts: PromptSet,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self, String> {
        let templates = match &cfg.synthesis.template_path {
            Some(p) => crate::templates::load_templates(p).map_err(|e| format!("synthesis.template_path: {e}"))?,
            None => TemplateBank::builtin(),
        };
        let icons = match &cfg.icons.bank {
            Some(p) => IconBank::load(p).map_err(|e| format!("icons.bank: {e}"))?,
            None => IconBank::builtin(),
        };
        let prompts = match &cfg.advanced.prompt_dir {
            Some(p) => PromptSet::load(p).map_err(|e| format!("advanced.prompt_dir: {e}"))?,
            None => PromptSet::builtin(),
        };
        Ok(Resources {
            templates,
            icons,
            prompts,
        })
    }
}

/// Runs the selected stages over annotated pages and merges the results.
pub fn synthesize_all(
    pages: &[AnnotatedPage],
    cfg: &PipelineConfig,
    res: &Resources,
    client: Option<&dyn GenerationClient>,
    stages: Stages,
) -> StageOutput {
    let synth = cfg.synth_config();
    let mut out = synthesize_pages(pages, &res.templates, &synth, cfg.seed);
    if stages.augment {
        let inputs = AugmentInputs {
            templates: &res.templates,
            icons: &res.icons,
            synth,
            augment: cfg.augment,
        };
        out.extend(augment_pages(pages, &inputs, cfg.seed));
    }
    if stages.advanced {
        if let Some(client) = client {
            out.extend(advanced_pages(
                pages,
                client,
                &res.prompts,
                &res.templates,
                synth.codec(),
                cfg.seed,
                cfg.advanced.max_concurrency,
            ));
        }
    }
    out.summary.items = pages.len();
    out
}

/// Deduplicates and writes a stage's output as a dataset.
pub fn write_output(
    mut out: StageOutput,
    dir: &Path,
    cfg: &PipelineConfig,
) -> Result<(Manifest, StageSummary), PipelineError> {
    out.samples = dedup(out.samples);
    out.prune();
    let manifest = write_dataset(&out.samples, &out.images, dir, cfg.seed, &cfg.digest())?;
    Ok((manifest, out.summary))
}

/// Like [`write_output`], but with `output.val_fraction > 0` the samples are
/// split by page into `dir/train` and `dir/val`, each a complete dataset.
pub fn write_splits(
    mut out: StageOutput,
    dir: &Path,
    cfg: &PipelineConfig,
) -> Result<Vec<(PathBuf, Manifest)>, PipelineError> {
    if cfg.output.val_fraction == 0.0 {
        return Ok(vec![(dir.to_path_buf(), write_output(out, dir, cfg)?.0)]);
    }
    let samples = dedup(std::mem::take(&mut out.samples));
    let (train, val) = split(samples, cfg.output.val_fraction, cfg.seed)?;
    let mut written = Vec::new();
    for (name, part) in [("train", train), ("val", val)] {
        let mut half = StageOutput {
            samples: part,
            images: out.images.clone(),
            summary: StageSummary::default(),
        };
        half.prune();
        let sub = dir.join(name);
        let m = write_dataset(&half.samples, &half.images, &sub, cfg.seed, &cfg.digest())?;
        written.push((sub, m));
    }
    Ok(written)
}

/// Fused run: annotate raw pages in memory, synthesize, write one dataset.
pub fn run_pipeline(
    input: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    res: &Resources,
    client: Option<&dyn GenerationClient>,
    stages: Stages,
) -> Result<(Manifest, StageSummary), PipelineError> {
    let (pages, errors) = load_and_annotate(input, &cfg.annotate)?;
    let mut out = synthesize_all(&pages, cfg, res, client, stages);
    out.summary.errors.splice(0..0, errors);
    write_output(out, out_dir, cfg)
}
