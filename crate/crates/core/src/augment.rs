//! Augmentations: random crops with coordinate remapping, the highlighted
//! element task, icon embedding and plain icon-description pairs.

use std::collections::BTreeMap;

use image::imageops::{self, FilterType};
use image::{Rgba, RgbaImage};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::annotate::{DescriptionSource, ElementAnnotation, ElementKind, PageAnnotation};
use crate::codec::{CodecError, CoordCodec};
use crate::geom::{BBox, Point, Viewport};
use crate::icons::IconBank;
use crate::raster::{encode_png, image_key, stroke_rect, PixelRect};
use crate::sample::{QASample, Source, TaskKind, Turn};
use crate::synth::SampleContext;
use crate::templates::{TemplateBank, TemplateError};

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("page has no elements to augment")]
    NoElements,
    #[error("no element with a description to highlight")]
    NoEligible,
    #[error("icon bank is empty")]
    EmptyBank,
    #[error("screenshot is {actual:?}, annotation viewport is {expected}")]
    ScreenshotSize { expected: Viewport, actual: (u32, u32) },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A rendered image and its content address.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredImage {
    pub key: String,
    pub png: Vec<u8>,
}

impl StoredImage {
    pub fn from_png(png: Vec<u8>) -> Self {
        StoredImage {
            key: image_key(&png),
            png,
        }
    }

    pub fn from_rgba(img: &RgbaImage) -> Self {
        StoredImage::from_png(encode_png(img))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub crop_min_fraction: f64,
    pub crop_max_fraction: f64,
    pub keep_threshold: f64,
    pub overlay_stroke: u32,
    pub overlay_inflate: u32,
    pub overlay_color: [u8; 3],
    pub icon_min_side: u32,
    pub icon_max_side: u32,
    pub icons_per_page: usize,
    pub icon_placement_tries: usize,
    /// Share of pages that receive augmented variants.
    pub augment_fraction: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            crop_min_fraction: 0.6,
            crop_max_fraction: 1.0,
            keep_threshold: 0.7,
            overlay_stroke: 3,
            overlay_inflate: 2,
            overlay_color: [255, 0, 0],
            icon_min_side: 16,
            icon_max_side: 64,
            icons_per_page: 3,
            icon_placement_tries: 50,
            augment_fraction: 0.3,
        }
    }
}

fn check_screenshot(page: &PageAnnotation, shot: &RgbaImage) -> Result<(), AugmentError> {
    if shot.dimensions() != (page.viewport.width, page.viewport.height) {
        return Err(AugmentError::ScreenshotSize {
            expected: page.viewport,
            actual: shot.dimensions(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropSpec {
    pub origin: Point,
    pub width: u32,
    pub height: u32,
    pub keep_threshold: f64,
}

impl CropSpec {
    pub fn identity(viewport: Viewport, keep_threshold: f64) -> Self {
        CropSpec {
            origin: Point::new(0.0, 0.0),
            width: viewport.width,
            height: viewport.height,
            keep_threshold,
        }
    }

    pub fn rect(&self) -> BBox {
        BBox {
            x1: self.origin.x,
            y1: self.origin.y,
            x2: self.origin.x + self.width as f64,
            y2: self.origin.y + self.height as f64,
        }
    }

    /// Crop lies inside the image and each side spans the allowed fraction range.
    pub fn is_valid(&self, image: Viewport, min_fraction: f64, max_fraction: f64) -> bool {
        let within = |len: u32, full: u32| {
            let f = len as f64 / full as f64;
            len > 0 && f >= min_fraction - 1e-12 && f <= max_fraction + 1e-12
        };
        self.origin.x >= 0.0
            && self.origin.y >= 0.0
            && within(self.width, image.width)
            && within(self.height, image.height)
            && image.contains_bbox(&self.rect())
    }
}

/// Remaps one element into crop space, or drops it when less than
/// `keep_threshold` of its area survives.
pub fn remap_element(e: &ElementAnnotation, crop: &CropSpec) -> Option<ElementAnnotation> {
    let visible = e.bbox.intersect(&crop.rect())?;
    if visible.area() / e.bbox.area() < crop.keep_threshold {
        return None;
    }
    Some(ElementAnnotation {
        bbox: visible.translate(-crop.origin.x, -crop.origin.y),
        ..e.clone()
    })
}

/// Applies `crop` to an annotation without touching pixels.
pub fn crop_annotation(page: &PageAnnotation, crop: &CropSpec) -> PageAnnotation {
    PageAnnotation {
        viewport: Viewport::new(crop.width, crop.height),
        elements: page.elements.iter().filter_map(|e| remap_element(e, crop)).collect(),
        ..page.clone()
    }
}

fn sample_side<R: Rng + ?Sized>(rng: &mut R, full: u32, lo: f64, hi: f64) -> u32 {
    let min = ((full as f64 * lo).ceil() as u32).clamp(1, full);
    let max = ((full as f64 * hi).floor() as u32).clamp(min, full);
    rng.random_range(min..=max)
}

pub fn sample_crop<R: Rng + ?Sized>(rng: &mut R, image: Viewport, cfg: &AugmentConfig) -> CropSpec {
    for _ in 0..100 {
        let w = sample_side(rng, image.width, cfg.crop_min_fraction, cfg.crop_max_fraction);
        let h = sample_side(rng, image.height, cfg.crop_min_fraction, cfg.crop_max_fraction);
        let ox = rng.random_range(0..=image.width - w);
        let oy = rng.random_range(0..=image.height - h);
        let spec = CropSpec {
            origin: Point::new(ox as f64, oy as f64),
            width: w,
            height: h,
            keep_threshold: cfg.keep_threshold,
        };
        if spec.is_valid(image, cfg.crop_min_fraction, cfg.crop_max_fraction) {
            return spec;
        }
    }
    CropSpec::identity(image, cfg.keep_threshold)
}

/// Random crop of the screenshot with the annotation remapped to match.
pub fn random_crop<R: Rng + ?Sized>(
    page: &PageAnnotation,
    screenshot: &RgbaImage,
    rng: &mut R,
    cfg: &AugmentConfig,
) -> Result<(RgbaImage, PageAnnotation, CropSpec), AugmentError> {
    if page.elements.is_empty() {
        return Err(AugmentError::NoElements);
    }
    check_screenshot(page, screenshot)?;
    let spec = sample_crop(rng, page.viewport, cfg);
    let img = imageops::crop_imm(
        screenshot,
        spec.origin.x as u32,
        spec.origin.y as u32,
        spec.width,
        spec.height,
    )
    .to_image();
    Ok((img, crop_annotation(page, &spec), spec))
}

/// Draws the highlight box around element `target` and returns the pixel
/// rect that was stroked.
pub fn draw_highlight(img: &mut RgbaImage, bbox: &BBox, cfg: &AugmentConfig) -> PixelRect {
    let inflate = cfg.overlay_inflate as f64;
    let (w, h) = img.dimensions();
    let rect = PixelRect::covering(
        bbox.x1 - inflate,
        bbox.y1 - inflate,
        bbox.x2 + inflate,
        bbox.y2 + inflate,
        w,
        h,
    );
    let [r, g, b] = cfg.overlay_color;
    stroke_rect(img, rect, cfg.overlay_stroke, Rgba([r, g, b, 255]));
    rect
}

/// Highlighted-element task: a box is drawn around a random described
/// element and the answer names it along with its bounding box.
pub fn make_highlight_sample<R: Rng + ?Sized>(
    page: &PageAnnotation,
    screenshot: &RgbaImage,
    bank: &TemplateBank,
    rng: &mut R,
    cfg: &AugmentConfig,
    codec: &CoordCodec,
    ctx: &SampleContext,
) -> Result<(StoredImage, QASample), AugmentError> {
    check_screenshot(page, screenshot)?;
    let pool: Vec<usize> = page
        .elements
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.description.is_empty())
        .map(|(i, _)| i)
        .collect();
    if pool.is_empty() {
        return Err(AugmentError::NoEligible);
    }
    let target = pool[rng.random_range(0..pool.len())];
    let element = &page.elements[target];
    let (template_idx, question) = bank.sample(TaskKind::HighlightBox, rng, "")?;
    let answer = format!(
        "{} {}",
        element.description,
        codec.encode_bbox(&element.bbox, page.viewport)?
    );

    let mut img = screenshot.clone();
    let stroked = draw_highlight(&mut img, &element.bbox, cfg);
    let stored = StoredImage::from_rgba(&img);

    let mut ctx = ctx.clone();
    ctx.image = stored.key.clone();
    let mut sample = ctx.sample(
        page,
        TaskKind::HighlightBox,
        "",
        vec![Turn::user(question), Turn::assistant(answer)],
    );
    sample.meta.insert("template".into(), json!(template_idx));
    sample.meta.insert("targets".into(), json!([target]));
    sample.meta.insert(
        "overlay".into(),
        json!({
            "stroke": cfg.overlay_stroke,
            "inflate": cfg.overlay_inflate,
            "color": cfg.overlay_color,
            "rect": [stroked.x0, stroked.y0, stroked.x1, stroked.y1],
        }),
    );
    Ok((stored, sample))
}

/// Pastes up to `n` icons into free space of the screenshot. Placements never
/// overlap existing elements or each other; draws that find no free spot
/// within the try budget are skipped.
pub fn embed_icons<R: Rng + ?Sized>(
    page: &PageAnnotation,
    screenshot: &RgbaImage,
    bank: &IconBank,
    rng: &mut R,
    n: usize,
    cfg: &AugmentConfig,
) -> Result<(RgbaImage, Vec<ElementAnnotation>), AugmentError> {
    if bank.is_empty() {
        return Err(AugmentError::EmptyBank);
    }
    check_screenshot(page, screenshot)?;
    let (w, h) = screenshot.dimensions();
    let mut img = screenshot.clone();
    let mut placed: Vec<ElementAnnotation> = Vec::new();

    for _ in 0..n {
        let entry = &bank.entries()[rng.random_range(0..bank.len())];
        let lo = cfg.icon_min_side.min(cfg.icon_max_side);
        let side = rng.random_range(lo..=cfg.icon_max_side.max(lo));
        if side > w || side > h {
            continue;
        }
        let mut spot = None;
        for _ in 0..cfg.icon_placement_tries {
            let x = rng.random_range(0..=w - side);
            let y = rng.random_range(0..=h - side);
            let rect = BBox {
                x1: x as f64,
                y1: y as f64,
                x2: (x + side) as f64,
                y2: (y + side) as f64,
            };
            let clear = page
                .elements
                .iter()
                .chain(placed.iter())
                .all(|e| !e.bbox.overlaps(&rect));
            if clear {
                spot = Some((x, y, rect));
                break;
            }
        }
        let Some((x, y, rect)) = spot else { continue };
        let glyph = imageops::resize(&entry.glyph, side, side, FilterType::Triangle);
        imageops::overlay(&mut img, &glyph, x as i64, y as i64);
        placed.push(ElementAnnotation {
            node_id: None,
            kind: ElementKind::Icon,
            bbox: rect,
            description: entry.description.clone(),
            description_source: DescriptionSource::Alt,
            interactive: false,
        });
    }
    Ok((img, placed))
}

/// One icon-description sample per bank entry, each glyph centered on a
/// white canvas.
pub fn make_icon_pair_samples<R: Rng + ?Sized>(
    bank: &IconBank,
    templates: &TemplateBank,
    rng: &mut R,
    seed: u64,
) -> Result<Vec<(StoredImage, QASample)>, AugmentError> {
    let mut out = Vec::with_capacity(bank.len());
    for entry in bank.entries() {
        let (side, _) = entry.glyph.dimensions();
        let pad = side / 4;
        let mut canvas = RgbaImage::from_pixel(side + 2 * pad, side + 2 * pad, Rgba([255, 255, 255, 255]));
        imageops::overlay(&mut canvas, &entry.glyph, pad as i64, pad as i64);
        let stored = StoredImage::from_rgba(&canvas);
        let (template_idx, question) = templates.sample(TaskKind::IconDescribe, rng, "")?;
        let mut meta = BTreeMap::new();
        meta.insert("icon".into(), json!(entry.name));
        meta.insert("seed".into(), json!(seed));
        meta.insert("source".into(), json!(Source::Icon.as_str()));
        meta.insert("template".into(), json!(template_idx));
        let sample = QASample {
            id: format!("icon/{}/{}", entry.name, TaskKind::IconDescribe),
            image: stored.key.clone(),
            width: canvas.width(),
            height: canvas.height(),
            task: TaskKind::IconDescribe,
            source: Source::Icon,
            turns: vec![Turn::user(question), Turn::assistant(entry.description.clone())],
            meta,
        };
        out.push((stored, sample));
    }
    Ok(out)
}
