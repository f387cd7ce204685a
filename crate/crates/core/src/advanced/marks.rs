//! Set-of-Mark rendering: numbered boxes over every annotated element.

use image::{Rgba, RgbaImage};

use crate::annotate::PageAnnotation;
use crate::raster::{draw_number, fill_rect, number_extent, stroke_rect, PixelRect};

use super::AdvancedError;

pub const MIN_MARKED_ELEMENTS: usize = 3;
const STROKE: u32 = 2;
const LABEL_SCALE: u32 = 2;
const LABEL_PAD: u32 = 2;

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 160, 160],
    [240, 50, 230],
    [128, 128, 0],
];

#[derive(Debug, Clone)]
pub struct MarkedScreenshot {
    pub image: RgbaImage,
    /// `marks[k - 1]` is the element index carrying mark `k`.
    pub marks: Vec<usize>,
    /// Label chip of each mark, same order as `marks`.
    pub labels: Vec<PixelRect>,
}

impl MarkedScreenshot {
    pub fn element_for(&self, mark: usize) -> Option<usize> {
        mark.checked_sub(1).and_then(|i| self.marks.get(i)).copied()
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }
}

/// Element indices sorted top-to-bottom, then left-to-right by bbox origin.
pub fn reading_order(page: &PageAnnotation) -> Vec<usize> {
    let mut order: Vec<usize> = (0..page.elements.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&page.elements[a].bbox, &page.elements[b].bbox);
        ea.y1.total_cmp(&eb.y1).then(ea.x1.total_cmp(&eb.x1)).then(a.cmp(&b))
    });
    order
}

pub fn render_marks(page: &PageAnnotation, screenshot: &RgbaImage) -> Result<MarkedScreenshot, AdvancedError> {
    if page.elements.len() < MIN_MARKED_ELEMENTS {
        return Err(AdvancedError::TooFewElements(page.elements.len()));
    }
    let (w, h) = screenshot.dimensions();
    let mut image = screenshot.clone();
    let marks = reading_order(page);
    let mut labels = Vec::with_capacity(marks.len());

    for (i, &el) in marks.iter().enumerate() {
        let mark = i + 1;
        let [r, g, b] = PALETTE[i % PALETTE.len()];
        let color = Rgba([r, g, b, 255]);
        let bbox = &page.elements[el].bbox;
        stroke_rect(
            &mut image,
            PixelRect::covering(bbox.x1, bbox.y1, bbox.x2, bbox.y2, w, h),
            STROKE,
            color,
        );

        let (tw, th) = number_extent(mark, LABEL_SCALE);
        let (cw, ch) = (tw + 2 * LABEL_PAD, th + 2 * LABEL_PAD);
        let x0 = (bbox.x1.max(0.0) as u32).min(w.saturating_sub(cw));
        let y0 = (bbox.y1.max(0.0) as u32).min(h.saturating_sub(ch));
        let chip = PixelRect {
            x0,
            y0,
            x1: (x0 + cw).min(w),
            y1: (y0 + ch).min(h),
        };
        fill_rect(&mut image, chip, color);
        draw_number(
            &mut image,
            x0 + LABEL_PAD,
            y0 + LABEL_PAD,
            mark,
            LABEL_SCALE,
            Rgba([255, 255, 255, 255]),
        );
        labels.push(chip);
    }
    Ok(MarkedScreenshot { image, marks, labels })
}
