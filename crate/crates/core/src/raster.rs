//! Small raster helpers: PNG codec, content addressing and primitive drawing
//! (box strokes, filled chips, a bitmap digit font).

use image::codecs::png::{CompressionType, FilterType as PngFilter, PngEncoder};
use image::{ExtendedColorType, ImageEncoder, ImageFormat, Rgba, RgbaImage};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("image decode failed: {0}")]
    Decode(#[from] image::ImageError),
    #[error("image is {actual_w}x{actual_h}, expected {expected_w}x{expected_h}")]
    Dimensions {
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },
}

pub fn decode_png(bytes: &[u8]) -> Result<RgbaImage, RasterError> {
    Ok(image::load_from_memory_with_format(bytes, ImageFormat::Png)?.to_rgba8())
}

pub fn encode_png(img: &RgbaImage) -> Vec<u8> {
    let mut out = Vec::new();
    PngEncoder::new_with_quality(&mut out, CompressionType::Fast, PngFilter::Sub)
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgba8)
        .expect("PNG encoding into memory cannot fail");
    out
}

/// Reads only the PNG header.
pub fn png_dimensions(bytes: &[u8]) -> Result<(u32, u32), RasterError> {
    let reader = image::ImageReader::with_format(std::io::Cursor::new(bytes), ImageFormat::Png);
    Ok(reader.into_dimensions()?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Dataset-relative path of a stored image.
pub fn image_key(png: &[u8]) -> String {
    format!("images/{}.png", sha256_hex(png))
}

/// Integer pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    /// Smallest pixel rect covering `[x1,x2] x [y1,y2]`, clamped to the image.
    pub fn covering(x1: f64, y1: f64, x2: f64, y2: f64, width: u32, height: u32) -> PixelRect {
        let clamp = |v: f64, hi: u32| v.max(0.0).min(hi as f64) as u32;
        PixelRect {
            x0: clamp(x1.floor(), width),
            y0: clamp(y1.floor(), height),
            x1: clamp(x2.ceil(), width),
            y1: clamp(y2.ceil(), height),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }
}

pub fn fill_rect(img: &mut RgbaImage, r: PixelRect, color: Rgba<u8>) {
    let (w, h) = img.dimensions();
    for y in r.y0..r.y1.min(h) {
        for x in r.x0..r.x1.min(w) {
            img.put_pixel(x, y, color);
        }
    }
}

/// Outline of `r` drawn inward with the given stroke width.
pub fn stroke_rect(img: &mut RgbaImage, r: PixelRect, stroke: u32, color: Rgba<u8>) {
    if r.is_empty() {
        return;
    }
    let s = stroke.max(1);
    let band = |a: u32, b: u32| (a, a.saturating_add(s).min(b), b.saturating_sub(s).max(a), b);
    let (x0, x0s, x1s, x1) = band(r.x0, r.x1);
    let (y0, y0s, y1s, y1) = band(r.y0, r.y1);
    fill_rect(img, PixelRect { x0, y0, x1, y1: y0s }, color);
    fill_rect(img, PixelRect { x0, y0: y1s, x1, y1 }, color);
    fill_rect(img, PixelRect { x0, y0, x1: x0s, y1 }, color);
    fill_rect(img, PixelRect { x0: x1s, y0, x1, y1 }, color);
}

// 3x5 glyphs, one row per entry, high bit on the left.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

pub const GLYPH_W: u32 = 3;
pub const GLYPH_H: u32 = 5;

/// Pixel size of `n` rendered by [`draw_number`].
pub fn number_extent(n: usize, scale: u32) -> (u32, u32) {
    let digits = n.to_string().len() as u32;
    ((digits * (GLYPH_W + 1) - 1) * scale, GLYPH_H * scale)
}

pub fn draw_number(img: &mut RgbaImage, x: u32, y: u32, n: usize, scale: u32, color: Rgba<u8>) {
    let mut cx = x;
    for ch in n.to_string().bytes() {
        let glyph = DIGITS[(ch - b'0') as usize];
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..GLYPH_W {
                if bits & (1 << (GLYPH_W - 1 - col)) != 0 {
                    let px = cx + col * scale;
                    let py = y + row as u32 * scale;
                    fill_rect(
                        img,
                        PixelRect {
                            x0: px,
                            y0: py,
                            x1: px + scale,
                            y1: py + scale,
                        },
                        color,
                    );
                }
            }
        }
        cx += (GLYPH_W + 1) * scale;
    }
}
