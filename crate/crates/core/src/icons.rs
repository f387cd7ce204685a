//! Icon bank: square glyph rasters paired with textual descriptions.
//!
//! On disk a bank is a directory holding the glyph PNGs and a `manifest.json`
//! of `[{name, file, description}]`.

use std::collections::HashSet;
use std::path::Path;

use image::RgbaImage;
use serde::{Deserialize, Serialize};

use crate::raster::decode_png;

include!(concat!(env!("OUT_DIR"), "/bundled_icons.rs"));

pub const MIN_GLYPH_SIDE: u32 = 16;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum IconBankError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("icon manifest is malformed: {0}")]
    Manifest(String),
    #[error("icon {name}: {reason}")]
    Glyph { name: String, reason: String },
    #[error("icon {0}: description is empty")]
    EmptyDescription(String),
    #[error("icon name {0} appears more than once")]
    DuplicateName(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IconEntry {
    pub name: String,
    pub glyph: RgbaImage,
    pub description: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IconBank {
    entries: Vec<IconEntry>,
}

impl IconBank {
    pub fn new(entries: Vec<IconEntry>) -> Result<Self, IconBankError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.name.as_str()) {
                return Err(IconBankError::DuplicateName(e.name.clone()));
            }
            if e.description.trim().is_empty() {
                return Err(IconBankError::EmptyDescription(e.name.clone()));
            }
            let (w, h) = e.glyph.dimensions();
            if w != h {
                return Err(IconBankError::Glyph {
                    name: e.name.clone(),
                    reason: format!("glyph is {w}x{h}, not square"),
                });
            }
            if w < MIN_GLYPH_SIDE {
                return Err(IconBankError::Glyph {
                    name: e.name.clone(),
                    reason: format!("glyph side {w} below {MIN_GLYPH_SIDE}"),
                });
            }
        }
        Ok(IconBank { entries })
    }

    pub fn load(dir: &Path) -> Result<Self, IconBankError> {
        let read = |p: &Path| {
            std::fs::read(p).map_err(|source| IconBankError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let manifest = read(&dir.join(MANIFEST))?;
        IconBank::from_parts(&manifest, |file| read(&dir.join(file)))
    }

    /// The 50-icon starter bank compiled into the crate.
    pub fn builtin() -> Self {
        let manifest = include_bytes!("../assets/icons/manifest.json");
        IconBank::from_parts(manifest, |file| {
            BUNDLED_GLYPHS
                .iter()
                .find(|(name, _)| *name == file)
                .map(|(_, bytes)| bytes.to_vec())
                .ok_or_else(|| IconBankError::Manifest(format!("{file} is not bundled")))
        })
        .expect("bundled icon bank is valid")
    }

    fn from_parts(
        manifest: &[u8],
        mut read: impl FnMut(&str) -> Result<Vec<u8>, IconBankError>,
    ) -> Result<Self, IconBankError> {
        let manifest: Vec<ManifestEntry> =
            serde_json::from_slice(manifest).map_err(|e| IconBankError::Manifest(e.to_string()))?;
        let mut entries = Vec::with_capacity(manifest.len());
        for m in manifest {
            let glyph = decode_png(&read(&m.file)?).map_err(|e| IconBankError::Glyph {
                name: m.name.clone(),
                reason: e.to_string(),
            })?;
            entries.push(IconEntry {
                name: m.name,
                glyph,
                description: m.description,
            });
        }
        IconBank::new(entries)
    }

    pub fn entries(&self) -> &[IconEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgba;

    fn entry(name: &str, side: u32, desc: &str) -> IconEntry {
        IconEntry {
            name: name.into(),
            glyph: RgbaImage::from_pixel(side, side, Rgba([0, 0, 0, 255])),
            description: desc.into(),
        }
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(IconBank::new(vec![entry("a", 16, "x"), entry("b", 32, "y")]).is_ok());
        assert!(matches!(
            IconBank::new(vec![entry("a", 16, "x"), entry("a", 16, "y")]),
            Err(IconBankError::DuplicateName(_))
        ));
        assert!(matches!(
            IconBank::new(vec![entry("a", 8, "x")]),
            Err(IconBankError::Glyph { .. })
        ));
        assert!(matches!(
            IconBank::new(vec![entry("a", 16, " ")]),
            Err(IconBankError::EmptyDescription(_))
        ));
        let mut wide = entry("w", 16, "x");
        wide.glyph = RgbaImage::new(20, 16);
        assert!(matches!(IconBank::new(vec![wide]), Err(IconBankError::Glyph { .. })));
    }

    #[test]
    fn starter_bank_loads() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/icons");
        let bank = IconBank::load(&dir).unwrap();
        assert_eq!(bank.len(), 50);
        assert_eq!(IconBank::builtin(), bank);
    }
}
