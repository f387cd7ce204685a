//! Pipeline configuration file (TOML).
//!
//! Relative paths are resolved against the directory holding the file.
//! Validation errors name the offending key, e.g. `synthesis.template_path`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::annotate::AnnotatorConfig;
use crate::augment::AugmentConfig;
use crate::capture::{CaptureConfig, ScrollThresholds, DEFAULT_VIEWPORTS, VIEWPORT_COUNT};
use crate::geom::Viewport;
use crate::raster::sha256_hex;
use crate::synth::SynthConfig;

pub const BROWSER_WS_ENV: &str = "GUIFORGE_BROWSER_WS";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
}

impl ConfigError {
    /// The config key at fault, when the error is about one key.
    pub fn key(&self) -> Option<&'static str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaptureSection {
    /// Falls back to `GUIFORGE_BROWSER_WS`.
    pub protocol_endpoint: Option<String>,
    pub navigation_timeout_secs: f64,
    pub settle_delay_ms: u64,
    /// `"WIDTHxHEIGHT"` strings.
    pub viewports: Vec<String>,
    pub scroll_thresholds: [f64; 2],
    pub session_pool_size: usize,
    pub retries: u32,
    /// Compiled in-page extractor; the browser crate's bundled copy when unset.
    pub extractor_script: Option<PathBuf>,
}

impl Default for CaptureSection {
    fn default() -> Self {
        let d = CaptureConfig::with_endpoint("");
        CaptureSection {
            protocol_endpoint: None,
            navigation_timeout_secs: d.navigation_timeout.as_secs_f64(),
            settle_delay_ms: d.settle_delay.as_millis() as u64,
            viewports: DEFAULT_VIEWPORTS.iter().map(Viewport::to_string).collect(),
            scroll_thresholds: [d.scroll_thresholds.t1, d.scroll_thresholds.t2],
            session_pool_size: d.session_pool_size,
            retries: d.retries,
            extractor_script: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisSection {
    pub template_path: Option<PathBuf>,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_precision")]
    pub precision: u32,
}

fn default_k_min() -> usize {
    SynthConfig::default().k_min
}
fn default_k_max() -> usize {
    SynthConfig::default().k_max
}
fn default_precision() -> u32 {
    SynthConfig::default().precision
}

impl Default for SynthesisSection {
    fn default() -> Self {
        SynthesisSection {
            template_path: None,
            k_min: default_k_min(),
            k_max: default_k_max(),
            precision: default_precision(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IconsSection {
    /// Icon bank directory; the bundled bank when unset.
    pub bank: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClientKind {
    Stub,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdvancedSection {
    /// Directory of prompt texts; the bundled prompts when unset.
    pub prompt_dir: Option<PathBuf>,
    pub client: ClientKind,
    /// Required for the http client.
    pub endpoint: Option<String>,
    /// Recorded responses; required for the stub client.
    pub stub_dir: Option<PathBuf>,
    pub timeout_secs: f64,
    pub max_concurrency: usize,
}

impl Default for AdvancedSection {
    fn default() -> Self {
        AdvancedSection {
            prompt_dir: None,
            client: ClientKind::Stub,
            endpoint: None,
            stub_dir: None,
            timeout_secs: 120.0,
            max_concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dataset_dir: PathBuf,
    /// Share of pages routed to the validation split; 0 disables splitting.
    pub val_fraction: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dataset_dir: PathBuf::from("dataset"),
            val_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcurrencySection {
    /// Worker threads per stage; 0 uses one per core.
    pub workers: usize,
}

impl Default for ConcurrencySection {
    fn default() -> Self {
        ConcurrencySection { workers: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub capture: CaptureSection,
    #[serde(default)]
    pub annotate: AnnotatorConfig,
    #[serde(default)]
    pub synthesis: SynthesisSection,
    #[serde(default)]
    pub augment: AugmentConfig,
    #[serde(default)]
    pub icons: IconsSection,
    #[serde(default)]
    pub advanced: AdvancedSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub concurrency: ConcurrencySection,
}

impl PipelineConfig {
    /// Defaults everywhere, with the bundled templates, icons and prompts.
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            seed,
            capture: CaptureSection::default(),
            annotate: AnnotatorConfig::default(),
            synthesis: SynthesisSection::default(),
            augment: AugmentConfig::default(),
            icons: IconsSection::default(),
            advanced: AdvancedSection::default(),
            output: OutputSection::default(),
            concurrency: ConcurrencySection::default(),
        }
    }

    /// Configuration with defaults everywhere and the given template file.
    pub fn with_templates(seed: u64, template_path: PathBuf) -> Self {
        let mut cfg = PipelineConfig::new(seed);
        cfg.synthesis.template_path = Some(template_path);
        cfg
    }

    /// Parses, resolves relative paths against `base` and validates.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        PipelineConfig::from_toml(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix(&mut self.capture.extractor_script);
        fix(&mut self.synthesis.template_path);
        fix(&mut self.icons.bank);
        fix(&mut self.advanced.prompt_dir);
        fix(&mut self.advanced.stub_dir);
        if self.output.dataset_dir.is_relative() {
            self.output.dataset_dir = base.join(&self.output.dataset_dir);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let exists = |key: &'static str, p: &Option<PathBuf>, required: bool| -> Result<(), ConfigError> {
            match p {
                None if required => Err(invalid(key, "is required")),
                Some(p) if !p.exists() => Err(invalid(key, format!("{} does not exist", p.display()))),
                _ => Ok(()),
            }
        };

        let c = &self.capture;
        if c.viewports.len() != VIEWPORT_COUNT {
            return Err(invalid(
                "capture.viewports",
                format!("must list exactly {VIEWPORT_COUNT} sizes, got {}", c.viewports.len()),
            ));
        }
        self.viewports()?;
        let [t1, t2] = c.scroll_thresholds;
        if !(t1 > 0.0 && t1 < t2 && t2.is_finite()) {
            return Err(invalid("capture.scroll_thresholds", "must satisfy 0 < t1 < t2"));
        }
        if !(c.navigation_timeout_secs > 0.0 && c.navigation_timeout_secs.is_finite()) {
            return Err(invalid("capture.navigation_timeout_secs", "must be positive"));
        }
        if c.session_pool_size == 0 {
            return Err(invalid("capture.session_pool_size", "must be positive"));
        }
        exists("capture.extractor_script", &c.extractor_script, false)?;

        let a = &self.annotate;
        if !(a.min_visible_side >= 0.0 && a.opacity_floor >= 0.0 && a.opacity_floor <= 1.0 && a.icon_max_side > 0.0) {
            return Err(invalid("annotate", "thresholds out of range"));
        }

        let s = &self.synthesis;
        exists("synthesis.template_path", &s.template_path, true)?;
        if s.k_min == 0 || s.k_min > s.k_max {
            return Err(invalid("synthesis.k_min", "need 1 <= k_min <= k_max"));
        }
        if s.precision == 0 || s.precision > 6 {
            return Err(invalid("synthesis.precision", "must be between 1 and 6"));
        }

        exists("icons.bank", &self.icons.bank, false)?;
        let p = &self.augment;
        if !(p.crop_min_fraction > 0.0 && p.crop_min_fraction <= p.crop_max_fraction && p.crop_max_fraction <= 1.0) {
            return Err(invalid(
                "augment.crop_min_fraction",
                "need 0 < crop_min_fraction <= crop_max_fraction <= 1",
            ));
        }
        if !(p.keep_threshold > 0.0 && p.keep_threshold <= 1.0) {
            return Err(invalid("augment.keep_threshold", "must be in (0, 1]"));
        }
        if p.icon_min_side == 0 || p.icon_min_side > p.icon_max_side {
            return Err(invalid(
                "augment.icon_min_side",
                "need 0 < icon_min_side <= icon_max_side",
            ));
        }
        if !(0.0..=1.0).contains(&p.augment_fraction) {
            return Err(invalid("augment.augment_fraction", "must be in [0, 1]"));
        }

        let v = &self.advanced;
        exists("advanced.prompt_dir", &v.prompt_dir, false)?;
        match v.client {
            ClientKind::Stub => exists("advanced.stub_dir", &v.stub_dir, true)?,
            ClientKind::Http if v.endpoint.as_deref().is_none_or(str::is_empty) => {
                return Err(invalid("advanced.endpoint", "is required for the http client"))
            }
            ClientKind::Http => {}
        }
        if !(v.timeout_secs > 0.0 && v.timeout_secs.is_finite()) {
            return Err(invalid("advanced.timeout_secs", "must be positive"));
        }
        if v.max_concurrency == 0 {
            return Err(invalid("advanced.max_concurrency", "must be positive"));
        }

        if !(0.0..1.0).contains(&self.output.val_fraction) {
            return Err(invalid("output.val_fraction", "must be in [0, 1)"));
        }
        Ok(())
    }

    pub fn viewports(&self) -> Result<Vec<Viewport>, ConfigError> {
        self.capture
            .viewports
            .iter()
            .map(|s| {
                parse_viewport(s).ok_or_else(|| invalid("capture.viewports", format!("{s:?} is not WIDTHxHEIGHT")))
            })
            .collect()
    }

    /// Capture settings; the endpoint comes from the file or `GUIFORGE_BROWSER_WS`.
    pub fn capture_config(&self) -> Result<CaptureConfig, ConfigError> {
        let endpoint = match &self.capture.protocol_endpoint {
            Some(e) => e.clone(),
            None => std::env::var(BROWSER_WS_ENV).map_err(|_| {
                invalid(
                    "capture.protocol_endpoint",
                    format!("not set and {BROWSER_WS_ENV} is unset"),
                )
            })?,
        };
        let c = &self.capture;
        Ok(CaptureConfig {
            protocol_endpoint: endpoint,
            navigation_timeout: Duration::from_secs_f64(c.navigation_timeout_secs),
            settle_delay: Duration::from_millis(c.settle_delay_ms),
            viewport_list: self.viewports()?,
            scroll_thresholds: ScrollThresholds {
                t1: c.scroll_thresholds[0],
                t2: c.scroll_thresholds[1],
            },
            session_pool_size: c.session_pool_size,
            retries: c.retries,
        })
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            k_min: self.synthesis.k_min,
            k_max: self.synthesis.k_max,
            precision: self.synthesis.precision,
        }
    }

    /// Digest of the canonical JSON form of the configuration.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

pub fn parse_viewport(s: &str) -> Option<Viewport> {
    let (w, h) = s.trim().split_once(['x', 'X'])?;
    let (w, h) = (w.trim().parse().ok()?, h.trim().parse().ok()?);
    (w > 0 && h > 0).then(|| Viewport::new(w, h))
}
