//! Capture planning: viewport sampling, the scroll policy and the captured
//! page record. The browser driver itself lives in the `guiforge-browser`
//! crate.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::Viewport;
use crate::snapshot::PageSnapshot;

/// Desktop, tablet and mobile sizes sampled when rendering a page.
pub const DEFAULT_VIEWPORTS: [Viewport; 16] = [
    Viewport::new(1920, 1080),
    Viewport::new(1366, 768),
    Viewport::new(1536, 864),
    Viewport::new(1440, 900),
    Viewport::new(1280, 720),
    Viewport::new(2560, 1440),
    Viewport::new(1600, 900),
    Viewport::new(1280, 800),
    Viewport::new(1024, 768),
    Viewport::new(768, 1024),
    Viewport::new(810, 1080),
    Viewport::new(834, 1112),
    Viewport::new(360, 640),
    Viewport::new(375, 667),
    Viewport::new(390, 844),
    Viewport::new(414, 896),
];

pub const VIEWPORT_COUNT: usize = 16;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CaptureConfigError {
    #[error("viewport_list must hold exactly {VIEWPORT_COUNT} entries, got {0}")]
    ViewportCount(usize),
    #[error("viewport {0} has a zero dimension")]
    EmptyViewport(Viewport),
    #[error("scroll thresholds must satisfy 0 < t1 < t2, got ({0}, {1})")]
    Thresholds(f64, f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

/// Ratios of page height to viewport height separating short, long and very
/// long pages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrollThresholds {
    pub t1: f64,
    pub t2: f64,
}

impl Default for ScrollThresholds {
    fn default() -> Self {
        ScrollThresholds { t1: 1.0, t2: 2.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureConfig {
    pub protocol_endpoint: String,
    pub navigation_timeout: Duration,
    pub settle_delay: Duration,
    pub viewport_list: Vec<Viewport>,
    pub scroll_thresholds: ScrollThresholds,
    pub session_pool_size: usize,
    /// Extra attempts after a failed page visit.
    pub retries: u32,
}

impl CaptureConfig {
    pub fn with_endpoint(endpoint: impl Into<String>) -> Self {
        CaptureConfig {
            protocol_endpoint: endpoint.into(),
            navigation_timeout: Duration::from_secs(30),
            settle_delay: Duration::from_millis(500),
            viewport_list: DEFAULT_VIEWPORTS.to_vec(),
            scroll_thresholds: ScrollThresholds::default(),
            session_pool_size: 4,
            retries: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CaptureConfigError> {
        if self.viewport_list.len() != VIEWPORT_COUNT {
            return Err(CaptureConfigError::ViewportCount(self.viewport_list.len()));
        }
        if let Some(v) = self.viewport_list.iter().find(|v| v.width == 0 || v.height == 0) {
            return Err(CaptureConfigError::EmptyViewport(*v));
        }
        let ScrollThresholds { t1, t2 } = self.scroll_thresholds;
        if !(t1 > 0.0 && t1 < t2 && t2.is_finite()) {
            return Err(CaptureConfigError::Thresholds(t1, t2));
        }
        if self.navigation_timeout.is_zero() {
            return Err(CaptureConfigError::NonPositive("navigation_timeout"));
        }
        if self.session_pool_size == 0 {
            return Err(CaptureConfigError::NonPositive("session_pool_size"));
        }
        Ok(())
    }
}

/// Uniform draw from `viewports`.
///
/// # Panics
///
/// Panics if `viewports` is empty.
pub fn choose_viewport<R: Rng + ?Sized>(rng: &mut R, viewports: &[Viewport]) -> Viewport {
    assert!(!viewports.is_empty(), "viewport list is empty");
    viewports[rng.random_range(0..viewports.len())]
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("scroll planning needs positive page and viewport heights (page {page_height}, viewport {viewport_height})")]
pub struct ScrollPlanError {
    pub page_height: f64,
    pub viewport_height: u32,
}

/// Vertical scroll offsets at which a page is captured.
///
/// Short pages are captured once at the top; long pages at the top and the
/// bottom; very long pages additionally in the middle.
pub fn plan_scrolls(
    page_height: f64,
    viewport: Viewport,
    thresholds: ScrollThresholds,
) -> Result<Vec<u32>, ScrollPlanError> {
    if !(page_height > 0.0 && page_height.is_finite()) || viewport.height == 0 {
        return Err(ScrollPlanError {
            page_height,
            viewport_height: viewport.height,
        });
    }
    let vh = viewport.height as f64;
    let ratio = page_height / vh;
    let bottom = (page_height - vh).max(0.0);
    let mut offsets = vec![0.0];
    if ratio > thresholds.t2 {
        offsets.push((bottom / 2.0).round());
        offsets.push(bottom);
    } else if ratio > thresholds.t1 {
        offsets.push(bottom);
    }
    let mut out: Vec<u32> = offsets.into_iter().map(|o| o.round() as u32).collect();
    out.dedup();
    Ok(out)
}

/// One viewport capture of a page.
#[derive(Debug, Clone)]
pub struct CapturedPage {
    pub snapshot: PageSnapshot,
    /// Lossless PNG whose dimensions equal `snapshot.viewport`.
    pub screenshot: Vec<u8>,
    pub capture_index: usize,
    pub page_height: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plan_scrolls_branches() {
        let vp = Viewport::new(1920, 1080);
        let th = ScrollThresholds::default();
        assert_eq!(plan_scrolls(500.0, vp, th).unwrap(), vec![0]);
        assert_eq!(plan_scrolls(2000.0, vp, th).unwrap(), vec![0, 920]);
        assert_eq!(plan_scrolls(5000.0, vp, th).unwrap(), vec![0, 1960, 3920]);
        // Exactly one viewport tall is still "short".
        assert_eq!(plan_scrolls(1080.0, vp, th).unwrap(), vec![0]);
        assert!(plan_scrolls(0.0, vp, th).is_err());
        assert!(plan_scrolls(-3.0, vp, th).is_err());
    }

    #[test]
    fn low_first_threshold_never_yields_duplicate_offsets() {
        let vp = Viewport::new(800, 1000);
        let th = ScrollThresholds { t1: 0.5, t2: 0.8 };
        assert_eq!(plan_scrolls(900.0, vp, th).unwrap(), vec![0]);
    }

    #[test]
    fn singleton_viewport_list() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let only = Viewport::new(640, 480);
        assert_eq!(choose_viewport(&mut rng, &[only]), only);
    }

    #[test]
    fn choice_is_deterministic_under_seed() {
        let a = choose_viewport(&mut ChaCha8Rng::seed_from_u64(42), &DEFAULT_VIEWPORTS);
        let b = choose_viewport(&mut ChaCha8Rng::seed_from_u64(42), &DEFAULT_VIEWPORTS);
        assert_eq!(a, b);
    }

    #[test]
    fn choice_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000usize;
        let mut counts = [0usize; VIEWPORT_COUNT];
        for _ in 0..draws {
            let v = choose_viewport(&mut rng, &DEFAULT_VIEWPORTS);
            let i = DEFAULT_VIEWPORTS.iter().position(|d| *d == v).unwrap();
            counts[i] += 1;
        }
        let p = 1.0 / VIEWPORT_COUNT as f64;
        let expected = draws as f64 * p;
        let se = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() <= 5.0 * se, "{counts:?}");
        }
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = CaptureConfig::with_endpoint("ws://127.0.0.1:9222/devtools/browser/x");
        cfg.validate().unwrap();
        let mut bad = cfg.clone();
        bad.viewport_list.pop();
        assert_eq!(bad.validate(), Err(CaptureConfigError::ViewportCount(15)));
        let mut bad = cfg;
        bad.scroll_thresholds = ScrollThresholds { t1: 2.0, t2: 1.0 };
        assert!(matches!(bad.validate(), Err(CaptureConfigError::Thresholds(..))));
    }
}
