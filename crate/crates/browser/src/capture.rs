use std::fmt;
use std::time::Duration;

use base64::Engine;
use rand::Rng;
use serde_json::{json, Value};

use guiforge::capture::{choose_viewport, plan_scrolls, CaptureConfig, CapturedPage, ScrollPlanError};
use guiforge::snapshot::{load_snapshot, SnapshotError};
use guiforge::Viewport;

use crate::protocol::{ProtocolError, Session};

/// Compiled in-page collector shipped with the crate.
pub const DEFAULT_EXTRACTOR: &str = include_str!("../assets/extractor.js");

/// Stops animations and transitions so repeated captures render alike.
const FREEZE_CSS: &str = "*,*::before,*::after{animation:none!important;transition:none!important;caret-color:transparent!important;scroll-behavior:auto!important}";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Connect,
    Setup,
    Navigate,
    Measure,
    Scroll,
    Extract,
    Screenshot,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Connect => "connect",
            Phase::Setup => "setup",
            Phase::Navigate => "navigate",
            Phase::Measure => "measure",
            Phase::Scroll => "scroll",
            Phase::Extract => "extract",
            Phase::Screenshot => "screenshot",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CaptureErrorKind {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("navigation failed: {0}")]
    Navigation(String),
    #[error("script error: {0}")]
    Script(String),
    #[error("malformed extractor output: {0}")]
    Malformed(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Plan(#[from] ScrollPlanError),
    #[error("bad screenshot: {0}")]
    Screenshot(String),
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("{url}: {phase} failed: {kind}")]
pub struct CaptureError {
    pub url: String,
    pub phase: Phase,
    pub kind: CaptureErrorKind,
}

impl CaptureError {
    pub fn new(url: &str, phase: Phase, kind: impl Into<CaptureErrorKind>) -> Self {
        CaptureError {
            url: url.to_string(),
            phase,
            kind: kind.into(),
        }
    }

    /// Whether the session itself is unusable afterwards.
    pub fn is_transport(&self) -> bool {
        matches!(
            self.kind,
            CaptureErrorKind::Protocol(ProtocolError::Closed | ProtocolError::Connect { .. })
        )
    }
}

/// Renders `url` at a viewport drawn from `rng` and captures it at every
/// offset the scroll policy plans for the measured page height.
pub async fn capture_page<R: Rng + ?Sized>(
    session: &mut Session,
    url: &str,
    cfg: &CaptureConfig,
    rng: &mut R,
    extractor: &str,
) -> Result<Vec<CapturedPage>, CaptureError> {
    let viewport = choose_viewport(rng, &cfg.viewport_list);
    let err = |phase: Phase| move |e: ProtocolError| CaptureError::new(url, phase, e);

    session
        .call(
            "Emulation.setDeviceMetricsOverride",
            json!({
                "width": viewport.width,
                "height": viewport.height,
                "deviceScaleFactor": 1,
                "mobile": viewport.width < 800,
            }),
        )
        .await
        .map_err(err(Phase::Setup))?;
    session
        .call(
            "Page.setFontFamilies",
            json!({"fontFamilies": {
                "standard": "DejaVu Sans",
                "sansSerif": "DejaVu Sans",
                "serif": "DejaVu Serif",
                "fixed": "DejaVu Sans Mono",
            }}),
        )
        .await
        .map_err(err(Phase::Setup))?;
    session
        .call("Page.enable", json!({}))
        .await
        .map_err(err(Phase::Setup))?;

    let mut events = session.events();
    let nav = session
        .call("Page.navigate", json!({"url": url}))
        .await
        .map_err(err(Phase::Navigate))?;
    if let Some(text) = nav.get("errorText").and_then(Value::as_str).filter(|t| !t.is_empty()) {
        return Err(CaptureError::new(
            url,
            Phase::Navigate,
            CaptureErrorKind::Navigation(text.to_string()),
        ));
    }
    events
        .wait_for("Page.loadEventFired", cfg.navigation_timeout)
        .await
        .map_err(err(Phase::Navigate))?;

    let freeze = format!(
        "(() => {{ const s = document.createElement('style'); s.textContent = {}; document.documentElement.appendChild(s); return true; }})()",
        serde_json::to_string(FREEZE_CSS).unwrap()
    );
    evaluate(session, &freeze, false)
        .await
        .map_err(|k| CaptureError::new(url, Phase::Setup, k))?;
    tokio::time::sleep(cfg.settle_delay).await;

    let page_height = measure(session)
        .await
        .map_err(|k| CaptureError::new(url, Phase::Measure, k))?;
    let offsets = plan_scrolls(page_height, viewport, cfg.scroll_thresholds)
        .map_err(|e| CaptureError::new(url, Phase::Measure, e))?;

    let mut out = Vec::with_capacity(offsets.len());
    for (capture_index, y) in offsets.into_iter().enumerate() {
        let scroll = format!(
            "(() => {{ window.scrollTo(0, {y}); return new Promise(r => requestAnimationFrame(() => requestAnimationFrame(() => r(window.scrollY)))); }})()"
        );
        evaluate(session, &scroll, true)
            .await
            .map_err(|k| CaptureError::new(url, Phase::Scroll, k))?;
        let snapshot = extract(session, extractor, viewport)
            .await
            .map_err(|k| CaptureError::new(url, Phase::Extract, k))?;
        let screenshot = screenshot(session, viewport)
            .await
            .map_err(|k| CaptureError::new(url, Phase::Screenshot, k))?;
        tracing::debug!(url, capture_index, y, "captured");
        out.push(CapturedPage {
            snapshot,
            screenshot,
            capture_index,
            page_height,
        });
    }
    Ok(out)
}

async fn evaluate(session: &mut Session, expression: &str, await_promise: bool) -> Result<Value, CaptureErrorKind> {
    let reply = session
        .call(
            "Runtime.evaluate",
            json!({"expression": expression, "returnByValue": true, "awaitPromise": await_promise}),
        )
        .await?;
    if let Some(ex) = reply.get("exceptionDetails") {
        let msg = ex
            .pointer("/exception/description")
            .or_else(|| ex.get("text"))
            .and_then(Value::as_str)
            .unwrap_or("uncaught exception");
        return Err(CaptureErrorKind::Script(msg.to_string()));
    }
    Ok(reply.pointer("/result/value").cloned().unwrap_or(Value::Null))
}

async fn measure(session: &mut Session) -> Result<f64, CaptureErrorKind> {
    let m = session.call("Page.getLayoutMetrics", json!({})).await?;
    m.pointer("/cssContentSize/height")
        .or_else(|| m.pointer("/contentSize/height"))
        .and_then(Value::as_f64)
        .ok_or_else(|| CaptureErrorKind::Malformed("layout metrics carry no content height".into()))
}

async fn extract(
    session: &mut Session,
    extractor: &str,
    viewport: Viewport,
) -> Result<guiforge::snapshot::PageSnapshot, CaptureErrorKind> {
    let value = evaluate(session, extractor, false).await?;
    let Some(text) = value.as_str() else {
        return Err(CaptureErrorKind::Malformed(format!(
            "expected a JSON string, got {value}"
        )));
    };
    let doc: Value = serde_json::from_str(text).map_err(|e| CaptureErrorKind::Malformed(e.to_string()))?;
    if let Some(msg) = doc
        .get("error")
        .filter(|_| doc.as_object().is_some_and(|o| o.len() == 1))
    {
        return Err(CaptureErrorKind::Script(
            msg.as_str().map(String::from).unwrap_or_else(|| msg.to_string()),
        ));
    }
    let snapshot = load_snapshot(text.as_bytes())?;
    if (snapshot.viewport.width, snapshot.viewport.height) != (viewport.width, viewport.height) {
        return Err(CaptureErrorKind::Malformed(format!(
            "extractor saw viewport {}, expected {viewport}",
            snapshot.viewport
        )));
    }
    Ok(snapshot)
}

async fn screenshot(session: &mut Session, viewport: Viewport) -> Result<Vec<u8>, CaptureErrorKind> {
    let shot = session
        .call(
            "Page.captureScreenshot",
            json!({"format": "png", "fromSurface": true, "captureBeyondViewport": false}),
        )
        .await?;
    let data = shot
        .get("data")
        .and_then(Value::as_str)
        .ok_or_else(|| CaptureErrorKind::Screenshot("reply has no data".into()))?;
    let png = base64::engine::general_purpose::STANDARD
        .decode(data)
        .map_err(|e| CaptureErrorKind::Screenshot(e.to_string()))?;
    let img = image::load_from_memory_with_format(&png, image::ImageFormat::Png)
        .map_err(|e| CaptureErrorKind::Screenshot(e.to_string()))?;
    if (img.width(), img.height()) != (viewport.width, viewport.height) {
        return Err(CaptureErrorKind::Screenshot(format!(
            "{}x{} image for a {viewport} viewport",
            img.width(),
            img.height()
        )));
    }
    Ok(png)
}

pub(crate) fn default_command_timeout(cfg: &CaptureConfig) -> Duration {
    cfg.navigation_timeout.max(Duration::from_secs(10))
}
