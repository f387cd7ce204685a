//! Capture driver for guiforge: talks to a headless browser over its
//! remote-debugging WebSocket, renders each url at a sampled viewport and
//! returns snapshot + screenshot pairs for the scroll offsets the capture
//! policy plans.

pub mod capture;
pub mod pool;
pub mod protocol;

pub use capture::{capture_page, CaptureError, CaptureErrorKind, Phase, DEFAULT_EXTRACTOR};
pub use pool::{capture_urls, UrlResult};
pub use protocol::{Connection, ProtocolError, Session};
