use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use guiforge::capture::{CaptureConfig, CapturedPage};
use guiforge::seed::rng_for;

use crate::capture::{capture_page, default_command_timeout, CaptureError, Phase};
use crate::protocol::{Connection, Session};

pub type UrlResult = (String, Result<Vec<CapturedPage>, CaptureError>);

/// Captures every url over up to `session_pool_size` concurrent sessions.
///
/// Results come back in input order. Each url draws its viewport from a
/// stream seeded by `(seed, url)`, so the outcome does not depend on which
/// session picked it up. A failed visit is retried `cfg.retries` times,
/// on a fresh session when the old one is gone.
pub async fn capture_urls(
    cfg: &CaptureConfig,
    urls: &[String],
    seed: u64,
    extractor: &str,
) -> Result<Vec<UrlResult>, CaptureError> {
    let conn = Connection::connect(&cfg.protocol_endpoint)
        .await
        .map_err(|e| CaptureError::new(&cfg.protocol_endpoint, Phase::Connect, e))?;
    let queue: Arc<Mutex<VecDeque<(usize, String)>>> = Arc::new(Mutex::new(urls.iter().cloned().enumerate().collect()));
    let extractor: Arc<str> = extractor.into();
    let workers = cfg.session_pool_size.min(urls.len()).max(1);

    let mut set = tokio::task::JoinSet::new();
    for _ in 0..workers {
        let conn = conn.clone();
        let queue = queue.clone();
        let cfg = cfg.clone();
        let extractor = extractor.clone();
        set.spawn(async move {
            let timeout = default_command_timeout(&cfg);
            let mut done = Vec::new();
            let mut session: Option<Session> = None;
            loop {
                let Some((idx, url)) = queue.lock().unwrap().pop_front() else {
                    break;
                };
                let mut attempt = 0;
                let result = loop {
                    if session.is_none() {
                        match Session::open(conn.clone(), timeout).await {
                            Ok(s) => session = Some(s),
                            Err(e) => break Err(CaptureError::new(&url, Phase::Connect, e)),
                        }
                    }
                    let mut rng = rng_for(seed, &[&url, "capture"]);
                    let s = session.as_mut().unwrap();
                    match capture_page(s, &url, &cfg, &mut rng, &extractor).await {
                        Ok(pages) => break Ok(pages),
                        Err(e) if attempt < cfg.retries => {
                            tracing::warn!(error = %e, attempt, "retrying capture");
                            attempt += 1;
                            if e.is_transport() {
                                session = None;
                            }
                        }
                        Err(e) => break Err(e),
                    }
                };
                done.push((idx, url, result));
            }
            if let Some(s) = session {
                s.close().await;
            }
            done
        });
    }

    let mut slots: Vec<Option<UrlResult>> = (0..urls.len()).map(|_| None).collect();
    while let Some(joined) = set.join_next().await {
        for (idx, url, result) in joined.expect("capture worker panicked") {
            slots[idx] = Some((url, result));
        }
    }
    Ok(slots.into_iter().map(|s| s.expect("every url is visited")).collect())
}
