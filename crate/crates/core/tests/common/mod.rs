#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use guiforge::advanced::StubClient;
use guiforge::config::PipelineConfig;
use guiforge::pipeline::{run_pipeline, Resources, Stages};
use guiforge::snapshot::{NodeId, PageSnapshot, RawNode, StyleFacts};
use guiforge::{BBox, Point, Viewport};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn pages_dir() -> PathBuf {
    fixtures().join("pages")
}

pub fn templates_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/templates.json")
}

pub fn stub_client() -> StubClient {
    StubClient::from_dir(&fixtures().join("stub")).expect("stub fixture dir")
}

pub fn config(seed: u64) -> PipelineConfig {
    PipelineConfig::with_templates(seed, templates_path())
}

/// Full fused run over the fixture corpus with the stub client. Returns the
/// sha256 of the written records file.
pub fn run_fixture_pipeline(seed: u64, out: &Path) -> String {
    let cfg = config(seed);
    let res = Resources::load(&cfg).unwrap();
    let client = stub_client();
    let (manifest, summary) = run_pipeline(&pages_dir(), out, &cfg, &res, Some(&client), Stages::ALL).unwrap();
    assert!(summary.errors.is_empty(), "{:?}", summary.errors);
    let bytes = std::fs::read(out.join("records.jsonl")).unwrap();
    let digest = sha256(&bytes);
    assert_eq!(digest, manifest.digest);
    digest
}

pub fn sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Parses "(a,b)" or "(a,b,c,d)" without going through the library codec.
pub fn parse_tuple(s: &str) -> Option<Vec<f64>> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let v: Vec<f64> = inner
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .ok()?;
    matches!(v.len(), 2 | 4).then_some(v)
}

/// Three decimals, half-up, as the samples are expected to carry them.
pub fn fmt3(v: f64) -> String {
    let scaled = (v * 1000.0 + 0.5 + 1e-9).floor() / 1000.0;
    format!("{scaled:.3}")
}

pub fn bbox_text(b: &BBox, vp: Viewport) -> String {
    let (w, h) = (vp.width as f64, vp.height as f64);
    format!(
        "({},{},{},{})",
        fmt3(b.x1 / w),
        fmt3(b.y1 / h),
        fmt3(b.x2 / w),
        fmt3(b.y2 / h)
    )
}

// --- random snapshot trees ---------------------------------------------------

const TAGS: &[&str] = &[
    "div", "div", "span", "p", "a", "button", "input", "textarea", "img", "svg", "code", "pre", "li", "section",
];
const ROLES: &[&str] = &["", "", "", "", "button", "link", "textbox", "dialog"];
const WORDS: &[&str] = &[
    "Search",
    "Open",
    "menu",
    "Cart",
    "news",
    "Sign in",
    "  ",
    "",
    "",
    "Next page",
];

/// A random but valid snapshot tree with `n` nodes over a 640x480 viewport.
/// Rects, styles and attributes are drawn so every visibility rule fires.
pub fn random_snapshot(seed: u64, n: usize) -> PageSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vp = Viewport::new(640, 480);
    let mut nodes: Vec<RawNode> = Vec::with_capacity(n);
    for id in 0..n.max(1) {
        let parent = (id > 0).then(|| rng.random_range(0..id) as NodeId);
        let rect = if rng.random_bool(0.1) {
            None
        } else {
            let x = rng.random_range(-100.0..700.0f64).round();
            let y = rng.random_range(-100.0..560.0f64).round();
            let w = rng.random_range(1.0..300.0f64).round();
            let h = rng.random_range(1.0..200.0f64).round();
            BBox::new(x, y, x + w, y + h)
        };
        let mut style = StyleFacts::default();
        if rng.random_bool(0.05) {
            style.display = "none".into();
        }
        if rng.random_bool(0.05) {
            style.visibility = "hidden".into();
        }
        if rng.random_bool(0.15) {
            style.opacity = rng.random_range(0.0..=1.0);
        }
        style.overflow_clipped = rng.random_bool(0.05);
        let mut attrs = BTreeMap::new();
        for key in ["aria-label", "alt", "title"] {
            if rng.random_bool(0.15) {
                attrs.insert(key.to_string(), WORDS.choose(&mut rng).unwrap().to_string());
            }
        }
        nodes.push(RawNode {
            id: id as NodeId,
            parent,
            tag: TAGS.choose(&mut rng).unwrap().to_string(),
            role: ROLES.choose(&mut rng).unwrap().to_string(),
            attrs,
            text: if rng.random_bool(0.4) {
                WORDS.choose(&mut rng).unwrap().to_string()
            } else {
                String::new()
            },
            rect,
            style,
            occluded: rng.random_bool(0.05),
        });
    }
    PageSnapshot::new(
        format!("https://random.test/{seed}"),
        "Random".into(),
        String::new(),
        vp,
        Point::new(0.0, 0.0),
        nodes,
    )
    .unwrap()
}

/// Violations of ancestor-disjointness and bbox-in-viewport, computed from
/// the raw parent links.
pub fn annotation_violations(snap: &PageSnapshot, elements: &[guiforge::annotate::ElementAnnotation]) -> Vec<String> {
    let parent: HashMap<NodeId, Option<NodeId>> = snap.nodes().iter().map(|n| (n.id, n.parent)).collect();
    let ancestors = |mut id: NodeId| {
        let mut out = Vec::new();
        while let Some(Some(p)) = parent.get(&id) {
            out.push(*p);
            id = *p;
        }
        out
    };
    let (w, h) = (snap.viewport.width as f64, snap.viewport.height as f64);
    let mut bad = Vec::new();
    let ids: Vec<NodeId> = elements.iter().filter_map(|e| e.node_id).collect();
    for e in elements {
        let b = e.bbox;
        if !(0.0 <= b.x1 && b.x1 < b.x2 && b.x2 <= w && 0.0 <= b.y1 && b.y1 < b.y2 && b.y2 <= h) {
            bad.push(format!("{:?} bbox {b:?} outside {w}x{h}", e.node_id));
        }
    }
    for &id in &ids {
        for a in ancestors(id) {
            if ids.contains(&a) {
                bad.push(format!("{a} is an emitted ancestor of {id}"));
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    for &id in &ids {
        if !seen.insert(id) {
            bad.push(format!("{id} emitted twice"));
        }
    }
    bad
}
