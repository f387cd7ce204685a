//! Rule-based annotation: visibility filtering, classification and
//! integration of DOM nodes into minimal semantic units.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::capture::CapturedPage;
use crate::geom::{BBox, Viewport};
use crate::snapshot::{normalize_whitespace, NodeId, PageSnapshot, RawNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    Text,
    Code,
    Image,
    Icon,
    Button,
    Link,
    Input,
}

impl ElementKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ElementKind::Text => "Text",
            ElementKind::Code => "Code",
            ElementKind::Image => "Image",
            ElementKind::Icon => "Icon",
            ElementKind::Button => "Button",
            ElementKind::Link => "Link",
            ElementKind::Input => "Input",
        }
    }

    pub fn is_interactive(&self) -> bool {
        matches!(self, ElementKind::Link | ElementKind::Button | ElementKind::Input)
    }

    pub fn is_graphic(&self) -> bool {
        matches!(self, ElementKind::Image | ElementKind::Icon)
    }

    /// Kinds that form a unit on their own and swallow their subtree.
    fn absorbs_subtree(&self) -> bool {
        !matches!(self, ElementKind::Text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescriptionSource {
    VisibleText,
    AriaLabel,
    Alt,
    Title,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementAnnotation {
    /// Root node of the unit; `None` for synthetic elements such as embedded icons.
    pub node_id: Option<NodeId>,
    pub kind: ElementKind,
    pub bbox: BBox,
    pub description: String,
    pub description_source: DescriptionSource,
    pub interactive: bool,
}

/// Annotation sidecar for one capture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageAnnotation {
    pub snapshot: String,
    pub screenshot: String,
    pub url: String,
    pub viewport: Viewport,
    pub scroll_y: f64,
    pub capture_index: usize,
    pub title: String,
    pub meta_description: String,
    pub elements: Vec<ElementAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotatorConfig {
    pub min_visible_side: f64,
    pub opacity_floor: f64,
    pub icon_max_side: f64,
}

impl Default for AnnotatorConfig {
    fn default() -> Self {
        AnnotatorConfig {
            min_visible_side: 3.0,
            opacity_floor: 0.05,
            icon_max_side: 48.0,
        }
    }
}

/// Ids of nodes visible within the current viewport.
pub fn filter_visible(snapshot: &PageSnapshot, cfg: &AnnotatorConfig) -> HashSet<NodeId> {
    // Per-node inherited state, indexed by document position. Parents always
    // precede children, so one forward pass suffices.
    let nodes = snapshot.nodes();
    let mut opacity = vec![1.0f64; nodes.len()];
    let mut hidden = vec![false; nodes.len()];
    let viewport = snapshot.viewport.rect();
    let mut out = HashSet::new();

    for (pos, node) in nodes.iter().enumerate() {
        let (inherited_opacity, inherited_hidden) = node
            .parent
            .and_then(|p| snapshot.position(p))
            .map_or((1.0, false), |pp| (opacity[pp], hidden[pp]));
        opacity[pos] = inherited_opacity * node.style.opacity;
        hidden[pos] = inherited_hidden || node.style.display == "none" || node.style.visibility == "hidden";

        if hidden[pos] || opacity[pos] <= cfg.opacity_floor {
            continue;
        }
        if node.style.overflow_clipped || node.occluded {
            continue;
        }
        let Some(on_screen) = node.rect.and_then(|r| r.intersect(&viewport)) else {
            continue;
        };
        if on_screen.width() >= cfg.min_visible_side && on_screen.height() >= cfg.min_visible_side {
            out.insert(node.id);
        }
    }
    out
}

const IMAGE_TAGS: &[&str] = &["img", "svg", "canvas", "picture"];
const CODE_TAGS: &[&str] = &["code", "pre"];
const BUTTON_INPUT_TYPES: &[&str] = &["button", "submit", "reset"];

/// Kind of the unit rooted at `node`, or `None` when it is not a unit.
pub fn classify(snapshot: &PageSnapshot, node: &RawNode, cfg: &AnnotatorConfig) -> Option<ElementKind> {
    let tag = node.tag.as_str();
    let role = node.role.as_str();
    let input_type = node
        .attr("type")
        .map(|t| t.trim().to_ascii_lowercase())
        .unwrap_or_default();

    if tag == "a" || role == "link" {
        return Some(ElementKind::Link);
    }
    if tag == "button" || (tag == "input" && BUTTON_INPUT_TYPES.contains(&input_type.as_str())) || role == "button" {
        return Some(ElementKind::Button);
    }
    if matches!(tag, "input" | "textarea" | "select") || role == "textbox" {
        return Some(ElementKind::Input);
    }
    if IMAGE_TAGS.contains(&tag) {
        let small = node.rect.is_some_and(|r| r.max_side() <= cfg.icon_max_side);
        return Some(if small { ElementKind::Icon } else { ElementKind::Image });
    }
    if CODE_TAGS.contains(&tag) {
        return Some(ElementKind::Code);
    }
    let has_text = snapshot.subtree_text(node.id).map(|t| !t.is_empty()).unwrap_or(false);
    has_text.then_some(ElementKind::Text)
}

/// Latent-aware description for a unit rooted at `node`.
///
/// Text-bearing kinds prefer their visible text, then `aria-label`, `title`
/// and `alt`. Images and icons prefer `alt`, then `aria-label` and `title`.
/// When the unit root carries nothing, the same attributes are looked up on
/// its descendants in document order.
pub fn extract_description(snapshot: &PageSnapshot, node: &RawNode, kind: ElementKind) -> (String, DescriptionSource) {
    const TEXTUAL: [(&str, DescriptionSource); 3] = [
        ("aria-label", DescriptionSource::AriaLabel),
        ("title", DescriptionSource::Title),
        ("alt", DescriptionSource::Alt),
    ];
    const GRAPHIC: [(&str, DescriptionSource); 3] = [
        ("alt", DescriptionSource::Alt),
        ("aria-label", DescriptionSource::AriaLabel),
        ("title", DescriptionSource::Title),
    ];

    let order = if kind.is_graphic() {
        &GRAPHIC
    } else {
        let text = snapshot.subtree_text(node.id).unwrap_or_default();
        if !text.is_empty() {
            return (text, DescriptionSource::VisibleText);
        }
        &TEXTUAL
    };

    for n in snapshot.subtree(node.id) {
        for (attr, source) in order {
            if let Some(v) = n.nonblank_attr(attr) {
                return (v, *source);
            }
        }
    }
    (String::new(), DescriptionSource::None)
}

/// Walks the tree top-down and emits one annotation per minimal semantic
/// unit. Emitted nodes are pairwise ancestor-disjoint.
pub fn integrate(snapshot: &PageSnapshot, visible: &HashSet<NodeId>, cfg: &AnnotatorConfig) -> Vec<ElementAnnotation> {
    let mut out = Vec::new();
    walk(snapshot, snapshot.root(), visible, cfg, &mut out);
    out
}

fn walk(
    snapshot: &PageSnapshot,
    node: &RawNode,
    visible: &HashSet<NodeId>,
    cfg: &AnnotatorConfig,
    out: &mut Vec<ElementAnnotation>,
) {
    let is_visible = visible.contains(&node.id);
    let kind = if is_visible {
        classify(snapshot, node, cfg)
    } else {
        None
    };

    if let Some(kind) = kind.filter(|k| k.absorbs_subtree()) {
        if let Some(unit) = make_unit(snapshot, node, kind) {
            out.push(unit);
            return;
        }
    }

    let before = out.len();
    for child in snapshot.children(node.id) {
        walk(snapshot, child, visible, cfg, out);
    }

    // Residual text: a node carrying its own text run becomes a Text unit
    // only when nothing beneath it was emitted.
    if is_visible && out.len() == before && !normalize_whitespace(&node.text).is_empty() {
        if let Some(unit) = make_unit(snapshot, node, ElementKind::Text) {
            out.push(unit);
        }
    }
}

fn make_unit(snapshot: &PageSnapshot, node: &RawNode, kind: ElementKind) -> Option<ElementAnnotation> {
    let bbox = node.rect?.intersect(&snapshot.viewport.rect())?;
    let (description, description_source) = extract_description(snapshot, node, kind);
    if description.is_empty() && !kind.is_graphic() {
        return None;
    }
    Some(ElementAnnotation {
        node_id: Some(node.id),
        kind,
        bbox,
        description,
        description_source,
        interactive: kind.is_interactive(),
    })
}

/// Runs filtering and integration over one snapshot.
pub fn annotate_snapshot(snapshot: &PageSnapshot, cfg: &AnnotatorConfig) -> Vec<ElementAnnotation> {
    let visible = filter_visible(snapshot, cfg);
    integrate(snapshot, &visible, cfg)
}

/// Annotates a snapshot and attaches page-level facts. `snapshot_ref` and
/// `screenshot_ref` name the on-disk artifacts the annotation belongs to.
pub fn annotate_page(
    snapshot: &PageSnapshot,
    snapshot_ref: &str,
    screenshot_ref: &str,
    capture_index: usize,
    cfg: &AnnotatorConfig,
) -> PageAnnotation {
    PageAnnotation {
        snapshot: snapshot_ref.to_string(),
        screenshot: screenshot_ref.to_string(),
        url: snapshot.url.clone(),
        viewport: snapshot.viewport,
        scroll_y: snapshot.scroll.y,
        capture_index,
        title: normalize_whitespace(&snapshot.title),
        meta_description: normalize_whitespace(&snapshot.meta_description),
        elements: annotate_snapshot(snapshot, cfg),
    }
}

pub fn annotate_capture(
    captured: &CapturedPage,
    snapshot_ref: &str,
    screenshot_ref: &str,
    cfg: &AnnotatorConfig,
) -> PageAnnotation {
    annotate_page(
        &captured.snapshot,
        snapshot_ref,
        screenshot_ref,
        captured.capture_index,
        cfg,
    )
}

/// Checks the structural invariants of an annotation against its snapshot.
/// Returns a human-readable description of every violation.
pub fn check_invariants(snapshot: &PageSnapshot, page: &PageAnnotation, cfg: &AnnotatorConfig) -> Vec<String> {
    let mut problems = Vec::new();
    let vp = page.viewport.rect();
    let min_area = cfg.min_visible_side * cfg.min_visible_side;
    for e in &page.elements {
        if !e.bbox.is_valid() || !vp.contains(&e.bbox) {
            problems.push(format!("{:?}: bbox {:?} outside viewport", e.node_id, e.bbox));
        }
        if e.bbox.area() < min_area {
            problems.push(format!("{:?}: bbox area {} below {min_area}", e.node_id, e.bbox.area()));
        }
        let graphic_without = e.kind.is_graphic() && e.description_source == DescriptionSource::None;
        if e.description.is_empty() && !graphic_without {
            problems.push(format!("{:?}: empty description", e.node_id));
        }
    }
    let ids: Vec<NodeId> = page.elements.iter().filter_map(|e| e.node_id).collect();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            if a == b || snapshot.is_ancestor(*a, *b) || snapshot.is_ancestor(*b, *a) {
                problems.push(format!("nodes {a} and {b} are not ancestor-disjoint"));
            }
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::snapshot::StyleFacts;
    use std::collections::BTreeMap;

    struct B {
        nodes: Vec<RawNode>,
    }

    impl B {
        fn new() -> Self {
            B { nodes: Vec::new() }
        }

        fn add(&mut self, parent: Option<NodeId>, tag: &str, rect: Option<(f64, f64, f64, f64)>, text: &str) -> NodeId {
            let id = self.nodes.len() as NodeId;
            self.nodes.push(RawNode {
                id,
                parent,
                tag: tag.into(),
                role: String::new(),
                attrs: BTreeMap::new(),
                text: text.into(),
                rect: rect.map(|(a, b, c, d)| BBox::new(a, b, c, d).unwrap()),
                style: StyleFacts::default(),
                occluded: false,
            });
            id
        }

        fn node(&mut self, id: NodeId) -> &mut RawNode {
            &mut self.nodes[id as usize]
        }

        fn build(self) -> PageSnapshot {
            PageSnapshot::new(
                "https://example.test/".into(),
                "Example".into(),
                String::new(),
                Viewport::new(1000, 800),
                Point::new(0.0, 0.0),
                self.nodes,
            )
            .unwrap()
        }
    }

    fn page_root(b: &mut B) -> NodeId {
        let html = b.add(None, "html", Some((0.0, 0.0, 1000.0, 800.0)), "");
        b.add(Some(html), "body", Some((0.0, 0.0, 1000.0, 800.0)), "")
    }

    #[test]
    fn display_none_is_excluded() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let p = b.add(Some(body), "p", Some((10.0, 10.0, 100.0, 30.0)), "hidden");
        b.node(p).style.display = "none".into();
        let s = b.build();
        assert!(!filter_visible(&s, &AnnotatorConfig::default()).contains(&p));
    }

    #[test]
    fn above_viewport_is_excluded() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let p = b.add(Some(body), "p", Some((10.0, -50.0, 100.0, -5.0)), "gone");
        let s = b.build();
        assert!(!filter_visible(&s, &AnnotatorConfig::default()).contains(&p));
    }

    #[test]
    fn opacity_multiplies_along_the_chain() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let wrap = b.add(Some(body), "div", Some((0.0, 0.0, 200.0, 200.0)), "");
        b.node(wrap).style.opacity = 0.02;
        let p = b.add(Some(wrap), "p", Some((10.0, 10.0, 100.0, 30.0)), "faint");
        let s = b.build();
        let vis = filter_visible(&s, &AnnotatorConfig::default());
        assert!(!vis.contains(&p));
        assert!(!vis.contains(&wrap));
    }

    #[test]
    fn thin_slivers_and_hidden_ancestors_are_excluded() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let sliver = b.add(Some(body), "p", Some((10.0, 798.0, 100.0, 900.0)), "cut");
        let wrap = b.add(Some(body), "div", Some((0.0, 0.0, 200.0, 200.0)), "");
        b.node(wrap).style.visibility = "hidden".into();
        let inner = b.add(Some(wrap), "p", Some((10.0, 10.0, 100.0, 30.0)), "x");
        let clipped = b.add(Some(body), "p", Some((10.0, 300.0, 100.0, 330.0)), "y");
        b.node(clipped).style.overflow_clipped = true;
        let covered = b.add(Some(body), "p", Some((10.0, 400.0, 100.0, 430.0)), "z");
        b.node(covered).occluded = true;
        let s = b.build();
        let vis = filter_visible(&s, &AnnotatorConfig::default());
        for id in [sliver, inner, clipped, covered] {
            assert!(!vis.contains(&id), "{id}");
        }
    }

    #[test]
    fn classification_rules() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let a = b.add(Some(body), "a", Some((0.0, 0.0, 60.0, 20.0)), "Gmail");
        let svg = b.add(Some(body), "svg", Some((100.0, 0.0, 124.0, 24.0)), "");
        let img = b.add(Some(body), "img", Some((200.0, 0.0, 400.0, 100.0)), "");
        let pre = b.add(Some(body), "pre", Some((0.0, 200.0, 400.0, 300.0)), "fn main() {}");
        let submit = b.add(Some(body), "input", Some((0.0, 400.0, 80.0, 430.0)), "");
        b.node(submit).attrs.insert("type".into(), "submit".into());
        let text_in = b.add(Some(body), "input", Some((100.0, 400.0, 300.0, 430.0)), "");
        let div_btn = b.add(Some(body), "div", Some((400.0, 400.0, 480.0, 430.0)), "Go");
        b.node(div_btn).role = "button".into();
        let empty = b.add(Some(body), "div", Some((500.0, 500.0, 600.0, 600.0)), "");
        let s = b.build();
        let cfg = AnnotatorConfig::default();
        let k = |id| classify(&s, s.get(id).unwrap(), &cfg);
        assert_eq!(k(a), Some(ElementKind::Link));
        assert_eq!(k(svg), Some(ElementKind::Icon));
        assert_eq!(k(img), Some(ElementKind::Image));
        assert_eq!(k(pre), Some(ElementKind::Code));
        assert_eq!(k(submit), Some(ElementKind::Button));
        assert_eq!(k(text_in), Some(ElementKind::Input));
        assert_eq!(k(div_btn), Some(ElementKind::Button));
        assert_eq!(k(empty), None);
    }

    #[test]
    fn button_with_icon_and_text_is_one_unit() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let btn = b.add(Some(body), "button", Some((100.0, 100.0, 220.0, 140.0)), "");
        b.add(Some(btn), "svg", Some((106.0, 110.0, 126.0, 130.0)), "");
        b.add(Some(btn), "span", Some((130.0, 110.0, 210.0, 130.0)), "Search");
        let s = b.build();
        let els = annotate_snapshot(&s, &AnnotatorConfig::default());
        assert_eq!(els.len(), 1);
        assert_eq!(els[0].kind, ElementKind::Button);
        assert_eq!(els[0].description, "Search");
        assert_eq!(els[0].bbox, BBox::new(100.0, 100.0, 220.0, 140.0).unwrap());
        assert!(els[0].interactive);
    }

    #[test]
    fn paragraph_with_inline_link_never_emits_the_paragraph() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let p = b.add(Some(body), "p", Some((0.0, 0.0, 600.0, 20.0)), "");
        let span = b.add(
            Some(p),
            "span",
            Some((0.0, 0.0, 300.0, 20.0)),
            "Read the guide or visit",
        );
        let a = b.add(Some(p), "a", Some((305.0, 0.0, 360.0, 20.0)), "Gmail");
        let s = b.build();
        let els = annotate_snapshot(&s, &AnnotatorConfig::default());
        let ids: Vec<_> = els.iter().map(|e| (e.node_id.unwrap(), e.kind)).collect();
        assert_eq!(ids, vec![(span, ElementKind::Text), (a, ElementKind::Link)]);
        assert!(!ids.iter().any(|(id, _)| *id == p));
    }

    #[test]
    fn text_block_with_only_text_children_emits_leaves() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let p = b.add(Some(body), "p", Some((0.0, 0.0, 600.0, 20.0)), "Hello");
        let br = b.add(Some(p), "br", None, "");
        let s = b.build();
        let els = annotate_snapshot(&s, &AnnotatorConfig::default());
        assert_eq!(els.len(), 1);
        assert_eq!(els[0].node_id, Some(p));
        assert_ne!(els[0].node_id, Some(br));
    }

    #[test]
    fn description_fallbacks() {
        let mut b = B::new();
        let body = page_root(&mut b);
        let img = b.add(Some(body), "img", Some((0.0, 0.0, 272.0, 92.0)), "");
        b.node(img).attrs.insert("alt".into(), "Google".into());
        let mic = b.add(Some(body), "button", Some((300.0, 0.0, 340.0, 40.0)), "");
        b.node(mic).attrs.insert("aria-label".into(), "Search by voice".into());
        let bare = b.add(Some(body), "svg", Some((400.0, 0.0, 424.0, 24.0)), "");
        let titled = b.add(Some(body), "a", Some((500.0, 0.0, 540.0, 40.0)), "");
        b.node(titled).attrs.insert("title".into(), "Apps".into());
        let nested = b.add(Some(body), "button", Some((600.0, 0.0, 640.0, 40.0)), "");
        let inner = b.add(Some(nested), "svg", Some((608.0, 8.0, 632.0, 32.0)), "");
        b.node(inner).attrs.insert("aria-label".into(), "Settings".into());
        let s = b.build();
        let d = |id, kind| extract_description(&s, s.get(id).unwrap(), kind);
        assert_eq!(d(img, ElementKind::Image), ("Google".into(), DescriptionSource::Alt));
        assert_eq!(
            d(mic, ElementKind::Button),
            ("Search by voice".into(), DescriptionSource::AriaLabel)
        );
        assert_eq!(d(bare, ElementKind::Icon), (String::new(), DescriptionSource::None));
        assert_eq!(d(titled, ElementKind::Link), ("Apps".into(), DescriptionSource::Title));
        assert_eq!(
            d(nested, ElementKind::Button),
            ("Settings".into(), DescriptionSource::AriaLabel)
        );
    }

    #[test]
    fn empty_page_yields_nothing() {
        let mut b = B::new();
        b.add(None, "html", None, "");
        let s = b.build();
        assert!(annotate_snapshot(&s, &AnnotatorConfig::default()).is_empty());
    }

    #[test]
    fn unit_bbox_is_clipped_to_viewport() {
        let mut b = B::new();
        let body = page_root(&mut b);
        b.add(Some(body), "a", Some((900.0, 780.0, 1100.0, 820.0)), "More");
        let s = b.build();
        let els = annotate_snapshot(&s, &AnnotatorConfig::default());
        assert_eq!(els[0].bbox, BBox::new(900.0, 780.0, 1000.0, 800.0).unwrap());
    }
}
