//! The snapshot document: serialized DOM-with-layout facts for one viewport
//! capture, as emitted by the in-page extractor.
//!
//! Rects are CSS pixels relative to the viewport with a device pixel ratio of
//! 1.0, so rect coordinates are screenshot pixel coordinates. Zero-area nodes
//! carry `rect: null`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::geom::{BBox, Point, Viewport};

pub type NodeId = u64;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SnapshotError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("tree violation: {0}")]
    Tree(String),
    #[error("value violation: {0}")]
    Value(String),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
}

impl SnapshotError {
    /// Short class name, used when reporting per-item failures.
    pub fn class(&self) -> &'static str {
        match self {
            SnapshotError::Schema(_) => "schema",
            SnapshotError::Tree(_) => "tree",
            SnapshotError::Value(_) => "value",
            SnapshotError::UnknownNode(_) => "unknown-node",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StyleFacts {
    pub display: String,
    pub visibility: String,
    pub opacity: f64,
    pub cursor: String,
    pub position: String,
    /// The node's visible rect is clipped to nothing by some ancestor.
    pub overflow_clipped: bool,
}

impl Default for StyleFacts {
    fn default() -> Self {
        StyleFacts {
            display: "block".into(),
            visibility: "visible".into(),
            opacity: 1.0,
            cursor: "auto".into(),
            position: "static".into(),
            overflow_clipped: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub tag: String,
    pub role: String,
    pub attrs: BTreeMap<String, String>,
    /// Direct text runs of this element, concatenated.
    pub text: String,
    pub rect: Option<BBox>,
    pub style: StyleFacts,
    /// The center-point hit test landed outside this node's ancestor/descendant line.
    pub occluded: bool,
}

impl RawNode {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.get(name).map(String::as_str)
    }

    /// Attribute value with surrounding whitespace removed, or `None` when blank.
    pub fn nonblank_attr(&self, name: &str) -> Option<String> {
        self.attrs
            .get(name)
            .map(|v| normalize_whitespace(v))
            .filter(|v| !v.is_empty())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    url: String,
    title: String,
    meta_description: String,
    viewport: Viewport,
    scroll: Point,
    nodes: Vec<RawNode>,
}

/// A validated snapshot. Construct with [`load_snapshot`] or [`PageSnapshot::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SnapshotDoc", into = "SnapshotDoc")]
pub struct PageSnapshot {
    pub url: String,
    pub title: String,
    pub meta_description: String,
    pub viewport: Viewport,
    pub scroll: Point,
    nodes: Vec<RawNode>,
    index: HashMap<NodeId, usize>,
    children: Vec<Vec<usize>>,
}

impl TryFrom<SnapshotDoc> for PageSnapshot {
    type Error = SnapshotError;

    fn try_from(doc: SnapshotDoc) -> Result<Self, Self::Error> {
        PageSnapshot::new(
            doc.url,
            doc.title,
            doc.meta_description,
            doc.viewport,
            doc.scroll,
            doc.nodes,
        )
    }
}

impl From<PageSnapshot> for SnapshotDoc {
    fn from(s: PageSnapshot) -> Self {
        SnapshotDoc {
            url: s.url,
            title: s.title,
            meta_description: s.meta_description,
            viewport: s.viewport,
            scroll: s.scroll,
            nodes: s.nodes,
        }
    }
}

/// Parses and validates a snapshot document.
pub fn load_snapshot(bytes: &[u8]) -> Result<PageSnapshot, SnapshotError> {
    let doc: SnapshotDoc = serde_json::from_slice(bytes).map_err(|e| SnapshotError::Schema(e.to_string()))?;
    PageSnapshot::try_from(doc)
}

impl PageSnapshot {
    pub fn new(
        url: String,
        title: String,
        meta_description: String,
        viewport: Viewport,
        scroll: Point,
        nodes: Vec<RawNode>,
    ) -> Result<Self, SnapshotError> {
        if viewport.width == 0 || viewport.height == 0 {
            return Err(SnapshotError::Value(format!(
                "viewport must have positive size, got {viewport}"
            )));
        }
        if viewport.dpr != 1.0 {
            return Err(SnapshotError::Value(format!(
                "device pixel ratio must be 1.0, got {}",
                viewport.dpr
            )));
        }
        if !scroll.is_finite() {
            return Err(SnapshotError::Value("scroll offset is not finite".into()));
        }

        let mut index = HashMap::with_capacity(nodes.len());
        let mut children = vec![Vec::new(); nodes.len()];
        let mut root = None;
        for (pos, node) in nodes.iter().enumerate() {
            if index.insert(node.id, pos).is_some() {
                return Err(SnapshotError::Tree(format!("duplicate node id {}", node.id)));
            }
            match node.parent {
                None => {
                    if let Some(first) = root {
                        return Err(SnapshotError::Tree(format!("multiple roots: {first} and {}", node.id)));
                    }
                    root = Some(node.id);
                }
                Some(parent) if parent == node.id => {
                    return Err(SnapshotError::Tree(format!("node {parent} is its own parent")));
                }
                Some(parent) => match index.get(&parent) {
                    Some(&ppos) => children[ppos].push(pos),
                    None if nodes.iter().any(|n| n.id == parent) => {
                        return Err(SnapshotError::Tree(format!(
                            "node {} precedes its parent {parent} (cycle or misordering)",
                            node.id
                        )));
                    }
                    None => {
                        return Err(SnapshotError::Tree(format!(
                            "node {} names absent parent {parent}",
                            node.id
                        )));
                    }
                },
            }
            validate_node(node)?;
        }
        if root.is_none() {
            return Err(SnapshotError::Tree("document has no root node".into()));
        }

        Ok(PageSnapshot {
            url,
            title,
            meta_description,
            viewport,
            scroll,
            nodes,
            index,
            children,
        })
    }

    /// Nodes in document order. The first node is the root.
    pub fn nodes(&self) -> &[RawNode] {
        &self.nodes
    }

    pub fn root(&self) -> &RawNode {
        &self.nodes[0]
    }

    pub fn get(&self, id: NodeId) -> Option<&RawNode> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Child nodes of `id` in document order.
    pub fn children(&self, id: NodeId) -> impl Iterator<Item = &RawNode> + '_ {
        let kids = self.index.get(&id).map(|&i| self.children[i].as_slice()).unwrap_or(&[]);
        kids.iter().map(move |&c| &self.nodes[c])
    }

    pub fn parent(&self, id: NodeId) -> Option<&RawNode> {
        self.get(id)?.parent.and_then(|p| self.get(p))
    }

    /// Walks from `id`'s parent up to the root.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = &RawNode> + '_ {
        std::iter::successors(self.parent(id), move |n| self.parent(n.id))
    }

    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        self.ancestors(node).any(|a| a.id == ancestor)
    }

    /// The node and all of its descendants in document order.
    pub fn subtree(&self, id: NodeId) -> Vec<&RawNode> {
        let mut out = Vec::new();
        let Some(&start) = self.index.get(&id) else {
            return out;
        };
        let mut stack = vec![start];
        while let Some(pos) = stack.pop() {
            out.push(&self.nodes[pos]);
            stack.extend(self.children[pos].iter().rev());
        }
        out
    }

    /// Whitespace-normalized text of the node and all descendants.
    pub fn subtree_text(&self, id: NodeId) -> Result<String, SnapshotError> {
        if !self.index.contains_key(&id) {
            return Err(SnapshotError::UnknownNode(id));
        }
        let joined = self
            .subtree(id)
            .iter()
            .map(|n| n.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        Ok(normalize_whitespace(&joined))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }
}

fn validate_node(node: &RawNode) -> Result<(), SnapshotError> {
    let o = node.style.opacity;
    if !(0.0..=1.0).contains(&o) {
        return Err(SnapshotError::Value(format!(
            "node {} opacity {o} outside [0,1]",
            node.id
        )));
    }
    if let Some(r) = &node.rect {
        if !r.is_valid() {
            return Err(SnapshotError::Value(format!(
                "node {} rect ({}, {}, {}, {}) is inverted, empty or not finite",
                node.id, r.x1, r.y1, r.x2, r.y2
            )));
        }
    }
    Ok(())
}

/// Collapses whitespace runs to single spaces and trims both ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: NodeId, parent: Option<NodeId>, text: &str) -> RawNode {
        RawNode {
            id,
            parent,
            tag: "div".into(),
            role: String::new(),
            attrs: BTreeMap::new(),
            text: text.into(),
            rect: None,
            style: StyleFacts::default(),
            occluded: false,
        }
    }

    fn snap(nodes: Vec<RawNode>) -> Result<PageSnapshot, SnapshotError> {
        PageSnapshot::new(
            "https://example.test/".into(),
            String::new(),
            String::new(),
            Viewport::new(800, 600),
            Point::new(0.0, 0.0),
            nodes,
        )
    }

    #[test]
    fn minimal_document_loads() {
        let doc = br#"{"url":"u","title":"","meta_description":"",
            "viewport":{"width":800,"height":600,"dpr":1.0},"scroll":{"x":0,"y":0},
            "nodes":[{"id":0,"parent":null,"tag":"html","role":"","attrs":{},"text":"",
            "rect":null,"style":{"display":"block","visibility":"visible","opacity":1,
            "cursor":"auto","position":"static","overflow_clipped":false},"occluded":false}]}"#;
        let s = load_snapshot(doc).unwrap();
        assert_eq!(s.nodes().len(), 1);
        assert!(s.root().rect.is_none());
    }

    #[test]
    fn orphan_is_a_tree_violation() {
        let err = snap(vec![node(0, None, ""), node(5, Some(9), "")]).unwrap_err();
        assert!(matches!(err, SnapshotError::Tree(_)), "{err}");
    }

    #[test]
    fn multiple_roots_and_cycles_are_rejected() {
        assert!(matches!(
            snap(vec![node(0, None, ""), node(1, None, "")]),
            Err(SnapshotError::Tree(_))
        ));
        // 1 -> 2 -> 1, neither reachable from the root.
        assert!(matches!(
            snap(vec![node(0, None, ""), node(1, Some(2), ""), node(2, Some(1), "")]),
            Err(SnapshotError::Tree(_))
        ));
        assert!(matches!(snap(vec![]), Err(SnapshotError::Tree(_))));
    }

    #[test]
    fn unknown_keys_and_wrong_types_are_schema_errors() {
        let extra = br#"{"url":"u","title":"","meta_description":"","extra":1,
            "viewport":{"width":800,"height":600,"dpr":1.0},"scroll":{"x":0,"y":0},"nodes":[]}"#;
        assert_eq!(load_snapshot(extra).unwrap_err().class(), "schema");
        let wrong = br#"{"url":5,"title":"","meta_description":"",
            "viewport":{"width":800,"height":600,"dpr":1.0},"scroll":{"x":0,"y":0},"nodes":[]}"#;
        assert_eq!(load_snapshot(wrong).unwrap_err().class(), "schema");
    }

    #[test]
    fn bad_values_are_value_errors() {
        let mut n = node(0, None, "");
        n.style.opacity = 1.5;
        assert!(matches!(snap(vec![n]), Err(SnapshotError::Value(_))));
        let mut n = node(0, None, "");
        n.rect = Some(BBox {
            x1: 10.0,
            y1: 0.0,
            x2: 5.0,
            y2: 4.0,
        });
        assert!(matches!(snap(vec![n]), Err(SnapshotError::Value(_))));
    }

    #[test]
    fn subtree_text_cases() {
        let s = snap(vec![
            node(0, None, ""),
            node(1, Some(0), "Search"),
            node(2, Some(0), ""),
            node(3, Some(2), "I'm"),
            node(4, Some(2), " Feeling\n"),
            node(5, Some(2), "Lucky"),
            node(6, Some(0), "  "),
        ])
        .unwrap();
        assert_eq!(s.subtree_text(1).unwrap(), "Search");
        assert_eq!(s.subtree_text(2).unwrap(), "I'm Feeling Lucky");
        assert_eq!(s.subtree_text(6).unwrap(), "");
        assert_eq!(s.subtree_text(42), Err(SnapshotError::UnknownNode(42)));
    }

    #[test]
    fn ancestry_queries() {
        let s = snap(vec![
            node(0, None, ""),
            node(1, Some(0), ""),
            node(2, Some(1), ""),
            node(3, Some(0), ""),
        ])
        .unwrap();
        assert!(s.is_ancestor(0, 2));
        assert!(s.is_ancestor(1, 2));
        assert!(!s.is_ancestor(3, 2));
        assert!(!s.is_ancestor(2, 2));
        let ids: Vec<_> = s.subtree(0).iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }
}
