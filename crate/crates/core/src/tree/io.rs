//! JSON and Graphviz forms of a tree.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{PolicyTree, TreeNode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LeafKey {
    Action,
    Class,
}

impl LeafKey {
    fn name(self) -> &'static str {
        match self {
            LeafKey::Action => "action",
            LeafKey::Class => "class",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    action_names: Vec<String>,
    feature_names: Vec<String>,
    root: usize,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaf: Option<LeafDoc>,
}

#[derive(Serialize, Deserialize)]
struct SplitDoc {
    feature: usize,
    threshold: f64,
    left: usize,
    right: usize,
}

#[derive(Serialize, Deserialize)]
struct LeafDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    action: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<usize>,
}

pub(crate) fn to_json(tree: &PolicyTree, key: LeafKey) -> String {
    let nodes = tree
        .nodes
        .iter()
        .enumerate()
        .map(|(id, n)| match *n {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => NodeDoc {
                id,
                split: Some(SplitDoc {
                    feature,
                    threshold,
                    left,
                    right,
                }),
                leaf: None,
            },
            TreeNode::Leaf { action } => NodeDoc {
                id,
                split: None,
                leaf: Some(match key {
                    LeafKey::Action => LeafDoc {
                        action: Some(action),
                        class: None,
                    },
                    LeafKey::Class => LeafDoc {
                        action: None,
                        class: Some(action),
                    },
                }),
            },
        })
        .collect();
    let doc = TreeDoc {
        action_names: tree.action_names.clone(),
        feature_names: tree.feature_names.clone(),
        root: tree.root,
        nodes,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("tree serializes");
    s.push('\n');
    s
}

pub(crate) fn from_json(text: &str, key: LeafKey) -> Result<PolicyTree> {
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    let mut index = HashMap::with_capacity(doc.nodes.len());
    for (k, n) in doc.nodes.iter().enumerate() {
        if index.insert(n.id, k).is_some() {
            return Err(Error::parse(format!("nodes[{k}].id"), format!("duplicate id {}", n.id)));
        }
    }
    let lookup = |id: usize, field: String| -> Result<usize> {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::parse(field, format!("unknown node id {id}")))
    };
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (k, n) in doc.nodes.iter().enumerate() {
        let node = match (&n.split, &n.leaf) {
            (Some(s), None) => TreeNode::Split {
                feature: s.feature,
                threshold: s.threshold,
                left: lookup(s.left, format!("nodes[{k}].split.left"))?,
                right: lookup(s.right, format!("nodes[{k}].split.right"))?,
            },
            (None, Some(l)) => {
                let (want, other) = match key {
                    LeafKey::Action => (l.action, l.class),
                    LeafKey::Class => (l.class, l.action),
                };
                let field = format!("nodes[{k}].leaf.{}", key.name());
                match (want, other) {
                    (Some(a), None) => TreeNode::Leaf { action: a },
                    (None, _) => return Err(Error::parse(field, "missing")),
                    (Some(_), Some(_)) => return Err(Error::parse(field, "leaf has both action and class")),
                }
            }
            (Some(_), Some(_)) => return Err(Error::parse(format!("nodes[{k}]"), "both split and leaf")),
            (None, None) => return Err(Error::parse(format!("nodes[{k}]"), "neither split nor leaf")),
        };
        nodes.push(node);
    }
    let root = lookup(doc.root, "root".into())?;
    PolicyTree::from_nodes(nodes, root, doc.action_names, doc.feature_names)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(crate) fn to_dot(tree: &PolicyTree) -> String {
    let mut out = String::from("digraph policy_tree {\n  node [shape=box];\n");
    for (id, n) in tree.nodes.iter().enumerate() {
        let label = match *n {
            TreeNode::Split { feature, threshold, .. } => {
                format!("{} < {}", tree.feature_names[feature], threshold)
            }
            TreeNode::Leaf { action } => tree.action_names[action].clone(),
        };
        writeln!(out, "  n{id} [label=\"{}\"];", escape(&label)).unwrap();
    }
    for (id, n) in tree.nodes.iter().enumerate() {
        if let TreeNode::Split { left, right, .. } = *n {
            writeln!(out, "  n{id} -> n{left} [label=\"yes\"];").unwrap();
            writeln!(out, "  n{id} -> n{right} [label=\"no\"];").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

impl PolicyTree {
    pub(crate) fn to_json_keyed(&self, key: LeafKey) -> String {
        to_json(self, key)
    }

    pub(crate) fn from_json_keyed(text: &str, key: LeafKey) -> Result<PolicyTree> {
        from_json(text, key)
    }
}
