//! Explicit layer trees, the feasibility certificates.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;

/// One vertex of a layer tree. `parent` names a node id in the next layer
/// up and is absent exactly for the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeNode {
    pub id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent: Option<u64>,
}

/// A rooted tree with `lambda + 1` layers: leaves in layer 0, a single root
/// in layer `lambda`, every edge between adjacent layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTree {
    layers: Vec<Vec<TreeNode>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("a tree needs at least two layers (leaves and root)")]
    TooFewLayers,
    #[error("layer {layer} is empty")]
    EmptyLayer { layer: usize },
    #[error("layer {layer}: duplicate node id {id}")]
    DuplicateId { layer: usize, id: u64 },
    #[error("layer {layer} node {id}: dangling parent id {parent}")]
    DanglingParent { layer: usize, id: u64, parent: u64 },
    #[error("layer {layer} node {id}: missing parent below the root layer")]
    MissingParent { layer: usize, id: u64 },
    #[error("root layer has {found} nodes, expected exactly one")]
    MultipleRoots { found: usize },
    #[error("root node {id} must not have a parent")]
    RootWithParent { id: u64 },
}

impl LayerTree {
    /// Builds a tree from per-layer node lists (layer 0 first) and checks
    /// the structural rules. Nodes are stored sorted by id.
    pub fn new(mut layers: Vec<Vec<TreeNode>>) -> Result<Self, TreeError> {
        if layers.len() < 2 {
            return Err(TreeError::TooFewLayers);
        }
        let top = layers.len() - 1;
        for layer in layers.iter_mut() {
            layer.sort_by_key(|n| n.id);
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(TreeError::EmptyLayer { layer: i });
            }
            for pair in layer.windows(2) {
                if pair[0].id == pair[1].id {
                    return Err(TreeError::DuplicateId { layer: i, id: pair[0].id });
                }
            }
        }
        if layers[top].len() != 1 {
            return Err(TreeError::MultipleRoots { found: layers[top].len() });
        }
        if let Some(p) = layers[top][0].parent {
            let _ = p;
            return Err(TreeError::RootWithParent { id: layers[top][0].id });
        }
        for i in 0..top {
            for node in &layers[i] {
                match node.parent {
                    None => return Err(TreeError::MissingParent { layer: i, id: node.id }),
                    Some(p) => {
                        if !layers[i + 1].iter().any(|n| n.id == p) {
                            return Err(TreeError::DanglingParent {
                                layer: i,
                                id: node.id,
                                parent: p,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self { layers })
    }

    /// The unique path tree with one node per layer; the certificate for a
    /// single-source instance.
    pub fn path(lambda: usize) -> Self {
        let layers = (0..=lambda)
            .map(|i| {
                vec![TreeNode { id: 0, parent: if i == lambda { None } else { Some(0) } }]
            })
            .collect();
        Self { layers }
    }

    pub fn lambda(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layers(&self) -> &[Vec<TreeNode>] {
        &self.layers
    }

    pub fn leaf_count(&self) -> u64 {
        self.layers[0].len() as u64
    }

    /// Vertices per layer, `(a_0, ..., a_lambda)`.
    pub fn layer_counts(&self) -> Vec<u64> {
        self.layers.iter().map(|l| l.len() as u64).collect()
    }

    /// Repoints a node's parent edge. The caller keeps the structural
    /// rules intact; the new parent must live in the next layer up.
    pub(crate) fn set_parent(&mut self, layer: usize, id: u64, parent: u64) {
        debug_assert!(self.layers[layer + 1].iter().any(|n| n.id == parent));
        let node = self.layers[layer]
            .iter_mut()
            .find(|n| n.id == id)
            .expect("node exists in its layer");
        node.parent = Some(parent);
    }

    /// Per-layer map from node id to its weight, the number of leaves in
    /// the subtree below the node. Computed bottom-up; leaves weigh 1.
    pub fn weights(&self) -> Vec<HashMap<u64, u64>> {
        let mut out: Vec<HashMap<u64, u64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut level: HashMap<u64, u64> = layer.iter().map(|n| (n.id, 0)).collect();
            if i == 0 {
                for v in level.values_mut() {
                    *v = 1;
                }
            } else {
                for node in &self.layers[i - 1] {
                    let w = out[i - 1][&node.id];
                    if let Some(p) = node.parent {
                        if let Some(acc) = level.get_mut(&p) {
                            *acc += w;
                        }
                    }
                }
            }
            out.push(level);
        }
        out
    }
}

/// A violation found by [`verify_tree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Leaf count differs from the instance's source count.
    LeafCount { expected: u64, found: u64 },
    /// The tree has a different number of layers than the instance.
    LayerCountMismatch { expected: usize, found: usize },
    /// Layer `layer` uses more vertices than available.
    LayerOverflow { layer: usize, used: u64, available: u64 },
    /// A node's weight leaves its layer's capacity interval.
    WeightOutOfRange { layer: usize, id: u64, weight: u64, lo: u64, hi: u64 },
    /// A non-leaf node with no leaves below it; such a vertex cannot occur
    /// in a layer tree.
    EmptySubtree { layer: usize, id: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LeafCount { expected, found } => {
                write!(f, "tree has {found} leaves, instance has {expected} sources")
            }
            Violation::LayerCountMismatch { expected, found } => {
                write!(f, "tree has {found} layers above the leaves, instance has {expected}")
            }
            Violation::LayerOverflow { layer, used, available } => {
                write!(f, "layer {layer}: {used} vertices used, only {available} available")
            }
            Violation::WeightOutOfRange { layer, id, weight, lo, hi } => {
                write!(f, "layer {layer} node {id}: weight {weight} outside [{lo}, {hi}]")
            }
            Violation::EmptySubtree { layer, id } => {
                write!(f, "layer {layer} node {id}: no leaves below it")
            }
        }
    }
}

/// Outcome of checking a tree against an instance. An empty violation list
/// means the tree is a valid certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every certificate rule: the leaf count matches `n0`, no layer
/// exceeds its vertex budget, and every node's weight lies in its layer's
/// capacity interval. Structural defects of in-memory trees are ruled out
/// by [`LayerTree::new`]; the remaining structural concern, inner nodes
/// with empty subtrees, is reported here.
pub fn verify_tree(inst: &Instance, tree: &LayerTree) -> VerificationReport {
    let mut violations = Vec::new();
    if tree.lambda() != inst.lambda() {
        violations.push(Violation::LayerCountMismatch {
            expected: inst.lambda(),
            found: tree.lambda(),
        });
        return VerificationReport { violations };
    }
    if tree.leaf_count() != inst.sources() {
        violations.push(Violation::LeafCount {
            expected: inst.sources(),
            found: tree.leaf_count(),
        });
    }
    let weights = tree.weights();
    for i in 0..=inst.lambda() {
        let used = tree.layers()[i].len() as u64;
        let available = inst.count(i);
        if used > available {
            violations.push(Violation::LayerOverflow { layer: i, used, available });
        }
        if i == 0 {
            continue;
        }
        let (lo, hi) = (inst.cap_lo(i), inst.cap_hi(i));
        for node in &tree.layers()[i] {
            let w = weights[i][&node.id];
            if w == 0 {
                violations.push(Violation::EmptySubtree { layer: i, id: node.id });
            } else if w < lo || w > hi {
                violations.push(Violation::WeightOutOfRange {
                    layer: i,
                    id: node.id,
                    weight: w,
                    lo,
                    hi,
                });
            }
        }
    }
    VerificationReport { violations }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    version: u32,
    layers: Vec<Vec<TreeNode>>,
}

#[derive(Debug, Error)]
pub enum TreeParseError {
    #[error("invalid tree json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported tree format version {0}")]
    BadVersion(u32),
    #[error(transparent)]
    Structure(#[from] TreeError),
}

/// Parses the tree JSON format `{"version":1,"layers":[[{"id":..,"parent":..},..],..]}`
/// where `layers` lists layers bottom-up and the root omits `parent`.
pub fn read_tree(text: &str) -> Result<LayerTree, TreeParseError> {
    let file: TreeFile = serde_json::from_str(text)?;
    if file.version != 1 {
        return Err(TreeParseError::BadVersion(file.version));
    }
    Ok(LayerTree::new(file.layers)?)
}

/// Canonical serialization: nodes sorted by (layer, id), one line.
pub fn write_tree(tree: &LayerTree) -> String {
    let file = TreeFile { version: 1, layers: tree.layers().to_vec() };
    serde_json::to_string(&file).expect("tree serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::LayerSpec;

    fn inst(n0: u64, layers: &[(u64, u64, u64)]) -> Instance {
        Instance::new(
            n0,
            layers.iter().map(|&(n, l, u)| LayerSpec::new(n, l, u)).collect(),
        )
        .unwrap()
    }

    fn node(id: u64, parent: u64) -> TreeNode {
        TreeNode { id, parent: Some(parent) }
    }

    fn root(id: u64) -> TreeNode {
        TreeNode { id, parent: None }
    }

    /// 4 leaves, two weight-2 middle nodes, one root.
    fn balanced_tree() -> LayerTree {
        LayerTree::new(vec![
            vec![node(0, 0), node(1, 0), node(2, 1), node(3, 1)],
            vec![node(0, 0), node(1, 0)],
            vec![root(0)],
        ])
        .unwrap()
    }

    #[test]
    fn accepts_valid_certificate() {
        let report = verify_tree(&inst(4, &[(2, 2, 2), (1, 4, 4)]), &balanced_tree());
        assert!(report.is_valid(), "unexpected violations: {:?}", report.violations);
    }

    #[test]
    fn reports_weight_violations_on_lopsided_tree() {
        let lopsided = LayerTree::new(vec![
            vec![node(0, 0), node(1, 0), node(2, 0), node(3, 1)],
            vec![node(0, 0), node(1, 0)],
            vec![root(0)],
        ])
        .unwrap();
        let report = verify_tree(&inst(4, &[(2, 2, 2), (1, 4, 4)]), &lopsided);
        let out_of_range = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::WeightOutOfRange { layer: 1, .. }))
            .count();
        assert_eq!(out_of_range, 2, "weights 3 and 1 both violate [2, 2]");
    }

    #[test]
    fn path_tree_is_valid_for_single_source() {
        let t = LayerTree::path(3);
        let report = verify_tree(&inst(1, &[(1, 0, 1), (1, 1, 1), (1, 0, 2)]), &t);
        assert!(report.is_valid());
        assert_eq!(t.leaf_count(), 1);
    }

    #[test]
    fn counts_and_weights() {
        let t = balanced_tree();
        assert_eq!(t.layer_counts(), vec![4, 2, 1]);
        let w = t.weights();
        assert_eq!(w[1][&0], 2);
        assert_eq!(w[1][&1], 2);
        assert_eq!(w[2][&0], 4);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let t = balanced_tree();
        let text = write_tree(&t);
        let back = read_tree(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(write_tree(&back), text);
    }

    #[test]
    fn minimal_path_round_trips() {
        let t = LayerTree::path(2);
        assert_eq!(read_tree(&write_tree(&t)).unwrap(), t);
    }

    #[test]
    fn rejects_dangling_parent() {
        let err = LayerTree::new(vec![vec![node(0, 7)], vec![root(0)]]).unwrap_err();
        assert_eq!(err, TreeError::DanglingParent { layer: 0, id: 0, parent: 7 });
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = LayerTree::new(vec![vec![node(0, 0), node(0, 0)], vec![root(0)]]).unwrap_err();
        assert_eq!(err, TreeError::DuplicateId { layer: 0, id: 0 });
    }

    #[test]
    fn rejects_multiple_roots() {
        let err =
            LayerTree::new(vec![vec![node(0, 0), node(1, 1)], vec![root(0), root(1)]]).unwrap_err();
        assert_eq!(err, TreeError::MultipleRoots { found: 2 });
    }

    #[test]
    fn verify_flags_layer_mismatch() {
        let report = verify_tree(&inst(4, &[(2, 2, 2)]), &balanced_tree());
        assert_eq!(
            report.violations,
            vec![Violation::LayerCountMismatch { expected: 1, found: 2 }]
        );
    }
}
