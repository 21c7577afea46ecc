//! Geometric layer graphs and cable cost layouts: embed a valid layer tree
//! into candidate positions so that total cable cost gets small.

mod assignment;
mod improve;

pub use assignment::min_cost_assignment;
pub use improve::{
    improve_equal_weight_swaps, improve_general_swaps, improve_layerwise, optimize, HeuristicSet,
    OptimizeOutcome,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, LayerSpec};
use crate::tree::LayerTree;

/// A planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point(pub f64, pub f64);

impl Point {
    pub fn dist(self, other: Point) -> f64 {
        let dx = self.0 - other.0;
        let dy = self.1 - other.1;
        (dx * dx + dy * dy).sqrt()
    }
}

/// One cable type: carries up to `max_load` leaves at `cost_per_unit` per
/// meter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableType {
    pub max_load: u64,
    pub cost_per_unit: f64,
}

/// Candidate positions and capacities for one layer `1..=lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphLayer {
    pub cap_lo: u64,
    pub cap_hi: u64,
    pub positions: Vec<Point>,
}

/// The geometric problem input: source positions, per-layer candidate
/// positions with capacities, and the cable catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGraph {
    sources: Vec<Point>,
    layers: Vec<GraphLayer>,
    cables: Vec<CableType>,
}

#[derive(Debug, Error)]
pub enum SofaclapError {
    #[error("a layer graph needs at least one layer")]
    NoLayers,
    #[error("a layer graph needs at least one source")]
    NoSources,
    #[error("cable catalog is empty")]
    NoCables,
    #[error("largest cable carries {max_load}, need at least {needed}")]
    CablesTooSmall { max_load: u64, needed: u64 },
    #[error("no cable carries a load of {load}")]
    LoadTooLarge { load: u64 },
    #[error("layer {layer}: tree uses {needed} vertices, graph offers {available} positions")]
    NotEnoughPositions { layer: usize, needed: usize, available: usize },
    #[error("tree node {id} in layer {layer} has no embedded position")]
    UnmappedNode { layer: usize, id: u64 },
    #[error("invalid layer graph json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported layer graph version {0}")]
    BadVersion(u32),
}

impl LayerGraph {
    /// Builds a layer graph and canonicalizes the cable catalog: sorted by
    /// load, duplicate loads keep the cheapest entry, and each cost is
    /// replaced by the cheapest cost among cables at least as large. The
    /// catalog must cover a full-load edge, i.e. `max_load >= n0`.
    pub fn new(
        sources: Vec<Point>,
        layers: Vec<GraphLayer>,
        mut cables: Vec<CableType>,
    ) -> Result<Self, SofaclapError> {
        if layers.is_empty() {
            return Err(SofaclapError::NoLayers);
        }
        if sources.is_empty() {
            return Err(SofaclapError::NoSources);
        }
        if cables.is_empty() {
            return Err(SofaclapError::NoCables);
        }
        cables.sort_by(|a, b| {
            (a.max_load, a.cost_per_unit)
                .partial_cmp(&(b.max_load, b.cost_per_unit))
                .expect("cable costs are not NaN")
        });
        cables.dedup_by_key(|c| c.max_load);
        for i in (0..cables.len() - 1).rev() {
            if cables[i + 1].cost_per_unit < cables[i].cost_per_unit {
                cables[i].cost_per_unit = cables[i + 1].cost_per_unit;
            }
        }
        let largest = cables.last().unwrap().max_load;
        if largest < sources.len() as u64 {
            return Err(SofaclapError::CablesTooSmall {
                max_load: largest,
                needed: sources.len() as u64,
            });
        }
        Ok(Self { sources, layers, cables })
    }

    pub fn lambda(&self) -> usize {
        self.layers.len()
    }

    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    pub fn layers(&self) -> &[GraphLayer] {
        &self.layers
    }

    pub fn cables(&self) -> &[CableType] {
        &self.cables
    }

    /// Positions of a layer, with layer 0 being the sources.
    pub fn positions(&self, layer: usize) -> &[Point] {
        if layer == 0 { &self.sources } else { &self.layers[layer - 1].positions }
    }

    /// The capacity skeleton as a plain instance: position counts become
    /// vertex budgets.
    pub fn capacity_instance(&self) -> Instance {
        Instance::new(
            self.sources.len() as u64,
            self.layers
                .iter()
                .map(|l| LayerSpec::new(l.positions.len() as u64, l.cap_lo, l.cap_hi))
                .collect(),
        )
        .expect("layer graph shape already validated")
    }
}

/// Cost per meter of the cheapest cable carrying `load`.
pub fn cable_cost(cables: &[CableType], load: u64) -> Result<f64, SofaclapError> {
    debug_assert!(load >= 1);
    cables
        .iter()
        .find(|c| c.max_load >= load)
        .map(|c| c.cost_per_unit)
        .ok_or(SofaclapError::LoadTooLarge { load })
}

/// Per-layer injective map from tree node ids to position indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    slots: Vec<BTreeMap<u64, usize>>,
}

impl Embedding {
    pub fn position_of(&self, layer: usize, id: u64) -> Option<usize> {
        self.slots[layer].get(&id).copied()
    }

    pub fn set(&mut self, layer: usize, id: u64, position: usize) {
        self.slots[layer].insert(id, position);
    }

    pub fn layer(&self, layer: usize) -> &BTreeMap<u64, usize> {
        &self.slots[layer]
    }

    /// Injectivity per layer plus total coverage of the tree's nodes.
    pub fn is_consistent(&self, tree: &LayerTree) -> bool {
        if self.slots.len() != tree.layers().len() {
            return false;
        }
        for (layer, nodes) in tree.layers().iter().enumerate() {
            let slots = &self.slots[layer];
            if slots.len() != nodes.len() {
                return false;
            }
            let mut used: Vec<usize> = slots.values().copied().collect();
            used.sort_unstable();
            used.dedup();
            if used.len() != nodes.len() {
                return false;
            }
            if nodes.iter().any(|n| !slots.contains_key(&n.id)) {
                return false;
            }
        }
        true
    }
}

/// Index-order assignment: nodes sorted by id take positions 0, 1, ... in
/// every layer. The improvement heuristics do the actual placing.
pub fn initial_embedding(graph: &LayerGraph, tree: &LayerTree) -> Result<Embedding, SofaclapError> {
    let mut slots = Vec::with_capacity(tree.layers().len());
    for (layer, nodes) in tree.layers().iter().enumerate() {
        let available = graph.positions(layer).len();
        if nodes.len() > available {
            return Err(SofaclapError::NotEnoughPositions {
                layer,
                needed: nodes.len(),
                available,
            });
        }
        // nodes are stored sorted by id
        slots.push(nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect());
    }
    Ok(Embedding { slots })
}

/// Total cable cost of the embedded tree: for every non-root node, the
/// cable matching its weight times the distance to its parent's position.
pub fn layout_cost(
    graph: &LayerGraph,
    tree: &LayerTree,
    emb: &Embedding,
) -> Result<f64, SofaclapError> {
    let weights = tree.weights();
    let mut total = 0.0;
    for (layer, nodes) in tree.layers().iter().enumerate() {
        for node in nodes {
            let Some(parent) = node.parent else { continue };
            let pos = emb
                .position_of(layer, node.id)
                .ok_or(SofaclapError::UnmappedNode { layer, id: node.id })?;
            let parent_pos = emb
                .position_of(layer + 1, parent)
                .ok_or(SofaclapError::UnmappedNode { layer: layer + 1, id: parent })?;
            let unit = cable_cost(graph.cables(), weights[layer][&node.id])?;
            total += unit * graph.positions(layer)[pos].dist(graph.positions(layer + 1)[parent_pos]);
        }
    }
    Ok(total)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    version: u32,
    layers: Vec<GraphLayer>,
    sources: Vec<Point>,
    cables: Vec<CableType>,
}

/// Parses the layer graph JSON format.
pub fn read_layer_graph(text: &str) -> Result<LayerGraph, SofaclapError> {
    let file: GraphFile = serde_json::from_str(text)?;
    if file.version != 1 {
        return Err(SofaclapError::BadVersion(file.version));
    }
    LayerGraph::new(file.sources, file.layers, file.cables)
}

pub fn write_layer_graph(graph: &LayerGraph) -> String {
    let file = GraphFile {
        version: 1,
        layers: graph.layers.clone(),
        sources: graph.sources.clone(),
        cables: graph.cables.clone(),
    };
    serde_json::to_string(&file).expect("layer graph serialization cannot fail")
}

/// Layout JSON: the tree format with a `position` per node plus the final
/// cost and the cost trace of the optimization run.
#[derive(Serialize, Deserialize)]
pub struct LayoutFile {
    pub version: u32,
    pub layers: Vec<Vec<LayoutNode>>,
    pub total_cost: f64,
    pub cost_trace: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent: Option<u64>,
    pub position: usize,
}

pub fn write_layout(
    tree: &LayerTree,
    emb: &Embedding,
    total_cost: f64,
    cost_trace: &[f64],
) -> String {
    let layers = tree
        .layers()
        .iter()
        .enumerate()
        .map(|(layer, nodes)| {
            nodes
                .iter()
                .map(|n| LayoutNode {
                    id: n.id,
                    parent: n.parent,
                    position: emb.position_of(layer, n.id).expect("embedding covers the tree"),
                })
                .collect()
        })
        .collect();
    let file = LayoutFile { version: 1, layers, total_cost, cost_trace: cost_trace.to_vec() };
    serde_json::to_string(&file).expect("layout serialization cannot fail")
}
