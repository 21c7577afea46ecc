//! Local search over embedded layer trees: relocate one layer at a time
//! via matching, rewire equal-weight siblings via matching, and swap
//! parents of unequal vertices when the capacities allow it.

use std::collections::{BTreeMap, HashMap};

use super::assignment::min_cost_assignment;
use super::{cable_cost, layout_cost, Embedding, LayerGraph, SofaclapError};
use crate::tree::{verify_tree, LayerTree};

/// Toggles for the three improvement passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicSet {
    pub layerwise: bool,
    pub equal_weight: bool,
    pub general: bool,
}

impl Default for HeuristicSet {
    fn default() -> Self {
        Self { layerwise: true, equal_weight: true, general: true }
    }
}

impl HeuristicSet {
    /// Parses a comma list of `layerwise`, `equal-weight`, `general`.
    pub fn from_list(list: &str) -> Option<Self> {
        let mut set = Self { layerwise: false, equal_weight: false, general: false };
        for part in list.split(',') {
            match part.trim() {
                "layerwise" => set.layerwise = true,
                "equal-weight" => set.equal_weight = true,
                "general" => set.general = true,
                "" => {}
                _ => return None,
            }
        }
        Some(set)
    }
}

/// A change must beat this fraction of the current cost to count; keeps
/// the search from cycling on floating-point noise.
const REL_EPS: f64 = 1e-9;

fn improves(reduction: f64, current_total: f64) -> bool {
    reduction > REL_EPS * current_total
}

/// One round of layer-wise re-embedding: solve the assignment of every
/// layer's nodes onto the layer's full position pool (other layers fixed),
/// then apply only the layer with the biggest cost reduction. Repeats
/// until no layer improves. The tree itself never changes.
pub fn improve_layerwise(
    graph: &LayerGraph,
    tree: &LayerTree,
    emb: &mut Embedding,
    trace: &mut Vec<f64>,
) -> Result<bool, SofaclapError> {
    let mut changed = false;
    loop {
        let weights = tree.weights();
        let total = layout_cost(graph, tree, emb)?;
        let mut best: Option<(usize, Vec<usize>, f64)> = None;
        for layer in 0..tree.layers().len() {
            let positions = graph.positions(layer);
            if positions.len() <= 1 {
                continue;
            }
            let nodes = &tree.layers()[layer];
            // children grouped by parent id, for the incoming edge terms
            let mut children_of: HashMap<u64, Vec<(usize, u64)>> = HashMap::new();
            if layer > 0 {
                for child in &tree.layers()[layer - 1] {
                    let cpos = emb.position_of(layer - 1, child.id).unwrap();
                    children_of
                        .entry(child.parent.unwrap())
                        .or_default()
                        .push((cpos, weights[layer - 1][&child.id]));
                }
            }
            let mut matrix = Vec::with_capacity(nodes.len());
            let mut current = 0.0;
            for node in nodes {
                let up_unit = if node.parent.is_some() {
                    cable_cost(graph.cables(), weights[layer][&node.id])?
                } else {
                    0.0
                };
                let parent_pos = node.parent.map(|p| {
                    graph.positions(layer + 1)[emb.position_of(layer + 1, p).unwrap()]
                });
                let down: Vec<(usize, f64)> = children_of
                    .get(&node.id)
                    .map(|kids| {
                        kids.iter()
                            .map(|&(cpos, w)| {
                                Ok::<_, SofaclapError>((cpos, cable_cost(graph.cables(), w)?))
                            })
                            .collect::<Result<_, _>>()
                    })
                    .transpose()?
                    .unwrap_or_default();
                let row: Vec<f64> = positions
                    .iter()
                    .map(|&p| {
                        let up = parent_pos.map_or(0.0, |pp| up_unit * p.dist(pp));
                        let down_sum: f64 = down
                            .iter()
                            .map(|&(cpos, unit)| unit * graph.positions(layer - 1)[cpos].dist(p))
                            .sum();
                        up + down_sum
                    })
                    .collect();
                current += row[emb.position_of(layer, node.id).unwrap()];
                matrix.push(row);
            }
            let (assignment, matched) = min_cost_assignment(&matrix);
            let reduction = current - matched;
            if improves(reduction, total) && best.as_ref().is_none_or(|b| reduction > b.2) {
                best = Some((layer, assignment, reduction));
            }
        }
        let Some((layer, assignment, _)) = best else { break };
        for (rank, node) in tree.layers()[layer].iter().enumerate() {
            emb.set(layer, node.id, assignment[rank]);
        }
        trace.push(layout_cost(graph, tree, emb)?);
        changed = true;
    }
    Ok(changed)
}

/// One bottom-up sweep of equal-weight rewiring: within every group of
/// same-layer, same-weight vertices, any matching of members to the
/// group's parent slots keeps all weights intact, so the cheapest matching
/// is applied. The embedding stays fixed.
pub fn improve_equal_weight_swaps(
    graph: &LayerGraph,
    tree: &mut LayerTree,
    emb: &Embedding,
    trace: &mut Vec<f64>,
) -> Result<bool, SofaclapError> {
    let mut changed = false;
    for layer in 0..tree.layers().len() - 1 {
        let weights = tree.weights();
        let total = layout_cost(graph, tree, emb)?;
        let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for node in &tree.layers()[layer] {
            groups.entry(weights[layer][&node.id]).or_default().push(node.id);
        }
        for (weight, members) in groups {
            if members.len() < 2 {
                continue;
            }
            let unit = cable_cost(graph.cables(), weight)?;
            let parent_of: Vec<u64> = members
                .iter()
                .map(|&id| {
                    tree.layers()[layer]
                        .iter()
                        .find(|n| n.id == id)
                        .and_then(|n| n.parent)
                        .expect("non-root layers have parents")
                })
                .collect();
            let member_pos: Vec<_> = members
                .iter()
                .map(|&id| graph.positions(layer)[emb.position_of(layer, id).unwrap()])
                .collect();
            let slot_pos: Vec<_> = parent_of
                .iter()
                .map(|&p| graph.positions(layer + 1)[emb.position_of(layer + 1, p).unwrap()])
                .collect();
            let matrix: Vec<Vec<f64>> = member_pos
                .iter()
                .map(|&mp| slot_pos.iter().map(|&sp| unit * mp.dist(sp)).collect())
                .collect();
            let current: f64 = (0..members.len()).map(|m| matrix[m][m]).sum();
            let (assignment, matched) = min_cost_assignment(&matrix);
            if !improves(current - matched, total) {
                continue;
            }
            for (m, &slot) in assignment.iter().enumerate() {
                tree.set_parent(layer, members[m], parent_of[slot]);
            }
            debug_assert!(verify_tree(&graph.capacity_instance(), tree).is_valid());
            trace.push(layout_cost(graph, tree, emb)?);
            changed = true;
        }
    }
    Ok(changed)
}

struct SwapCandidate {
    v1: u64,
    v2: u64,
    delta: f64,
}

/// Cost delta of giving `v1` parent `p2` and `v2` parent `p1`, including
/// the cable regrading of every ancestor strictly below the lowest common
/// ancestor, or None when some such ancestor would leave its capacity
/// interval.
#[allow(clippy::too_many_arguments)]
fn general_swap_delta(
    graph: &LayerGraph,
    tree: &LayerTree,
    weights: &[HashMap<u64, u64>],
    emb: &Embedding,
    layer: usize,
    v1: u64,
    v2: u64,
) -> Result<Option<f64>, SofaclapError> {
    let find = |l: usize, id: u64| tree.layers()[l].iter().find(|n| n.id == id).unwrap();
    let p1 = find(layer, v1).parent.unwrap();
    let p2 = find(layer, v2).parent.unwrap();
    if p1 == p2 {
        return Ok(None);
    }
    let pos = |l: usize, id: u64| graph.positions(l)[emb.position_of(l, id).unwrap()];
    let (w1, w2) = (weights[layer][&v1], weights[layer][&v2]);
    let delta_w = w2 as i128 - w1 as i128;

    let mut delta = cable_cost(graph.cables(), w1)?
        * (pos(layer, v1).dist(pos(layer + 1, p2)) - pos(layer, v1).dist(pos(layer + 1, p1)))
        + cable_cost(graph.cables(), w2)?
            * (pos(layer, v2).dist(pos(layer + 1, p1)) - pos(layer, v2).dist(pos(layer + 1, p2)));

    if delta_w != 0 {
        // walk both parent chains in lock step until they merge
        let (mut a, mut b, mut l) = (p1, p2, layer + 1);
        let inst = graph.capacity_instance();
        while a != b {
            for (anc, shift) in [(a, delta_w), (b, -delta_w)] {
                let w = weights[l][&anc] as i128 + shift;
                let (lo, hi) = (inst.cap_lo(l).max(1) as i128, inst.cap_hi(l) as i128);
                if w < lo || w > hi {
                    return Ok(None);
                }
                if let Some(parent) = find(l, anc).parent {
                    let length = pos(l, anc).dist(pos(l + 1, parent));
                    let old_unit = cable_cost(graph.cables(), weights[l][&anc])?;
                    let new_unit = cable_cost(graph.cables(), w as u64)?;
                    delta += (new_unit - old_unit) * length;
                }
            }
            a = find(l, a).parent.expect("chains merge at the root at the latest");
            b = find(l, b).parent.unwrap();
            l += 1;
        }
    }
    Ok(Some(delta))
}

/// One bottom-up sweep of general parent swaps: within each layer, apply
/// the most cost-reducing validity-preserving swap until none is left,
/// then move up. Every applied swap strictly reduces the layout cost.
pub fn improve_general_swaps(
    graph: &LayerGraph,
    tree: &mut LayerTree,
    emb: &Embedding,
    trace: &mut Vec<f64>,
) -> Result<bool, SofaclapError> {
    let mut changed = false;
    for layer in 0..tree.layers().len() - 1 {
        loop {
            let weights = tree.weights();
            let total = layout_cost(graph, tree, emb)?;
            let ids: Vec<u64> = tree.layers()[layer].iter().map(|n| n.id).collect();
            let mut best: Option<SwapCandidate> = None;
            for (i, &v1) in ids.iter().enumerate() {
                for &v2 in &ids[i + 1..] {
                    let Some(delta) =
                        general_swap_delta(graph, tree, &weights, emb, layer, v1, v2)?
                    else {
                        continue;
                    };
                    if improves(-delta, total)
                        && best.as_ref().is_none_or(|b| delta < b.delta)
                    {
                        best = Some(SwapCandidate { v1, v2, delta });
                    }
                }
            }
            let Some(swap) = best else { break };
            let find = |l: usize, id: u64| tree.layers()[l].iter().find(|n| n.id == id).unwrap();
            let p1 = find(layer, swap.v1).parent.unwrap();
            let p2 = find(layer, swap.v2).parent.unwrap();
            tree.set_parent(layer, swap.v1, p2);
            tree.set_parent(layer, swap.v2, p1);
            debug_assert!(verify_tree(&graph.capacity_instance(), tree).is_valid());
            let cost = layout_cost(graph, tree, emb)?;
            debug_assert!(cost < total, "applied swaps strictly reduce cost");
            trace.push(cost);
            changed = true;
        }
    }
    Ok(changed)
}

/// Result of a full optimization run.
#[derive(Debug)]
pub struct OptimizeOutcome {
    pub tree: LayerTree,
    pub embedding: Embedding,
    /// Cost after the initial embedding and after every applied change;
    /// non-increasing.
    pub trace: Vec<f64>,
}

/// Runs the three heuristics in order, each exhaustively, and loops until
/// a full pass applies no change.
pub fn optimize(
    graph: &LayerGraph,
    tree: &LayerTree,
    emb: &Embedding,
    set: HeuristicSet,
) -> Result<OptimizeOutcome, SofaclapError> {
    let mut tree = tree.clone();
    let mut emb = emb.clone();
    let mut trace = vec![layout_cost(graph, &tree, &emb)?];
    loop {
        let mut changed = false;
        if set.layerwise {
            changed |= improve_layerwise(graph, &tree, &mut emb, &mut trace)?;
        }
        if set.equal_weight {
            changed |= improve_equal_weight_swaps(graph, &mut tree, &emb, &mut trace)?;
        }
        if set.general {
            changed |= improve_general_swaps(graph, &mut tree, &emb, &mut trace)?;
        }
        if !changed {
            break;
        }
    }
    debug_assert!(trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    Ok(OptimizeOutcome { tree, embedding: emb, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::{initial_embedding, CableType, GraphLayer, Point};
    use crate::tree::TreeNode;

    fn cable(max_load: u64, cost: f64) -> CableType {
        CableType { max_load, cost_per_unit: cost }
    }

    /// Two sources, two layer-1 positions arranged so the index-order
    /// embedding crosses the cables.
    fn crossing_graph() -> (LayerGraph, LayerTree) {
        let graph = LayerGraph::new(
            vec![Point(0.0, 0.0), Point(10.0, 0.0)],
            vec![
                GraphLayer {
                    cap_lo: 0,
                    cap_hi: 2,
                    positions: vec![Point(10.0, 1.0), Point(0.0, 1.0)],
                },
                GraphLayer { cap_lo: 0, cap_hi: 2, positions: vec![Point(5.0, 2.0)] },
            ],
            vec![cable(2, 1.0)],
        )
        .unwrap();
        let tree = LayerTree::new(vec![
            vec![TreeNode { id: 0, parent: Some(0) }, TreeNode { id: 1, parent: Some(1) }],
            vec![TreeNode { id: 0, parent: Some(0) }, TreeNode { id: 1, parent: Some(0) }],
            vec![TreeNode { id: 0, parent: None }],
        ])
        .unwrap();
        (graph, tree)
    }

    #[test]
    fn layerwise_uncrosses_assignment() {
        let (graph, tree) = crossing_graph();
        let mut emb = initial_embedding(&graph, &tree).unwrap();
        let before = layout_cost(&graph, &tree, &emb).unwrap();
        let mut trace = vec![before];
        let changed = improve_layerwise(&graph, &tree, &mut emb, &mut trace).unwrap();
        assert!(changed);
        let after = layout_cost(&graph, &tree, &emb).unwrap();
        // uncrossing either layer drops the two source edges from
        // sqrt(101) to 1 each
        assert!(after < 0.5 * before, "crossed {before}, still {after}");
        let leaf_edges: f64 = after - 2.0 * Point(0.0, 1.0).dist(Point(5.0, 2.0));
        assert!((leaf_edges - 2.0).abs() < 1e-9);
    }

    #[test]
    fn layerwise_fixpoint_reports_no_change() {
        let (graph, tree) = crossing_graph();
        let mut emb = initial_embedding(&graph, &tree).unwrap();
        let mut trace = Vec::new();
        improve_layerwise(&graph, &tree, &mut emb, &mut trace).unwrap();
        let mut trace2 = Vec::new();
        assert!(!improve_layerwise(&graph, &tree, &mut emb, &mut trace2).unwrap());
        assert!(trace2.is_empty());
    }

    /// Four sources under two parents, wired crosswise.
    fn crossed_wiring() -> (LayerGraph, LayerTree) {
        let graph = LayerGraph::new(
            vec![Point(0.0, 0.0), Point(1.0, 0.0), Point(10.0, 0.0), Point(11.0, 0.0)],
            vec![
                GraphLayer {
                    cap_lo: 0,
                    cap_hi: 2,
                    positions: vec![Point(0.5, 1.0), Point(10.5, 1.0)],
                },
                GraphLayer { cap_lo: 0, cap_hi: 4, positions: vec![Point(5.0, 2.0)] },
            ],
            vec![cable(1, 1.0), cable(4, 2.0)],
        )
        .unwrap();
        // leaves 0 and 2 under parent 0, leaves 1 and 3 under parent 1
        let tree = LayerTree::new(vec![
            vec![
                TreeNode { id: 0, parent: Some(0) },
                TreeNode { id: 1, parent: Some(1) },
                TreeNode { id: 2, parent: Some(0) },
                TreeNode { id: 3, parent: Some(1) },
            ],
            vec![TreeNode { id: 0, parent: Some(0) }, TreeNode { id: 1, parent: Some(0) }],
            vec![TreeNode { id: 0, parent: None }],
        ])
        .unwrap();
        (graph, tree)
    }

    #[test]
    fn equal_weight_swap_uncrosses_leaves() {
        let (graph, mut tree) = crossed_wiring();
        let emb = initial_embedding(&graph, &tree).unwrap();
        let before = layout_cost(&graph, &tree, &emb).unwrap();
        let mut trace = vec![before];
        let changed = improve_equal_weight_swaps(&graph, &mut tree, &emb, &mut trace).unwrap();
        assert!(changed);
        let after = layout_cost(&graph, &tree, &emb).unwrap();
        assert!(after < before);
        let parents: Vec<u64> =
            tree.layers()[0].iter().map(|n| n.parent.unwrap()).collect();
        assert_eq!(parents, vec![0, 0, 1, 1]);
    }

    #[test]
    fn equal_weight_swap_leaves_optimum_alone() {
        let (graph, mut tree) = crossed_wiring();
        let emb = initial_embedding(&graph, &tree).unwrap();
        let mut trace = Vec::new();
        improve_equal_weight_swaps(&graph, &mut tree, &emb, &mut trace).unwrap();
        let mut trace2 = Vec::new();
        assert!(!improve_equal_weight_swaps(&graph, &mut tree, &emb, &mut trace2).unwrap());
    }

    /// Unequal subtree weights crossed under two parents with slack
    /// capacities.
    fn unequal_crossing() -> (LayerGraph, LayerTree) {
        let graph = LayerGraph::new(
            vec![
                Point(0.0, 0.0),
                Point(1.0, 0.0),
                Point(10.0, 0.0),
            ],
            vec![
                GraphLayer {
                    cap_lo: 1,
                    cap_hi: 3,
                    positions: vec![Point(0.5, 1.0), Point(10.0, 1.0)],
                },
                GraphLayer {
                    cap_lo: 1,
                    cap_hi: 3,
                    positions: vec![Point(0.5, 2.0), Point(10.0, 2.0)],
                },
                GraphLayer { cap_lo: 3, cap_hi: 3, positions: vec![Point(5.0, 3.0)] },
            ],
            vec![cable(1, 1.0), cable(2, 1.5), cable(3, 2.0)],
        )
        .unwrap();
        // the weight-2 layer-1 vertex hangs under the far layer-2 vertex
        let tree = LayerTree::new(vec![
            vec![
                TreeNode { id: 0, parent: Some(0) },
                TreeNode { id: 1, parent: Some(0) },
                TreeNode { id: 2, parent: Some(1) },
            ],
            vec![TreeNode { id: 0, parent: Some(1) }, TreeNode { id: 1, parent: Some(0) }],
            vec![TreeNode { id: 0, parent: Some(0) }, TreeNode { id: 1, parent: Some(0) }],
            vec![TreeNode { id: 0, parent: None }],
        ])
        .unwrap();
        (graph, tree)
    }

    #[test]
    fn general_swap_fixes_unequal_crossing() {
        let (graph, mut tree) = unequal_crossing();
        let emb = initial_embedding(&graph, &tree).unwrap();
        let before = layout_cost(&graph, &tree, &emb).unwrap();
        let mut trace = vec![before];
        let changed = improve_general_swaps(&graph, &mut tree, &emb, &mut trace).unwrap();
        assert!(changed, "crossing with slack capacities must be swapped");
        assert!(layout_cost(&graph, &tree, &emb).unwrap() < before);
        assert!(verify_tree(&graph.capacity_instance(), &tree).is_valid());
    }

    #[test]
    fn general_swap_respects_tight_ancestors() {
        // layer-2 vertex Y already carries two leaves; taking the weight-2
        // subtree would push it to 3, above the tightened cap of 2
        let graph = LayerGraph::new(
            vec![Point(0.0, 0.0), Point(1.0, 0.0), Point(8.0, 0.0), Point(9.0, 0.0)],
            vec![
                GraphLayer {
                    cap_lo: 1,
                    cap_hi: 2,
                    positions: vec![Point(0.5, 1.0), Point(8.0, 1.0), Point(9.0, 1.0)],
                },
                GraphLayer {
                    cap_lo: 1,
                    cap_hi: 2,
                    positions: vec![Point(0.5, 2.0), Point(8.5, 2.0)],
                },
                GraphLayer { cap_lo: 4, cap_hi: 4, positions: vec![Point(4.5, 3.0)] },
            ],
            vec![cable(1, 1.0), cable(2, 1.5), cable(4, 2.0)],
        )
        .unwrap();
        let tree = LayerTree::new(vec![
            vec![
                TreeNode { id: 0, parent: Some(0) },
                TreeNode { id: 1, parent: Some(0) },
                TreeNode { id: 2, parent: Some(1) },
                TreeNode { id: 3, parent: Some(2) },
            ],
            vec![
                TreeNode { id: 0, parent: Some(0) },
                TreeNode { id: 1, parent: Some(1) },
                TreeNode { id: 2, parent: Some(1) },
            ],
            vec![TreeNode { id: 0, parent: Some(0) }, TreeNode { id: 1, parent: Some(0) }],
            vec![TreeNode { id: 0, parent: None }],
        ])
        .unwrap();
        let emb = initial_embedding(&graph, &tree).unwrap();
        let weights = tree.weights();
        // swapping the weight-2 vertex 0 with the weight-1 vertex 1 would
        // lift Y = layer-2 node 1 to weight 3 > 2
        let delta = general_swap_delta(&graph, &tree, &weights, &emb, 1, 0, 1).unwrap();
        assert!(delta.is_none());
        // same parent never swaps
        let same = general_swap_delta(&graph, &tree, &weights, &emb, 1, 1, 2).unwrap();
        assert!(same.is_none());
    }

    #[test]
    fn optimize_runs_to_fixpoint_and_is_monotone() {
        let (graph, tree) = unequal_crossing();
        let emb = initial_embedding(&graph, &tree).unwrap();
        let out = optimize(&graph, &tree, &emb, HeuristicSet::default()).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(verify_tree(&graph.capacity_instance(), &out.tree).is_valid());
        assert!(out.embedding.is_consistent(&out.tree));
        // a second run changes nothing
        let again = optimize(&graph, &out.tree, &out.embedding, HeuristicSet::default()).unwrap();
        assert_eq!(again.trace.len(), 1);
    }

    #[test]
    fn heuristic_set_parses() {
        let set = HeuristicSet::from_list("layerwise,general").unwrap();
        assert!(set.layerwise && !set.equal_weight && set.general);
        assert!(HeuristicSet::from_list("bogus").is_none());
    }
}
