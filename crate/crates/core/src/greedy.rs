//! Greedy completion of partial solutions, viewed as pushing flow from the
//! bottom layer to the root.
//!
//! Leaves are units of flow, vertices hold at most their upper capacity,
//! and anything that cannot be pushed further up is wasted. Saturating
//! every layer-1 vertex and bin-packing each layer into the next (children
//! by ascending flow, each onto the least-loaded parent) maximizes the
//! root inflow. The root inflow is computed twice here: once per vertex
//! while building an explicit topology, and once on (flow value,
//! multiplicity) batches, which avoids touching individual vertices.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::bounds::ResidualInstance;
use crate::instance::Instance;
use crate::tree::{LayerTree, TreeNode};

/// One layer of the greedily built topology. Layer 1 is index 0; `parent`
/// points into the next layer's node list and is empty for the top layer.
/// A node whose subtree cannot meet its own lower capacity (`f_min >
/// f_max`) is unusable: it carries flow ranges (0, 0) and only ever
/// receives zero flow.
#[derive(Debug)]
struct SkelLayer {
    parent: Vec<u32>,
    f_max: Vec<u64>,
    f_min: Vec<u64>,
    usable: Vec<bool>,
}

/// Round-robin packing of child flow batches into `parents` bins of
/// capacity `cap`. Children sorted ascending and always assigned to the
/// least-loaded bin land on bins cyclically, so bin loads can be counted
/// per batch run without expanding vertices. Returns the resulting load
/// batches, ascending, zero loads dropped.
fn push_layer(children: &[(u64, u64)], parents: u64, cap: u64) -> Vec<(u64, u64)> {
    if parents == 0 {
        return Vec::new();
    }
    let total: u64 = children.iter().map(|&(_, m)| m).sum();
    if total == 0 {
        return Vec::new();
    }
    // runs of equal flow as 1-indexed position ranges
    let mut runs = Vec::with_capacity(children.len());
    let mut pos = 1u64;
    for &(value, mult) in children {
        runs.push((value, pos, pos + mult - 1));
        pos += mult;
    }
    let remainder = total % parents;

    // bin loads change only where a round loses a child or a run boundary
    // crosses the sampling progression
    let mut breaks: Vec<u64> = vec![1];
    if remainder > 0 && remainder < parents {
        breaks.push(remainder + 1);
    }
    for &(_, _, hi) in &runs {
        let j = ((hi - 1) % parents) + 2;
        if j <= parents {
            breaks.push(j);
        }
    }
    breaks.sort_unstable();
    breaks.dedup();

    let load_at = |bin: u64| -> u64 {
        let mut load = 0u64;
        for &(value, lo, hi) in &runs {
            if hi < bin {
                continue;
            }
            let t_min = if lo <= bin { 0 } else { (lo - bin).div_ceil(parents) };
            let t_max = (hi - bin) / parents;
            if t_max >= t_min {
                load = load.saturating_add(value.saturating_mul(t_max - t_min + 1));
            }
        }
        load.min(cap)
    };

    let mut segments: Vec<(u64, u64)> = Vec::with_capacity(breaks.len());
    for (s, &start) in breaks.iter().enumerate() {
        let end = breaks.get(s + 1).copied().unwrap_or(parents + 1);
        let load = load_at(start);
        if load > 0 {
            segments.push((load, end - start));
        }
    }
    segments.sort_unstable();
    let mut merged: Vec<(u64, u64)> = Vec::with_capacity(segments.len());
    for (load, mult) in segments {
        match merged.last_mut() {
            Some((v, m)) if *v == load => *m += mult,
            _ => merged.push((load, mult)),
        }
    }
    merged
}

/// Root inflow of the batched greedy push, not yet capped by the residual
/// source count.
pub(crate) fn root_inflow(inst: &Instance, residual: &ResidualInstance) -> u64 {
    let lambda = inst.lambda();
    let n1 = residual.count(1);
    let u1 = inst.cap_hi(1);
    if n1 == 0 || u1 == 0 {
        return 0;
    }
    if lambda == 1 {
        return u1;
    }
    let mut batches = vec![(u1, n1)];
    for i in 2..=lambda {
        let parents = if i == lambda { 1 } else { residual.count(i) };
        batches = push_layer(&batches, parents, inst.cap_hi(i));
        if batches.is_empty() {
            return 0;
        }
    }
    debug_assert_eq!(batches.len(), 1);
    batches[0].0
}

/// Maximum number of leaves connectable in the residual instance when
/// lower capacities are ignored, capped at the remaining sources. Works on
/// flow batches; cost depends on the number of layers, not vertex counts.
pub fn greedy_max_flow(inst: &Instance, residual: &ResidualInstance) -> u64 {
    root_inflow(inst, residual).min(residual.sources)
}

/// Per-vertex construction of the greedy topology, then the f_min / f_max
/// flow range of every vertex over the fixed tree. Linear in the number of
/// residual vertices.
fn build_skeleton(inst: &Instance, residual: &ResidualInstance) -> Option<Vec<SkelLayer>> {
    let lambda = inst.lambda();
    let n1 = residual.count(1);
    if n1 == 0 {
        return None;
    }

    // topology by saturation loads, lower capacities ignored
    let mut parents: Vec<Vec<u32>> = Vec::with_capacity(lambda);
    let mut loads: Vec<Vec<u64>> = vec![vec![inst.cap_hi(1); n1 as usize]];
    for i in 2..=lambda {
        let bins = if i == lambda { 1 } else { residual.count(i) };
        if bins == 0 {
            return None;
        }
        let child_loads = &loads[i - 2];
        let mut order: Vec<u32> = (0..child_loads.len() as u32).collect();
        order.sort_by_key(|&c| (child_loads[c as usize], c));

        let mut heap: BinaryHeap<Reverse<(u64, u32)>> =
            (0..bins as u32).map(|b| Reverse((0u64, b))).collect();
        let mut bin_load = vec![0u64; bins as usize];
        let mut bin_used = vec![false; bins as usize];
        let mut assigned = vec![u32::MAX; child_loads.len()];
        for &c in &order {
            let Reverse((load, bin)) = heap.pop().expect("bins > 0");
            assigned[c as usize] = bin;
            bin_used[bin as usize] = true;
            let new_load = load.saturating_add(child_loads[c as usize]).min(inst.cap_hi(i));
            bin_load[bin as usize] = new_load;
            heap.push(Reverse((new_load, bin)));
        }

        // keep only bins that received children, in bin order
        let mut remap = vec![u32::MAX; bins as usize];
        let mut next_loads = Vec::new();
        for (bin, &used) in bin_used.iter().enumerate() {
            if used {
                remap[bin] = next_loads.len() as u32;
                next_loads.push(bin_load[bin]);
            }
        }
        parents.push(assigned.iter().map(|&bin| remap[bin as usize]).collect());
        loads.push(next_loads);
    }
    if loads[lambda - 1].len() != 1 {
        return None;
    }

    // flow ranges over the fixed topology; nodes that cannot reach their
    // lower capacity contribute nothing upward
    let mut layers: Vec<SkelLayer> = Vec::with_capacity(lambda);
    for i in 1..=lambda {
        let count = loads[i - 1].len();
        let (lo, hi) = (inst.cap_lo(i), inst.cap_hi(i));
        let (mut f_min, mut f_max) = if i == 1 {
            (vec![lo.max(1); count], vec![hi; count])
        } else {
            let below = &layers[i - 2];
            let mut sum_min = vec![0u64; count];
            let mut sum_max = vec![0u64; count];
            for (child, &parent) in parents[i - 2].iter().enumerate() {
                if below.usable[child] {
                    let p = parent as usize;
                    sum_min[p] = sum_min[p].saturating_add(below.f_min[child]);
                    sum_max[p] = sum_max[p].saturating_add(below.f_max[child]);
                }
            }
            let f_min = sum_min.iter().map(|&s| s.max(lo).max(1)).collect();
            let f_max = sum_max.iter().map(|&s| s.min(hi)).collect();
            (f_min, f_max)
        };
        let usable: Vec<bool> =
            f_min.iter().zip(&f_max).map(|(&lo, &hi)| lo <= hi).collect();
        for (node, &ok) in usable.iter().enumerate() {
            if !ok {
                f_min[node] = 0;
                f_max[node] = 0;
            }
        }
        layers.push(SkelLayer { parent: Vec::new(), f_min, f_max, usable });
    }
    for (i, parent) in parents.into_iter().enumerate() {
        layers[i].parent = parent;
    }
    Some(layers)
}

/// Tries to build an almost-valid tree connecting exactly the residual
/// sources, on the greedy topology. The topology is fixed; flow is
/// distributed top-down, children ordered by descending f_min, each funded
/// child receiving at least its f_min and at most its f_max. Children left
/// unfunded are dropped together with their subtrees. Returns nothing when
/// the remaining flow cannot be placed; the dynamic program then continues
/// unaffected.
pub fn greedy_complete(inst: &Instance, residual: &ResidualInstance) -> Option<LayerTree> {
    let lambda = inst.lambda();
    let target = residual.sources;
    if target == 0 {
        return None;
    }
    let skeleton = build_skeleton(inst, residual)?;
    let root_min = inst.cap_lo(lambda).max(1);
    if target < root_min || target > skeleton[lambda - 1].f_max[0] {
        return None;
    }

    // assigned flow per skeleton node, None = unused
    let mut flows: Vec<Vec<Option<u64>>> = skeleton
        .iter()
        .map(|l| vec![None; l.f_max.len()])
        .collect();
    flows[lambda - 1][0] = Some(target);

    for i in (2..=lambda).rev() {
        let (below, above) = flows.split_at_mut(i - 1);
        let child_flows = &mut below[i - 2];
        let parent_flows = &above[0];
        let child_layer = &skeleton[i - 2];
        let mut kids: Vec<Vec<u32>> = vec![Vec::new(); parent_flows.len()];
        for c in 0..child_layer.parent.len() {
            if child_layer.usable[c] {
                kids[child_layer.parent[c] as usize].push(c as u32);
            }
        }
        for (parent, &flow) in parent_flows.iter().enumerate() {
            let Some(flow) = flow else { continue };
            let mut children = std::mem::take(&mut kids[parent]);
            children.sort_by_key(|&c| (Reverse(child_layer.f_min[c as usize]), c));

            let mut rem = flow;
            let mut funded: Vec<u32> = Vec::with_capacity(children.len());
            for &c in &children {
                let need = child_layer.f_min[c as usize];
                if need <= rem {
                    child_flows[c as usize] = Some(need);
                    rem -= need;
                    funded.push(c);
                }
            }
            for &c in &funded {
                if rem == 0 {
                    break;
                }
                let c = c as usize;
                let headroom = child_layer.f_max[c] - child_flows[c].unwrap();
                let top_up = headroom.min(rem);
                child_flows[c] = Some(child_flows[c].unwrap() + top_up);
                rem -= top_up;
            }
            if rem > 0 {
                return None;
            }
        }
    }

    // materialize: funded nodes only, ids per layer in skeleton order
    let mut tree_layers: Vec<Vec<TreeNode>> = vec![Vec::new(); lambda + 1];
    let mut id_of: Vec<Vec<Option<u64>>> = skeleton
        .iter()
        .map(|l| vec![None; l.f_max.len()])
        .collect();
    for i in 1..=lambda {
        for node in 0..skeleton[i - 1].f_max.len() {
            if flows[i - 1][node].is_some() {
                let id = tree_layers[i].len() as u64;
                id_of[i - 1][node] = Some(id);
                tree_layers[i].push(TreeNode { id, parent: None });
            }
        }
    }
    for i in 1..lambda {
        for node in 0..skeleton[i - 1].parent.len() {
            if let Some(id) = id_of[i - 1][node] {
                let parent_id = id_of[i][skeleton[i - 1].parent[node] as usize]
                    .expect("funded child has a funded parent");
                tree_layers[i][id as usize].parent = Some(parent_id);
            }
        }
    }
    let mut next_leaf = 0u64;
    for node in 0..skeleton[0].f_max.len() {
        if let (Some(flow), Some(id)) = (flows[0][node], id_of[0][node]) {
            for _ in 0..flow {
                tree_layers[0].push(TreeNode { id: next_leaf, parent: Some(id) });
                next_leaf += 1;
            }
        }
    }
    debug_assert_eq!(next_leaf, target);
    LayerTree::new(tree_layers).ok()
}

/// Remembers the previous greedy run to predict later ones in O(lambda).
#[derive(Debug, Default)]
pub struct GreedyMemo {
    prev: Option<(Box<[u64]>, u64)>,
}

impl GreedyMemo {
    pub fn clear(&mut self) {
        self.prev = None;
    }

    pub fn remember(&mut self, residual: &ResidualInstance, connected: u64) {
        let mut snapshot = Vec::with_capacity(residual.counts.len() + 1);
        snapshot.push(residual.sources);
        snapshot.extend_from_slice(&residual.counts);
        self.prev = Some((snapshot.into_boxed_slice(), connected));
    }

    /// Capacity-weighted extrapolation from the previous run: extra
    /// vertices add their layer's upper capacity, and the whole estimate
    /// is capped at `min_i count_i * u_i`, the weakest layer's throughput.
    /// Losing vertices is modeled by that cap alone; subtracting capacity
    /// for them turned out to undershoot badly whenever the previous run
    /// was limited by a single layer rather than by totals. `None` before
    /// the first run.
    pub fn estimate(&self, inst: &Instance, residual: &ResidualInstance) -> Option<u64> {
        let (prev, prev_connected) = self.prev.as_ref()?;
        let mut est = *prev_connected as u128;
        let mut cap = u64::MAX;
        for i in 1..=inst.lambda() {
            let now = residual.count(i);
            if now > prev[i] {
                est += (now - prev[i]) as u128 * inst.cap_hi(i) as u128;
            }
            cap = cap.min(now.saturating_mul(inst.cap_hi(i)));
        }
        Some(est.min(cap as u128) as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::LayerSpec;
    use crate::tree::verify_tree;

    fn inst(n0: u64, layers: &[(u64, u64, u64)]) -> Instance {
        Instance::new(
            n0,
            layers.iter().map(|&(n, l, u)| LayerSpec::new(n, l, u)).collect(),
        )
        .unwrap()
    }

    fn residual(sources: u64, counts: &[u64]) -> ResidualInstance {
        ResidualInstance { sources, counts: counts.to_vec() }
    }

    /// Straightforward per-vertex simulation, kept independent of both
    /// production paths.
    fn naive_max_flow(inst: &Instance, res: &ResidualInstance) -> u64 {
        let lambda = inst.lambda();
        if res.count(1) == 0 {
            return 0;
        }
        let mut loads = vec![inst.cap_hi(1); res.count(1) as usize];
        for i in 2..=lambda {
            let bins = if i == lambda { 1 } else { res.count(i) as usize };
            if bins == 0 {
                return 0;
            }
            loads.sort_unstable();
            let mut parents = vec![0u64; bins];
            for &child in &loads {
                let (best, _) = parents
                    .iter()
                    .enumerate()
                    .map(|(b, &l)| (b, l))
                    .min_by_key(|&(b, l)| (l, b))
                    .unwrap();
                parents[best] = parents[best].saturating_add(child).min(inst.cap_hi(i));
            }
            loads = parents;
        }
        let root: u64 = if lambda == 1 { inst.cap_hi(1) } else { loads[0] };
        root.min(res.sources)
    }

    #[test]
    fn batched_flow_hand_example() {
        let i = inst(20, &[(9, 0, 2), (4, 0, 5), (1, 0, 8)]);
        assert_eq!(greedy_max_flow(&i, &residual(20, &[4, 2, 1])), 8);
    }

    #[test]
    fn batched_flow_wastes_overflow_at_root() {
        let i = inst(20, &[(9, 0, 2), (4, 0, 5), (1, 0, 7)]);
        assert_eq!(greedy_max_flow(&i, &residual(20, &[4, 2, 1])), 7);
    }

    #[test]
    fn batched_flow_empty_layer() {
        let i = inst(20, &[(9, 0, 2), (4, 0, 5), (1, 0, 7)]);
        assert_eq!(greedy_max_flow(&i, &residual(20, &[0, 2, 1])), 0);
    }

    #[test]
    fn batched_flow_capped_at_sources() {
        let i = inst(20, &[(9, 0, 2), (4, 0, 5), (1, 0, 8)]);
        assert_eq!(greedy_max_flow(&i, &residual(3, &[4, 2, 1])), 3);
    }

    #[test]
    fn batched_matches_naive_on_randomish_grid() {
        for lambda in 1..=4u64 {
            for seed in 0..200u64 {
                let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(lambda);
                let mut next = || {
                    x ^= x << 13;
                    x ^= x >> 7;
                    x ^= x << 17;
                    x
                };
                let layers: Vec<(u64, u64, u64)> =
                    (0..lambda).map(|_| (next() % 7, 0, 1 + next() % 9)).collect();
                let counts: Vec<u64> = layers.iter().map(|l| l.0).collect();
                let i = inst(1 + next() % 30, &layers);
                let r = residual(i.sources(), &counts);
                assert_eq!(
                    greedy_max_flow(&i, &r),
                    naive_max_flow(&i, &r),
                    "instance {i}, counts {counts:?}"
                );
            }
        }
    }

    #[test]
    fn completion_distributes_exactly() {
        // two layer-1 vertices in [2,3], root capacity 6, five leaves:
        // fund both at 2, top the first up to 3
        let i = inst(9, &[(2, 2, 3), (1, 0, 6)]);
        let tree = greedy_complete(&i, &residual(5, &[2, 1])).unwrap();
        assert_eq!(tree.leaf_count(), 5);
        let weights = tree.weights();
        let mut w1: Vec<u64> = tree.layers()[1].iter().map(|n| weights[1][&n.id]).collect();
        w1.sort_unstable();
        assert_eq!(w1, vec![2, 3]);
    }

    #[test]
    fn completion_fails_below_feasible_flow() {
        // single layer-1 vertex must carry at least 4; 3 cannot be placed
        let i = inst(9, &[(1, 4, 9), (1, 0, 9)]);
        assert!(greedy_complete(&i, &residual(3, &[1, 1])).is_none());
    }

    #[test]
    fn completion_drops_unneeded_subtrees() {
        // three layer-1 vertices needing at least 2 each cannot all be
        // funded with 4 leaves; one subtree is dropped
        let i = inst(9, &[(3, 2, 3), (1, 0, 9)]);
        let tree = greedy_complete(&i, &residual(4, &[3, 1])).unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert_eq!(tree.layers()[1].len(), 2);
    }

    #[test]
    fn completion_is_almost_valid_for_relaxed_instance() {
        let i = inst(8, &[(4, 1, 3), (2, 2, 8), (1, 0, 8)]);
        let tree = greedy_complete(&i, &residual(8, &[4, 2, 1])).unwrap();
        assert_eq!(tree.leaf_count(), 8);
        // the completion connects all sources here, so it is fully valid
        assert!(verify_tree(&i, &tree).is_valid());
    }

    #[test]
    fn estimate_cold_start_is_none() {
        let memo = GreedyMemo::default();
        let i = inst(9, &[(3, 0, 3), (1, 0, 9)]);
        assert!(memo.estimate(&i, &residual(4, &[3, 1])).is_none());
    }

    #[test]
    fn estimate_tracks_capacity_loss() {
        let i = inst(9, &[(9, 0, 2), (9, 0, 3), (1, 0, 6)]);
        let mut memo = GreedyMemo::default();
        memo.remember(&residual(5, &[3, 2, 1]), 5);
        // one layer-2 vertex fewer caps throughput at 1 * u_2 = 3, below
        // the 5 leaves needed, so the greedy run gets skipped
        let est = memo.estimate(&i, &residual(5, &[3, 1, 1])).unwrap();
        assert_eq!(est, 3);
        assert!(est < 5);
        // unchanged residual reproduces the remembered value
        assert_eq!(memo.estimate(&i, &residual(5, &[3, 2, 1])).unwrap(), 5);
    }

    #[test]
    fn estimate_clamps_to_capacity_product() {
        let i = inst(9, &[(9, 0, 2), (9, 0, 3), (1, 0, 6)]);
        let mut memo = GreedyMemo::default();
        memo.remember(&residual(9, &[1, 1, 1]), 2);
        let est = memo.estimate(&i, &residual(9, &[9, 9, 1])).unwrap();
        // raw extrapolation exceeds what one root of capacity 6 can take
        assert_eq!(est, 6);
    }
}
