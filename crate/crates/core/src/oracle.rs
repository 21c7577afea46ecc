//! Exhaustive ground-truth solvers for tiny instances.
//!
//! Everything here favors obviousness over speed: trees are enumerated as
//! weight multisets grouped layer by layer, with memoization as the only
//! concession to running time. The module exists to check the dynamic
//! program and its bounds, so it deliberately shares no code with them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::instance::Instance;
use crate::tree::{LayerTree, TreeNode};
use crate::vector::CountVector;

/// Size guards; enumeration beyond these explodes.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_n0: u64,
    pub max_lambda: usize,
    pub max_layer_count: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_n0: 12, max_lambda: 3, max_layer_count: 6 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    TooLarge(String),
}

/// Exhaustive result: the decision plus every almost-valid count vector,
/// grouped by leaf count.
#[derive(Debug)]
pub struct OracleOutcome {
    pub feasible: bool,
    pub relaxed: BTreeMap<u64, BTreeSet<CountVector>>,
}

fn check_limits(inst: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    if inst.sources() > limits.max_n0 {
        return Err(OracleError::TooLarge(format!(
            "{} sources, oracle handles at most {}",
            inst.sources(),
            limits.max_n0
        )));
    }
    if inst.lambda() > limits.max_lambda {
        return Err(OracleError::TooLarge(format!(
            "{} layers, oracle handles at most {}",
            inst.lambda(),
            limits.max_lambda
        )));
    }
    for (i, spec) in inst.layers().iter().enumerate() {
        if spec.count > limits.max_layer_count {
            return Err(OracleError::TooLarge(format!(
                "layer {} has {} vertices, oracle handles at most {}",
                i + 1,
                spec.count,
                limits.max_layer_count
            )));
        }
    }
    Ok(())
}

/// Partitions of `total` into exactly `parts` non-decreasing summands from
/// `[lo, hi]`.
fn partitions_into(total: u64, parts: u64, lo: u64, hi: u64) -> Vec<Vec<u64>> {
    fn rec(total: u64, parts: u64, min: u64, hi: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 0 {
            if total == 0 {
                out.push(acc.clone());
            }
            return;
        }
        let mut part = min;
        while part <= hi && part * parts <= total {
            if total <= part.saturating_mul(parts).max(total) {
                // upper feasibility: remaining parts can still absorb the rest
                if total - part <= hi.saturating_mul(parts - 1) {
                    acc.push(part);
                    rec(total - part, parts - 1, part, hi, acc, out);
                    acc.pop();
                }
            }
            part += 1;
        }
    }
    let mut out = Vec::new();
    if lo > hi || parts == 0 && total != 0 {
        return out;
    }
    rec(total, parts, lo.max(1), hi, &mut Vec::new(), &mut out);
    out
}

/// Sub-multisets of the sorted multiset `w` that contain `w[0]`, paired
/// with the remaining elements.
fn splits_containing_first(w: &[u64]) -> Vec<(Vec<u64>, Vec<u64>)> {
    let mut runs: Vec<(u64, usize)> = Vec::new();
    for &x in w {
        match runs.last_mut() {
            Some((v, m)) if *v == x => *m += 1,
            _ => runs.push((x, 1)),
        }
    }
    let mut out = Vec::new();
    let mut take = vec![0usize; runs.len()];
    take[0] = 1;
    loop {
        let mut chosen = Vec::new();
        let mut rest = Vec::new();
        for (i, &(v, m)) in runs.iter().enumerate() {
            for _ in 0..take[i] {
                chosen.push(v);
            }
            for _ in take[i]..m {
                rest.push(v);
            }
        }
        out.push((chosen, rest));
        // odometer over take counts, first value stays at >= 1
        let mut i = runs.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let floor = if i == 0 { 1 } else { 0 };
            if take[i] < runs[i].1 {
                take[i] += 1;
                break;
            }
            take[i] = floor;
        }
    }
}

type SumsMemo = HashMap<(Vec<u64>, u64), BTreeSet<Vec<u64>>>;

/// All ways to partition the sorted multiset `w` into at most `max_groups`
/// groups whose sums lie in `[lo, hi]`, reported as sorted sum multisets.
fn group_sums(w: &[u64], max_groups: u64, lo: u64, hi: u64, memo: &mut SumsMemo) -> BTreeSet<Vec<u64>> {
    if w.is_empty() {
        return BTreeSet::from([Vec::new()]);
    }
    if max_groups == 0 {
        return BTreeSet::new();
    }
    let key = (w.to_vec(), max_groups);
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let mut out = BTreeSet::new();
    for (chosen, rest) in splits_containing_first(w) {
        let sum: u64 = chosen.iter().sum();
        if sum < lo || sum > hi {
            continue;
        }
        for tail in group_sums(&rest, max_groups - 1, lo, hi, memo) {
            let mut sums = tail.clone();
            let pos = sums.partition_point(|&s| s < sum);
            sums.insert(pos, sum);
            out.insert(sums);
        }
    }
    memo.insert(key, out.clone());
    out
}

struct VectorEnum<'a> {
    inst: &'a Instance,
    sums_memo: SumsMemo,
    // (layer, weight multiset) -> suffixes (a_{layer+1}, ..., a_lambda)
    rec_memo: HashMap<(usize, Vec<u64>), BTreeSet<Vec<u64>>>,
}

impl<'a> VectorEnum<'a> {
    /// True when a single path can run from layer `from` to the root while
    /// carrying `total` leaves.
    fn path_ok(&self, from: usize, total: u64) -> bool {
        (from..=self.inst.lambda()).all(|j| self.inst.count(j) >= 1 && self.inst.cap_hi(j) >= total)
    }

    /// Suffix counts achievable above layer `layer` holding weights `w`
    /// (|w| >= 2, all constraints at layers <= layer already hold).
    fn suffixes(&mut self, layer: usize, w: &[u64]) -> BTreeSet<Vec<u64>> {
        let lambda = self.inst.lambda();
        debug_assert!(w.len() >= 2 && layer < lambda);
        let key = (layer, w.to_vec());
        if let Some(hit) = self.rec_memo.get(&key) {
            return hit.clone();
        }
        let total: u64 = w.iter().sum();
        let mut out = BTreeSet::new();
        // collapse to a path: layers above the branching layer need no
        // lower capacity, only room for all leaves
        if self.path_ok(layer + 1, total) {
            out.insert(vec![1; lambda - layer]);
        }
        if layer + 1 < lambda {
            let next = layer + 1;
            let (lo, hi) = (self.inst.cap_lo(next), self.inst.cap_hi(next));
            let max_groups = self.inst.count(next).min(w.len() as u64);
            let all = group_sums(w, max_groups, lo.max(1), hi, &mut self.sums_memo);
            for sums in all {
                if sums.len() < 2 {
                    continue;
                }
                let g = sums.len() as u64;
                for tail in self.suffixes(next, &sums) {
                    let mut suffix = Vec::with_capacity(lambda - layer);
                    suffix.push(g);
                    suffix.extend_from_slice(&tail);
                    out.insert(suffix);
                }
            }
        }
        self.rec_memo.insert(key, out.clone());
        out
    }
}

/// Enumerates every almost-valid count vector of the instance and decides
/// feasibility from the ones connecting all sources.
pub fn brute_force_decide(inst: &Instance, limits: &OracleLimits) -> Result<OracleOutcome, OracleError> {
    check_limits(inst, limits)?;
    let lambda = inst.lambda();
    let n0 = inst.sources();
    let mut relaxed: BTreeMap<u64, BTreeSet<CountVector>> = BTreeMap::new();
    let mut state = VectorEnum { inst, sums_memo: HashMap::new(), rec_memo: HashMap::new() };

    for c in 1..=n0 {
        let mut found: BTreeSet<CountVector> = BTreeSet::new();
        // single layer-1 vertex: the tree is a path from layer 1 up
        if inst.count(1) >= 1 && inst.cap_hi(1) >= c && state.path_ok(2, c) {
            let mut counts = vec![1u64; lambda + 1];
            counts[0] = c;
            found.insert(CountVector::new(counts));
        }
        // two or more layer-1 vertices: lower capacities bind at layer 1
        let max_parts = inst.count(1).min(c);
        for m in 2..=max_parts {
            for parts in partitions_into(c, m, inst.cap_lo(1).max(1), inst.cap_hi(1)) {
                if lambda == 1 {
                    continue; // layer 1 is the root layer, one vertex only
                }
                for suffix in state.suffixes(1, &parts) {
                    let mut counts = Vec::with_capacity(lambda + 1);
                    counts.push(c);
                    counts.push(m);
                    counts.extend_from_slice(&suffix);
                    found.insert(CountVector::new(counts));
                }
            }
        }
        if !found.is_empty() {
            relaxed.insert(c, found);
        }
    }

    let lower_caps_fit = (1..=lambda).all(|i| inst.cap_lo(i) <= n0);
    let feasible = lower_caps_fit && relaxed.contains_key(&n0);
    Ok(OracleOutcome { feasible, relaxed })
}

/// A layer tree up to isomorphism: a vertex is the sorted multiset of its
/// child shapes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeShape {
    Leaf,
    Node(Vec<TreeShape>),
}

impl TreeShape {
    pub fn weight(&self) -> u64 {
        match self {
            TreeShape::Leaf => 1,
            TreeShape::Node(children) => children.iter().map(|c| c.weight()).sum(),
        }
    }
}

/// The shape of an explicit tree; two trees are isomorphic exactly when
/// their shapes are equal.
pub fn tree_shape(tree: &LayerTree) -> TreeShape {
    fn build(tree: &LayerTree, layer: usize, id: u64) -> TreeShape {
        if layer == 0 {
            return TreeShape::Leaf;
        }
        let mut children: Vec<TreeShape> = tree.layers()[layer - 1]
            .iter()
            .filter(|n| n.parent == Some(id))
            .map(|n| build(tree, layer - 1, n.id))
            .collect();
        children.sort();
        TreeShape::Node(children)
    }
    let root = tree.layers()[tree.lambda()][0].id;
    build(tree, tree.lambda(), root)
}

/// Materializes a shape as an explicit tree with ids assigned per layer in
/// depth-first order.
pub fn shape_to_tree(shape: &TreeShape, lambda: usize) -> LayerTree {
    fn place(
        shape: &TreeShape,
        layer: usize,
        parent: Option<u64>,
        layers: &mut Vec<Vec<TreeNode>>,
    ) {
        let id = layers[layer].len() as u64;
        layers[layer].push(TreeNode { id, parent });
        if let TreeShape::Node(children) = shape {
            for child in children {
                place(child, layer - 1, Some(id), layers);
            }
        }
    }
    let mut layers = vec![Vec::new(); lambda + 1];
    place(shape, lambda, None, &mut layers);
    LayerTree::new(layers).expect("materialized shape is structurally sound")
}

/// Every valid layer tree of the instance, up to isomorphism.
pub fn enumerate_valid_trees(
    inst: &Instance,
    limits: &OracleLimits,
) -> Result<BTreeSet<TreeShape>, OracleError> {
    check_limits(inst, limits)?;

    /// Groupings of a sorted multiset of shapes into parents, each parent
    /// weight within `[lo, hi]`, at most `max_groups` parents.
    fn groupings(
        shapes: &[TreeShape],
        max_groups: u64,
        lo: u64,
        hi: u64,
    ) -> BTreeSet<Vec<TreeShape>> {
        fn splits(shapes: &[TreeShape]) -> Vec<(Vec<TreeShape>, Vec<TreeShape>)> {
            let mut runs: Vec<(&TreeShape, usize)> = Vec::new();
            for s in shapes {
                match runs.last_mut() {
                    Some((v, m)) if *v == s => *m += 1,
                    _ => runs.push((s, 1)),
                }
            }
            let mut out = Vec::new();
            let mut take = vec![0usize; runs.len()];
            take[0] = 1;
            loop {
                let mut chosen = Vec::new();
                let mut rest = Vec::new();
                for (i, &(v, m)) in runs.iter().enumerate() {
                    for _ in 0..take[i] {
                        chosen.push(v.clone());
                    }
                    for _ in take[i]..m {
                        rest.push(v.clone());
                    }
                }
                out.push((chosen, rest));
                let mut i = runs.len();
                loop {
                    if i == 0 {
                        return out;
                    }
                    i -= 1;
                    let floor = if i == 0 { 1 } else { 0 };
                    if take[i] < runs[i].1 {
                        take[i] += 1;
                        break;
                    }
                    take[i] = floor;
                }
            }
        }

        if shapes.is_empty() {
            return BTreeSet::from([Vec::new()]);
        }
        if max_groups == 0 {
            return BTreeSet::new();
        }
        let mut out = BTreeSet::new();
        for (chosen, rest) in splits(shapes) {
            let weight: u64 = chosen.iter().map(|s| s.weight()).sum();
            if weight < lo || weight > hi {
                continue;
            }
            let parent = TreeShape::Node(chosen);
            for tail in groupings(&rest, max_groups - 1, lo, hi) {
                let mut group = tail.clone();
                let pos = group.partition_point(|s| s < &parent);
                group.insert(pos, parent.clone());
                out.insert(group);
            }
        }
        out
    }

    let n0 = inst.sources();
    let mut frontier: BTreeSet<Vec<TreeShape>> = BTreeSet::from([vec![TreeShape::Leaf; n0 as usize]]);
    for i in 1..=inst.lambda() {
        let mut next = BTreeSet::new();
        for shapes in &frontier {
            // full validity: lower capacities bind on every layer
            for group in groupings(shapes, inst.count(i), inst.cap_lo(i), inst.cap_hi(i)) {
                next.insert(group);
            }
        }
        frontier = next;
    }
    Ok(frontier
        .into_iter()
        .filter(|group| group.len() == 1)
        .map(|mut group| group.pop().unwrap())
        .collect())
}

/// Exact maximum number of leaves routable through a pair of layers: up to
/// `n_children` child vertices with weights in `[l_child, u_child]` grouped
/// under up to `n_parents` vertices with loads in `[l_parent, u_parent]`.
pub fn max_leaves_two_layer_bruteforce(
    n_child: u64,
    u_child: u64,
    n_parent: u64,
    u_parent: u64,
    l_child: u64,
    l_parent: u64,
) -> Result<u64, OracleError> {
    if n_child.saturating_mul(u_child) > 10_000 || n_parent > 10_000 {
        return Err(OracleError::TooLarge("two-layer brute force capped at 10^4 cells".into()));
    }
    let min_child = l_child.max(1);
    // best[c] = max routable leaves using exactly the parents seen so far
    // and at most c children
    let cells = n_child as usize + 1;
    let mut best = vec![0u64; cells];
    for _parent in 0..n_parent {
        let mut next = best.clone();
        for children in 1..=n_child {
            // one parent with `children` children: any sum in
            // [children * min_child, children * u_child] is reachable
            let lo = l_parent.max(children.saturating_mul(min_child));
            let hi = u_parent.min(children.saturating_mul(u_child));
            if lo > hi {
                continue;
            }
            for budget in children..=n_child {
                let candidate = best[(budget - children) as usize] + hi;
                let slot = &mut next[budget as usize];
                if candidate > *slot {
                    *slot = candidate;
                }
            }
        }
        best = next;
    }
    Ok(best[n_child as usize])
}
