//! The dynamic program over relaxed partial solutions, in two flavors: the
//! plain quadratic combination loop (`solve_basic`) kept as a baseline, and
//! the production solver (`solve`) with its optimizations behind a
//! configuration toggle set.

use std::time::{Duration, Instant};

use crate::bounds::{instance_leaf_bound, prune_counts, ResidualInstance};
use crate::greedy::{greedy_complete, root_inflow, GreedyMemo};
use crate::instance::Instance;
use crate::store::{Diagnostics, Entry, EntryRef, InsertOutcome, Provenance, SolutionStore};
use crate::tree::{verify_tree, LayerTree, TreeNode};
use crate::vector::CountVector;

/// Optimization toggles. `estimate` only has an effect when `greedy` is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptConfig {
    pub pareto: bool,
    pub prune: bool,
    pub balance: bool,
    pub counterpart: bool,
    pub greedy: bool,
    pub estimate: bool,
}

impl OptConfig {
    pub fn all() -> Self {
        Self { pareto: true, prune: true, balance: true, counterpart: true, greedy: true, estimate: true }
    }

    pub fn none() -> Self {
        Self {
            pareto: false,
            prune: false,
            balance: false,
            counterpart: false,
            greedy: false,
            estimate: false,
        }
    }

    /// The benchmark tags: `all`, `none`, and `no-<optimization>`.
    pub fn from_tag(tag: &str) -> Option<Self> {
        let mut cfg = match tag {
            "all" => Self::all(),
            "none" => Self::none(),
            "no-pareto" => Self { pareto: false, ..Self::all() },
            "no-prune" => Self { prune: false, ..Self::all() },
            "no-balance" => Self { balance: false, ..Self::all() },
            "no-counterpart" => Self { counterpart: false, ..Self::all() },
            "no-greedy" => Self { greedy: false, ..Self::all() },
            "no-estimate" => Self { estimate: false, ..Self::all() },
            _ => return None,
        };
        cfg.estimate &= cfg.greedy;
        Some(cfg)
    }

    pub const TAGS: [&'static str; 8] = [
        "all",
        "none",
        "no-pareto",
        "no-prune",
        "no-balance",
        "no-counterpart",
        "no-greedy",
        "no-estimate",
    ];
}

/// Wall-clock and store-size limits for one solve.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub time_limit: Option<Duration>,
    /// Cap on live stored vectors; breaching it aborts with `Timeout`.
    pub max_stored: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self { time_limit: Some(Duration::from_secs(3600)), max_stored: None }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { time_limit: None, max_stored: None }
    }

    pub fn with_time(ms: u64) -> Self {
        Self { time_limit: Some(Duration::from_millis(ms)), max_stored: None }
    }
}

#[derive(Debug, Clone)]
pub enum Decision {
    Feasible(LayerTree),
    Infeasible,
    /// The budget ran out before a decision; distinct from `Infeasible`.
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Feasible,
    Infeasible,
    Timeout,
}

impl Decision {
    pub fn outcome(&self) -> Outcome {
        match self {
            Decision::Feasible(_) => Outcome::Feasible,
            Decision::Infeasible => Outcome::Infeasible,
            Decision::Timeout => Outcome::Timeout,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Feasible => "feasible",
            Outcome::Infeasible => "infeasible",
            Outcome::Timeout => "timeout",
        })
    }
}

/// Whether the k-combination of `a` and `b` is a relaxed partial solution:
/// summed counts fit every layer budget, all leaves fit through the single
/// vertex directly above layer `k`, and both operands reach the lower
/// capacity of layer `k`. For `k = lambda` the pass-through check is
/// against `u_lambda` itself.
///
/// Exact for normalized instances.
pub fn combination_valid(inst: &Instance, a: &CountVector, b: &CountVector, k: usize) -> bool {
    let lambda = inst.lambda();
    let (ac, bc) = (a.counts(), b.counts());
    debug_assert!(k >= a.branching_layer().max(b.branching_layer()) && k <= lambda);
    for i in 0..=lambda {
        let c_i = if i <= k { ac[i] + bc[i] } else { 1 };
        if c_i > inst.count(i) {
            return false;
        }
    }
    let c0 = ac[0] + bc[0];
    let pass_through = if k < lambda { inst.cap_hi(k + 1) } else { inst.cap_hi(lambda) };
    if c0 > pass_through {
        return false;
    }
    let lo = inst.cap_lo(k);
    ac[0] >= lo && bc[0] >= lo
}

/// The pairs `(a_0, b_0)` with `a_0 <= b_0` and `a_0 + b_0 = c` worth
/// combining: both sides carry at least a third of the leaves.
pub fn balanced_pairs(c: u64) -> impl Iterator<Item = (u64, u64)> {
    let lo = c.div_ceil(3);
    (lo..=c / 2).map(move |a0| (a0, c - a0))
}

/// Merges two trees at layer `k`: disjoint union below, the single path
/// vertices above `k` contracted pairwise. Node ids are reassigned densely
/// per layer, left operand first.
fn combine_trees(ta: &LayerTree, tb: &LayerTree, k: usize) -> LayerTree {
    let lambda = ta.lambda();
    debug_assert_eq!(lambda, tb.lambda());
    let map_id = |tree: &LayerTree, layer: usize, id: u64, offset: u64| -> u64 {
        if layer > k {
            return 0;
        }
        let rank = tree.layers()[layer]
            .binary_search_by_key(&id, |n| n.id)
            .expect("parent ids resolve within their layer");
        rank as u64 + offset
    };
    let mut layers: Vec<Vec<TreeNode>> = Vec::with_capacity(lambda + 1);
    for layer in 0..=lambda {
        let mut nodes = Vec::new();
        if layer > k {
            nodes.push(TreeNode { id: 0, parent: (layer < lambda).then_some(0) });
        } else {
            for (side, tree) in [ta, tb].into_iter().enumerate() {
                let offset = if side == 0 { 0 } else { ta.layers()[layer].len() as u64 };
                let parent_offset = if side == 0 || layer + 1 > k {
                    0
                } else {
                    ta.layers()[layer + 1].len() as u64
                };
                for (rank, node) in tree.layers()[layer].iter().enumerate() {
                    let parent = node
                        .parent
                        .map(|p| map_id(tree, layer + 1, p, parent_offset));
                    nodes.push(TreeNode { id: rank as u64 + offset, parent });
                }
            }
        }
        layers.push(nodes);
    }
    let combined = LayerTree::new(layers).expect("combination of two layer trees is a layer tree");

    // weights below and at layer k are untouched by the contraction
    #[cfg(debug_assertions)]
    {
        let (wa, wb, wc) = (ta.weights(), tb.weights(), combined.weights());
        for layer in 0..=k.min(lambda) {
            let offset = ta.layers()[layer].len() as u64;
            for (rank, node) in ta.layers()[layer].iter().enumerate() {
                assert_eq!(wa[layer][&node.id], wc[layer][&(rank as u64)]);
            }
            for (rank, node) in tb.layers()[layer].iter().enumerate() {
                assert_eq!(wb[layer][&node.id], wc[layer][&(rank as u64 + offset)]);
            }
        }
    }
    combined
}

fn reconstruct_entry(store: &SolutionStore, entry: &Entry, lambda: usize) -> LayerTree {
    match &entry.provenance {
        Provenance::Base => LayerTree::path(lambda),
        Provenance::Greedy(tree) => tree.clone(),
        Provenance::Combined { left, right, k } => {
            let ta = reconstruct_entry(store, store.entry(*left), lambda);
            let tb = reconstruct_entry(store, store.entry(*right), lambda);
            combine_trees(&ta, &tb, *k)
        }
    }
}

/// Rebuilds the explicit tree of a stored solution by replaying its
/// combination history.
pub fn reconstruct_tree(store: &SolutionStore, target: EntryRef, lambda: usize) -> LayerTree {
    reconstruct_entry(store, store.entry(target), lambda)
}

/// Scans the stored counterparts with `n0 - leaves(p)` leaves for one that
/// combines with `p` into a full solution. Deterministic: vectors in
/// lexicographic order, `k` ascending.
pub fn counterpart_check(
    inst: &Instance,
    store: &SolutionStore,
    p: &CountVector,
) -> Option<(EntryRef, usize)> {
    let needed = inst.sources() - p.leaves();
    let p_branch = p.branching_layer();
    for (vec, _) in store.class(needed).iter() {
        for k in p_branch.max(vec.branching_layer())..inst.lambda() {
            if combination_valid(inst, p, vec, k) {
                let index = store.class(needed).index_of(vec).expect("live vector");
                return Some((EntryRef { leaves: needed, index }, k));
            }
        }
    }
    None
}

enum Found {
    Tree(LayerTree),
    TimedOut,
}

/// Owned view of a finalized leaf class: (append index, vector, branching
/// layer), lexicographic order. Lets combination loops run while the store
/// takes inserts.
type Snapshot = Vec<(u32, CountVector, usize)>;

struct Solver<'a> {
    original: &'a Instance,
    norm: Instance,
    cfg: OptConfig,
    deadline: Option<Instant>,
    max_stored: Option<u64>,
    store: SolutionStore,
    memo: GreedyMemo,
    diag: Diagnostics,
    ticks: u32,
}

impl<'a> Solver<'a> {
    fn over_deadline(&mut self) -> bool {
        self.ticks += 1;
        if self.ticks & 0xfff != 0 {
            return false;
        }
        matches!(self.deadline, Some(d) if Instant::now() >= d)
    }

    fn snapshot(&self, leaves: u64) -> Snapshot {
        self.store
            .class(leaves)
            .iter_indexed()
            .map(|(i, v, e)| (i, v.clone(), e.branch))
            .collect()
    }

    /// Tries to finish the stored solution `entry` with a greedily built
    /// tree on the residual vertices. Returns the full certificate on
    /// success.
    fn try_greedy(&mut self, entry: &Entry) -> Option<LayerTree> {
        if !self.cfg.greedy {
            return None;
        }
        let residual = ResidualInstance::for_completion(&self.norm, &entry.vec)?;
        let needed = residual.sources;
        if needed == 0 {
            return None;
        }
        // when one vertex cannot carry all remaining leaves, the
        // completion branches at that layer or above, and the final
        // combination then requires the stored side to meet that layer's
        // lower capacity
        for i in 1..=self.norm.lambda() {
            if needed > self.norm.cap_hi(i) && entry.vec.leaves() < self.norm.cap_lo(i) {
                return None;
            }
        }
        if self.cfg.estimate {
            if let Some(est) = self.memo.estimate(&self.norm, &residual) {
                if est < needed {
                    return None;
                }
            }
        }
        self.diag.greedy_calls += 1;
        let flow = root_inflow(&self.norm, &residual);
        self.memo.remember(&residual, flow);
        if flow < needed {
            return None;
        }
        let completion = greedy_complete(&self.norm, &residual)?;
        let q = CountVector::new(completion.layer_counts());
        let k = entry.branch.max(q.branching_layer());
        if !combination_valid(&self.norm, &entry.vec, &q, k) {
            return None;
        }
        let p_tree = reconstruct_entry(&self.store, entry, self.norm.lambda());
        let full = combine_trees(&p_tree, &completion, k);
        if !verify_tree(self.original, &full).is_valid() {
            return None;
        }
        self.diag.greedy_successes += 1;
        Some(full)
    }

    /// Generates all admissible combinations for `c` leaves out of the
    /// final classes `a0` and `b0` and feeds the survivors to the store.
    /// Returns early on a greedy completion or a budget stop.
    fn extend_class(&mut self, c: u64, pairs: &[(u64, u64)]) -> Option<Found> {
        let lambda = self.norm.lambda();
        let mut current = self.store.take_class(c);
        let mut result = None;
        let mut scratch: Vec<u64> = Vec::with_capacity(lambda + 1);
        'pairs: for &(a0, b0) in pairs {
            let left = self.snapshot(a0);
            let right = if a0 == b0 { left.clone() } else { self.snapshot(b0) };
            for (ai, a_vec, a_branch) in &left {
                for (bi, b_vec, b_branch) in &right {
                    if a0 == b0 && b_vec < a_vec {
                        continue;
                    }
                    for k in (*a_branch).max(*b_branch)..lambda {
                        if self.over_deadline() {
                            result = Some(Found::TimedOut);
                            break 'pairs;
                        }
                        if !combination_valid(&self.norm, a_vec, b_vec, k) {
                            continue;
                        }
                        if self.cfg.balance {
                            debug_assert!(a0.min(b0) >= c.div_ceil(3));
                        }
                        scratch.clear();
                        scratch.extend((0..=lambda).map(|i| {
                            if i <= k { a_vec.counts()[i] + b_vec.counts()[i] } else { 1 }
                        }));
                        if self.cfg.prune && prune_counts(&self.norm, &scratch) {
                            self.diag.pruned += 1;
                            continue;
                        }
                        let (outcome, index) =
                            current.insert_counts(&scratch, self.cfg.pareto, |vec| Entry {
                                vec,
                                branch: k,
                                provenance: Provenance::Combined {
                                    left: EntryRef { leaves: a0, index: *ai },
                                    right: EntryRef { leaves: b0, index: *bi },
                                    k,
                                },
                            });
                        match outcome {
                            InsertOutcome::Inserted { evicted } => {
                                self.diag.stored += 1;
                                self.diag.dominated += evicted as u64;
                            }
                            InsertOutcome::RejectedDominated => {
                                self.diag.dominated += 1;
                                continue;
                            }
                            InsertOutcome::RejectedDuplicate => continue,
                        }
                        if self.store.live_total() + current.len() as u64
                            > self.max_stored.unwrap_or(u64::MAX)
                        {
                            result = Some(Found::TimedOut);
                            break 'pairs;
                        }
                        // class c stays detached: the new entry's history
                        // only references strictly smaller leaf counts
                        if let Some(tree) = self.try_greedy(current.entry(index.unwrap())) {
                            result = Some(Found::Tree(tree));
                            break 'pairs;
                        }
                    }
                }
            }
        }
        self.store.put_class(c, current);
        result
    }

    /// Transient combinations for `c > limit` leaves under the counterpart
    /// rule: each one is scanned against the stored complements and then
    /// dropped.
    fn scan_transients(&mut self, pairs: &[(u64, u64)]) -> Option<Found> {
        let lambda = self.norm.lambda();
        let n0 = self.norm.sources();
        let mut seen = std::collections::BTreeSet::new();
        for &(a0, b0) in pairs {
            let left = self.snapshot(a0);
            let right = if a0 == b0 { left.clone() } else { self.snapshot(b0) };
            for (ai, a_vec, a_branch) in &left {
                for (bi, b_vec, b_branch) in &right {
                    if a0 == b0 && b_vec < a_vec {
                        continue;
                    }
                    for k in (*a_branch).max(*b_branch)..lambda {
                        if self.over_deadline() {
                            return Some(Found::TimedOut);
                        }
                        if !combination_valid(&self.norm, a_vec, b_vec, k) {
                            continue;
                        }
                        let v = a_vec.k_combine(b_vec, k);
                        if !seen.insert(v.clone()) {
                            continue;
                        }
                        let Some((counterpart, k2)) = counterpart_check(&self.norm, &self.store, &v)
                        else {
                            continue;
                        };
                        self.diag.counterpart_hits += 1;
                        let ta = reconstruct_tree(
                            &self.store,
                            EntryRef { leaves: a0, index: *ai },
                            lambda,
                        );
                        let tb = reconstruct_tree(
                            &self.store,
                            EntryRef { leaves: b0, index: *bi },
                            lambda,
                        );
                        let transient = combine_trees(&ta, &tb, k);
                        let tc = reconstruct_tree(&self.store, counterpart, lambda);
                        let full = combine_trees(&transient, &tc, k2);
                        debug_assert_eq!(full.leaf_count(), n0);
                        debug_assert!(verify_tree(self.original, &full).is_valid());
                        return Some(Found::Tree(full));
                    }
                }
            }
        }
        None
    }

    /// Exact-total combinations `a0 + b0 = n0` with both halves stored.
    fn scan_exact_pairs(&mut self, pairs: &[(u64, u64)]) -> Option<Found> {
        let lambda = self.norm.lambda();
        for &(a0, b0) in pairs {
            let left = self.snapshot(a0);
            let right = if a0 == b0 { left.clone() } else { self.snapshot(b0) };
            for (ai, a_vec, a_branch) in &left {
                for (bi, b_vec, b_branch) in &right {
                    if a0 == b0 && b_vec < a_vec {
                        continue;
                    }
                    for k in (*a_branch).max(*b_branch)..lambda {
                        if self.over_deadline() {
                            return Some(Found::TimedOut);
                        }
                        if !combination_valid(&self.norm, a_vec, b_vec, k) {
                            continue;
                        }
                        let ta = reconstruct_tree(
                            &self.store,
                            EntryRef { leaves: a0, index: *ai },
                            lambda,
                        );
                        let tb = reconstruct_tree(
                            &self.store,
                            EntryRef { leaves: b0, index: *bi },
                            lambda,
                        );
                        let full = combine_trees(&ta, &tb, k);
                        debug_assert!(verify_tree(self.original, &full).is_valid());
                        return Some(Found::Tree(full));
                    }
                }
            }
        }
        None
    }

    fn run(mut self) -> (Decision, Diagnostics) {
        let n0 = self.norm.sources();
        let lambda = self.norm.lambda();

        // trivial pre-checks: the root carries all leaves, every layer
        // needs at least one usable vertex
        if self.norm.capacity_conflict().is_some() {
            return (Decision::Infeasible, self.diag);
        }
        if (1..=lambda).any(|i| self.norm.cap_lo(i) > n0) {
            return (Decision::Infeasible, self.diag);
        }
        if self.norm.cap_hi(lambda) < n0 {
            return (Decision::Infeasible, self.diag);
        }
        if (1..=lambda).any(|i| self.norm.count(i) == 0 || self.norm.cap_hi(i) == 0) {
            return (Decision::Infeasible, self.diag);
        }
        if self.cfg.prune && instance_leaf_bound(&self.norm) < n0 {
            return (Decision::Infeasible, self.diag);
        }
        if n0 == 1 {
            let tree = LayerTree::path(lambda);
            debug_assert!(verify_tree(self.original, &tree).is_valid());
            return (Decision::Feasible(tree), self.diag);
        }

        let limit = if self.cfg.counterpart { n0 / 2 } else { 2 * n0 / 3 };
        let base = Entry {
            vec: CountVector::ones(lambda),
            branch: 0,
            provenance: Provenance::Base,
        };
        let probe = base.clone();
        self.store.insert(1, base, self.cfg.pareto);
        self.diag.stored += 1;
        if let Some(tree) = self.try_greedy(&probe) {
            return (Decision::Feasible(tree), self.diag);
        }

        // phase 1: build the stored classes bottom-up
        for c in 2..=limit {
            let pairs: Vec<(u64, u64)> = if self.cfg.balance {
                balanced_pairs(c).collect()
            } else {
                (1..=c / 2).map(|a0| (a0, c - a0)).collect()
            };
            match self.extend_class(c, &pairs) {
                Some(Found::Tree(tree)) => return (Decision::Feasible(tree), self.diag),
                Some(Found::TimedOut) => return (Decision::Timeout, self.diag),
                None => {}
            }
        }

        // phase 2: leaf counts beyond the stored range
        if self.cfg.counterpart {
            for c in limit + 1..=2 * n0 / 3 {
                let pairs: Vec<(u64, u64)> = if self.cfg.balance {
                    balanced_pairs(c).filter(|&(_, b0)| b0 <= limit).collect()
                } else {
                    (c.saturating_sub(limit).max(1)..=c / 2)
                        .map(|a0| (a0, c - a0))
                        .collect()
                };
                match self.scan_transients(&pairs) {
                    Some(Found::Tree(tree)) => return (Decision::Feasible(tree), self.diag),
                    Some(Found::TimedOut) => return (Decision::Timeout, self.diag),
                    None => {}
                }
            }
        }
        let exact_lo = if self.cfg.balance {
            n0.div_ceil(3).max(n0 - limit)
        } else {
            n0 - limit
        };
        let exact_pairs: Vec<(u64, u64)> =
            (exact_lo.max(1)..=n0 / 2).map(|a0| (a0, n0 - a0)).collect();
        match self.scan_exact_pairs(&exact_pairs) {
            Some(Found::Tree(tree)) => (Decision::Feasible(tree), self.diag),
            Some(Found::TimedOut) => (Decision::Timeout, self.diag),
            None => (Decision::Infeasible, self.diag),
        }
    }
}

/// The production solver. Normalizes internally; the certificate verifies
/// against the instance as given.
pub fn solve(inst: &Instance, cfg: OptConfig, budget: Budget) -> (Decision, Diagnostics) {
    let mut cfg = cfg;
    cfg.estimate &= cfg.greedy;
    let norm = inst.normalize();
    let n0 = norm.sources();
    let limit = if cfg.counterpart { n0 / 2 } else { 2 * n0 / 3 };
    let solver = Solver {
        original: inst,
        norm,
        cfg,
        deadline: budget.time_limit.map(|d| Instant::now() + d),
        max_stored: budget.max_stored,
        store: SolutionStore::new(limit.max(1)),
        memo: GreedyMemo::default(),
        diag: Diagnostics::default(),
        ticks: 0,
    };
    solver.run()
}

/// The plain dynamic program: all pair combinations, duplicate rejection
/// only, full solutions read off the class with `n0` leaves. Exists as the
/// ablation baseline; `solve` matches its decisions on every instance.
pub fn solve_basic(inst: &Instance, budget: Budget) -> Decision {
    let norm = inst.normalize();
    let n0 = norm.sources();
    let lambda = norm.lambda();
    if norm.capacity_conflict().is_some()
        || (1..=lambda).any(|i| norm.cap_lo(i) > n0)
        || norm.cap_hi(lambda) < n0
        || (1..=lambda).any(|i| norm.count(i) == 0 || norm.cap_hi(i) == 0)
    {
        return Decision::Infeasible;
    }
    if n0 == 1 {
        let tree = LayerTree::path(lambda);
        debug_assert!(verify_tree(inst, &tree).is_valid());
        return Decision::Feasible(tree);
    }
    let deadline = budget.time_limit.map(|d| Instant::now() + d);
    let store = match basic_store(&norm, n0, deadline, budget.max_stored) {
        Ok(store) => store,
        Err(()) => return Decision::Timeout,
    };
    let full = store.class(n0).iter().next().map(|(v, _)| v.clone());
    match full {
        Some(v) => {
            let index = store.class(n0).index_of(&v).unwrap();
            let tree = reconstruct_tree(&store, EntryRef { leaves: n0, index }, lambda);
            debug_assert!(verify_tree(inst, &tree).is_valid());
            Decision::Feasible(tree)
        }
        None => Decision::Infeasible,
    }
}

/// Runs the basic combination loop to completion and returns the full
/// store; every relaxed partial solution of the normalized instance with
/// up to `max_leaves` leaves ends up in it.
fn basic_store(
    norm: &Instance,
    max_leaves: u64,
    deadline: Option<Instant>,
    max_stored: Option<u64>,
) -> Result<SolutionStore, ()> {
    let lambda = norm.lambda();
    let mut store = SolutionStore::new(max_leaves);
    if (1..=lambda).any(|i| norm.count(i) == 0 || norm.cap_hi(i) == 0) {
        return Ok(store);
    }
    let base = Entry { vec: CountVector::ones(lambda), branch: 0, provenance: Provenance::Base };
    store.insert(1, base, false);
    let mut ticks = 0u32;
    for c in 2..=max_leaves {
        let mut current = store.take_class(c);
        let mut stop = false;
        'class: for a0 in 1..=c / 2 {
            let b0 = c - a0;
            let snap = |leaves: u64| -> Snapshot {
                store
                    .class(leaves)
                    .iter_indexed()
                    .map(|(i, v, e)| (i, v.clone(), e.branch))
                    .collect()
            };
            let left = snap(a0);
            let right = if a0 == b0 { left.clone() } else { snap(b0) };
            for (ai, a_vec, a_branch) in &left {
                for (bi, b_vec, b_branch) in &right {
                    if a0 == b0 && b_vec < a_vec {
                        continue;
                    }
                    for k in (*a_branch).max(*b_branch)..lambda {
                        ticks += 1;
                        if ticks & 0xfff == 0
                            && matches!(deadline, Some(d) if Instant::now() >= d)
                        {
                            stop = true;
                            break 'class;
                        }
                        if !combination_valid(norm, a_vec, b_vec, k) {
                            continue;
                        }
                        let entry = Entry {
                            vec: a_vec.k_combine(b_vec, k),
                            branch: k,
                            provenance: Provenance::Combined {
                                left: EntryRef { leaves: a0, index: *ai },
                                right: EntryRef { leaves: b0, index: *bi },
                                k,
                            },
                        };
                        current.insert_dedup(entry);
                        if store.live_total() + current.len() as u64
                            > max_stored.unwrap_or(u64::MAX)
                        {
                            stop = true;
                            break 'class;
                        }
                    }
                }
            }
        }
        store.put_class(c, current);
        if stop {
            return Err(());
        }
    }
    Ok(store)
}
