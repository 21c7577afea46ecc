//! Capacity-based upper bounds on connectable leaves, used to prune
//! partial solutions that cannot reach all sources.

use crate::instance::Instance;
use crate::vector::CountVector;

fn sat_mul(a: u64, b: u64) -> u64 {
    a.saturating_mul(b)
}

/// Upper bound on the leaves routable through layers `i < j` given vertex
/// budgets and upper capacities:
///
/// `min(n_i*u_i, n_j*u_j, floor(u_j/u_i)*u_i*n_j + (u_j mod u_i)*max(0, n_i - n_j*floor(u_j/u_i)))`
///
/// The third term counts full-weight children per parent plus one partial
/// child for each parent that has all its full slots taken.
pub fn two_layer_bound(n_i: u64, u_i: u64, n_j: u64, u_j: u64) -> u64 {
    if u_i == 0 || u_j == 0 {
        return 0;
    }
    let per_parent_full = u_j / u_i;
    let full_term = sat_mul(sat_mul(per_parent_full, u_i), n_j);
    let partial_children = n_i.saturating_sub(sat_mul(n_j, per_parent_full));
    let partial_term = sat_mul(u_j % u_i, partial_children);
    sat_mul(n_i, u_i)
        .min(sat_mul(n_j, u_j))
        .min(full_term.saturating_add(partial_term))
}

/// Additional bound active when the lower capacity `l_j` cannot be met by
/// full-weight children alone: each parent then needs `ceil(u_j/u_i)`
/// children, so at most `floor(n_i / ceil(u_j/u_i))` parents can be used.
pub fn lower_cap_bound(n_i: u64, u_i: u64, n_j: u64, u_j: u64, l_j: u64) -> Option<u64> {
    let _ = n_j;
    if u_i == 0 || u_j == 0 {
        return None;
    }
    if (u_j / u_i) * u_i >= l_j {
        return None;
    }
    let children_per_parent = u_j.div_ceil(u_i);
    Some(sat_mul(u_j, n_i / children_per_parent))
}

/// What remains of an instance after committing a partial solution: layer
/// budgets drop by the vertices the partial solution uses, except that a
/// single vertex per layer (the path above the branching layer) stays
/// shareable through contraction.
#[derive(Debug, Clone)]
pub struct ResidualInstance {
    /// Sources still to connect, `n_0 - a_0`.
    pub sources: u64,
    /// Remaining vertex budget per layer `1..=lambda`.
    pub counts: Vec<u64>,
}

impl ResidualInstance {
    pub fn new(inst: &Instance, committed: &CountVector) -> Self {
        debug_assert_eq!(committed.lambda(), inst.lambda());
        let counts = (1..=inst.lambda())
            .map(|i| {
                let used = committed.counts()[i];
                if used > 1 { inst.count(i).saturating_sub(used) } else { inst.count(i) }
            })
            .collect();
        Self { sources: inst.sources() - committed.leaves(), counts }
    }

    pub fn count(&self, i: usize) -> u64 {
        debug_assert!(i >= 1);
        self.counts[i - 1]
    }

    /// Residual for building a completion tree next to the committed
    /// solution: the committed vertices are reserved on every layer, not
    /// just the branching ones. A layer whose only vertex is the committed
    /// path still offers that vertex, since the two paths contract there;
    /// the top layer always contracts. Returns nothing when a layer is
    /// full and unshareable.
    pub fn for_completion(inst: &Instance, committed: &CountVector) -> Option<Self> {
        debug_assert_eq!(committed.lambda(), inst.lambda());
        let lambda = inst.lambda();
        let mut counts = Vec::with_capacity(lambda);
        for i in 1..=lambda {
            let used = committed.counts()[i];
            let avail = inst.count(i).saturating_sub(used);
            if i == lambda || avail >= 1 {
                counts.push(avail.max(1).min(inst.count(i)));
            } else if used == 1 {
                counts.push(1);
            } else {
                return None;
            }
        }
        Some(Self { sources: inst.sources() - committed.leaves(), counts })
    }
}

/// Bound for the untouched instance; below `n_0` means trivially
/// infeasible. Works on fully valid trees, where every used vertex meets
/// its lower capacity, so the lower-capacity bound applies unweakened.
pub fn instance_leaf_bound(inst: &Instance) -> u64 {
    let lambda = inst.lambda();
    let mut bound = u64::MAX;
    for i in 1..=lambda {
        bound = bound.min(sat_mul(inst.count(i), inst.cap_hi(i)));
    }
    for i in 1..lambda {
        let j = i + 1;
        let (n_i, u_i) = (inst.count(i), inst.cap_hi(i));
        let (n_j, u_j) = (inst.count(j), inst.cap_hi(j));
        bound = bound.min(two_layer_bound(n_i, u_i, n_j, u_j));
        if let Some(b) = lower_cap_bound(n_i, u_i, n_j, u_j, inst.cap_lo(j)) {
            bound = bound.min(b);
        }
    }
    bound
}

/// True when the partial solution cannot be extended to connect all
/// remaining sources and should be discarded. `committed` are the counts
/// `(a_0, ..., a_lambda)`; allocation-free for the solver's hot path.
///
/// The completion only has to be almost valid: when its branching layer
/// lies below layer `j`, all remaining leaves pass through a single
/// lower-capacity-exempt vertex there (possibly shared with the committed
/// path through contraction). The lower-capacity bound therefore cannot
/// drop below `u_j` here, unlike on fully valid trees.
pub fn prune_counts(inst: &Instance, committed: &[u64]) -> bool {
    let lambda = inst.lambda();
    let remaining = inst.sources() - committed[0];
    if remaining == 0 {
        return false;
    }
    let residual =
        |i: usize| if committed[i] > 1 { inst.count(i) - committed[i] } else { inst.count(i) };
    for i in 1..=lambda {
        if sat_mul(residual(i), inst.cap_hi(i)) < remaining {
            return true;
        }
    }
    for i in 1..lambda {
        let j = i + 1;
        let (n_i, u_i) = (residual(i), inst.cap_hi(i));
        let (n_j, u_j) = (residual(j), inst.cap_hi(j));
        if two_layer_bound(n_i, u_i, n_j, u_j) < remaining {
            return true;
        }
        if matches!(
            lower_cap_bound(n_i, u_i, n_j, u_j, inst.cap_lo(j)),
            Some(b) if b.max(u_j) < remaining
        ) {
            return true;
        }
    }
    false
}

/// [`prune_counts`] on a packaged count vector.
pub fn prune(inst: &Instance, committed: &CountVector) -> bool {
    prune_counts(inst, committed.counts())
}
