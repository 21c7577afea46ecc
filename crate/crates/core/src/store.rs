//! Storage for relaxed partial solutions, keyed by leaf count.

use std::collections::BTreeMap;
use std::ops::Bound;

use crate::tree::LayerTree;
use crate::vector::{slice_dominates, CountVector};

/// Where a stored vector came from; enough to rebuild an explicit tree.
#[derive(Debug, Clone)]
pub enum Provenance {
    /// The all-ones seed vector.
    Base,
    /// A k-combination of two earlier entries.
    Combined { left: EntryRef, right: EntryRef, k: usize },
    /// An explicitly constructed tree, e.g. from the greedy completion.
    Greedy(LayerTree),
}

/// Stable reference to a stored entry: leaf count plus append index.
/// Entries are never moved, so references stay valid across Pareto
/// evictions in later leaf classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryRef {
    pub leaves: u64,
    pub index: u32,
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub vec: CountVector,
    pub branch: usize,
    pub provenance: Provenance,
}

/// Outcome of inserting into a leaf class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    /// Stored; `evicted` counts dominated entries that were dropped.
    Inserted { evicted: usize },
    /// An equal vector is already stored; the first provenance wins.
    RejectedDuplicate,
    /// A stored vector dominates the candidate.
    RejectedDominated,
}

/// All stored vectors sharing one leaf count. `entries` is append-only;
/// `live` maps vectors to entry indices in lexicographic order and shrinks
/// under Pareto eviction.
#[derive(Debug, Default)]
pub struct LeafClass {
    entries: Vec<Entry>,
    live: BTreeMap<CountVector, u32>,
}

impl LeafClass {
    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    /// Live entries in lexicographic vector order.
    pub fn iter(&self) -> impl Iterator<Item = (&CountVector, &Entry)> {
        self.live.iter().map(|(v, &i)| (v, &self.entries[i as usize]))
    }

    /// Live entries with their append indices, lexicographic order.
    pub fn iter_indexed(&self) -> impl Iterator<Item = (u32, &CountVector, &Entry)> {
        self.live.iter().map(|(v, &i)| (i, v, &self.entries[i as usize]))
    }

    pub fn entry(&self, index: u32) -> &Entry {
        &self.entries[index as usize]
    }

    /// Append index of a live vector.
    pub fn index_of(&self, vec: &CountVector) -> Option<u32> {
        self.live.get(vec).copied()
    }

    fn push(&mut self, entry: Entry) -> u32 {
        let index = self.entries.len() as u32;
        self.live.insert(entry.vec.clone(), index);
        self.entries.push(entry);
        index
    }

    /// Plain insert with duplicate rejection only.
    pub fn insert_dedup(&mut self, entry: Entry) -> (InsertOutcome, Option<u32>) {
        if self.live.contains_key(&entry.vec) {
            return (InsertOutcome::RejectedDuplicate, None);
        }
        let idx = self.push(entry);
        (InsertOutcome::Inserted { evicted: 0 }, Some(idx))
    }

    /// Pareto insert: rejects a candidate dominated by any live vector and
    /// evicts every live vector the candidate dominates.
    pub fn insert_pareto(&mut self, entry: Entry) -> (InsertOutcome, Option<u32>) {
        let counts: Vec<u64> = entry.vec.counts().to_vec();
        self.insert_counts(&counts, true, move |_| entry)
    }

    /// Insert driven by a raw count slice; the entry is only built (and
    /// the vector only allocated) once the candidate survives duplicate
    /// and dominance screening.
    pub fn insert_counts(
        &mut self,
        counts: &[u64],
        pareto: bool,
        entry: impl FnOnce(CountVector) -> Entry,
    ) -> (InsertOutcome, Option<u32>) {
        if self.live.contains_key(counts) {
            return (InsertOutcome::RejectedDuplicate, None);
        }
        let mut evicted = 0usize;
        if pareto {
            // lexicographic iteration visits any dominator before the
            // candidate's own position; victims sort after the candidate
            if self.live.keys().any(|stored| slice_dominates(stored.counts(), counts)) {
                return (InsertOutcome::RejectedDominated, None);
            }
            let doomed: Vec<CountVector> = self
                .live
                .range::<[u64], _>((Bound::Excluded(counts), Bound::Unbounded))
                .filter(|(stored, _)| slice_dominates(counts, stored.counts()))
                .map(|(stored, _)| stored.clone())
                .collect();
            for v in &doomed {
                self.live.remove(v);
            }
            evicted = doomed.len();
        }
        let vec = CountVector::new(counts.to_vec());
        let idx = self.push(entry(vec));
        (InsertOutcome::Inserted { evicted }, Some(idx))
    }
}

/// Counters describing one solver run; serialized into the benchmark CSV.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostics {
    /// Vectors accepted into the store.
    pub stored: u64,
    /// Vectors discarded by the residual capacity bounds.
    pub pruned: u64,
    /// Dominated vectors: rejected candidates plus evicted entries.
    pub dominated: u64,
    /// Greedy completion attempts that passed the gates.
    pub greedy_calls: u64,
    /// Greedy completions that produced a full certificate.
    pub greedy_successes: u64,
    /// Full solutions found by counterpart scanning.
    pub counterpart_hits: u64,
}

/// Per-leaf-count solution sets for one solve.
#[derive(Debug)]
pub struct SolutionStore {
    classes: Vec<LeafClass>,
    live_total: u64,
}

impl SolutionStore {
    /// A store able to hold leaf counts `0..=max_leaves`.
    pub fn new(max_leaves: u64) -> Self {
        let mut classes = Vec::with_capacity(max_leaves as usize + 1);
        classes.resize_with(max_leaves as usize + 1, LeafClass::default);
        Self { classes, live_total: 0 }
    }

    pub fn class(&self, leaves: u64) -> &LeafClass {
        &self.classes[leaves as usize]
    }

    pub fn entry(&self, r: EntryRef) -> &Entry {
        self.classes[r.leaves as usize].entry(r.index)
    }

    /// Number of live vectors across all leaf classes.
    pub fn live_total(&self) -> u64 {
        self.live_total
    }

    /// Detaches a class for mutation while the rest of the store stays
    /// readable; pair with [`SolutionStore::put_class`].
    pub fn take_class(&mut self, leaves: u64) -> LeafClass {
        let class = std::mem::take(&mut self.classes[leaves as usize]);
        self.live_total -= class.len() as u64;
        class
    }

    pub fn put_class(&mut self, leaves: u64, class: LeafClass) {
        self.live_total += class.len() as u64;
        self.classes[leaves as usize] = class;
    }

    pub fn insert(
        &mut self,
        leaves: u64,
        entry: Entry,
        pareto: bool,
    ) -> (InsertOutcome, Option<EntryRef>) {
        let class = &mut self.classes[leaves as usize];
        let before = class.len() as u64;
        let (outcome, idx) = if pareto {
            class.insert_pareto(entry)
        } else {
            class.insert_dedup(entry)
        };
        let after = class.len() as u64;
        self.live_total = self.live_total + after - before;
        (outcome, idx.map(|index| EntryRef { leaves, index }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(counts: &[u64]) -> Entry {
        let vec = CountVector::new(counts.to_vec());
        let branch = vec.branching_layer();
        Entry { vec, branch, provenance: Provenance::Base }
    }

    #[test]
    fn pareto_insert_evicts_dominated() {
        let mut class = LeafClass::default();
        class.insert_pareto(entry(&[4, 3, 1])).0;
        let (outcome, idx) = class.insert_pareto(entry(&[4, 2, 1]));
        assert_eq!(outcome, InsertOutcome::Inserted { evicted: 1 });
        assert!(idx.is_some());
        let live: Vec<_> = class.iter().map(|(v, _)| v.clone()).collect();
        assert_eq!(live, vec![CountVector::new(vec![4, 2, 1])]);
    }

    #[test]
    fn pareto_insert_rejects_dominated_candidate() {
        let mut class = LeafClass::default();
        class.insert_pareto(entry(&[4, 2, 1]));
        let (outcome, idx) = class.insert_pareto(entry(&[4, 3, 1]));
        assert_eq!(outcome, InsertOutcome::RejectedDominated);
        assert!(idx.is_none());
        assert_eq!(class.len(), 1);
    }

    #[test]
    fn pareto_insert_rejects_duplicates() {
        let mut class = LeafClass::default();
        class.insert_pareto(entry(&[4, 2, 1]));
        let (outcome, _) = class.insert_pareto(entry(&[4, 2, 1]));
        assert_eq!(outcome, InsertOutcome::RejectedDuplicate);
    }

    #[test]
    fn incomparable_vectors_coexist() {
        let mut class = LeafClass::default();
        class.insert_pareto(entry(&[6, 2, 3, 1]));
        let (outcome, _) = class.insert_pareto(entry(&[6, 3, 1, 1]));
        assert!(matches!(outcome, InsertOutcome::Inserted { evicted: 0 }));
        assert_eq!(class.len(), 2);
    }

    #[test]
    fn eviction_keeps_entry_refs_stable() {
        let mut store = SolutionStore::new(4);
        let (_, first) = store.insert(4, entry(&[4, 3, 1]), true);
        let first = first.unwrap();
        store.insert(4, entry(&[4, 2, 1]), true);
        // evicted from the live set, but still reachable for provenance
        assert_eq!(store.entry(first).vec, CountVector::new(vec![4, 3, 1]));
        assert_eq!(store.live_total(), 1);
    }

    #[test]
    fn dedup_insert_keeps_dominated_vectors() {
        let mut class = LeafClass::default();
        class.insert_dedup(entry(&[4, 3, 1]));
        let (outcome, _) = class.insert_dedup(entry(&[4, 2, 1]));
        assert!(matches!(outcome, InsertOutcome::Inserted { evicted: 0 }));
        assert_eq!(class.len(), 2);
    }
}
