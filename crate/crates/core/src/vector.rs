//! Per-layer vertex count vectors, the state space of the dynamic program.

use std::fmt;

/// Vertex counts `(a_0, ..., a_lambda)` of a (relaxed) partial solution.
/// `a_0` is the leaf count; stored vectors always have `a_lambda = 1`.
///
/// The derived ordering is lexicographic, which is the storage order of the
/// solution sets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountVector(Box<[u64]>);

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        debug_assert!(counts.len() >= 2);
        Self(counts.into_boxed_slice())
    }

    /// The all-ones vector, the unique partial solution with one leaf.
    pub fn ones(lambda: usize) -> Self {
        Self(vec![1; lambda + 1].into_boxed_slice())
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn lambda(&self) -> usize {
        self.0.len() - 1
    }

    pub fn leaves(&self) -> u64 {
        self.0[0]
    }

    /// The highest layer with more than one vertex, or 0 if all entries are
    /// one. The corresponding tree is a path above this layer.
    pub fn branching_layer(&self) -> usize {
        debug_assert_eq!(self.0[self.0.len() - 1], 1, "stored vectors have a single root");
        self.0
            .iter()
            .rposition(|&c| c > 1)
            .unwrap_or(0)
    }

    /// The k-combination `(a_0 + b_0, ..., a_k + b_k, 1, ..., 1)`.
    ///
    /// Requires `k >= max(branching_layer(a), branching_layer(b))`, so the
    /// summed prefix covers everything below both branching layers.
    pub fn k_combine(&self, other: &CountVector, k: usize) -> CountVector {
        debug_assert_eq!(self.0.len(), other.0.len());
        debug_assert!(k >= self.branching_layer().max(other.branching_layer()));
        debug_assert!(k <= self.lambda());
        let counts = (0..self.0.len())
            .map(|i| if i <= k { self.0[i] + other.0[i] } else { 1 })
            .collect();
        CountVector::new(counts)
    }

    /// Pareto domination for equal leaf counts: `self` dominates `other`
    /// when it uses no more vertices in every layer `1..=lambda`. A vector
    /// dominates itself.
    pub fn dominates(&self, other: &CountVector) -> bool {
        debug_assert_eq!(self.leaves(), other.leaves());
        slice_dominates(&self.0, &other.0)
    }
}

/// [`CountVector::dominates`] on raw count slices.
pub fn slice_dominates(a: &[u64], b: &[u64]) -> bool {
    debug_assert_eq!(a[0], b[0]);
    a[1..].iter().zip(&b[1..]).all(|(x, y)| x <= y)
}

impl std::borrow::Borrow<[u64]> for CountVector {
    fn borrow(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for CountVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
