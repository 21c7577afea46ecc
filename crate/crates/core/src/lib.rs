//! Feasibility solver for capacity-constrained layer trees, plus a cable
//! layout optimizer for solar-farm style installations.
//!
//! A constrained layer tree instance asks for a rooted tree with a fixed
//! number of layers: all sources sit in layer 0 as leaves, a single sink
//! forms the root, and each layer limits both how many vertices it may use
//! and how many leaves each of its vertices may collect below itself. The
//! decision problem is solved by a dynamic program over per-layer vertex
//! count vectors ([`dp::solve`]), combining small solutions into larger
//! ones and accelerated by Pareto filtering, residual capacity pruning,
//! balanced pair enumeration, counterpart scanning, and a greedy flow
//! completion. An exhaustive reference solver for tiny inputs lives in
//! [`oracle`].
//!
//! The geometric side ([`sofaclap`]) embeds a feasible tree into candidate
//! positions and shrinks the total cable cost with three local search
//! passes. [`generate`] produces seeded random instances for benchmarks;
//! [`bench`] runs solver comparisons and reports CSV.
//!
//! ```
//! use layertree::dp::{solve, Budget, Decision, OptConfig};
//! use layertree::instance::read_instance;
//!
//! let inst = read_instance("clt 1\n2 4\n2 2 2\n1 4 4\n").unwrap();
//! let (decision, _) = solve(&inst, OptConfig::all(), Budget::default());
//! assert!(matches!(decision, Decision::Feasible(_)));
//! ```

pub mod bench;
pub mod bounds;
pub mod dp;
pub mod generate;
pub mod greedy;
pub mod instance;
pub mod oracle;
pub mod sofaclap;
pub mod store;
pub mod tree;
pub mod vector;
