//! Intersection densities of permutation group actions on k-subsets.
//!
//! The pipeline: build a finite group acting on the k-subsets of a point set
//! (typically `PGL(2,q)` or `PSL(2,q)` on the projective line), form the
//! derangement graph of the action inside the conjugacy-class association
//! scheme, bound maximum intersecting sets with spectral and linear-programming
//! relaxations, and certify exact values with a symmetry-reduced clique search.
//!
//! Modules follow the pipeline order:
//!
//! * [`gf`] — exact arithmetic in `GF(p^k)`
//! * [`perm`] — permutations, group closure, conjugacy classes, orbits
//! * [`pgl`] — projective-line groups and their named subgroups
//! * [`action`] — induced actions on k-subsets, derangements, intersecting sets
//! * [`scheme`] — collapsed class algebra and Cayley-graph eigenvalues
//! * [`bounds`] — ratio bound and exact-rational LP clique bound
//! * [`search`] — exact maximum clique / maximum intersecting set
//! * [`density`] — density reports, density arrays, case verification

pub mod action;
pub mod bounds;
pub mod density;
pub mod exact;
pub mod gf;
pub mod perm;
pub mod pgl;
pub mod scheme;
pub mod search;




pub use gf::{FieldElement, FieldSpec};
pub use perm::{ClassPartition, Group, Perm};



