//! Realizability of branch data for branched coverings of the sphere.
//!
//! * [`partition`]: partitions, branch data and the Riemann-Hurwitz check.
//! * [`perm`]: permutations, tuples, braid moves and conjugacy classes.
//! * [`oracle`]: exact decision by permutation-tuple search.
//! * [`football`]: constructive realization by degree reduction.
//! * [`atlas`]: enumeration and classification by degree.

pub mod atlas;
pub mod certificate;
pub mod cli;
pub mod football;
pub mod oracle;
pub mod partition;
pub mod perm;

pub use certificate::{verify, Method, RealizationCertificate};
pub use football::{realize, reduce_chain, reduce_step, ReductionChain, ReductionStep};
pub use oracle::{decide, Decision, Outcome, SearchBudget};
pub use partition::{theorem2_applies, validate, zheng_family, BranchDatum, Partition};
pub use perm::{Permutation, Tuple};
