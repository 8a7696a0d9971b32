//! Structure learning for linear Gaussian DAG models with equal error variances.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core: graph types, the structural equation model, covariance and
//! conditional-variance queries, the ordering/parent learner, the
//! information-theoretic lower-bound machinery, and (behind the `oracle`
//! feature) brute-force reference implementations. File formats, the
//! experiment runner and the CLI live in the `eqvar` crate.

#![no_std]
// `!(x > t)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod covest;
mod error;
pub mod graph;
pub mod learner;
pub mod linalg;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod rng;
pub mod sem;

pub use covest::{CovEstimate, CovOrigin};
pub use error::{Error, Result};
pub use graph::{Dag, Ordering, UndirectedGraph};
pub use learner::{Gamma, LearnResult, LearnerConfig, TieBreak};
pub use linalg::Matrix;
pub use sem::{SemModel, WeightedDag};
