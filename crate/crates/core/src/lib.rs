//! Exact enumeration kernels for intersecting set families.
//!
//! Everything here works over small ground sets packed into machine words:
//! a set over `[n]` (`n <= 63`) is a single `u64`, a family is a sorted list
//! of such masks, and a junta is a membership bitset over the `2^j` points of
//! its center. The crate is `no_std` with `alloc`; the default `parallel`
//! feature splits the large cube enumerations across a rayon pool.
//!
//! Modules:
//!
//! - [`bitfam`]: families, degrees, diversity, intersection checks.
//! - [`constructions`]: the named families and the triangle decomposition.
//! - [`shiftlex`]: `(i, j)`-shifts and lexicographic segments.
//! - [`bounds`]: exact binomials and the inequality sweeps built on them.
//! - [`booleanlab`]: `p`-biased measures and influences over a junta center.
//! - [`runstat`]: cyclic run profiles and the `rho` statistic.
//! - [`extremal`]: exhaustive maximum-diversity search at tiny parameters.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod bitfam;
pub mod booleanlab;
pub mod bounds;
pub mod constructions;
mod cube;
mod error;
pub mod exec;
pub mod extremal;
pub mod runstat;
pub mod shiftlex;

pub use bitfam::{Family, FamilyStats, SubsetMask};
pub use booleanlab::{Bias, BiasedMeasure, InfluenceMode, InfluenceProfile};
pub use constructions::{JuntaSpec, TriangleDecomposition};
pub use error::{Error, Result};
pub use runstat::{RhoSample, RunProfile};
