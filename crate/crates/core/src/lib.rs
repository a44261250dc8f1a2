//! Random `k`-dimensional hypertrees drawn from the determinantal measure
//! `ν_{n,k}` (probability proportional to `|H_{k-1}(C)|²`), and the tools to
//! check their local weak limit, the semi-`k`-ary skeleton tree.
//!
//! Module map:
//!
//! * [`faces`]: colex ranking of `k`- and `(k+1)`-subsets, containment graph.
//! * [`boundary`]: boundary matrices and the projection kernel `P_{n,k}`.
//! * [`exactla`]: exact determinants, rank, Smith normal form.
//! * [`enumerate`]: brute-force hypertree enumeration, the exact oracle.
//! * [`sampler`]: projection-DPP sampler and a Wilson spanning-tree sampler.
//! * [`skeleton`]: the skeleton-tree generator, truncated at an even depth.
//! * [`treestats`]: canonical codes, automorphisms, matchings, limit laws.
//! * [`harness`]: ball extraction, histograms, reports, Cohen-Lenstra tables.
//! * [`par`]: trial-parallel execution with a sequential fallback.

pub mod boundary;
pub mod enumerate;
pub mod error;
pub mod exactla;
pub mod faces;
pub mod par;
pub mod harness;
pub mod sampler;
pub mod skeleton;
pub mod treestats;

pub use error::{Error, Result};
pub use faces::{Face, FaceClass, FaceRank, FaceSpace};
