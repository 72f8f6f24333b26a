//! Sectional curvature of homogeneous-bundle metrics `M = H\((G,h) × F)` on
//! matrix Lie groups, and a constructive search for near-flat planes on
//! non-fat bundles.
//!
//! The crate is organized bottom-up:
//!
//! - [`liealg`]: `so(n)` with its orthonormal basis, brackets, `Ad`, `exp`,
//!   centralizers and maximal tori.
//! - [`metric`]: the operators `Φ` and `φ` defining the metrics on `G` and
//!   on the fiber.
//! - [`bundle`]: the chain `𝔨 ⊂ 𝔥 ⊂ 𝔤`, horizontal/vertical spaces and the
//!   fatness audit.
//! - [`curvature`]: the curvature pipeline and its finite-difference oracle.
//! - [`search`]: maximization on `G`, zero-plane certificates, scans and
//!   metric-variation sweeps.

pub mod bundle;
pub mod catalog;
pub mod curvature;
pub mod error;
pub mod liealg;
pub mod metric;
pub mod search;

pub use bundle::{BundleTriple, FatnessReport, TangentPair};
pub use curvature::{CurvatureSample, CurvatureTerms};
pub use error::{Error, Result};
pub use liealg::{AlgebraElement, Family, GroupElement, LieAlgebra, Subspace};
pub use metric::MetricSpec;
pub use search::{ZeroPlaneCertificate, ScanResult, SweepRow};
