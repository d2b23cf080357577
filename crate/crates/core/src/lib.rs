//! Coarray-based direction-of-arrival estimation for sparse linear arrays.
//!
//! The crate covers the full pipeline for co-prime, nested, minimum-redundancy
//! and arbitrary integer-grid arrays:
//!
//! * [`geometry`]: sensor layouts, the difference coarray and the coarray
//!   selection matrix `F`.
//! * [`model`]: steering vectors, exact and sample covariances, snapshot
//!   simulation and the virtual-ULA observation `z = F r`.
//! * [`estimator`]: direct augmentation (DA) and spatial smoothing (SS)
//!   followed by MUSIC on the virtual ULA.
//! * [`analysis`]: closed-form first-order error terms, asymptotic MSE,
//!   Fisher information, Cramér-Rao bound and efficiency.
//! * [`harness`]: reproducible Monte Carlo experiments with CSV output.
//!
//! Angles are radians everywhere in the library; the CLI and experiment
//! configs take degrees.

pub mod analysis;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, ArrayKind, CoarrayStructure};
pub use model::SourceScenario;

pub type C64 = num_complex::Complex64;
pub type CMat = nalgebra::DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;
pub type RMat = nalgebra::DMatrix<f64>;
pub type RVec = nalgebra::DVector<f64>;
