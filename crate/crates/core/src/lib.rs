//! Multi-scale covering toolkit for finite point sets and random fractals.
//!
//! The crate is organized around one pipeline and several companions:
//!
//! * [`lattice`] builds exact base-`b` cube covers of rational point samples
//!   and fits box-counting slopes.
//! * [`directions`] puts epsilon-nets on Grassmannians of k-planes under the
//!   projection metric and estimates Hausdorff content of flagged cell sets.
//! * [`cover`] accumulates exceptional direction planes for a sample across
//!   scales, certifies injectivity plus a Holder inverse bound for the
//!   surviving planes, and extends graph functions by infimal convolution.
//! * [`percolation`] grows seeded subdivision percolation trees and measures
//!   direction-set growth and angular coverage.
//! * [`doubling`] works with ternary Bernoulli measures: doubling-constant
//!   estimates and exact digit-set interval counts.
//! * [`visibility`] is the spherical-projection analogue of [`cover`]: tubes
//!   of blocked viewpoints and polar graph functions.
//!
//! Everything is deterministic given the seeds carried in the inputs; nothing
//! reads global RNG state.

pub mod content;
pub mod cover;
pub mod directions;
pub mod doubling;
pub mod fit;
pub mod lattice;
pub mod percolation;
pub mod seeded;
pub mod visibility;

pub use cover::{CoverParams, ExceptionalSet, HolderCertificate, PairFamily};
pub use directions::{GrassmannNet, KPlane, ProjectivePoint};
pub use doubling::{DigitRule, TernaryBernoulli};
pub use fit::LineFit;
pub use lattice::{Coord, LatticeCube, PointSample, ScaleCover, StandardSet};
pub use percolation::PercolationTree;
pub use visibility::TubeSet;
