//! Simulation of planar stationary isotropic STIT tessellations and
//! Monte Carlo diagnostics for the extremes of their cell inradii.
//!
//! - [`geometry`]: convex polygons, halfplane clipping, Chebyshev incircle.
//! - [`linemeasure`]: the invariant line measure and line sampling.
//! - [`stit`]: the event-driven division process in a window.
//! - [`extremes`]: observation windows, exceedances, order statistics.
//! - [`laws`]: closed-form distributions and bounds.
//! - [`chenstein`]: sub-square bookkeeping behind the Poisson approximation.
//! - [`experiments`]: replication harness and comparisons with the limits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chenstein;
pub mod experiments;
pub mod extremes;
pub mod geometry;
pub mod laws;
pub mod linemeasure;
pub mod output;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod stit;

pub use geometry::{ConvexPolygon, Disk, Line, Point, Side};
pub use stit::{simulate, Tessellation};
