//! Robust correspondence-based point cloud registration.
//!
//! [`solver::register`] estimates the rigid transform between two point
//! sets from putative correspondences, many of which may be outliers. It
//! builds a pairwise equal-length consistency graph, then picks 3-point
//! samples one point per layer from vote-sorted candidate pools, keeps the
//! sample whose minimal model has the largest consensus, and refines that
//! consensus by least squares.
//!
//! Alongside the solver the crate ships a RANSAC baseline, brute-force
//! oracles for small instances, a synthetic Monte-Carlo harness, and PLY /
//! text readers used by the `trivoc` binary.

pub mod bench;
pub mod consistency;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod ransac;
pub mod solver;

pub use geometry::{CorrespondenceSet, NoiseModel, Point3, RigidTransform};
pub use solver::{register, RegistrationError, RegistrationResult, TrivocConfig};
