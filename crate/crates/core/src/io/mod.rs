//! File formats: PLY clouds, correspondence tables and JSON reports.

pub mod correspondences;
pub mod ply;
pub mod report;
