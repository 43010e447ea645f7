//! JSON documents written by the command-line tool.
//!
//! Correspondence indices in these documents are 1-based: index `k` refers
//! to the `k`-th data row of the correspondence file.

use serde::{Deserialize, Serialize};

use crate::geometry::RigidTransform;
use crate::oracle::OracleResult;
use crate::solver::{RegistrationResult, SearchStats};

pub fn to_one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|i| i + 1).collect()
}

/// `None` if any index is 0.
pub fn from_one_based(indices: &[usize]) -> Option<Vec<usize>> {
    indices.iter().map(|&i| i.checked_sub(1)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub triad: u64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub triads_evaluated: u64,
    pub degenerate_triads: u64,
    pub pure_inlier_triads: Option<u64>,
    pub distinct_pure_inlier_sets: Option<u64>,
    pub layer_iterations: [u64; 3],
    pub consensus_history: Vec<HistoryEntry>,
    pub refined: bool,
}

impl From<&SearchStats> for StatsReport {
    fn from(s: &SearchStats) -> Self {
        Self {
            triads_evaluated: s.triads_evaluated,
            degenerate_triads: s.degenerate_triads,
            pure_inlier_triads: s.pure_inlier_triads,
            distinct_pure_inlier_sets: s.distinct_pure_inlier_sets,
            layer_iterations: s.layer_iterations,
            consensus_history: s
                .consensus_history
                .iter()
                .map(|h| HistoryEntry {
                    triad: h.triad_ordinal,
                    size: h.size,
                })
                .collect(),
            refined: s.refined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    pub solver: String,
    pub success: bool,
    pub failure: Option<String>,
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// Consensus of the best minimal model.
    pub consensus_indices: Vec<usize>,
    pub consensus_size: usize,
    /// Consensus of the returned transform.
    pub inlier_indices: Vec<usize>,
    pub inlier_count: usize,
    pub runtime_s: f64,
    pub stats: StatsReport,
}

impl RegistrationReport {
    pub fn new(solver: &str, result: &RegistrationResult, failure: Option<String>, runtime_s: f64) -> Self {
        Self {
            solver: solver.to_string(),
            success: failure.is_none(),
            failure,
            rotation: result.transform.rotation_rows(),
            translation: result.transform.translation.into(),
            consensus_indices: to_one_based(result.consensus.indices()),
            consensus_size: result.consensus.size(),
            inlier_indices: to_one_based(result.inliers.indices()),
            inlier_count: result.inliers.size(),
            runtime_s,
            stats: StatsReport::from(&result.stats),
        }
    }

    pub fn transform(&self) -> RigidTransform {
        RigidTransform::from_rotation_rows(self.rotation, self.translation)
    }
}

/// Ground truth written next to a generated correspondence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSidecar {
    pub n: usize,
    pub outlier_ratio: f64,
    pub sigma: f64,
    pub seed: u64,
    pub source: String,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub inlier_indices: Vec<usize>,
    pub outlier_indices: Vec<usize>,
}

impl GroundTruthSidecar {
    pub fn transform(&self) -> RigidTransform {
        RigidTransform::from_rotation_rows(self.rotation, self.translation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub consensus_indices: Vec<usize>,
    pub consensus_size: usize,
    pub triad: [usize; 3],
}

impl From<&OracleResult> for OracleReport {
    fn from(r: &OracleResult) -> Self {
        Self {
            rotation: r.transform.rotation_rows(),
            translation: r.transform.translation.into(),
            consensus_indices: to_one_based(r.consensus.indices()),
            consensus_size: r.consensus.size(),
            triad: r.triad.map(|i| i + 1),
        }
    }
}
