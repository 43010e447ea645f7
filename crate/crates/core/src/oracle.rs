//! Brute-force references for small instances.

use thiserror::Error;

use crate::geometry::{solve_minimal_3pt, CorrespondenceSet, RigidTransform};
use crate::solver::{consensus_of, ConsensusSet};

/// Largest instance the exhaustive oracle accepts (C(40, 3) = 9880 triads).
pub const ORACLE_MAX_N: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {n} correspondences, the exhaustive oracle accepts at most {max}")]
    InstanceTooLarge { n: usize, max: usize },
    #[error("need at least 3 correspondences, got {0}")]
    InsufficientCorrespondences(usize),
    #[error("every triad is degenerate")]
    NoValidTriad,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub consensus: ConsensusSet,
    pub transform: RigidTransform,
    /// Lexicographically smallest triad attaining the maximum.
    pub triad: [usize; 3],
}

/// Maximum consensus over the minimal models of every non-degenerate triad.
pub fn exhaustive_consensus_oracle(corr: &CorrespondenceSet, gamma: f64) -> Result<OracleResult, OracleError> {
    let n = corr.len();
    if n > ORACLE_MAX_N {
        return Err(OracleError::InstanceTooLarge { n, max: ORACLE_MAX_N });
    }
    if n < 3 {
        return Err(OracleError::InsufficientCorrespondences(n));
    }
    let (src, dst) = (corr.source(), corr.target());
    let mut best: Option<OracleResult> = None;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Ok(model) = solve_minimal_3pt([&src[i], &src[j], &src[k]], [&dst[i], &dst[j], &dst[k]]) else {
                    continue;
                };
                let consensus = consensus_of(&model, corr, gamma);
                // strict comparison keeps the earliest triad on ties
                if best.as_ref().is_none_or(|b| consensus.size() > b.consensus.size()) {
                    best = Some(OracleResult {
                        consensus,
                        transform: model,
                        triad: [i, j, k],
                    });
                }
            }
        }
    }
    best.ok_or(OracleError::NoValidTriad)
}

/// Equal-length test over all ordered pairs, recomputed from coordinates
/// with no symmetry shortcut. Row `i`, column `j` refers to correspondences
/// `i` and `j`; the diagonal is false.
pub fn pairwise_oracle(corr: &CorrespondenceSet, gamma: f64) -> Vec<Vec<bool>> {
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let n = corr.len();
    let (src, dst) = (corr.source(), corr.target());
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return false;
                    }
                    let lp = dist(src[i].coords.as_slice(), src[j].coords.as_slice());
                    let lq = dist(dst[i].coords.as_slice(), dst[j].coords.as_slice());
                    (lq - lp).abs() <= 2.0 * gamma
                })
                .collect()
        })
        .collect()
}
