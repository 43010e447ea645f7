//! Triple-layered voting with consensus maximization.
//!
//! The 3-point sample is picked one point per layer. Layer 1 walks all
//! correspondences in vote order; layer 2 walks the candidates consistent
//! with the first pick, re-ranked by their votes among themselves; layer 3
//! does the same inside the candidates consistent with the second pick.
//! Each layer stops early once the RANSAC-style bound for its own
//! candidate pool says a pure-inlier pick has been seen with the requested
//! confidence. The whole procedure is deterministic.

use std::collections::HashSet;

use thiserror::Error;

use crate::consistency::{
    build_consistency_matrix, find_inlier_candidates, get_reduced_consistency, sort_correspondences,
    GraphError,
};
use crate::geometry::{
    residual, solve_minimal_3pt_with, solve_svd, CorrespondenceSet, DegeneracyTolerance, GeometryError,
    NoiseModel, RigidTransform,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TrivocConfig {
    pub noise: NoiseModel,
    /// Success probability used by the per-layer iteration bound.
    pub confidence: f64,
    /// Upper limit on iterations of any single layer.
    pub max_iteration_cap: u64,
    pub degeneracy: DegeneracyTolerance,
    /// Keep every evaluated triad in [`SearchStats::triad_log`].
    pub record_triads: bool,
}

impl TrivocConfig {
    pub const DEFAULT_CONFIDENCE: f64 = 0.99;
    pub const DEFAULT_CAP: u64 = 1_000_000;

    pub fn new(noise: NoiseModel) -> Self {
        Self {
            noise,
            confidence: Self::DEFAULT_CONFIDENCE,
            max_iteration_cap: Self::DEFAULT_CAP,
            degeneracy: DegeneracyTolerance::default(),
            record_triads: false,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.noise.gamma()
    }

    pub fn validate(&self) -> Result<(), RegistrationError> {
        validate_common(self.gamma(), self.confidence, self.max_iteration_cap)
    }
}

pub(crate) fn validate_common(gamma: f64, confidence: f64, cap: u64) -> Result<(), RegistrationError> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(RegistrationError::InvalidConfig(format!("inlier threshold {gamma} must be finite and >= 0")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(RegistrationError::InvalidConfig(format!("confidence {confidence} must lie in (0, 1)")));
    }
    if cap == 0 {
        return Err(RegistrationError::InvalidConfig("iteration cap must be positive".into()));
    }
    Ok(())
}

/// Sorted, distinct correspondence indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsensusSet {
    indices: Vec<usize>,
}

impl ConsensusSet {
    /// Sorts and deduplicates.
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsensusImprovement {
    /// 1-based ordinal of the triad among those evaluated.
    pub triad_ordinal: u64,
    pub size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    /// Triads for which a minimal model was solved.
    pub triads_evaluated: u64,
    /// Triads skipped because the minimal solver rejected them.
    pub degenerate_triads: u64,
    /// Evaluated triads made only of ground-truth inliers.
    pub pure_inlier_triads: Option<u64>,
    /// Distinct unordered pure-inlier 3-point sets among the evaluated triads.
    pub distinct_pure_inlier_sets: Option<u64>,
    /// Iterations of each layer (for RANSAC only the first is used).
    pub layer_iterations: [u64; 3],
    pub consensus_history: Vec<ConsensusImprovement>,
    /// False when the least-squares refinement was degenerate and the
    /// minimal model was returned instead.
    pub refined: bool,
    /// Every evaluated triad, in evaluation order, when requested.
    pub triad_log: Option<Vec<[usize; 3]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    pub transform: RigidTransform,
    /// Frozen consensus of the best minimal model.
    pub consensus: ConsensusSet,
    /// Consensus of `transform` over the full set: the final inlier set.
    pub inliers: ConsensusSet,
    /// The minimal model that produced `consensus`.
    pub minimal_model: RigidTransform,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistrationError {
    #[error("need at least 3 correspondences, got {0}")]
    InsufficientCorrespondences(usize),
    #[error("no triad reached a consensus of 3 (best {})", .0.consensus.size())]
    NoConsensusFound(Box<RegistrationResult>),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("ground-truth index {index} out of range for {len} correspondences")]
    GroundTruthOutOfRange { index: usize, len: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Smallest consensus accepted as a registration.
pub const MIN_CONSENSUS: usize = 3;

/// Indices whose residual under `t` is at most `gamma`, over the whole set.
pub fn consensus_of(t: &RigidTransform, corr: &CorrespondenceSet, gamma: f64) -> ConsensusSet {
    let indices = corr
        .source()
        .iter()
        .zip(corr.target())
        .enumerate()
        .filter(|(_, (p, q))| residual(t, p, q) <= gamma)
        .map(|(i, _)| i)
        .collect();
    ConsensusSet { indices }
}

/// Minimal model of the 3-point set `triad`. Indices are taken in ascending
/// order, so the model depends only on the set and not on pick order.
pub fn solve_triad(
    corr: &CorrespondenceSet,
    mut triad: [usize; 3],
    tol: &DegeneracyTolerance,
) -> Result<RigidTransform, GeometryError> {
    triad.sort_unstable();
    let (src, dst) = (corr.source(), corr.target());
    solve_minimal_3pt_with(triad.map(|i| &src[i]), triad.map(|i| &dst[i]), tol)
}

/// `ceil(log(1 − confidence) / log(1 − x / y))`, clamped to `[1, cap]`.
///
/// `x = 0` (or an empty pool) gives `cap`; `x ≥ y` gives 1.
pub fn max_iterations(x: usize, y: usize, confidence: f64, cap: u64) -> u64 {
    if x == 0 || y == 0 {
        return cap;
    }
    if x >= y {
        return 1;
    }
    iterations_for_success_probability(x as f64 / y as f64, confidence, cap)
}

/// Number of independent draws with per-draw success probability `p`
/// needed to see at least one success with the given confidence.
pub(crate) fn iterations_for_success_probability(p: f64, confidence: f64, cap: u64) -> u64 {
    if !(p > 0.0) {
        return cap;
    }
    if p >= 1.0 {
        return 1;
    }
    let t = ((1.0 - confidence).ln() / (-p).ln_1p()).ceil();
    if t.is_nan() || t >= cap as f64 {
        cap
    } else {
        (t as u64).clamp(1, cap)
    }
}

/// Per-draw pure-inlier tracking shared with the RANSAC baseline.
pub(crate) struct PurityTracker {
    mask: Vec<bool>,
    pure: u64,
    distinct: HashSet<[usize; 3]>,
}

impl PurityTracker {
    pub(crate) fn new(ground_truth: Option<&[usize]>, n: usize) -> Result<Option<Self>, RegistrationError> {
        let Some(gt) = ground_truth else {
            return Ok(None);
        };
        let mut mask = vec![false; n];
        for &i in gt {
            if i >= n {
                return Err(RegistrationError::GroundTruthOutOfRange { index: i, len: n });
            }
            mask[i] = true;
        }
        Ok(Some(Self {
            mask,
            pure: 0,
            distinct: HashSet::new(),
        }))
    }

    pub(crate) fn observe(&mut self, triad: [usize; 3]) {
        if triad.iter().all(|&i| self.mask[i]) {
            self.pure += 1;
            let mut key = triad;
            key.sort_unstable();
            self.distinct.insert(key);
        }
    }

    pub(crate) fn finish(self, stats: &mut SearchStats) {
        stats.pure_inlier_triads = Some(self.pure);
        stats.distinct_pure_inlier_sets = Some(self.distinct.len() as u64);
    }
}

/// Incumbent best model shared with the RANSAC baseline.
pub(crate) struct Incumbent {
    pub(crate) consensus: ConsensusSet,
    pub(crate) model: RigidTransform,
}

impl Incumbent {
    pub(crate) fn empty() -> Self {
        Self {
            consensus: ConsensusSet::default(),
            model: RigidTransform::identity(),
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.consensus.size()
    }
}

/// Refines the incumbent by least squares over its consensus.
pub(crate) fn finish_registration(
    corr: &CorrespondenceSet,
    gamma: f64,
    best: Incumbent,
    mut stats: SearchStats,
) -> Result<RegistrationResult, RegistrationError> {
    if best.size() < MIN_CONSENSUS {
        return Err(RegistrationError::NoConsensusFound(Box::new(RegistrationResult {
            transform: best.model,
            inliers: best.consensus.clone(),
            consensus: best.consensus,
            minimal_model: best.model,
            stats,
        })));
    }
    let transform = match solve_svd(corr, best.consensus.indices()) {
        Ok(t) => {
            stats.refined = true;
            t
        }
        Err(GeometryError::DegenerateConfiguration(_)) => {
            stats.refined = false;
            best.model
        }
        Err(e) => unreachable!("consensus indices are in range: {e}"),
    };
    Ok(RegistrationResult {
        inliers: consensus_of(&transform, corr, gamma),
        transform,
        consensus: best.consensus,
        minimal_model: best.model,
        stats,
    })
}

/// Runs the triple-layered search and refines the best consensus.
///
/// `ground_truth_inliers`, when given, only feeds the pure-inlier counters.
pub fn register(
    corr: &CorrespondenceSet,
    config: &TrivocConfig,
    ground_truth_inliers: Option<&[usize]>,
) -> Result<RegistrationResult, RegistrationError> {
    config.validate()?;
    let n = corr.len();
    if n < 3 {
        return Err(RegistrationError::InsufficientCorrespondences(n));
    }
    let gamma = config.gamma();
    let conf = config.confidence;
    let cap = config.max_iteration_cap;
    // X for layer k is |C| - k, floored at zero
    let bound = |best: usize, layer_offset: usize, pool: usize| {
        max_iterations(best.saturating_sub(layer_offset), pool, conf, cap)
    };
    let limit = |pool: usize, t: u64| (pool as u64).min(t);

    let mut stats = SearchStats::default();
    let mut purity = PurityTracker::new(ground_truth_inliers, n)?;
    let mut log = config.record_triads.then(Vec::new);
    let mut best = Incumbent::empty();

    let m = build_consistency_matrix(corr, gamma);
    let v1 = sort_correspondences(&m);
    let mut t1 = bound(0, 0, n);

    let mut i = 0u64;
    while i < limit(n, t1) {
        let a = v1.order[i as usize];
        i += 1;
        stats.layer_iterations[0] += 1;

        let n2 = find_inlier_candidates(a, &m)?;
        let m2 = get_reduced_consistency(&m, &n2)?;
        let v2 = sort_correspondences(&m2);
        let mut t2 = bound(best.size(), 1, n2.len());

        let mut j = 0u64;
        while j < limit(n2.len(), t2) {
            let b = v2.order[j as usize];
            j += 1;
            stats.layer_iterations[1] += 1;

            let n3 = find_inlier_candidates(b, &m2)?;
            let m3 = get_reduced_consistency(&m, &n3)?;
            let v3 = sort_correspondences(&m3);
            let mut t3 = bound(best.size(), 2, n3.len());

            let mut k = 0u64;
            while k < limit(n3.len(), t3) {
                let c = v3.order[k as usize];
                k += 1;
                stats.layer_iterations[2] += 1;

                let model = match solve_triad(corr, [a, b, c], &config.degeneracy) {
                    Ok(model) => model,
                    Err(_) => {
                        stats.degenerate_triads += 1;
                        continue;
                    }
                };
                stats.triads_evaluated += 1;
                if let Some(p) = purity.as_mut() {
                    p.observe([a, b, c]);
                }
                if let Some(log) = log.as_mut() {
                    log.push([a, b, c]);
                }

                let consensus = consensus_of(&model, corr, gamma);
                if consensus.size() > best.size() {
                    stats.consensus_history.push(ConsensusImprovement {
                        triad_ordinal: stats.triads_evaluated,
                        size: consensus.size(),
                    });
                    best = Incumbent { consensus, model };
                    t1 = bound(best.size(), 0, n);
                    t2 = bound(best.size(), 1, n2.len());
                    t3 = bound(best.size(), 2, n3.len());
                }
            }
        }
    }

    if let Some(p) = purity {
        p.finish(&mut stats);
    }
    stats.triad_log = log;
    finish_registration(corr, gamma, best, stats)
}
