//! Monte-Carlo benchmark harness over synthetic instances.

mod summary;
mod synthetic;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use summary::{aggregate, quantile, CellSummary, FiveNumber};
pub use synthetic::{
    generate_instance, random_rotation, BuiltinCloud, SourceCloud, SyntheticInstance, SyntheticScenario,
    BUILTIN_CLOUD_SIZE,
};

use crate::geometry::{rotation_error_deg, translation_error_m, NoiseModel};
use crate::io::ply::PlyError;
use crate::ransac::{ransac_register, RansacConfig};
use crate::solver::{register, RegistrationError, RegistrationResult, SearchStats, TrivocConfig};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("source cloud has {available} points, need {needed}")]
    SourceTooSmall { needed: usize, available: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Ply(#[from] PlyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Trivoc,
    Ransac,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Trivoc => "trivoc",
            SolverKind::Ransac => "ransac",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "trivoc" => Some(SolverKind::Trivoc),
            "ransac" => Some(SolverKind::Ransac),
            _ => None,
        }
    }
}

/// Pass line for one trial. Both bounds are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessCriteria {
    pub max_rotation_deg: f64,
    pub max_translation_m: f64,
}

impl Default for SuccessCriteria {
    fn default() -> Self {
        Self {
            max_rotation_deg: 5.0,
            max_translation_m: 0.05,
        }
    }
}

impl SuccessCriteria {
    pub fn accepts(&self, rot_err_deg: f64, trans_err_m: f64) -> bool {
        rot_err_deg < self.max_rotation_deg && trans_err_m < self.max_translation_m
    }
}

/// Mixes the master seed with a trial's coordinates (splitmix64 finalizer
/// applied to each word in turn).
pub fn derive_seed(master: u64, n: usize, outlier_ratio: f64, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    [n as u64, outlier_ratio.to_bits(), trial as u64]
        .into_iter()
        .fold(mix(master), |acc, word| mix(acc ^ mix(word)))
}

/// Seed handed to RANSAC for an instance seed.
pub fn ransac_seed(instance_seed: u64) -> u64 {
    derive_seed(instance_seed, 3, 0.0, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub outlier_ratio: f64,
    pub sigma: f64,
    pub trial: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub rot_err_deg: f64,
    pub trans_err_m: f64,
    /// Wall clock around the solver call only.
    pub runtime_s: f64,
    /// Size of the frozen minimal-model consensus.
    pub consensus_size: usize,
    /// Recall and precision of the returned transform's inlier set.
    pub recall: f64,
    pub precision: f64,
    pub success: bool,
    /// Solver error message, if the solver did not return a registration.
    pub failure: Option<String>,
    pub stats: SearchStats,
}

/// Fixed CSV row layout of a [`TrialRecord`].
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    n: usize,
    outlier_ratio: f64,
    sigma: f64,
    trial: usize,
    seed: u64,
    solver: &'a str,
    rot_err_deg: f64,
    trans_err_m: f64,
    runtime_s: f64,
    consensus_size: usize,
    recall: f64,
    precision: f64,
    triads_evaluated: u64,
    pure_inlier_triads: u64,
    success: bool,
}

pub const CSV_HEADER: &str = "n,outlier_ratio,sigma,trial,seed,solver,rot_err_deg,trans_err_m,runtime_s,\
consensus_size,recall,precision,triads_evaluated,pure_inlier_triads,success";

/// Writes one CSV row per record under [`CSV_HEADER`].
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            n: r.n,
            outlier_ratio: r.outlier_ratio,
            sigma: r.sigma,
            trial: r.trial,
            seed: r.seed,
            solver: r.solver.name(),
            rot_err_deg: r.rot_err_deg,
            trans_err_m: r.trans_err_m,
            runtime_s: r.runtime_s,
            consensus_size: r.consensus_size,
            recall: r.recall,
            precision: r.precision,
            triads_evaluated: r.stats.triads_evaluated,
            pure_inlier_triads: r.stats.pure_inlier_triads.unwrap_or(0),
            success: r.success,
        })?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub ratios: Vec<f64>,
    pub trials_per_cell: usize,
    pub solvers: Vec<SolverKind>,
    pub master_seed: u64,
    pub sigma: f64,
    pub threshold_multiplier: f64,
    pub source: SourceCloud,
    pub ransac_max_iterations: u64,
    pub success: SuccessCriteria,
    /// Run trials on the rayon pool. Output order does not depend on it.
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(ns: Vec<usize>, ratios: Vec<f64>, trials_per_cell: usize, solvers: Vec<SolverKind>) -> Self {
        Self {
            ns,
            ratios,
            trials_per_cell,
            solvers,
            master_seed: 0,
            sigma: SyntheticScenario::DEFAULT_SIGMA,
            threshold_multiplier: NoiseModel::DEFAULT_MULTIPLIER,
            source: SourceCloud::Builtin(BuiltinCloud::Shell),
            ransac_max_iterations: RansacConfig::DEFAULT_MAX_ITERATIONS,
            success: SuccessCriteria::default(),
            parallel: true,
        }
    }

    /// Scenario of one `(n, ratio, trial)` cell entry.
    pub fn scenario(&self, n: usize, outlier_ratio: f64, trial: usize) -> SyntheticScenario {
        SyntheticScenario {
            sigma: self.sigma,
            source: self.source.clone(),
            ..SyntheticScenario::new(n, outlier_ratio, derive_seed(self.master_seed, n, outlier_ratio, trial))
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel::with_multiplier(self.sigma, self.threshold_multiplier)
    }
}

/// Runs one solver on a generated instance and scores it.
pub fn evaluate(
    instance: &SyntheticInstance,
    solver: SolverKind,
    noise: NoiseModel,
    instance_seed: u64,
    ransac_max_iterations: u64,
    success: &SuccessCriteria,
) -> (Result<RegistrationResult, RegistrationError>, f64, bool) {
    let corr = &instance.correspondences;
    let gt = Some(instance.inliers.as_slice());
    let start = Instant::now();
    let outcome = match solver {
        SolverKind::Trivoc => register(corr, &TrivocConfig::new(noise), gt),
        SolverKind::Ransac => {
            let cfg = RansacConfig {
                max_iterations: ransac_max_iterations,
                ..RansacConfig::new(noise.gamma(), ransac_seed(instance_seed))
            };
            ransac_register(corr, &cfg, gt)
        }
    };
    let runtime = start.elapsed().as_secs_f64();
    let ok = match &outcome {
        Ok(r) => success.accepts(
            rotation_error_deg(&r.transform.rotation, &instance.ground_truth.rotation),
            translation_error_m(&r.transform.translation, &instance.ground_truth.translation),
        ),
        Err(_) => false,
    };
    (outcome, runtime, ok)
}

fn record_from(
    scenario: &SyntheticScenario,
    trial: usize,
    solver: SolverKind,
    instance: &SyntheticInstance,
    outcome: Result<RegistrationResult, RegistrationError>,
    runtime_s: f64,
    success: bool,
) -> TrialRecord {
    let (result, failure) = match outcome {
        Ok(r) => (Some(r), None),
        Err(RegistrationError::NoConsensusFound(best)) => {
            let msg = RegistrationError::NoConsensusFound(best.clone()).to_string();
            (Some(*best), Some(msg))
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let gt = &instance.ground_truth;
    let (rot, trans, consensus, found, stats) = match result {
        Some(r) => (
            rotation_error_deg(&r.transform.rotation, &gt.rotation),
            translation_error_m(&r.transform.translation, &gt.translation),
            r.consensus,
            r.inliers,
            r.stats,
        ),
        None => (f64::NAN, f64::NAN, Default::default(), Default::default(), SearchStats::default()),
    };
    let hits = instance.inliers.iter().filter(|&&i| found.contains(i)).count();
    let recall = if instance.inliers.is_empty() {
        1.0
    } else {
        hits as f64 / instance.inliers.len() as f64
    };
    let precision = match found.size() {
        0 if instance.inliers.is_empty() => 1.0,
        0 => 0.0,
        size => hits as f64 / size as f64,
    };
    TrialRecord {
        n: scenario.n,
        outlier_ratio: scenario.outlier_ratio,
        sigma: scenario.sigma,
        trial,
        seed: scenario.seed,
        solver,
        rot_err_deg: rot,
        trans_err_m: trans,
        runtime_s,
        consensus_size: consensus.size(),
        recall,
        precision,
        success,
        failure,
        stats,
    }
}

/// Records for every solver on one `(n, ratio, trial)` instance.
pub fn run_trial(cfg: &SweepConfig, n: usize, outlier_ratio: f64, trial: usize) -> Result<Vec<TrialRecord>, BenchError> {
    let scenario = cfg.scenario(n, outlier_ratio, trial);
    let instance = generate_instance(&scenario)?;
    Ok(cfg
        .solvers
        .iter()
        .map(|&solver| {
            let (outcome, runtime, ok) = evaluate(
                &instance,
                solver,
                cfg.noise(),
                scenario.seed,
                cfg.ransac_max_iterations,
                &cfg.success,
            );
            record_from(&scenario, trial, solver, &instance, outcome, runtime, ok)
        })
        .collect())
}

/// One record per `(n, ratio, trial, solver)`, in that nesting order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<TrialRecord>, BenchError> {
    if cfg.ns.is_empty() || cfg.ratios.is_empty() || cfg.solvers.is_empty() || cfg.trials_per_cell == 0 {
        return Err(BenchError::InvalidScenario(
            "sweep needs at least one size, ratio, solver and trial".into(),
        ));
    }
    let jobs: Vec<(usize, f64, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| {
            cfg.ratios
                .iter()
                .flat_map(move |&r| (0..cfg.trials_per_cell).map(move |t| (n, r, t)))
        })
        .collect();
    let per_job: Vec<Vec<TrialRecord>> = if cfg.parallel {
        jobs.par_iter()
            .map(|&(n, r, t)| run_trial(cfg, n, r, t))
            .collect::<Result<_, _>>()?
    } else {
        jobs.iter()
            .map(|&(n, r, t)| run_trial(cfg, n, r, t))
            .collect::<Result<_, _>>()?
    };
    Ok(per_job.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchCounts {
    pub triads_evaluated: u64,
    pub pure_inlier_triads: u64,
    pub distinct_pure_inlier_sets: u64,
    pub consensus_size: usize,
}

impl SearchCounts {
    pub fn pure_fraction(&self) -> f64 {
        if self.triads_evaluated == 0 {
            0.0
        } else {
            self.pure_inlier_triads as f64 / self.triads_evaluated as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstrumentationReport {
    pub trivoc: SearchCounts,
    pub ransac: SearchCounts,
}

/// Counts evaluated and pure-inlier triads for both solvers on one instance.
pub fn instrumentation_study(
    scenario: &SyntheticScenario,
    threshold_multiplier: f64,
    ransac_max_iterations: u64,
) -> Result<InstrumentationReport, BenchError> {
    let instance = generate_instance(scenario)?;
    let noise = NoiseModel::with_multiplier(scenario.sigma, threshold_multiplier);
    let counts = |solver| {
        let (outcome, _, _) = evaluate(
            &instance,
            solver,
            noise,
            scenario.seed,
            ransac_max_iterations,
            &SuccessCriteria::default(),
        );
        let r = match outcome {
            Ok(r) => r,
            Err(RegistrationError::NoConsensusFound(best)) => *best,
            Err(e) => return Err(BenchError::InvalidScenario(e.to_string())),
        };
        Ok(SearchCounts {
            triads_evaluated: r.stats.triads_evaluated,
            pure_inlier_triads: r.stats.pure_inlier_triads.unwrap_or(0),
            distinct_pure_inlier_sets: r.stats.distinct_pure_inlier_sets.unwrap_or(0),
            consensus_size: r.consensus.size(),
        })
    };
    Ok(InstrumentationReport {
        trivoc: counts(SolverKind::Trivoc)?,
        ransac: counts(SolverKind::Ransac)?,
    })
}
