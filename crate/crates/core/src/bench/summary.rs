use serde::Serialize;

use super::{SolverKind, TrialRecord};

/// Minimum, quartiles and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// NaN values are ignored; an empty input gives all-NaN.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
        v.sort_by(f64::total_cmp);
        Self {
            min: quantile(&v, 0.0),
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: quantile(&v, 1.0),
        }
    }
}

/// Linearly interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = q.clamp(0.0, 1.0) * (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub outlier_ratio: f64,
    pub solver: SolverKind,
    pub trials: usize,
    pub success_rate: f64,
    pub rot_err_deg: FiveNumber,
    pub trans_err_m: FiveNumber,
    pub runtime_s: FiveNumber,
    pub consensus_size: FiveNumber,
    pub pure_inlier_triads: FiveNumber,
}

/// Per `(n, ratio, solver)` statistics, cells in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<CellSummary> {
    type Cell<'a> = ((usize, u64, SolverKind), Vec<&'a TrialRecord>);
    let mut cells: Vec<Cell> = Vec::new();
    for r in records {
        let key = (r.n, r.outlier_ratio.to_bits(), r.solver);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, group)) => group.push(r),
            None => cells.push((key, vec![r])),
        }
    }
    cells
        .into_iter()
        .map(|((n, _, solver), group)| {
            let count = group.len();
            CellSummary {
                n,
                outlier_ratio: group[0].outlier_ratio,
                solver,
                trials: count,
                success_rate: group.iter().filter(|r| r.success).count() as f64 / count as f64,
                rot_err_deg: FiveNumber::of(group.iter().map(|r| r.rot_err_deg)),
                trans_err_m: FiveNumber::of(group.iter().map(|r| r.trans_err_m)),
                runtime_s: FiveNumber::of(group.iter().map(|r| r.runtime_s)),
                consensus_size: FiveNumber::of(group.iter().map(|r| r.consensus_size as f64)),
                pure_inlier_triads: FiveNumber::of(
                    group.iter().map(|r| r.stats.pure_inlier_triads.unwrap_or(0) as f64),
                ),
            }
        })
        .collect()
}
