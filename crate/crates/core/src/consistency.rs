//! Pairwise equal-length consistency and the voting machinery built on it.
//!
//! A [`ConsistencyMatrix`] always carries the global correspondence index of
//! each of its rows, so reduced matrices and the candidate lists drawn from
//! them stay in the global index space.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::CorrespondenceSet;

/// Below this size the matrix is filled on the calling thread.
const PARALLEL_BUILD_MIN: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("correspondence {0} is not a row of this matrix")]
    IndexNotInMatrix(usize),
    #[error("correspondence {0} appears more than once in the subset")]
    DuplicateLabel(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelLayout {
    /// `labels[k] == k`
    Identity,
    Ascending,
    Unordered,
}

impl LabelLayout {
    fn of(labels: &[usize]) -> Self {
        if labels.iter().enumerate().all(|(k, &l)| k == l) {
            LabelLayout::Identity
        } else if labels.windows(2).all(|w| w[0] < w[1]) {
            LabelLayout::Ascending
        } else {
            LabelLayout::Unordered
        }
    }
}

/// Symmetric boolean adjacency with a false diagonal.
#[derive(Clone, PartialEq, Eq)]
pub struct ConsistencyMatrix {
    dim: usize,
    entries: Vec<bool>,
    labels: Vec<usize>,
    layout: LabelLayout,
}

impl fmt::Debug for ConsistencyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConsistencyMatrix")
            .field("dim", &self.dim)
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

impl ConsistencyMatrix {
    /// Builds a matrix from a dense row-major table. The table is symmetrized
    /// by OR-ing mirrored entries and the diagonal is cleared.
    pub fn from_dense(rows: &[Vec<bool>], labels: Vec<usize>) -> Result<Self, GraphError> {
        let dim = labels.len();
        assert_eq!(rows.len(), dim, "row count must match label count");
        check_distinct(&labels)?;
        let mut entries = vec![false; dim * dim];
        for i in 0..dim {
            assert_eq!(rows[i].len(), dim, "matrix must be square");
            for j in 0..dim {
                if i != j && (rows[i][j] || rows[j][i]) {
                    entries[i * dim + j] = true;
                }
            }
        }
        let layout = LabelLayout::of(&labels);
        Ok(Self {
            dim,
            entries,
            labels,
            layout,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Global correspondence index of each row, in row order.
    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Entry by row/column position.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[bool] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    /// Row position of a global correspondence index.
    pub fn position_of(&self, label: usize) -> Option<usize> {
        match self.layout {
            LabelLayout::Identity => (label < self.dim).then_some(label),
            LabelLayout::Ascending => self.labels.binary_search(&label).ok(),
            LabelLayout::Unordered => self.labels.iter().position(|&l| l == label),
        }
    }

    /// Entry by global correspondence indices.
    pub fn get_by_label(&self, a: usize, b: usize) -> Result<bool, GraphError> {
        let i = self.position_of(a).ok_or(GraphError::IndexNotInMatrix(a))?;
        let j = self.position_of(b).ok_or(GraphError::IndexNotInMatrix(b))?;
        Ok(self.get(i, j))
    }

    /// Row sums.
    pub fn votes(&self) -> VoteVector {
        VoteVector {
            sums: (0..self.dim)
                .map(|i| self.row(i).iter().filter(|&&e| e).count())
                .collect(),
        }
    }

    /// 0/1 text grid, one row per line. Diagnostics only.
    pub fn to_grid_string(&self) -> String {
        let mut out = String::with_capacity(self.dim * (self.dim + 1));
        for i in 0..self.dim {
            out.extend(self.row(i).iter().map(|&e| if e { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }
}

fn check_distinct(labels: &[usize]) -> Result<(), GraphError> {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    match sorted.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(GraphError::DuplicateLabel(w[0])),
        None => Ok(()),
    }
}

/// Per-row vote counts of a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteVector {
    pub sums: Vec<usize>,
}

/// Global indices ordered by descending vote count, ties by ascending index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedIndexVector {
    pub order: Vec<usize>,
    /// Vote count of each entry of `order`.
    pub votes: Vec<usize>,
}

impl SortedIndexVector {
    #[inline]
    pub fn len(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// `| ‖q_i − q_j‖ − ‖p_i − p_j‖ | ≤ 2γ`, inclusive.
#[inline]
pub fn equal_length_test(i: usize, j: usize, corr: &CorrespondenceSet, gamma: f64) -> bool {
    let (src, dst) = (corr.source(), corr.target());
    let dq = (dst[i] - dst[j]).norm();
    let dp = (src[i] - src[j]).norm();
    (dq - dp).abs() <= 2.0 * gamma
}

/// Tests every pair `i < j` once and mirrors the result.
pub fn build_consistency_matrix(corr: &CorrespondenceSet, gamma: f64) -> ConsistencyMatrix {
    let n = corr.len();
    let mut entries = vec![false; n * n];
    let fill_upper = |(i, row): (usize, &mut [bool])| {
        for (j, e) in row.iter_mut().enumerate().skip(i + 1) {
            *e = equal_length_test(i, j, corr, gamma);
        }
    };
    if n >= PARALLEL_BUILD_MIN {
        entries.par_chunks_mut(n).enumerate().for_each(fill_upper);
    } else {
        entries.chunks_mut(n).enumerate().for_each(fill_upper);
    }
    for i in 1..n {
        for j in 0..i {
            entries[i * n + j] = entries[j * n + i];
        }
    }
    ConsistencyMatrix {
        dim: n,
        entries,
        labels: (0..n).collect(),
        layout: LabelLayout::Identity,
    }
}

/// Orders the matrix labels by descending row sum.
pub fn sort_correspondences(m: &ConsistencyMatrix) -> SortedIndexVector {
    order_by_votes(&m.labels, &m.votes().sums)
}

/// Sorts `labels` by descending `sums`, ties by ascending label.
pub fn order_by_votes(labels: &[usize], sums: &[usize]) -> SortedIndexVector {
    assert_eq!(labels.len(), sums.len(), "one vote count per label");
    let mut rows: Vec<usize> = (0..labels.len()).collect();
    rows.sort_unstable_by(|&a, &b| sums[b].cmp(&sums[a]).then(labels[a].cmp(&labels[b])));
    SortedIndexVector {
        order: rows.iter().map(|&r| labels[r]).collect(),
        votes: rows.iter().map(|&r| sums[r]).collect(),
    }
}

/// Labels of the row of `a` that are consistent with `a`, ascending.
pub fn find_inlier_candidates(a: usize, m: &ConsistencyMatrix) -> Result<Vec<usize>, GraphError> {
    let row = m.position_of(a).ok_or(GraphError::IndexNotInMatrix(a))?;
    let mut out: Vec<usize> = m
        .row(row)
        .iter()
        .zip(&m.labels)
        .filter(|&(&e, &label)| e && label != a)
        .map(|(_, &label)| label)
        .collect();
    if m.layout == LabelLayout::Unordered {
        out.sort_unstable();
    }
    Ok(out)
}

/// Sub-matrix over `subset`, whose labels become the new row labels in the given order.
pub fn get_reduced_consistency(m: &ConsistencyMatrix, subset: &[usize]) -> Result<ConsistencyMatrix, GraphError> {
    let positions = subset
        .iter()
        .map(|&label| m.position_of(label).ok_or(GraphError::IndexNotInMatrix(label)))
        .collect::<Result<Vec<_>, _>>()?;
    check_distinct(subset)?;
    let k = subset.len();
    let mut entries = Vec::with_capacity(k * k);
    for &pi in &positions {
        let row = m.row(pi);
        entries.extend(positions.iter().map(|&pj| row[pj]));
    }
    let labels = subset.to_vec();
    let layout = LabelLayout::of(&labels);
    Ok(ConsistencyMatrix {
        dim: k,
        entries,
        labels,
        layout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    fn line_pairs(pairs: &[(f64, f64)]) -> CorrespondenceSet {
        CorrespondenceSet::from_pairs(
            pairs
                .iter()
                .map(|&(p, q)| (Point3::new(p, 0.0, 0.0), Point3::new(q, 0.0, 0.0))),
        )
        .unwrap()
    }

    fn dense(rows: &[&[u8]]) -> ConsistencyMatrix {
        let table: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect();
        ConsistencyMatrix::from_dense(&table, (0..rows.len()).collect()).unwrap()
    }

    #[test]
    fn gross_length_mismatch_fails() {
        let corr = line_pairs(&[(0.0, 0.0), (1.0, 5.0)]);
        assert!(!equal_length_test(0, 1, &corr, 0.06));
    }

    #[test]
    fn boundary_is_inclusive() {
        // |0.75 - 0.5| = 0.25 = 2 * 0.125, all exactly representable
        let corr = line_pairs(&[(0.0, 0.0), (0.5, 0.75)]);
        assert!(equal_length_test(0, 1, &corr, 0.125));
        assert!(!equal_length_test(0, 1, &corr, 0.124));
    }

    #[test]
    fn single_correspondence_matrix() {
        let corr = line_pairs(&[(0.0, 1.0)]);
        let m = build_consistency_matrix(&corr, 0.1);
        assert_eq!(m.dim(), 1);
        assert!(!m.get(0, 0));
    }

    #[test]
    fn two_inliers_matrix() {
        let corr = line_pairs(&[(0.0, 2.0), (1.0, 3.0)]);
        let m = build_consistency_matrix(&corr, 0.0);
        assert_eq!(m.to_grid_string(), "01\n10\n");
    }

    #[test]
    fn sort_all_ties() {
        let m = dense(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(sort_correspondences(&m).order, vec![0, 1, 2]);
    }

    #[test]
    fn sort_by_votes() {
        assert_eq!(order_by_votes(&[0, 1, 2], &[2, 0, 1]).order, vec![0, 2, 1]);

        // a symmetric matrix cannot have an odd vote total; (1, 0, 1) is the closest
        let m = dense(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]);
        assert_eq!(m.votes().sums, vec![1, 0, 1]);
        let s = sort_correspondences(&m);
        assert_eq!(s.order, vec![0, 2, 1]);
        assert_eq!(s.votes, vec![1, 1, 0]);
    }

    #[test]
    fn candidates_examples() {
        let m = dense(&[&[0, 1, 1], &[1, 0, 0], &[1, 0, 0]]);
        assert_eq!(find_inlier_candidates(0, &m).unwrap(), vec![1, 2]);
        let iso = dense(&[&[0, 0], &[0, 0]]);
        assert!(find_inlier_candidates(1, &iso).unwrap().is_empty());
        assert_eq!(find_inlier_candidates(7, &m), Err(GraphError::IndexNotInMatrix(7)));
    }

    #[test]
    fn reduction_examples() {
        let m = dense(&[&[0, 1, 1, 0], &[1, 0, 0, 1], &[1, 0, 0, 1], &[0, 1, 1, 0]]);
        let full = get_reduced_consistency(&m, &[0, 1, 2, 3]).unwrap();
        assert_eq!(full, m);
        let single = get_reduced_consistency(&m, &[2]).unwrap();
        assert_eq!(single.dim(), 1);
        assert!(!single.get(0, 0));
        assert_eq!(single.labels(), &[2]);
        assert_eq!(get_reduced_consistency(&m, &[1, 9]), Err(GraphError::IndexNotInMatrix(9)));
        assert_eq!(get_reduced_consistency(&m, &[1, 1]), Err(GraphError::DuplicateLabel(1)));
    }

    #[test]
    fn unordered_labels_are_handled() {
        let m = dense(&[&[0, 1, 1, 0], &[1, 0, 1, 1], &[1, 1, 0, 1], &[0, 1, 1, 0]]);
        let r = get_reduced_consistency(&m, &[3, 1, 2]).unwrap();
        assert_eq!(r.labels(), &[3, 1, 2]);
        assert_eq!(r.get_by_label(3, 1), Ok(true));
        assert_eq!(find_inlier_candidates(1, &r).unwrap(), vec![2, 3]);
        let s = sort_correspondences(&r);
        assert_eq!(s.order, vec![1, 2, 3]);
    }
}
