//! Rigid-transform solvers and error metrics.
//!
//! Everything here is a pure function over borrowed inputs. Angles are
//! radians internally; the public error metric reports degrees.

use nalgebra::{Matrix3, Matrix4, Quaternion, SymmetricEigen, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point3 = nalgebra::Point3<f64>;

/// Pairwise distance below which a triad is rejected as coincident.
pub const MIN_TRIAD_EDGE: f64 = 1e-9;
/// Triangle normal norm below which a triad is rejected as collinear.
pub const MIN_TRIAD_NORMAL: f64 = 1e-12;
/// Relative singular value below which a covariance counts as rank deficient.
const MIN_RELATIVE_SINGULAR_VALUE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate triad: {0}")]
    DegenerateTriad(&'static str),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("source has {source_len} points but target has {target_len}")]
    LengthMismatch { source_len: usize, target_len: usize },
    #[error("correspondence set is empty")]
    Empty,
    #[error("non-finite coordinate in correspondence {0}")]
    NonFinite(usize),
    #[error("correspondence index {index} out of range for {len} correspondences")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Thresholds used to reject degenerate minimal samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyTolerance {
    pub min_edge: f64,
    pub min_normal: f64,
}

impl Default for DegeneracyTolerance {
    fn default() -> Self {
        Self {
            min_edge: MIN_TRIAD_EDGE,
            min_normal: MIN_TRIAD_NORMAL,
        }
    }
}

/// Rotation plus translation, applied as `R * p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity(), Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self::new(Matrix3::identity(), translation)
    }

    #[inline]
    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    /// Orthonormality and orientation check, component-wise within `tol`.
    pub fn is_proper(&self, tol: f64) -> bool {
        let gram = self.rotation.transpose() * self.rotation - Matrix3::identity();
        gram.iter().all(|v| v.abs() <= tol)
            && (self.rotation.determinant() - 1.0).abs() <= tol
            && self.translation.iter().all(|v| v.is_finite())
    }

    /// Rotation as row-major nested arrays.
    pub fn rotation_rows(&self) -> [[f64; 3]; 3] {
        let r = &self.rotation;
        [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
        ]
    }

    pub fn from_rotation_rows(rows: [[f64; 3]; 3], translation: [f64; 3]) -> Self {
        Self::new(
            Matrix3::from_row_slice(&[
                rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2],
                rows[2][0], rows[2][1], rows[2][2],
            ]),
            Vector3::from(translation),
        )
    }
}

/// Putative correspondences `(source[i], target[i])`.
///
/// Indices are zero-based in the library API and never reordered.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    source: Vec<Point3>,
    target: Vec<Point3>,
}

impl CorrespondenceSet {
    pub fn new(source: Vec<Point3>, target: Vec<Point3>) -> Result<Self, GeometryError> {
        if source.len() != target.len() {
            return Err(GeometryError::LengthMismatch {
                source_len: source.len(),
                target_len: target.len(),
            });
        }
        if source.is_empty() {
            return Err(GeometryError::Empty);
        }
        for (i, (p, q)) in source.iter().zip(&target).enumerate() {
            if !p.coords.iter().chain(q.coords.iter()).all(|v| v.is_finite()) {
                return Err(GeometryError::NonFinite(i));
            }
        }
        Ok(Self { source, target })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Point3, Point3)>) -> Result<Self, GeometryError> {
        let (source, target) = pairs.into_iter().unzip();
        Self::new(source, target)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.source.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    #[inline]
    pub fn source(&self) -> &[Point3] {
        &self.source
    }

    #[inline]
    pub fn target(&self) -> &[Point3] {
        &self.target
    }

    #[inline]
    pub fn pair(&self, i: usize) -> (&Point3, &Point3) {
        (&self.source[i], &self.target[i])
    }
}

/// Isotropic noise level and the inlier threshold derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub threshold_multiplier: f64,
}

impl NoiseModel {
    pub const DEFAULT_MULTIPLIER: f64 = 6.0;

    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            threshold_multiplier: Self::DEFAULT_MULTIPLIER,
        }
    }

    pub fn with_multiplier(sigma: f64, threshold_multiplier: f64) -> Self {
        Self {
            sigma,
            threshold_multiplier,
        }
    }

    /// Inlier threshold `gamma = multiplier * sigma`.
    pub fn gamma(&self) -> f64 {
        self.threshold_multiplier * self.sigma
    }
}

/// Orthonormal frame of a triangle: x along the first edge, z along the normal.
fn triad_frame(
    a: &Point3,
    b: &Point3,
    c: &Point3,
    tol: &DegeneracyTolerance,
) -> Result<Matrix3<f64>, GeometryError> {
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let shortest = ab.norm().min(ac.norm()).min(bc.norm());
    if shortest < tol.min_edge {
        return Err(GeometryError::DegenerateTriad("coincident points"));
    }
    let normal = ab.cross(&ac);
    let normal_norm = normal.norm();
    if normal_norm < tol.min_normal {
        return Err(GeometryError::DegenerateTriad("collinear points"));
    }
    let x = ab / ab.norm();
    let z = normal / normal_norm;
    let y = z.cross(&x);
    Ok(Matrix3::from_columns(&[x, y, z]))
}

/// Minimal 3-point solver built from orthonormal triangle frames.
///
/// The rotation maps the source triad frame onto the target triad frame and
/// the translation aligns the triangle centroids. Exact for congruent triads.
pub fn solve_minimal_3pt(src: [&Point3; 3], dst: [&Point3; 3]) -> Result<RigidTransform, GeometryError> {
    solve_minimal_3pt_with(src, dst, &DegeneracyTolerance::default())
}

pub fn solve_minimal_3pt_with(
    src: [&Point3; 3],
    dst: [&Point3; 3],
    tol: &DegeneracyTolerance,
) -> Result<RigidTransform, GeometryError> {
    let fs = triad_frame(src[0], src[1], src[2], tol)?;
    let fd = triad_frame(dst[0], dst[1], dst[2], tol)?;
    let rotation = fd * fs.transpose();
    let cs = (src[0].coords + src[1].coords + src[2].coords) / 3.0;
    let cd = (dst[0].coords + dst[1].coords + dst[2].coords) / 3.0;
    Ok(RigidTransform::new(rotation, cd - rotation * cs))
}

/// Least-squares rigid fit over `subset`.
///
/// Returns the proper rotation maximizing `tr(R H)` for the cross-covariance
/// `H`, i.e. the SVD solution with determinant correction. It is computed as
/// the top eigenvector of Horn's symmetric 4×4 matrix (a unit quaternion),
/// which stays accurate when `H` has rank 2. The translation aligns the
/// centroids.
pub fn solve_svd(corr: &CorrespondenceSet, subset: &[usize]) -> Result<RigidTransform, GeometryError> {
    if subset.len() < 3 {
        return Err(GeometryError::DegenerateConfiguration("fewer than 3 points"));
    }
    if let Some(&index) = subset.iter().find(|&&i| i >= corr.len()) {
        return Err(GeometryError::IndexOutOfRange {
            index,
            len: corr.len(),
        });
    }
    let n = subset.len() as f64;
    let (src, dst) = (corr.source(), corr.target());
    let cs = subset.iter().map(|&i| src[i].coords).sum::<Vector3<f64>>() / n;
    let cd = subset.iter().map(|&i| dst[i].coords).sum::<Vector3<f64>>() / n;

    let mut h = Matrix3::zeros();
    for &i in subset {
        h += (src[i].coords - cs) * (dst[i].coords - cd).transpose();
    }

    let rotation = optimal_rotation(&h)?;
    Ok(RigidTransform::new(rotation, cd - rotation * cs))
}

/// Proper rotation maximizing `tr(R H)`.
///
/// The two largest eigenvalues of Horn's matrix differ by `2 (s2 ± s3)` for
/// singular values `s1 ≥ s2 ≥ s3` of `H`, so a vanishing gap means the
/// rotation is not determined.
fn optimal_rotation(h: &Matrix3<f64>) -> Result<Matrix3<f64>, GeometryError> {
    let s = |r: usize, c: usize| h[(r, c)];
    let (sxx, sxy, sxz) = (s(0, 0), s(0, 1), s(0, 2));
    let (syx, syy, syz) = (s(1, 0), s(1, 1), s(1, 2));
    let (szx, szy, szz) = (s(2, 0), s(2, 1), s(2, 2));
    #[rustfmt::skip]
    let horn = Matrix4::new(
        sxx + syy + szz, syz - szy,        szx - sxz,        sxy - syx,
        syz - szy,       sxx - syy - szz,  sxy + syx,        szx + sxz,
        szx - sxz,       sxy + syx,        -sxx + syy - szz, syz + szy,
        sxy - syx,       szx + sxz,        syz + szy,        -sxx - syy + szz,
    );
    let eigen = SymmetricEigen::new(horn);
    let mut order = [0, 1, 2, 3];
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let (top, second) = (eigen.eigenvalues[order[0]], eigen.eigenvalues[order[1]]);
    if !(top > 0.0) || top - second <= 2.0 * MIN_RELATIVE_SINGULAR_VALUE * top {
        return Err(GeometryError::DegenerateConfiguration("covariance rank below 2"));
    }
    let q = eigen.eigenvectors.column(order[0]);
    let unit = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
    Ok(unit.to_rotation_matrix().into_inner())
}

/// `‖R p + t − q‖`.
#[inline]
pub fn residual(t: &RigidTransform, p: &Point3, q: &Point3) -> f64 {
    (t.rotation * p.coords + t.translation - q.coords).norm()
}

/// Geodesic angle between two rotations, in degrees.
///
/// Evaluates `arccos((tr(R_gtᵀ R) − 1) / 2)` through `atan2` of the sine and
/// cosine of the relative rotation, which agrees with the arccos form and
/// stays accurate near 0° and 180°.
pub fn rotation_error_deg(r_est: &Matrix3<f64>, r_gt: &Matrix3<f64>) -> f64 {
    let rel = r_gt.transpose() * r_est;
    let cos = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let axis = Vector3::new(
        rel[(2, 1)] - rel[(1, 2)],
        rel[(0, 2)] - rel[(2, 0)],
        rel[(1, 0)] - rel[(0, 1)],
    );
    let sin = (axis.norm() / 2.0).min(1.0);
    sin.atan2(cos).abs().to_degrees()
}

/// `‖t_gt − t_est‖` in meters.
#[inline]
pub fn translation_error_m(t_est: &Vector3<f64>, t_gt: &Vector3<f64>) -> f64 {
    (t_gt - t_est).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Unit};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
        let axis = Unit::new_normalize(Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ));
        Rotation3::from_axis_angle(&axis, rng.random_range(0.0..std::f64::consts::PI)).into_inner()
    }

    fn random_point(rng: &mut impl Rng) -> Point3 {
        Point3::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.5..0.5),
        )
    }

    fn axes() -> [Point3; 3] {
        [
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ]
    }

    #[test]
    fn minimal_identity() {
        let p = axes();
        let t = solve_minimal_3pt([&p[0], &p[1], &p[2]], [&p[0], &p[1], &p[2]]).unwrap();
        assert!((t.rotation - Matrix3::identity()).abs().max() < 1e-15);
        assert!(t.translation.norm() < 1e-15);
    }

    #[test]
    fn minimal_pure_translation() {
        let p = axes();
        let shift = Vector3::new(1.0, 2.0, 3.0);
        let q = p.map(|x| x + shift);
        let t = solve_minimal_3pt([&p[0], &p[1], &p[2]], [&q[0], &q[1], &q[2]]).unwrap();
        assert!((t.rotation - Matrix3::identity()).abs().max() < 1e-15);
        assert!((t.translation - shift).norm() < 1e-14);
    }

    #[test]
    fn minimal_recovers_random_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let gt = RigidTransform::new(
                random_rotation(&mut rng),
                Vector3::new(rng.random_range(-1.7..1.7), rng.random_range(-1.7..1.7), rng.random_range(-1.7..1.7)),
            );
            let p = [random_point(&mut rng), random_point(&mut rng), random_point(&mut rng)];
            let q = p.map(|x| gt.apply(&x));
            let est = solve_minimal_3pt([&p[0], &p[1], &p[2]], [&q[0], &q[1], &q[2]]).unwrap();
            assert!(rotation_error_deg(&est.rotation, &gt.rotation) < 1e-9);
            assert!(translation_error_m(&est.translation, &gt.translation) < 1e-9);
            assert!(est.is_proper(1e-9));
        }
    }

    #[test]
    fn minimal_rejects_degenerate() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 0.0, 0.0);
        let c = Point3::new(2.0, 0.0, 0.0);
        assert!(matches!(
            solve_minimal_3pt([&a, &b, &c], [&a, &b, &c]),
            Err(GeometryError::DegenerateTriad(_))
        ));
        assert!(matches!(
            solve_minimal_3pt([&a, &a, &c], [&a, &b, &c]),
            Err(GeometryError::DegenerateTriad(_))
        ));
    }

    #[test]
    fn svd_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (0..10).map(|_| random_point(&mut rng)).collect();
        let corr = CorrespondenceSet::new(pts.clone(), pts).unwrap();
        let all: Vec<_> = (0..10).collect();
        let t = solve_svd(&corr, &all).unwrap();
        assert!((t.rotation - Matrix3::identity()).abs().max() < 1e-12);
        assert!(t.translation.norm() < 1e-12);
    }

    #[test]
    fn svd_recovers_random_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let gt = RigidTransform::new(random_rotation(&mut rng), Vector3::new(0.3, -2.0, 1.1));
            let src: Vec<_> = (0..10).map(|_| random_point(&mut rng)).collect();
            let dst = src.iter().map(|p| gt.apply(p)).collect();
            let corr = CorrespondenceSet::new(src, dst).unwrap();
            let all: Vec<_> = (0..10).collect();
            let est = solve_svd(&corr, &all).unwrap();
            assert!(rotation_error_deg(&est.rotation, &gt.rotation) < 1e-9);
            assert!(translation_error_m(&est.translation, &gt.translation) < 1e-9);
            assert!(est.is_proper(1e-9));
        }
    }

    #[test]
    fn svd_matches_corrected_svd_formula_on_noisy_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let gt = RigidTransform::new(random_rotation(&mut rng), Vector3::new(1.0, 0.5, -0.25));
            let src: Vec<_> = (0..20).map(|_| random_point(&mut rng)).collect();
            let dst: Vec<_> = src
                .iter()
                .map(|p| gt.apply(p) + Vector3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), 0.0))
                .collect();
            let cs = src.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 20.0;
            let cd = dst.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 20.0;
            let h = src
                .iter()
                .zip(&dst)
                .fold(Matrix3::zeros(), |acc, (p, q)| acc + (p.coords - cs) * (q.coords - cd).transpose());
            let svd = h.svd(true, true);
            let (u, v) = (svd.u.unwrap(), svd.v_t.unwrap().transpose());
            let d = (v * u.transpose()).determinant().signum();
            let smallest = svd.singular_values.imin();
            let mut c = Matrix3::identity();
            c[(smallest, smallest)] = d;
            let expected = v * c * u.transpose();

            let corr = CorrespondenceSet::new(src, dst).unwrap();
            let est = solve_svd(&corr, &(0..20).collect::<Vec<_>>()).unwrap();
            assert!(rotation_error_deg(&est.rotation, &expected) < 1e-6);
        }
    }

    #[test]
    fn svd_corrects_reflection_on_near_planar_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mirror = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
        let r0 = random_rotation(&mut rng);
        let src: Vec<_> = (0..12)
            .map(|_| Point3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-1e-3..1e-3)))
            .collect();
        let dst: Vec<_> = src.iter().map(|p| Point3::from(r0 * mirror * p.coords)).collect();

        // the unconstrained orthogonal fit is a reflection here
        let cs = src.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 12.0;
        let cd = dst.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 12.0;
        let mut h = Matrix3::zeros();
        for (p, q) in src.iter().zip(&dst) {
            h += (p.coords - cs) * (q.coords - cd).transpose();
        }
        let svd = h.svd(true, true);
        let naive = svd.v_t.unwrap().transpose() * svd.u.unwrap().transpose();
        assert!(naive.determinant() < 0.0);

        let corr = CorrespondenceSet::new(src, dst).unwrap();
        let all: Vec<_> = (0..12).collect();
        let est = solve_svd(&corr, &all).unwrap();
        assert!((est.rotation.determinant() - 1.0).abs() < 1e-9);
        assert!(est.is_proper(1e-9));
    }

    #[test]
    fn svd_rejects_collinear() {
        let src: Vec<_> = (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let corr = CorrespondenceSet::new(src.clone(), src).unwrap();
        assert!(matches!(
            solve_svd(&corr, &[0, 1, 2, 3, 4]),
            Err(GeometryError::DegenerateConfiguration(_))
        ));
        assert!(matches!(
            solve_svd(&corr, &[0, 1]),
            Err(GeometryError::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn svd_agrees_with_minimal_on_three_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let gt = RigidTransform::new(random_rotation(&mut rng), Vector3::new(1.0, 0.5, -0.5));
            let src: Vec<_> = (0..3).map(|_| random_point(&mut rng)).collect();
            let dst: Vec<_> = src.iter().map(|p| gt.apply(p)).collect();
            let minimal = solve_minimal_3pt([&src[0], &src[1], &src[2]], [&dst[0], &dst[1], &dst[2]]).unwrap();
            let corr = CorrespondenceSet::new(src, dst).unwrap();
            let lsq = solve_svd(&corr, &[0, 1, 2]).unwrap();
            assert!(rotation_error_deg(&lsq.rotation, &minimal.rotation) < 1e-7);
        }
    }

    #[test]
    fn residual_examples() {
        let id = RigidTransform::identity();
        let p = Point3::new(0.3, 0.2, 0.1);
        assert_eq!(residual(&id, &p, &p), 0.0);
        assert_eq!(residual(&id, &Point3::origin(), &Point3::new(0.0, 3.0, 4.0)), 5.0);
    }

    #[test]
    fn residual_matches_componentwise_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let t = RigidTransform::new(random_rotation(&mut rng), Vector3::new(0.1, 0.2, 0.3));
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let r = t.rotation;
            let mut sq = 0.0;
            for row in 0..3 {
                let mut v = t.translation[row] - q[row];
                for col in 0..3 {
                    v += r[(row, col)] * p[col];
                }
                sq += v * v;
            }
            assert!((residual(&t, &p, &q) - sq.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_invariant_under_source_reexpression() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let t = RigidTransform::new(random_rotation(&mut rng), Vector3::new(0.1, -0.7, 2.0));
            let g = RigidTransform::new(random_rotation(&mut rng), Vector3::new(-1.0, 0.4, 0.0));
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let moved = t.compose(&g.inverse());
            assert!((residual(&t, &p, &q) - residual(&moved, &g.apply(&p), &q)).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_error_examples() {
        let id = Matrix3::identity();
        assert_eq!(rotation_error_deg(&id, &id), 0.0);
        let flip = Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0));
        assert!((rotation_error_deg(&flip, &id) - 180.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let axis = Unit::new_normalize(Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ));
            let r = Rotation3::from_axis_angle(&axis, 0.3).into_inner();
            assert!((rotation_error_deg(&r, &id) - 0.3_f64.to_degrees()).abs() < 1e-10);
            // arccos form agrees away from the ends of the range
            let acos = (((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0)).acos().to_degrees();
            assert!((rotation_error_deg(&r, &id) - acos).abs() < 1e-9);
        }
    }

    #[test]
    fn translation_error_examples() {
        let a = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(translation_error_m(&a, &a), 0.0);
        assert_eq!(translation_error_m(&Vector3::zeros(), &Vector3::new(1.0, 2.0, 2.0)), 3.0);
        let b = Vector3::new(-0.5, 0.25, 4.0);
        let expect = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
        assert!((translation_error_m(&b, &a) - expect).abs() < 1e-15);
    }

    #[test]
    fn correspondence_set_validation() {
        let p = Point3::origin();
        assert!(matches!(
            CorrespondenceSet::new(vec![p], vec![]),
            Err(GeometryError::LengthMismatch { .. })
        ));
        assert!(matches!(CorrespondenceSet::new(vec![], vec![]), Err(GeometryError::Empty)));
        let bad = Point3::new(f64::NAN, 0.0, 0.0);
        assert!(matches!(
            CorrespondenceSet::new(vec![p, bad], vec![p, p]),
            Err(GeometryError::NonFinite(1))
        ));
    }

    #[test]
    fn noise_model_gamma() {
        assert!((NoiseModel::new(0.01).gamma() - 0.06).abs() < 1e-15);
        assert_eq!(NoiseModel::with_multiplier(0.02, 5.0).gamma(), 0.1);
    }
}
