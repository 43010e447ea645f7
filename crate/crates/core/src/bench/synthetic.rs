//! Synthetic correspondence generation.
//!
//! A source cloud is downsampled to `n` points and rescaled into a centered
//! box, moved by a random rigid transform and perturbed with isotropic
//! Gaussian noise. A chosen fraction of targets is then replaced by points
//! drawn uniformly from a sphere centered on the moved cloud's centroid.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with the scenario seed.
//! Gaussian draws use `rand_distr::StandardNormal` (ziggurat), rotations are
//! normalized 4D Gaussian quaternions, and ball samples use rejection from
//! the bounding cube.

use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::BenchError;
use crate::geometry::{CorrespondenceSet, Point3, RigidTransform};
use crate::io::ply;

/// Points in each built-in cloud.
pub const BUILTIN_CLOUD_SIZE: usize = 10_000;
const BUILTIN_CLOUD_SEED: u64 = 0x7269_766f_6321;

/// Procedural clouds shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinCloud {
    /// Uniform samples in a cube.
    Box,
    /// Samples on a bumpy ellipsoid surface, a stand-in for scanned models.
    Shell,
}

impl BuiltinCloud {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinCloud::Box => "box",
            BuiltinCloud::Shell => "shell",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "box" => Some(BuiltinCloud::Box),
            "shell" => Some(BuiltinCloud::Shell),
            _ => None,
        }
    }

    pub fn points(self) -> Vec<Point3> {
        let mut rng = ChaCha8Rng::seed_from_u64(BUILTIN_CLOUD_SEED);
        (0..BUILTIN_CLOUD_SIZE)
            .map(|_| match self {
                BuiltinCloud::Box => Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ),
                BuiltinCloud::Shell => {
                    let dir = unit_vector(&mut rng);
                    let theta = dir.z.acos();
                    let phi = dir.y.atan2(dir.x);
                    let bump = 1.0 + 0.15 * (3.0 * theta).sin() * (2.0 * phi).cos();
                    Point3::new(1.0 * bump * dir.x, 0.8 * bump * dir.y, 0.6 * bump * dir.z)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceCloud {
    Builtin(BuiltinCloud),
    /// PLY file read on every generation.
    Ply(PathBuf),
    /// Points already in memory.
    Points(Arc<Vec<Point3>>),
}

impl SourceCloud {
    pub fn describe(&self) -> String {
        match self {
            SourceCloud::Builtin(b) => b.name().to_string(),
            SourceCloud::Ply(p) => p.display().to_string(),
            SourceCloud::Points(p) => format!("points[{}]", p.len()),
        }
    }

    fn load(&self) -> Result<Arc<Vec<Point3>>, BenchError> {
        Ok(match self {
            SourceCloud::Builtin(b) => Arc::new(b.points()),
            SourceCloud::Ply(path) => Arc::new(ply::read_ply_file(path)?.points),
            SourceCloud::Points(p) => Arc::clone(p),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub n: usize,
    pub outlier_ratio: f64,
    /// Noise standard deviation, meters.
    pub sigma: f64,
    pub box_half_width: f64,
    pub translation_bound: f64,
    pub outlier_sphere_radius: f64,
    pub seed: u64,
    pub source: SourceCloud,
    /// When set, noise vectors longer than this are shortened to this length.
    pub noise_clip: Option<f64>,
}

impl SyntheticScenario {
    pub const DEFAULT_SIGMA: f64 = 0.01;
    pub const DEFAULT_BOX_HALF_WIDTH: f64 = 0.5;
    pub const DEFAULT_TRANSLATION_BOUND: f64 = 3.0;
    pub const DEFAULT_SPHERE_RADIUS: f64 = 1.0;
    pub const MAX_OUTLIER_RATIO: f64 = 0.99;

    pub fn new(n: usize, outlier_ratio: f64, seed: u64) -> Self {
        Self {
            n,
            outlier_ratio,
            sigma: Self::DEFAULT_SIGMA,
            box_half_width: Self::DEFAULT_BOX_HALF_WIDTH,
            translation_bound: Self::DEFAULT_TRANSLATION_BOUND,
            outlier_sphere_radius: Self::DEFAULT_SPHERE_RADIUS,
            seed,
            source: SourceCloud::Builtin(BuiltinCloud::Shell),
            noise_clip: None,
        }
    }

    /// `round(n * outlier_ratio)`.
    pub fn outlier_count(&self) -> usize {
        (self.n as f64 * self.outlier_ratio).round() as usize
    }

    fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidScenario(msg));
        if self.n < 3 {
            return bad(format!("n = {} must be at least 3", self.n));
        }
        if !(0.0..=Self::MAX_OUTLIER_RATIO).contains(&self.outlier_ratio) {
            return bad(format!("outlier ratio {} outside [0, 0.99]", self.outlier_ratio));
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("box half width", self.box_half_width),
            ("translation bound", self.translation_bound),
            ("outlier sphere radius", self.outlier_sphere_radius),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} {v} must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    pub correspondences: CorrespondenceSet,
    pub ground_truth: RigidTransform,
    /// Ascending.
    pub inliers: Vec<usize>,
    /// Ascending; disjoint from `inliers`.
    pub outliers: Vec<usize>,
    /// Noise added to every target before outlier replacement.
    pub noise: Vec<Vector3<f64>>,
}

fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

fn in_ball(rng: &mut impl Rng, radius: f64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v * radius;
        }
    }
}

/// Uniformly distributed rotation.
pub fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if q.norm() > 1e-12 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

pub fn generate_instance(s: &SyntheticScenario) -> Result<SyntheticInstance, BenchError> {
    s.validate()?;
    let cloud = s.source.load()?;
    if cloud.len() < s.n {
        return Err(BenchError::SourceTooSmall {
            needed: s.n,
            available: cloud.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);

    let mut picks = index::sample(&mut rng, cloud.len(), s.n).into_vec();
    picks.sort_unstable();
    let mut source: Vec<Point3> = picks.iter().map(|&i| cloud[i]).collect();

    let (mut lo, mut hi) = (source[0].coords, source[0].coords);
    for p in &source {
        lo = lo.inf(&p.coords);
        hi = hi.sup(&p.coords);
    }
    let extent = (hi - lo).max();
    if !(extent > 0.0) {
        return Err(BenchError::InvalidScenario("source cloud has zero extent".into()));
    }
    let center = (lo + hi) / 2.0;
    let scale = 2.0 * s.box_half_width / extent;
    for p in &mut source {
        p.coords = (p.coords - center) * scale;
    }

    let rotation = random_rotation(&mut rng).to_rotation_matrix().into_inner();
    let translation = in_ball(&mut rng, s.translation_bound);
    let ground_truth = RigidTransform::new(rotation, translation);

    let noise: Vec<Vector3<f64>> = (0..s.n)
        .map(|_| {
            let e = Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) * s.sigma;
            match s.noise_clip {
                Some(clip) if e.norm() > clip => e * (clip / e.norm()),
                _ => e,
            }
        })
        .collect();
    let mut target: Vec<Point3> = source
        .iter()
        .zip(&noise)
        .map(|(p, e)| ground_truth.apply(p) + e)
        .collect();

    let centroid = source.iter().map(|p| p.coords).sum::<Vector3<f64>>() / s.n as f64;
    let sphere_center = ground_truth.apply(&Point3::from(centroid));
    let mut outliers = index::sample(&mut rng, s.n, s.outlier_count()).into_vec();
    outliers.sort_unstable();
    for &i in &outliers {
        target[i] = sphere_center + in_ball(&mut rng, s.outlier_sphere_radius);
    }
    let mut is_outlier = vec![false; s.n];
    for &i in &outliers {
        is_outlier[i] = true;
    }
    let inliers = (0..s.n).filter(|&i| !is_outlier[i]).collect();

    let correspondences =
        CorrespondenceSet::new(source, target).map_err(|e| BenchError::InvalidScenario(e.to_string()))?;
    Ok(SyntheticInstance {
        correspondences,
        ground_truth,
        inliers,
        outliers,
        noise,
    })
}
