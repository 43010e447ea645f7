#![allow(dead_code)]

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trivoc::bench::random_rotation;
use trivoc::{CorrespondenceSet, Point3, RigidTransform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_transform(rng: &mut impl Rng) -> RigidTransform {
    let rotation = random_rotation(rng).to_rotation_matrix().into_inner();
    let translation = Vector3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    );
    RigidTransform::new(rotation, translation)
}

pub fn random_point(rng: &mut impl Rng, half_width: f64) -> Point3 {
    Point3::new(
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
        rng.random_range(-half_width..half_width),
    )
}

/// Pairs where roughly `inlier_fraction` of targets follow `gt` (plus a
/// small perturbation) and the rest are random.
pub fn mixed_instance(rng: &mut impl Rng, n: usize, inlier_fraction: f64, jitter: f64) -> CorrespondenceSet {
    let gt = random_transform(rng);
    let pairs = (0..n).map(|_| {
        let p = random_point(rng, 0.5);
        let q = if rng.random_bool(inlier_fraction) {
            gt.apply(&p) + random_point(rng, jitter).coords
        } else {
            gt.apply(&random_point(rng, 0.6))
        };
        (p, q)
    });
    CorrespondenceSet::from_pairs(pairs).unwrap()
}
