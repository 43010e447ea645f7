mod common;

use trivoc::bench::{generate_instance, SyntheticScenario};
use trivoc::consistency::build_consistency_matrix;
use trivoc::geometry::{rotation_error_deg, translation_error_m};
use trivoc::oracle::{exhaustive_consensus_oracle, pairwise_oracle};
use trivoc::ransac::{ransac_register, RansacConfig};
use trivoc::solver::{register, TrivocConfig};
use trivoc::NoiseModel;

use common::{mixed_instance, rng};

const SEED: u64 = 20;

#[test]
fn trivoc_matches_oracle_on_half_outlier_instance() {
    let inst = generate_instance(&SyntheticScenario::new(20, 0.5, SEED)).unwrap();
    let noise = NoiseModel::new(0.01);
    let oracle = exhaustive_consensus_oracle(&inst.correspondences, noise.gamma()).unwrap();
    let res = register(&inst.correspondences, &TrivocConfig::new(noise), None).unwrap();
    assert_eq!(res.consensus.size(), oracle.consensus.size());
}

#[test]
fn ransac_matches_oracle_in_most_seeds() {
    let inst = generate_instance(&SyntheticScenario::new(20, 0.5, SEED)).unwrap();
    let gamma = NoiseModel::new(0.01).gamma();
    let oracle = exhaustive_consensus_oracle(&inst.correspondences, gamma).unwrap();
    let hits = (0..100u64)
        .filter(|&seed| {
            ransac_register(&inst.correspondences, &RansacConfig::new(gamma, seed), None)
                .is_ok_and(|r| r.consensus.size() == oracle.consensus.size())
        })
        .count();
    assert!(hits >= 95, "{hits} of 100 seeds");
}

#[test]
fn matrix_equals_pairwise_oracle_on_noisy_instance() {
    let corr = mixed_instance(&mut rng(12), 12, 0.6, 0.04);
    let gamma = 0.01;
    let m = build_consistency_matrix(&corr, gamma);
    let naive = pairwise_oracle(&corr, gamma);
    for (i, row) in naive.iter().enumerate() {
        assert_eq!(m.row(i), row.as_slice(), "row {i}");
    }
}

#[test]
fn ransac_fails_at_ninety_nine_percent_outliers() {
    let scenario = SyntheticScenario::new(1000, 0.99, SEED);
    let inst = generate_instance(&scenario).unwrap();
    let gamma = NoiseModel::new(0.01).gamma();
    let solved = match ransac_register(&inst.correspondences, &RansacConfig::new(gamma, SEED), None) {
        Ok(r) => {
            rotation_error_deg(&r.transform.rotation, &inst.ground_truth.rotation) < 5.0
                && translation_error_m(&r.transform.translation, &inst.ground_truth.translation) < 0.05
        }
        Err(_) => false,
    };
    assert!(!solved);
}
