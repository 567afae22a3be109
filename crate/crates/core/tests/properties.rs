mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajmatch::inference::{
    exact_log_similarity, icm_match, meanfield_similarity, Neighborhood, DEFAULT_BUDGET,
};
use trajmatch::model::{estimate_sigmas, PotentialTable, SigmaConfig};
use trajmatch::retrieval::knn_classify;

use common::{permutation, random_graph, random_table};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_similarity_ignores_observation_order(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_graph(&mut rng, n, 6);
        let y = random_graph(&mut rng, m, 6);
        let perm = permutation(&mut rng, n);
        let zp = z.permuted(&perm).unwrap();
        let sigmas = SigmaConfig::uniform(0.5);
        let a = exact_log_similarity(&PotentialTable::from_graphs(&z, &y, &sigmas).unwrap(), DEFAULT_BUDGET).unwrap();
        let b = exact_log_similarity(&PotentialTable::from_graphs(&zp, &y, &sigmas).unwrap(), DEFAULT_BUDGET).unwrap();
        prop_assert!((a.log_similarity - b.log_similarity).abs() <= 1e-12 * a.log_similarity.abs().max(1.0));
    }

    #[test]
    fn estimated_sigmas_ignore_observation_order(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_graph(&mut rng, n, 6);
        let y = random_graph(&mut rng, m, 6);
        let zp = z.permuted(&permutation(&mut rng, n)).unwrap();
        let (a, b) = (estimate_sigmas(&z, &y).unwrap(), estimate_sigmas(&zp, &y).unwrap());
        for (u, v) in [(a.node, b.node), (a.temporal, b.temporal), (a.spatial, b.spatial)] {
            prop_assert!((u - v).abs() <= 1e-12 * u.max(1.0));
        }
    }

    #[test]
    fn meanfield_never_exceeds_exact(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4, coupling in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_table(&mut rng, n, m, coupling);
        let exact = exact_log_similarity(&t, DEFAULT_BUDGET).unwrap().log_similarity;
        let bound = meanfield_similarity(&t, 500, 1e-10).log_similarity;
        prop_assert!(bound <= exact + 1e-9, "{} > {}", bound, exact);
    }

    #[test]
    fn dense_icm_never_increases_energy(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_table(&mut rng, n, m, 1.0);
        let r = icm_match(&t, &Neighborhood::Dense, None, 50).unwrap();
        for w in r.energy_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!((r.log_similarity + t.energy(&r.mapping.0)).abs() < 1e-9);
    }

    #[test]
    fn knn_ignores_monotone_rescaling(
        row in prop::collection::vec(-50.0f64..50.0, 6),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
        k in 1usize..=3,
    ) {
        let labels: Vec<Option<&str>> = ["a", "b", "a", "c", "b", "c"].into_iter().map(Some).collect();
        let raw: Vec<Option<f64>> = row.iter().copied().map(Some).collect();
        let mapped: Vec<Option<f64>> = row.iter().map(|v| Some(scale * v + shift)).collect();
        for exclude in [None, Some(2)] {
            prop_assert_eq!(
                knn_classify(&raw, &labels, k, exclude).unwrap(),
                knn_classify(&mapped, &labels, k, exclude).unwrap()
            );
        }
    }
}
