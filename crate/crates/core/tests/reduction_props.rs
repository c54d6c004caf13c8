mod common;

use std::collections::BTreeSet;

use argcbr::characterisation::{Case, CharacterisationKind, Outcome};
use argcbr::reduction::{kmeans, reduce_casebase, ClusteringConfig};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OUTCOMES: [Outcome; 2] = [Outcome::Default, Outcome::NonDefault];

/// Random cases with both outcomes present and random confidences.
pub fn labelled_cases(kind: CharacterisationKind, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..30);
    (0..n)
        .map(|i| {
            let outcome = OUTCOMES[if i < 2 { i } else { rng.gen_range(0..2) }];
            let x = random_plain(&mut rng, kind, 2).to_characterisation();
            Case::new(x, outcome, rng.gen_range(0.0..=1.0), format!("s{i}")).unwrap()
        })
        .collect()
}

fn distinct(cases: &[Case]) -> BTreeSet<(String, Outcome)> {
    cases
        .iter()
        .map(|c| (c.characterisation.to_string(), c.outcome))
        .collect()
}

fn kind() -> impl Strategy<Value = CharacterisationKind> {
    prop_oneof![
        Just(CharacterisationKind::Set),
        Just(CharacterisationKind::Count)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn k_equal_to_distinct_count_is_identity(k in kind(), seed in any::<u64>(), cseed in any::<u64>()) {
        let cases = labelled_cases(k, seed);
        let expected = distinct(&cases);
        let per_class = |o: Outcome| expected.iter().filter(|(_, y)| *y == o).count();
        for outcome in OUTCOMES {
            let only: Vec<Case> = cases.iter().filter(|c| c.outcome == outcome).cloned().collect();
            let cfg = ClusteringConfig { centroids: per_class(outcome), seed: cseed, ..Default::default() };
            let reduced = reduce_casebase(&only, &[outcome], &cfg).unwrap();
            prop_assert_eq!(reduced.len(), per_class(outcome));
            prop_assert_eq!(distinct(&reduced), distinct(&only));
        }
        // an oversized k is clamped to the same result
        let cfg = ClusteringConfig { centroids: 1000, seed: cseed, ..Default::default() };
        let reduced = reduce_casebase(&cases, &OUTCOMES, &cfg).unwrap();
        prop_assert_eq!(reduced.len(), expected.len());
        prop_assert_eq!(distinct(&reduced), expected);
    }

    #[test]
    fn raising_threshold_never_adds_centroids(k in kind(), seed in any::<u64>(), centroids in 1usize..8) {
        let cases = labelled_cases(k, seed);
        let mut previous: Option<BTreeSet<String>> = None;
        for t in [None, Some(0.0), Some(0.5), Some(0.7), Some(0.9), Some(1.0)] {
            let cfg = ClusteringConfig { centroids, threshold: t, seed, ..Default::default() };
            let survivors: BTreeSet<String> = reduce_casebase(&cases, &OUTCOMES, &cfg)
                .unwrap()
                .into_iter()
                .map(|c| c.provenance)
                .collect();
            if let Some(prev) = &previous {
                prop_assert!(survivors.is_subset(prev));
            }
            if let Some(t) = t {
                prop_assert!(survivors.len() <= centroids * 2, "threshold {t}");
            }
            previous = Some(survivors);
        }
    }

    #[test]
    fn kmeans_is_deterministic(seed in any::<u64>(), n in 1usize..40, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)]).collect();
        let cfg = ClusteringConfig { seed, ..Default::default() };
        let k = k.min(n);
        let a = kmeans(&points, k, &cfg).unwrap();
        let b = kmeans(&points, k, &cfg).unwrap();
        prop_assert_eq!(&a.assignments, &b.assignments);
        prop_assert_eq!(&a.centroids, &b.centroids);
        prop_assert!(a.assignments.iter().all(|&j| j < k));
    }
}

#[test]
fn missing_class_is_an_error() {
    let cases = labelled_cases(CharacterisationKind::Set, 1)
        .into_iter()
        .filter(|c| c.outcome == Outcome::Default)
        .collect::<Vec<_>>();
    assert!(reduce_casebase(&cases, &OUTCOMES, &ClusteringConfig::default()).is_err());
}
