mod common;

use std::collections::BTreeSet;

use argcbr::af::{effective_attacks, grounded, ArgumentId, Label};
use common::*;
use proptest::prelude::*;

fn attacks_strategy(max_n: usize) -> impl Strategy<Value = (usize, Pairs)> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::btree_set((0..n, 0..n), 0..=n * n / 2).prop_map(move |a| (n, a))
    })
}

/// Supports only go from lower to higher index, so they form a DAG; attacks
/// avoid support pairs.
fn bipolar_strategy() -> impl Strategy<Value = (usize, Pairs, Pairs)> {
    (2..=8usize).prop_flat_map(|n| {
        let pairs = proptest::collection::vec((0..n, 0..n, 0..3u8), 0..=2 * n);
        pairs.prop_map(move |raw| {
            let mut attacks = Pairs::new();
            let mut supports = Pairs::new();
            for (a, b, kind) in raw {
                if kind == 0 && a < b && !attacks.contains(&(a, b)) {
                    supports.insert((a, b));
                } else if !supports.contains(&(a, b)) {
                    attacks.insert((a, b));
                }
            }
            (n, attacks, supports)
        })
    })
}

proptest! {
    #[test]
    fn grounded_matches_fixpoint_oracle((n, attacks) in attacks_strategy(10)) {
        let af = framework(n, &attacks, &Pairs::new());
        let got: BTreeSet<usize> = grounded(&af).extension().iter().map(|a| a.index()).collect();
        prop_assert_eq!(got, oracle_grounded(n, &attacks));
    }

    #[test]
    fn grounded_is_conflict_free_and_labels_agree((n, attacks) in attacks_strategy(10)) {
        let af = framework(n, &attacks, &Pairs::new());
        let g = grounded(&af);
        let ext: BTreeSet<usize> = g.extension().iter().map(|a| a.index()).collect();
        for &(a, b) in &attacks {
            prop_assert!(!(ext.contains(&a) && ext.contains(&b)));
        }
        for i in 0..n {
            let id = ArgumentId(i as u32);
            let attacked_by_in = attacks.iter().any(|&(a, b)| b == i && ext.contains(&a));
            let expected = if ext.contains(&i) {
                Label::In
            } else if attacked_by_in {
                Label::Out
            } else {
                Label::Undec
            };
            prop_assert_eq!(g.label(id), expected);
        }
    }

    #[test]
    fn layers_partition_the_extension((n, attacks) in attacks_strategy(10)) {
        let af = framework(n, &attacks, &Pairs::new());
        let g = grounded(&af);
        let flat: BTreeSet<ArgumentId> = g.layers().iter().flatten().copied().collect();
        let ext: BTreeSet<ArgumentId> = g.extension().iter().copied().collect();
        prop_assert_eq!(flat.len(), g.layers().iter().map(Vec::len).sum::<usize>());
        prop_assert_eq!(flat, ext);
        // first layer is exactly the unattacked arguments
        let unattacked: BTreeSet<usize> = (0..n).filter(|&i| !attacks.iter().any(|&(_, b)| b == i)).collect();
        let first: BTreeSet<usize> = g.layers().first().map(|l| l.iter().map(|a| a.index()).collect()).unwrap_or_default();
        prop_assert_eq!(first, unattacked);
    }

    #[test]
    fn effective_attacks_match_path_oracle((n, attacks, supports) in bipolar_strategy()) {
        let af = framework(n, &attacks, &supports);
        let eff = effective_attacks(&af).unwrap();
        let mut expected = attacks.clone();
        expected.extend(oracle_indirect(n, &attacks, &supports));
        prop_assert_eq!(pairs_of(eff.attacks()), expected);
        prop_assert!(eff.supports().is_empty());
    }
}
