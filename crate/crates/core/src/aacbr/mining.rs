use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::Casebase;
use crate::characterisation::{Characterisation, Outcome};

/// Characterisation as `(feature id, count)` pairs sorted by id.
type Encoded = Vec<(u32, u32)>;

/// Query-independent relations among the default case (item 0) and the
/// casebase cases (items `1..=n`).
#[derive(Debug, Clone)]
pub(super) struct CasebaseIndex {
    features: HashMap<String, u32>,
    items: Vec<Encoded>,
    attacks: Vec<(u32, u32)>,
    supports: Vec<(u32, u32)>,
}

/// `a ≽ b` on encoded characterisations.
fn at_least(a: &[(u32, u32)], b: &[(u32, u32)]) -> bool {
    if b.len() > a.len() {
        return false;
    }
    let mut ai = a.iter();
    'outer: for &(fb, nb) in b {
        for &(fa, na) in ai.by_ref() {
            if fa == fb {
                if na < nb {
                    return false;
                }
                continue 'outer;
            }
            if fa > fb {
                return false;
            }
        }
        return false;
    }
    true
}

impl CasebaseIndex {
    pub(super) fn build(casebase: &Casebase) -> Self {
        let mut features = HashMap::new();
        let mut encode = |c: &Characterisation| -> Encoded {
            let mut e: Encoded = c
                .counts()
                .iter()
                .map(|(name, &n)| {
                    let next = features.len() as u32;
                    (*features.entry(name.clone()).or_insert(next), n)
                })
                .collect();
            e.sort_unstable();
            e
        };
        let mut items = Vec::with_capacity(casebase.len() + 1);
        items.push(encode(&casebase.default_characterisation()));
        items.extend(casebase.cases().iter().map(|c| encode(&c.characterisation)));

        let outcomes: Vec<Outcome> = std::iter::once(Outcome::Default)
            .chain(casebase.cases().iter().map(|c| c.outcome))
            .collect();
        let (attacks, supports) = mine_relations(&items, &outcomes);
        CasebaseIndex {
            features,
            items,
            attacks,
            supports,
        }
    }

    pub(super) fn attacks(&self) -> &[(u32, u32)] {
        &self.attacks
    }

    pub(super) fn supports(&self) -> &[(u32, u32)] {
        &self.supports
    }

    /// Items the new characterisation is not at least as exceptional as.
    pub(super) fn irrelevant_to<'s>(
        &'s self,
        x_new: &Characterisation,
    ) -> impl Iterator<Item = u32> + 's {
        // Features unknown to the casebase cannot help cover any item.
        let mut encoded: Encoded = x_new
            .counts()
            .iter()
            .filter_map(|(name, &n)| self.features.get(name).map(|&id| (id, n)))
            .collect();
        encoded.sort_unstable();
        self.items
            .iter()
            .enumerate()
            .filter(move |(_, item)| !at_least(&encoded, item))
            .map(|(i, _)| i as u32)
    }
}

type Edge = (u32, u32);

/// Attacks and supports among items.
///
/// `below[i]` holds every item strictly less exceptional than `i` and
/// `above[j]` every item strictly more exceptional than `j`. A same-outcome
/// interposer between `i` and `j` exists iff `below[i] ∩ same(y_i) ∩
/// above[j]` is non-empty.
fn mine_relations(items: &[Encoded], outcomes: &[Outcome]) -> (Vec<Edge>, Vec<Edge>) {
    let m = items.len();
    let totals: Vec<u64> = items
        .iter()
        .map(|e| e.iter().map(|&(_, n)| n as u64).sum())
        .collect();
    let mut below = vec![FixedBitSet::with_capacity(m); m];
    let mut above = vec![FixedBitSet::with_capacity(m); m];
    for i in 0..m {
        for j in 0..m {
            // Strict dominance needs a strictly larger total count.
            if totals[i] > totals[j] && at_least(&items[i], &items[j]) {
                below[i].insert(j);
                above[j].insert(i);
            }
        }
    }

    let mut same = [FixedBitSet::with_capacity(m), FixedBitSet::with_capacity(m)];
    for (i, &y) in outcomes.iter().enumerate() {
        same[y as usize].insert(i);
    }

    let mut attacks = Vec::new();
    let mut supports = Vec::new();
    let mut interposers = FixedBitSet::with_capacity(m);
    for i in 0..m {
        let y = outcomes[i];
        interposers.clone_from(&below[i]);
        interposers.intersect_with(&same[y as usize]);
        for j in below[i].ones() {
            if !interposers.is_disjoint(&above[j]) {
                continue;
            }
            if outcomes[j] == y {
                supports.push((i as u32, j as u32));
            } else {
                attacks.push((i as u32, j as u32));
            }
        }
    }
    debug_assert!(
        supports.iter().all(|&(a, _)| a != 0),
        "the default case cannot support"
    );
    (attacks, supports)
}
