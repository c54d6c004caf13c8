//! Independent reference implementations used as test oracles. They follow
//! the textbook definitions directly and share no code with the crate.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use argcbr::af::{ArgumentId, ArgumentationFramework, FrameworkBuilder};
use argcbr::characterisation::{Case, Characterisation, CharacterisationKind, Outcome};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Pairs = BTreeSet<(usize, usize)>;

/// Least fixed point of the defence operator, iterated from the empty set.
pub fn oracle_grounded(n: usize, attacks: &Pairs) -> BTreeSet<usize> {
    let attackers = |a: usize| {
        attacks
            .iter()
            .filter(move |&&(_, t)| t == a)
            .map(|&(s, _)| s)
    };
    let mut current: BTreeSet<usize> = BTreeSet::new();
    loop {
        let next: BTreeSet<usize> = (0..n)
            .filter(|&a| attackers(a).all(|b| current.iter().any(|&c| attacks.contains(&(c, b)))))
            .collect();
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Every (a, c) such that a reaches some b along one or more support edges
/// and b attacks c, found by enumerating simple support paths.
pub fn oracle_indirect(n: usize, attacks: &Pairs, supports: &Pairs) -> Pairs {
    fn walk(node: usize, supports: &Pairs, path: &mut Vec<usize>, reached: &mut BTreeSet<usize>) {
        for &(s, t) in supports {
            if s == node && !path.contains(&t) {
                reached.insert(t);
                path.push(t);
                walk(t, supports, path, reached);
                path.pop();
            }
        }
    }
    let mut out = Pairs::new();
    for a in 0..n {
        let mut reached = BTreeSet::new();
        walk(a, supports, &mut vec![a], &mut reached);
        for b in reached {
            for &(s, c) in attacks {
                if s == b {
                    out.insert((a, c));
                }
            }
        }
    }
    out
}

/// Sorted list of feature occurrences, e.g. {cu:2, sp:1} -> [cu, cu, sp].
fn occurrences(x: &BTreeMap<String, u32>) -> Vec<&str> {
    x.iter()
        .flat_map(|(f, &n)| std::iter::repeat_n(f.as_str(), n as usize))
        .collect()
}

/// Multiset inclusion `a ⊆ b` by merging the two sorted occurrence lists.
pub fn sub_multiset(a: &BTreeMap<String, u32>, b: &BTreeMap<String, u32>) -> bool {
    let (a, b) = (occurrences(a), occurrences(b));
    let mut j = 0;
    for item in a {
        while j < b.len() && b[j] < item {
            j += 1;
        }
        if j == b.len() || b[j] != item {
            return false;
        }
        j += 1;
    }
    true
}

/// A plain characterisation: a set, or a multiset of feature names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plain {
    Set(BTreeSet<String>),
    Multi(BTreeMap<String, u32>),
}

impl Plain {
    pub fn empty(kind: CharacterisationKind) -> Self {
        match kind {
            CharacterisationKind::Set => Plain::Set(BTreeSet::new()),
            CharacterisationKind::Count => Plain::Multi(BTreeMap::new()),
        }
    }

    /// `self ≽ other`.
    pub fn geq(&self, other: &Plain) -> bool {
        match (self, other) {
            (Plain::Set(a), Plain::Set(b)) => b.is_subset(a),
            (Plain::Multi(a), Plain::Multi(b)) => sub_multiset(b, a),
            _ => panic!("mixed kinds"),
        }
    }

    /// `self ≻ other`.
    pub fn gt(&self, other: &Plain) -> bool {
        self.geq(other) && self != other
    }

    pub fn to_characterisation(&self) -> Characterisation {
        match self {
            Plain::Set(s) => Characterisation::set(s.iter().cloned()),
            Plain::Multi(m) => {
                Characterisation::count(m.iter().map(|(k, &v)| (k.clone(), v))).unwrap()
            }
        }
    }
}

/// Arguments in framework order: 0 is the default, then the cases, then N.
pub struct OracleFramework {
    pub n: usize,
    pub attacks: Pairs,
    pub supports: Pairs,
}

/// Triple-loop transcription of the attack and support rules.
pub fn oracle_mine(
    kind: CharacterisationKind,
    cases: &[(Plain, Outcome)],
    x_new: &Plain,
) -> OracleFramework {
    let mut args: Vec<(Plain, Outcome)> = vec![(Plain::empty(kind), Outcome::Default)];
    args.extend(cases.iter().cloned());
    let new = args.len();
    let mut attacks = Pairs::new();
    let mut supports = Pairs::new();
    for (a, (xa, ya)) in args.iter().enumerate() {
        for (b, (xb, yb)) in args.iter().enumerate() {
            if !xa.gt(xb) {
                continue;
            }
            let blocked = args
                .iter()
                .any(|(xc, yc)| yc == ya && xa.gt(xc) && xc.gt(xb));
            if blocked {
                continue;
            }
            if ya != yb {
                attacks.insert((a, b));
            } else {
                supports.insert((a, b));
            }
        }
    }
    for (b, (xb, _)) in args.iter().enumerate() {
        if !x_new.geq(xb) {
            attacks.insert((new, b));
        }
    }
    OracleFramework {
        n: args.len() + 1,
        attacks,
        supports,
    }
}

pub fn oracle_predict(
    kind: CharacterisationKind,
    cases: &[(Plain, Outcome)],
    x_new: &Plain,
    use_supports: bool,
) -> Outcome {
    let f = oracle_mine(kind, cases, x_new);
    let mut attacks = f.attacks.clone();
    if use_supports {
        attacks.extend(oracle_indirect(f.n, &f.attacks, &f.supports));
    }
    if oracle_grounded(f.n, &attacks).contains(&0) {
        Outcome::Default
    } else {
        Outcome::NonDefault
    }
}

pub fn pairs_of(list: &[(ArgumentId, ArgumentId)]) -> Pairs {
    list.iter().map(|&(a, b)| (a.index(), b.index())).collect()
}

pub fn framework(n: usize, attacks: &Pairs, supports: &Pairs) -> ArgumentationFramework {
    let mut b = FrameworkBuilder::new();
    for i in 0..n {
        b.add_argument(format!("a{i}"));
    }
    b.extend_attacks(
        attacks
            .iter()
            .map(|&(x, y)| (ArgumentId(x as u32), ArgumentId(y as u32))),
    );
    b.extend_supports(
        supports
            .iter()
            .map(|&(x, y)| (ArgumentId(x as u32), ArgumentId(y as u32))),
    );
    b.build().unwrap()
}

pub fn random_attacks(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Pairs {
    let mut out = Pairs::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                out.insert((a, b));
            }
        }
    }
    out
}

pub const FEATURES: [&str; 3] = ["f0", "f1", "f2"];

pub fn random_plain(rng: &mut ChaCha8Rng, kind: CharacterisationKind, max_count: u32) -> Plain {
    match kind {
        CharacterisationKind::Set => Plain::Set(
            FEATURES
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|f| f.to_string())
                .collect(),
        ),
        CharacterisationKind::Count => Plain::Multi(
            FEATURES
                .iter()
                .filter_map(|f| {
                    let n = rng.gen_range(0..=max_count);
                    (n > 0).then(|| (f.to_string(), n))
                })
                .collect(),
        ),
    }
}

pub fn random_casebase(
    rng: &mut ChaCha8Rng,
    kind: CharacterisationKind,
    max_cases: usize,
) -> Vec<(Plain, Outcome)> {
    let n = rng.gen_range(0..=max_cases);
    (0..n)
        .map(|_| {
            let outcome = if rng.gen_bool(0.5) {
                Outcome::Default
            } else {
                Outcome::NonDefault
            };
            (random_plain(rng, kind, 2), outcome)
        })
        .collect()
}

pub fn to_cases(cases: &[(Plain, Outcome)]) -> Vec<Case> {
    cases
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            Case::new(x.to_characterisation(), *y, 1.0, format!("c{}", i + 1)).unwrap()
        })
        .collect()
}
