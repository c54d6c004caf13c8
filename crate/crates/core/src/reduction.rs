//! Casebase reduction: per-outcome k-means over characterisation vectors,
//! followed by confidence thresholding of the centroids.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characterisation::{Case, Characterisation, CharacterisationKind, Outcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("cannot cluster an empty point set")]
    NoPoints,
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("requested {k} clusters but only {points} distinct points are available; clamp k")]
    TooManyClusters { k: usize, points: usize },
    #[error("points have inconsistent dimensions")]
    Dimension,
    #[error("no cases with outcome {0}")]
    EmptyClass(Outcome),
    #[error("cases mix set and count characterisations")]
    MixedKinds,
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    /// Centroids per outcome class.
    pub centroids: usize,
    /// Centroids whose mean member confidence falls below this are dropped.
    pub threshold: Option<f64>,
    pub seed: u64,
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            centroids: 300,
            threshold: None,
            seed: 0,
            max_iterations: 100,
            restarts: 5,
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<(), ReductionError> {
        if self.centroids == 0 {
            return Err(ReductionError::ZeroClusters);
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(ReductionError::Threshold(t));
            }
        }
        Ok(())
    }
}

/// Column order for vectorising characterisations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureIndex {
    names: Vec<String>,
}

impl FeatureIndex {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        let mut names: Vec<String> = names.into_iter().collect();
        names.sort();
        names.dedup();
        FeatureIndex { names }
    }

    /// Every feature used by any of the cases.
    pub fn from_cases<'a>(cases: impl IntoIterator<Item = &'a Case>) -> Self {
        Self::new(
            cases
                .into_iter()
                .flat_map(|c| c.characterisation.features().map(str::to_string)),
        )
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }
}

/// Dense count (or indicator) vector; features outside the index are dropped.
pub fn vectorize(case: &Case, index: &FeatureIndex) -> Vec<f64> {
    index
        .names
        .iter()
        .map(|name| case.characterisation.count_of(name) as f64)
        .collect()
}

/// Maps a centroid back to a characterisation: counts are rounded half-up,
/// set indicators are present from 0.5, and zero entries are dropped.
pub fn discretize(
    vector: &[f64],
    index: &FeatureIndex,
    kind: CharacterisationKind,
) -> Characterisation {
    let present = index.names.iter().zip(vector);
    match kind {
        CharacterisationKind::Set => {
            Characterisation::set(present.filter(|(_, &v)| v >= 0.5).map(|(n, _)| n.clone()))
        }
        CharacterisationKind::Count => Characterisation::count(
            present
                .map(|(n, &v)| (n.clone(), (v + 0.5).floor().max(0.0) as u32))
                .filter(|&(_, c)| c > 0),
        )
        .expect("zero counts are filtered"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    config: &ClusteringConfig,
) -> Result<KMeansResult, ReductionError> {
    kmeans_weighted(points, &vec![1.0; points.len()], k, config)
}

/// Lloyd's algorithm from k-means++ seeding, best of `config.restarts` runs
/// by weighted inertia.
pub fn kmeans_weighted(
    points: &[Vec<f64>],
    weights: &[f64],
    k: usize,
    config: &ClusteringConfig,
) -> Result<KMeansResult, ReductionError> {
    if points.is_empty() {
        return Err(ReductionError::NoPoints);
    }
    if k == 0 {
        return Err(ReductionError::ZeroClusters);
    }
    if k > points.len() {
        return Err(ReductionError::TooManyClusters {
            k,
            points: points.len(),
        });
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) || weights.len() != points.len() {
        return Err(ReductionError::Dimension);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..config.restarts.max(1) {
        let seeds = plus_plus_seeds(points, weights, k, &mut rng);
        let run = lloyd(points, weights, seeds, config.max_iterations.max(1));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn weighted_pick(scores: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = scores.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return None;
    }
    let mut target = rng.gen::<f64>() * total;
    for (i, &s) in scores.iter().enumerate() {
        if s > 0.0 {
            if target < s {
                return Some(i);
            }
            target -= s;
        }
    }
    scores.iter().rposition(|&s| s > 0.0)
}

fn plus_plus_seeds(
    points: &[Vec<f64>],
    weights: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mut chosen = vec![false; points.len()];
    let first = weighted_pick(weights, rng).unwrap_or(0);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centroids.len() < k {
        let scores: Vec<f64> = dist.iter().zip(weights).map(|(d, w)| d * w).collect();
        // All remaining points coincide with a centroid: take the next unused one.
        let next = weighted_pick(&scores, rng)
            .unwrap_or_else(|| chosen.iter().position(|&c| !c).expect("k <= points"));
        chosen[next] = true;
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
        centroids.push(points[next].clone());
    }
    centroids
}

fn lloyd(
    points: &[Vec<f64>],
    weights: &[f64],
    mut centroids: Vec<Vec<f64>>,
    max_iterations: usize,
) -> KMeansResult {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    let mut dists = vec![0.0; points.len()];

    let assign = |centroids: &[Vec<f64>], assignments: &mut [usize], dists: &mut [f64]| -> bool {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, centroids);
            changed |= assignments[i] != j;
            assignments[i] = j;
            dists[i] = d;
        }
        changed
    };

    assign(&centroids, &mut assignments, &mut dists);
    for _ in 0..max_iterations {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut mass = vec![0.0; k];
        for ((p, &w), &j) in points.iter().zip(weights).zip(&assignments) {
            mass[j] += w;
            for (s, x) in sums[j].iter_mut().zip(p) {
                *s += w * x;
            }
        }
        for j in 0..k {
            if mass[j] > 0.0 {
                centroids[j] = sums[j].iter().map(|s| s / mass[j]).collect();
            } else {
                // Re-seed an empty cluster at the point farthest from its centroid.
                let far = (0..points.len())
                    .fold(0, |best, i| if dists[i] > dists[best] { i } else { best });
                centroids[j] = points[far].clone();
                dists[far] = 0.0;
            }
        }
        if !assign(&centroids, &mut assignments, &mut dists) {
            break;
        }
    }
    let inertia = dists.iter().zip(weights).map(|(d, w)| d * w).sum();
    KMeansResult {
        centroids,
        assignments,
        inertia,
    }
}

fn outcome_tag(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Default => "default",
        Outcome::NonDefault => "non_default",
    }
}

/// Clusters the cases of each listed outcome separately and returns one case
/// per surviving centroid.
///
/// Identical vectors are clustered once with their multiplicity as weight, and
/// k is clamped to the number of distinct vectors in a class.
pub fn reduce_casebase(
    cases: &[Case],
    outcomes: &[Outcome],
    config: &ClusteringConfig,
) -> Result<Vec<Case>, ReductionError> {
    config.validate()?;
    let kind = match cases.first() {
        Some(c) => c.characterisation.kind(),
        None => {
            return outcomes
                .first()
                .map_or(Ok(Vec::new()), |&o| Err(ReductionError::EmptyClass(o)))
        }
    };
    if cases.iter().any(|c| c.characterisation.kind() != kind) {
        return Err(ReductionError::MixedKinds);
    }
    let index = FeatureIndex::from_cases(cases);
    let mut reduced = Vec::new();

    for (class_no, &outcome) in outcomes.iter().enumerate() {
        let members: Vec<&Case> = cases.iter().filter(|c| c.outcome == outcome).collect();
        if members.is_empty() {
            return Err(ReductionError::EmptyClass(outcome));
        }
        // Distinct vectors with their member cases, in first-seen order.
        let mut groups: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut group_members: Vec<Vec<&Case>> = Vec::new();
        for case in members {
            let key: Vec<u32> = index
                .names
                .iter()
                .map(|n| case.characterisation.count_of(n))
                .collect();
            let g = *groups.entry(key).or_insert_with(|| {
                points.push(vectorize(case, &index));
                group_members.push(Vec::new());
                points.len() - 1
            });
            group_members[g].push(case);
        }
        let weights: Vec<f64> = group_members.iter().map(|m| m.len() as f64).collect();
        let k = config.centroids.min(points.len());
        if k < config.centroids {
            log::info!(
                "{} class: clamping {} centroids to {} distinct cases",
                outcome_tag(outcome),
                config.centroids,
                k
            );
        }
        let class_config = ClusteringConfig {
            seed: config.seed.wrapping_add(class_no as u64),
            ..config.clone()
        };
        let result = kmeans_weighted(&points, &weights, k, &class_config)?;

        let mut assigned: Vec<Vec<&Case>> = vec![Vec::new(); k];
        for (g, &j) in result.assignments.iter().enumerate() {
            assigned[j].extend(group_members[g].iter().copied());
        }
        for (j, centroid) in result.centroids.iter().enumerate() {
            let group = &assigned[j];
            if group.is_empty() {
                continue;
            }
            let confidence = group.iter().map(|c| c.confidence).sum::<f64>() / group.len() as f64;
            if config.threshold.is_some_and(|t| confidence < t) {
                continue;
            }
            reduced.push(Case {
                characterisation: discretize(centroid, &index, kind),
                outcome,
                confidence: confidence.clamp(0.0, 1.0),
                provenance: format!("{}:c{}(n={})", outcome_tag(outcome), j, group.len()),
            });
        }
    }
    Ok(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_case(pairs: &[(&str, u32)], outcome: Outcome, confidence: f64) -> Case {
        Case::new(
            Characterisation::count(pairs.iter().map(|&(k, v)| (k, v))).unwrap(),
            outcome,
            confidence,
            "",
        )
        .unwrap()
    }

    #[test]
    fn vectorize_examples() {
        let index = FeatureIndex::new(["cu", "l_cy", "sp"].map(String::from));
        let c = count_case(&[("cu", 2), ("l_cy", 1)], Outcome::Default, 1.0);
        assert_eq!(vectorize(&c, &index), vec![2.0, 1.0, 0.0]);
        let s = Case::new(
            Characterisation::set(["sm_m_cu", "sm_sp"]),
            Outcome::Default,
            1.0,
            "",
        )
        .unwrap();
        let index = FeatureIndex::new(["sm_m_cu", "sm_sp"].map(String::from));
        assert_eq!(vectorize(&s, &index), vec![1.0, 1.0]);
        assert_eq!(
            discretize(&[0.49, 0.5], &index, CharacterisationKind::Set),
            Characterisation::set(["sm_sp"])
        );
    }

    #[test]
    fn discretize_rounds_half_up() {
        let index = FeatureIndex::new(["a", "b", "c"].map(String::from));
        let c = discretize(&[1.5, 0.49, 2.2], &index, CharacterisationKind::Count);
        assert_eq!(c, Characterisation::count([("a", 2), ("c", 2)]).unwrap());
    }

    #[test]
    fn distinct_points_are_their_own_centroids() {
        let points = vec![vec![0.0, 1.0], vec![3.0, 1.0], vec![5.0, 5.0]];
        let r = kmeans(&points, 3, &ClusteringConfig::default()).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut cs = r.centroids.clone();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(cs, points);
    }

    #[test]
    fn separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut noise = || {
            let (u, v): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
            (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
        };
        let mut points = Vec::new();
        for centre in [0.0, 10.0] {
            for _ in 0..100 {
                points.push(vec![centre + noise(), centre + noise()]);
            }
        }
        let mean = |range: std::ops::Range<usize>| -> Vec<f64> {
            let n = range.len() as f64;
            (0..2)
                .map(|d| points[range.clone()].iter().map(|p| p[d]).sum::<f64>() / n)
                .collect()
        };
        let (m0, m1) = (mean(0..100), mean(100..200));
        let r = kmeans(&points, 2, &ClusteringConfig::default()).unwrap();
        for m in [m0, m1] {
            let d = r
                .centroids
                .iter()
                .map(|c| sq_dist(c, &m).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1.0, "centroid {d} away from blob mean");
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let points: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i * 7 % 13) as f64, (i * 3 % 11) as f64])
            .collect();
        let cfg = ClusteringConfig {
            seed: 42,
            ..Default::default()
        };
        let a = kmeans(&points, 4, &cfg).unwrap();
        let b = kmeans(&points, 4, &cfg).unwrap();
        assert_eq!(a, b);
        for (x, y) in a
            .centroids
            .iter()
            .flatten()
            .zip(b.centroids.iter().flatten())
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn kmeans_errors() {
        let cfg = ClusteringConfig::default();
        assert_eq!(kmeans(&[], 1, &cfg), Err(ReductionError::NoPoints));
        assert_eq!(
            kmeans(&[vec![1.0]], 0, &cfg),
            Err(ReductionError::ZeroClusters)
        );
        assert_eq!(
            kmeans(&[vec![1.0]], 2, &cfg),
            Err(ReductionError::TooManyClusters { k: 2, points: 1 })
        );
    }

    #[test]
    fn duplicate_points_do_not_break_seeding() {
        let points = vec![vec![1.0], vec![1.0], vec![1.0], vec![2.0]];
        let r = kmeans(&points, 3, &ClusteringConfig::default()).unwrap();
        assert_eq!(r.inertia, 0.0);
        assert_eq!(r.assignments.len(), 4);
    }

    #[test]
    fn identity_reduction() {
        let cases = vec![
            count_case(&[("cu", 1)], Outcome::Default, 1.0),
            count_case(&[("cu", 1)], Outcome::Default, 1.0),
            count_case(&[("cu", 2), ("sp", 1)], Outcome::Default, 1.0),
            count_case(&[("sp", 1)], Outcome::NonDefault, 1.0),
        ];
        let cfg = ClusteringConfig {
            centroids: 2,
            ..Default::default()
        };
        let reduced =
            reduce_casebase(&cases, &[Outcome::Default, Outcome::NonDefault], &cfg).unwrap();
        let mut got: Vec<_> = reduced
            .iter()
            .map(|c| (c.outcome, c.characterisation.clone()))
            .collect();
        got.sort_by_key(|(o, c)| (*o, c.to_string()));
        let mut want: Vec<_> = [&cases[0], &cases[2], &cases[3]]
            .iter()
            .map(|c| (c.outcome, c.characterisation.clone()))
            .collect();
        want.sort_by_key(|(o, c)| (*o, c.to_string()));
        assert_eq!(got, want);
    }

    #[test]
    fn threshold_keeps_confident_centroids() {
        let cases = vec![
            count_case(&[("cu", 1)], Outcome::Default, 0.95),
            count_case(&[("cu", 5)], Outcome::Default, 0.85),
        ];
        let cfg = ClusteringConfig {
            centroids: 2,
            threshold: Some(0.9),
            ..Default::default()
        };
        let reduced = reduce_casebase(&cases, &[Outcome::Default], &cfg).unwrap();
        assert_eq!(reduced.len(), 1);
        assert_eq!(reduced[0].confidence, 0.95);
        assert!(reduced[0].provenance.ends_with("(n=1)"));
    }

    #[test]
    fn empty_class_is_an_error() {
        let cases = vec![count_case(&[("cu", 1)], Outcome::Default, 1.0)];
        assert_eq!(
            reduce_casebase(
                &cases,
                &[Outcome::Default, Outcome::NonDefault],
                &ClusteringConfig::default()
            ),
            Err(ReductionError::EmptyClass(Outcome::NonDefault))
        );
    }

    #[test]
    fn centroid_confidence_is_member_mean() {
        let cases = vec![
            count_case(&[("cu", 1)], Outcome::Default, 0.5),
            count_case(&[("cu", 1)], Outcome::Default, 0.7),
            count_case(&[("cu", 1), ("sp", 1)], Outcome::Default, 0.9),
        ];
        let cfg = ClusteringConfig {
            centroids: 1,
            ..Default::default()
        };
        let reduced = reduce_casebase(&cases, &[Outcome::Default], &cfg).unwrap();
        assert_eq!(reduced.len(), 1);
        assert!((reduced[0].confidence - 0.7).abs() < 1e-12);
        // Mean vector (1, 1/3) rounds to cu:1.
        assert_eq!(
            reduced[0].characterisation,
            Characterisation::count([("cu", 1)]).unwrap()
        );
    }
}
