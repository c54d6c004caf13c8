use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, EvaluateError, Metrics};
use crate::characterisation::{AttributeVocabulary, FeatureSpec, Slot};
use crate::multiclass::{
    train_tournament, BinaryModelConfig, CharacterisationMode, Opponent, Side, TournamentConfig,
};
use crate::reduction::ClusteringConfig;
use crate::scene::{ClassLabel, SceneRecord};

pub const DEFAULT_BUDGET: usize = 100;

/// Candidate values for every per-model hyperparameter. Each trial draws
/// every value uniformly and independently per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub classes: Vec<ClassLabel>,
    pub vocabulary: AttributeVocabulary,
    /// Focus orders to choose from; empty means any permutation.
    pub orders: Vec<Vec<ClassLabel>>,
    pub characterisations: Vec<CharacterisationMode>,
    pub default_outcomes: Vec<Side>,
    pub centroids: Vec<usize>,
    pub thresholds: Vec<Option<f64>>,
    pub supports: Vec<bool>,
    pub features: Vec<FeatureSpec>,
    /// Base clustering seed for every trial.
    pub clustering_seed: u64,
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace::for_classes(Vec::new(), AttributeVocabulary::clevr())
    }
}

/// Every subset of size, colour and material; shape is always present.
pub fn slot_families() -> Vec<FeatureSpec> {
    let optional = [Slot::Size, Slot::Colour, Slot::Material];
    (0..1u8 << optional.len())
        .map(|mask| {
            FeatureSpec::Slots(
                optional
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &s)| s)
                    .collect(),
            )
        })
        .collect()
}

/// Slot families plus data-mined selections of a few sizes.
pub fn default_features() -> Vec<FeatureSpec> {
    let mut features = slot_families();
    features.extend([2, 4, 8, 16].map(|top| FeatureSpec::Mined { top }));
    features
}

impl SearchSpace {
    /// The default space: the candidate values of the published
    /// hyperparameter tables, position counts only when the vocabulary has
    /// a side slot.
    pub fn for_classes(classes: Vec<ClassLabel>, vocabulary: AttributeVocabulary) -> Self {
        let mut characterisations = vec![CharacterisationMode::Set, CharacterisationMode::Count];
        if vocabulary.has_side() {
            characterisations.push(CharacterisationMode::PositionCount);
        }
        SearchSpace {
            classes,
            vocabulary,
            orders: Vec::new(),
            characterisations,
            default_outcomes: vec![Side::Focus, Side::Opponent],
            centroids: vec![300, 500, 900],
            thresholds: vec![
                None,
                Some(0.7),
                Some(0.75),
                Some(0.8),
                Some(0.85),
                Some(0.9),
            ],
            supports: vec![false, true],
            features: default_features(),
            clustering_seed: 0,
            max_iterations: 100,
            restarts: 5,
        }
    }

    pub fn validate(&self) -> Result<(), EvaluateError> {
        let empty = |what: &'static str| Err(EvaluateError::EmptyCandidates(what));
        if self.classes.len() < 2 {
            return Err(EvaluateError::Space(
                "at least two classes are needed".into(),
            ));
        }
        if self.characterisations.is_empty() {
            return empty("characterisations");
        }
        if self.default_outcomes.is_empty() {
            return empty("default_outcomes");
        }
        if self.centroids.is_empty() {
            return empty("centroids");
        }
        if self.thresholds.is_empty() {
            return empty("thresholds");
        }
        if self.supports.is_empty() {
            return empty("supports");
        }
        if self.features.is_empty() {
            return empty("features");
        }
        let mut sorted = self.classes.clone();
        sorted.sort();
        for order in &self.orders {
            let mut o = order.clone();
            o.sort();
            if o != sorted {
                return Err(EvaluateError::Space(format!(
                    "order {order:?} is not a permutation of the classes"
                )));
            }
        }
        if self
            .characterisations
            .contains(&CharacterisationMode::PositionCount)
            && !self.vocabulary.has_side()
        {
            return Err(EvaluateError::Space(
                "position counts need a side slot in the vocabulary".into(),
            ));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> TournamentConfig {
        let order = if self.orders.is_empty() {
            let mut o = self.classes.clone();
            o.shuffle(rng);
            o
        } else {
            self.orders.choose(rng).expect("validated").clone()
        };
        let last = *order.last().expect("at least two classes");
        let n = order.len() - 1;
        let models = order[..n]
            .iter()
            .enumerate()
            .map(|(i, &focus)| BinaryModelConfig {
                focus,
                opponent: if i + 1 == n {
                    Opponent::Class(last)
                } else {
                    Opponent::Rest
                },
                default_outcome: *self.default_outcomes.choose(rng).expect("validated"),
                characterisation: *self.characterisations.choose(rng).expect("validated"),
                features: self.features.choose(rng).expect("validated").clone(),
                clustering: ClusteringConfig {
                    centroids: *self.centroids.choose(rng).expect("validated"),
                    threshold: *self.thresholds.choose(rng).expect("validated"),
                    seed: self.clustering_seed,
                    max_iterations: self.max_iterations,
                    restarts: self.restarts,
                },
                use_supports: *self.supports.choose(rng).expect("validated"),
            })
            .collect();
        TournamentConfig {
            classes: self.classes.clone(),
            vocabulary: self.vocabulary.clone(),
            models,
        }
        .with_seed(self.clustering_seed)
    }
}

/// One line of the trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub config: TournamentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best_trial: usize,
    pub best: TournamentConfig,
    pub metrics: Metrics,
    pub trials: Vec<TrialRecord>,
}

/// Higher macro F1 wins, then higher accuracy, then the earlier trial.
fn better(a: &TrialRecord, b: &TrialRecord) -> bool {
    let (Some(ma), Some(mb)) = (&a.metrics, &b.metrics) else {
        return a.metrics.is_some();
    };
    let (ea, eb) = (ma.exact(), mb.exact());
    match ea.f1.cmp(&eb.f1).then(ea.accuracy.cmp(&eb.accuracy)) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.trial < b.trial,
    }
}

pub fn run_trial(
    trial: usize,
    config: TournamentConfig,
    train: &[SceneRecord],
    validation: &[SceneRecord],
) -> TrialRecord {
    let result = train_tournament(&config, train)
        .map_err(EvaluateError::from)
        .and_then(|t| evaluate(&t, validation));
    match result {
        Ok(metrics) => TrialRecord {
            trial,
            config,
            metrics: Some(metrics),
            error: None,
        },
        Err(e) => TrialRecord {
            trial,
            config,
            metrics: None,
            error: Some(e.to_string()),
        },
    }
}

/// Samples `budget` configurations from `seed`, trains each on `train` and
/// scores it on `validation`. Trials run concurrently; the log is in trial
/// order. Failing trials are logged and skipped.
pub fn random_search(
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    train: &[SceneRecord],
    validation: &[SceneRecord],
) -> Result<SearchOutcome, EvaluateError> {
    if budget == 0 {
        return Err(EvaluateError::Budget);
    }
    space.validate()?;
    if validation.is_empty() {
        return Err(EvaluateError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<TournamentConfig> = (0..budget).map(|_| space.sample(&mut rng)).collect();
    let trials: Vec<TrialRecord> = configs
        .into_par_iter()
        .enumerate()
        .map(|(i, config)| run_trial(i, config, train, validation))
        .collect();

    let mut best: Option<&TrialRecord> = None;
    for t in &trials {
        match (&t.metrics, &t.error) {
            (Some(m), _) => log::info!("trial {}: {m}", t.trial),
            (None, Some(e)) => log::warn!("trial {} skipped: {e}", t.trial),
            (None, None) => {}
        }
        if t.metrics.is_some() && best.is_none_or(|b| better(t, b)) {
            best = Some(t);
        }
    }
    let best = best.ok_or(EvaluateError::NoSuccessfulTrial)?;
    Ok(SearchOutcome {
        best_trial: best.trial,
        best: best.config.clone(),
        metrics: best.metrics.clone().expect("successful trial"),
        trials,
    })
}
