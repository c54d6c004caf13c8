//! Scoring, random-search tuning and ablation runs.

mod ablation;
mod metrics;
mod search;

use rayon::prelude::*;
use thiserror::Error;

pub use ablation::{ablate, apply_toggles, AblationReport, AblationRow, Toggle};
pub use metrics::{ClassScores, ExactMetrics, MeanStd, Metrics};
pub use search::{
    default_features, random_search, run_trial, slot_families, SearchOutcome, SearchSpace,
    TrialRecord, DEFAULT_BUDGET,
};

use crate::multiclass::{TournamentError, TrainedTournament};
use crate::scene::SceneRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluateError {
    #[error("nothing to evaluate")]
    Empty,
    #[error("confusion matrix is not square over the class list")]
    Shape,
    #[error("scene {0} has no class label")]
    Unlabelled(String),
    #[error(transparent)]
    Tournament(#[from] TournamentError),
    #[error("search budget must be at least 1")]
    Budget,
    #[error("search space has no candidate {0}")]
    EmptyCandidates(&'static str),
    #[error("search space: {0}")]
    Space(String),
    #[error("every trial failed")]
    NoSuccessfulTrial,
    #[error(
        "unknown ablation toggle {0:?} (expected feature_combination, thresholding or supports)"
    )]
    UnknownToggle(String),
    #[error("at least one seed is needed")]
    NoSeeds,
}

/// Predicts every labelled scene (in parallel) and scores the result.
pub fn evaluate(
    tournament: &TrainedTournament,
    scenes: &[SceneRecord],
) -> Result<Metrics, EvaluateError> {
    if scenes.is_empty() {
        return Err(EvaluateError::Empty);
    }
    let truth = scenes
        .iter()
        .map(|s| {
            s.class_label
                .ok_or_else(|| EvaluateError::Unlabelled(s.image_id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    tournament.prepare();
    let predicted = scenes
        .par_iter()
        .map(|s| tournament.predict_class(s))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<_> = truth.into_iter().zip(predicted).collect();
    Metrics::from_pairs(&pairs)
}
