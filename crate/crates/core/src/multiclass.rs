//! One-vs-rest tournaments: an ordered chain of binary AA-CBR models, each
//! separating a focus class from the classes not yet claimed.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aacbr::{self, AacbrError, Casebase, Explanation, OutcomeNames};
use crate::af;
use crate::characterisation::{
    characterise, mine_features, AttributeVocabulary, Case, Characterisation,
    CharacterisationError, CharacterisationKind, FeatureSelection, FeatureSpec, Outcome,
};
use crate::reduction::{reduce_casebase, ClusteringConfig, ReductionError};
use crate::scene::{ClassLabel, SceneRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TournamentError {
    #[error("a tournament needs at least two classes")]
    TooFewClasses,
    #[error("class {0} is listed twice")]
    DuplicateClass(ClassLabel),
    #[error("{classes} classes need {expected} models, found {found}")]
    ModelCount {
        classes: usize,
        expected: usize,
        found: usize,
    },
    #[error("model {model}: class {class} is not in the class universe")]
    UnknownClass { model: usize, class: ClassLabel },
    #[error("model {model}: class {class} is already the focus of an earlier model")]
    DuplicateFocus { model: usize, class: ClassLabel },
    #[error("model {model}: {reason}")]
    ChainShape { model: usize, reason: &'static str },
    #[error("model {model}: {source}")]
    Clustering {
        model: usize,
        source: ReductionError,
    },
    #[error("scene {0} has no class label")]
    Unlabelled(String),
    #[error("scene {image_id} has label {label} outside the class universe")]
    UnknownLabel { image_id: String, label: ClassLabel },
    #[error("model {model} (focus {focus}): no training scenes on the {side} side")]
    MissingSide {
        model: usize,
        focus: ClassLabel,
        side: Side,
    },
    #[error("model {model}: {source}")]
    Characterisation {
        model: usize,
        source: CharacterisationError,
    },
    #[error("model {model}: {source}")]
    Prediction { model: usize, source: AacbrError },
    #[error("tournament has {models} models but {casebases} casebases")]
    CasebaseCount { models: usize, casebases: usize },
    #[error("model {model}: casebase is {found} but the model characterises as {expected}")]
    CasebaseKind {
        model: usize,
        expected: CharacterisationKind,
        found: CharacterisationKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Opponent {
    Rest,
    Class(ClassLabel),
}

/// One side of a binary model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Focus,
    Opponent,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Focus => "focus",
            Side::Opponent => "opponent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterisationMode {
    Set,
    Count,
    /// Counts over features that also carry the object's side.
    PositionCount,
}

impl CharacterisationMode {
    pub fn kind(self) -> CharacterisationKind {
        match self {
            CharacterisationMode::Set => CharacterisationKind::Set,
            CharacterisationMode::Count | CharacterisationMode::PositionCount => {
                CharacterisationKind::Count
            }
        }
    }

    pub fn uses_position(self) -> bool {
        self == CharacterisationMode::PositionCount
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModelConfig {
    pub focus: ClassLabel,
    pub opponent: Opponent,
    /// The side represented by the default argument.
    pub default_outcome: Side,
    pub characterisation: CharacterisationMode,
    pub features: FeatureSpec,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub use_supports: bool,
}

impl BinaryModelConfig {
    pub fn outcome_of(&self, side: Side) -> Outcome {
        if side == self.default_outcome {
            Outcome::Default
        } else {
            Outcome::NonDefault
        }
    }

    pub fn side_of(&self, outcome: Outcome) -> Side {
        match (outcome, self.default_outcome) {
            (Outcome::Default, side) => side,
            (Outcome::NonDefault, Side::Focus) => Side::Opponent,
            (Outcome::NonDefault, Side::Opponent) => Side::Focus,
        }
    }

    /// Which side a training label falls on, if it takes part at all.
    fn side_for(&self, label: ClassLabel) -> Option<Side> {
        if label == self.focus {
            return Some(Side::Focus);
        }
        match self.opponent {
            Opponent::Rest => Some(Side::Opponent),
            Opponent::Class(c) if c == label => Some(Side::Opponent),
            Opponent::Class(_) => None,
        }
    }

    pub fn side_name(&self, side: Side) -> String {
        match (side, self.opponent) {
            (Side::Focus, _) => format!("class {}", self.focus),
            (Side::Opponent, Opponent::Rest) => "rest".to_string(),
            (Side::Opponent, Opponent::Class(c)) => format!("class {c}"),
        }
    }

    pub fn outcome_names(&self) -> OutcomeNames {
        OutcomeNames {
            default: self.side_name(self.default_outcome),
            non_default: self.side_name(self.side_of(Outcome::NonDefault)),
        }
    }

    pub fn selection(
        &self,
        vocab: &AttributeVocabulary,
    ) -> Result<FeatureSelection, CharacterisationError> {
        self.features
            .resolve(vocab, self.characterisation.uses_position())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub classes: Vec<ClassLabel>,
    pub vocabulary: AttributeVocabulary,
    pub models: Vec<BinaryModelConfig>,
}

impl TournamentConfig {
    pub fn validate(&self) -> Result<(), TournamentError> {
        if self.classes.len() < 2 {
            return Err(TournamentError::TooFewClasses);
        }
        let mut universe = BTreeSet::new();
        for &c in &self.classes {
            if !universe.insert(c) {
                return Err(TournamentError::DuplicateClass(c));
            }
        }
        let expected = self.classes.len() - 1;
        if self.models.len() != expected {
            return Err(TournamentError::ModelCount {
                classes: self.classes.len(),
                expected,
                found: self.models.len(),
            });
        }
        let mut claimed = BTreeSet::new();
        for (model, m) in self.models.iter().enumerate() {
            if !universe.contains(&m.focus) {
                return Err(TournamentError::UnknownClass {
                    model,
                    class: m.focus,
                });
            }
            if !claimed.insert(m.focus) {
                return Err(TournamentError::DuplicateFocus {
                    model,
                    class: m.focus,
                });
            }
            let last = model + 1 == self.models.len();
            match (m.opponent, last) {
                (Opponent::Rest, true) => {
                    return Err(TournamentError::ChainShape {
                        model,
                        reason: "the final model must face a specific class",
                    })
                }
                (Opponent::Class(_), false) => {
                    return Err(TournamentError::ChainShape {
                        model,
                        reason: "only the final model may face a specific class",
                    })
                }
                (Opponent::Class(c), true) => {
                    if !universe.contains(&c) {
                        return Err(TournamentError::UnknownClass { model, class: c });
                    }
                    if claimed.contains(&c) {
                        return Err(TournamentError::ChainShape {
                            model,
                            reason: "the final opponent must not be a focus class",
                        });
                    }
                }
                (Opponent::Rest, false) => {}
            }
            m.clustering
                .validate()
                .map_err(|source| TournamentError::Clustering { model, source })?;
            match m.features {
                FeatureSpec::Mined { top: 0 } => {
                    return Err(TournamentError::ChainShape {
                        model,
                        reason: "a mined selection needs at least one feature",
                    })
                }
                FeatureSpec::Mined { .. } => {
                    if m.characterisation.uses_position() && !self.vocabulary.has_side() {
                        return Err(TournamentError::Characterisation {
                            model,
                            source: CharacterisationError::NoSideSlot,
                        });
                    }
                }
                _ => {
                    m.selection(&self.vocabulary)
                        .map_err(|source| TournamentError::Characterisation { model, source })?;
                }
            }
        }
        Ok(())
    }

    /// Same configuration with every clustering seed derived from `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut config = self.clone();
        for (i, m) in config.models.iter_mut().enumerate() {
            m.clustering.seed = seed.wrapping_add(1000 * i as u64);
        }
        config
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: BinaryModelConfig,
    pub casebase: Casebase,
    selection: FeatureSelection,
}

impl TrainedModel {
    pub fn selection(&self) -> &FeatureSelection {
        &self.selection
    }

    pub fn characterise(
        &self,
        scene: &SceneRecord,
    ) -> Result<Characterisation, CharacterisationError> {
        characterise(
            scene,
            &self.selection,
            self.config.characterisation.kind(),
            self.config.characterisation.uses_position(),
        )
    }

    /// The side this model picks for the scene.
    pub fn predict_side(&self, scene: &SceneRecord, model: usize) -> Result<Side, TournamentError> {
        let x = self
            .characterise(scene)
            .map_err(|source| TournamentError::Characterisation { model, source })?;
        let prediction = aacbr::predict(&self.casebase, &x, self.config.use_supports)
            .map_err(|source| TournamentError::Prediction { model, source })?;
        Ok(self.config.side_of(prediction.outcome))
    }
}

#[derive(Serialize, Deserialize)]
struct TrainedRepr {
    config: TournamentConfig,
    casebases: Vec<Casebase>,
}

/// A trained chain. Serialises as its config plus one casebase per model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TrainedRepr", into = "TrainedRepr")]
pub struct TrainedTournament {
    config: TournamentConfig,
    models: Vec<TrainedModel>,
}

impl From<TrainedTournament> for TrainedRepr {
    fn from(t: TrainedTournament) -> Self {
        TrainedRepr {
            config: t.config,
            casebases: t.models.into_iter().map(|m| m.casebase).collect(),
        }
    }
}

impl TryFrom<TrainedRepr> for TrainedTournament {
    type Error = TournamentError;

    fn try_from(repr: TrainedRepr) -> Result<Self, Self::Error> {
        TrainedTournament::from_parts(repr.config, repr.casebases)
    }
}

/// One consulted model while predicting a scene.
#[derive(Debug, Clone)]
pub struct ModelVerdict {
    pub model: usize,
    pub side: Side,
    pub explanation: Explanation,
    pub dot: String,
}

impl TrainedTournament {
    pub fn from_parts(
        config: TournamentConfig,
        casebases: Vec<Casebase>,
    ) -> Result<Self, TournamentError> {
        config.validate()?;
        if casebases.len() != config.models.len() {
            return Err(TournamentError::CasebaseCount {
                models: config.models.len(),
                casebases: casebases.len(),
            });
        }
        let models = config
            .models
            .iter()
            .zip(casebases)
            .enumerate()
            .map(|(model, (m, casebase))| {
                let expected = m.characterisation.kind();
                if casebase.kind() != expected {
                    return Err(TournamentError::CasebaseKind {
                        model,
                        expected,
                        found: casebase.kind(),
                    });
                }
                let selection = m
                    .selection(&config.vocabulary)
                    .map_err(|source| TournamentError::Characterisation { model, source })?;
                Ok(TrainedModel {
                    config: m.clone(),
                    casebase,
                    selection,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TrainedTournament { config, models })
    }

    pub fn config(&self) -> &TournamentConfig {
        &self.config
    }

    pub fn models(&self) -> &[TrainedModel] {
        &self.models
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.config.classes
    }

    /// Mines every casebase's internal relations up front.
    pub fn prepare(&self) {
        for m in &self.models {
            m.casebase.prepare();
        }
    }

    pub fn predict_class(&self, scene: &SceneRecord) -> Result<ClassLabel, TournamentError> {
        self.predict_traced(scene).map(|(label, _)| label)
    }

    /// Predicts every scene on the current rayon pool; output order follows
    /// input order.
    pub fn predict_batch(
        &self,
        scenes: &[SceneRecord],
    ) -> Result<Vec<ClassLabel>, TournamentError> {
        self.prepare();
        scenes.par_iter().map(|s| self.predict_class(s)).collect()
    }

    /// Predicted label and the number of binary models evaluated.
    pub fn predict_traced(
        &self,
        scene: &SceneRecord,
    ) -> Result<(ClassLabel, usize), TournamentError> {
        for (i, model) in self.models.iter().enumerate() {
            let side = model.predict_side(scene, i)?;
            if let Some(label) = self.resolve(i, side) {
                return Ok((label, i + 1));
            }
        }
        unreachable!("the final model always resolves to a class")
    }

    fn resolve(&self, i: usize, side: Side) -> Option<ClassLabel> {
        let config = &self.models[i].config;
        match (side, config.opponent) {
            (Side::Focus, _) => Some(config.focus),
            (Side::Opponent, Opponent::Class(c)) => Some(c),
            (Side::Opponent, Opponent::Rest) => None,
        }
    }

    /// Predicts and explains every model consulted for the scene.
    pub fn explain(
        &self,
        scene: &SceneRecord,
    ) -> Result<(ClassLabel, Vec<ModelVerdict>), TournamentError> {
        let mut verdicts = Vec::new();
        for (i, model) in self.models.iter().enumerate() {
            let x = model
                .characterise(scene)
                .map_err(|source| TournamentError::Characterisation { model: i, source })?;
            let prediction = aacbr::predict(&model.casebase, &x, model.config.use_supports)
                .map_err(|source| TournamentError::Prediction { model: i, source })?;
            let side = model.config.side_of(prediction.outcome);
            let explanation = aacbr::explain_with(&prediction, &model.config.outcome_names());
            let dot = af::to_dot(prediction.framework.framework(), &prediction.grounded);
            verdicts.push(ModelVerdict {
                model: i,
                side,
                explanation,
                dot,
            });
            if let Some(label) = self.resolve(i, side) {
                return Ok((label, verdicts));
            }
        }
        unreachable!("the final model always resolves to a class")
    }
}

/// Trains the chain in order. Scenes of a class leave the pool once that
/// class has been a focus. Mined feature selections are resolved against
/// each model's pool and recorded in the trained configuration.
pub fn train_tournament(
    config: &TournamentConfig,
    scenes: &[SceneRecord],
) -> Result<TrainedTournament, TournamentError> {
    config.validate()?;
    for scene in scenes {
        let label = scene
            .class_label
            .ok_or_else(|| TournamentError::Unlabelled(scene.image_id.clone()))?;
        if !config.classes.contains(&label) {
            return Err(TournamentError::UnknownLabel {
                image_id: scene.image_id.clone(),
                label,
            });
        }
    }

    let mut pool: Vec<&SceneRecord> = scenes.iter().collect();
    let mut trained = config.clone();
    let mut casebases = Vec::with_capacity(config.models.len());
    for (model, m) in trained.models.iter_mut().enumerate() {
        let mut sides: [Vec<&SceneRecord>; 2] = [Vec::new(), Vec::new()];
        for &scene in &pool {
            if let Some(side) = m.side_for(scene.class_label.expect("checked above")) {
                sides[side as usize].push(scene);
            }
        }
        for side in [Side::Focus, Side::Opponent] {
            if sides[side as usize].is_empty() {
                return Err(TournamentError::MissingSide {
                    model,
                    focus: m.focus,
                    side,
                });
            }
        }
        let use_position = m.characterisation.uses_position();
        if let FeatureSpec::Mined { top } = m.features {
            let mined = mine_features(
                &config.vocabulary,
                use_position,
                top,
                [&sides[0], &sides[1]],
            )
            .map_err(|source| TournamentError::Characterisation { model, source })?;
            log::debug!("model {model}: mined {} features", mined.len());
            m.features =
                FeatureSpec::Features(mined.iter().map(|f| f.name(&config.vocabulary)).collect());
        }
        let selection = m
            .selection(&config.vocabulary)
            .map_err(|source| TournamentError::Characterisation { model, source })?;
        let kind = m.characterisation.kind();
        let mut cases = Vec::new();
        for scene in &pool {
            let Some(side) = m.side_for(scene.class_label.expect("checked above")) else {
                continue;
            };
            let characterisation = characterise(scene, &selection, kind, use_position)
                .map_err(|source| TournamentError::Characterisation { model, source })?;
            cases.push(Case {
                characterisation,
                outcome: m.outcome_of(side),
                confidence: scene.confidence().clamp(0.0, 1.0),
                provenance: scene.image_id.clone(),
            });
        }
        let reduced = reduce_casebase(
            &cases,
            &[Outcome::Default, Outcome::NonDefault],
            &m.clustering,
        )
        .map_err(|source| TournamentError::Clustering { model, source })?;
        log::info!(
            "model {model} (focus {}): {} training cases reduced to {}",
            m.focus,
            cases.len(),
            reduced.len()
        );
        let casebase = Casebase::new(kind, reduced)
            .map_err(|source| TournamentError::Prediction { model, source })?;
        casebase.prepare();
        casebases.push(casebase);
        pool.retain(|s| s.class_label != Some(m.focus));
    }
    TrainedTournament::from_parts(trained, casebases)
}
