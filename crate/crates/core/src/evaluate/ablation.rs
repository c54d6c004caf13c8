use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, EvaluateError, MeanStd, Metrics};
use crate::characterisation::FeatureSpec;
use crate::multiclass::{train_tournament, TournamentConfig};
use crate::scene::SceneRecord;

/// A component that can be switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toggle {
    /// Replaces every selection with single-attribute features.
    FeatureCombination,
    /// Drops every confidence threshold.
    Thresholding,
    /// Turns supports off in every model.
    Supports,
}

impl Toggle {
    pub const ALL: [Toggle; 3] = [
        Toggle::FeatureCombination,
        Toggle::Thresholding,
        Toggle::Supports,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Toggle::FeatureCombination => "feature_combination",
            Toggle::Thresholding => "thresholding",
            Toggle::Supports => "supports",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Toggle::FeatureCombination => "feature combination",
            Toggle::Thresholding => "thresholding",
            Toggle::Supports => "supports",
        }
    }
}

impl fmt::Display for Toggle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Toggle {
    type Err = EvaluateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('-', "_");
        Toggle::ALL
            .into_iter()
            .find(|t| t.name() == norm)
            .ok_or_else(|| EvaluateError::UnknownToggle(s.to_string()))
    }
}

/// `base` with the listed components switched off.
pub fn apply_toggles(base: &TournamentConfig, toggles: &[Toggle]) -> TournamentConfig {
    let mut config = base.clone();
    for m in &mut config.models {
        for t in toggles {
            match t {
                Toggle::FeatureCombination => m.features = FeatureSpec::Atomic,
                Toggle::Thresholding => m.clustering.threshold = None,
                Toggle::Supports => m.use_supports = false,
            }
        }
    }
    config
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub toggles: Vec<Toggle>,
    pub runs: Vec<Metrics>,
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    pub fn row(&self, toggles: &[Toggle]) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.toggles == toggles)
    }

    /// Markdown table with mean ± sample standard deviation per column.
    pub fn table(&self) -> String {
        let mut out = String::from(
            "| Method | Accuracy | Precision | Recall | F1 |\n|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                r.variant, r.accuracy, r.precision, r.recall, r.f1
            ));
        }
        out
    }
}

fn variant_name(toggles: &[Toggle]) -> String {
    if toggles.is_empty() {
        return "full".to_string();
    }
    let parts: Vec<&str> = toggles.iter().map(|t| t.label()).collect();
    format!("w/o {}", parts.join(", "))
}

/// Trains and tests the base configuration and every ablated variant once
/// per seed: one row per single toggle, plus one with all of them when more
/// than one is given.
pub fn ablate(
    base: &TournamentConfig,
    toggles: &[Toggle],
    train: &[SceneRecord],
    test: &[SceneRecord],
    seeds: &[u64],
) -> Result<AblationReport, EvaluateError> {
    if seeds.is_empty() {
        return Err(EvaluateError::NoSeeds);
    }
    let mut toggles = toggles.to_vec();
    toggles.sort();
    toggles.dedup();
    let mut variants: Vec<Vec<Toggle>> = vec![Vec::new()];
    variants.extend(toggles.iter().map(|&t| vec![t]));
    if toggles.len() > 1 {
        variants.push(toggles.clone());
    }

    let jobs: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let results: Vec<Metrics> = jobs
        .par_iter()
        .map(|&(v, seed)| {
            let config = apply_toggles(base, &variants[v]).with_seed(seed);
            let trained = train_tournament(&config, train)?;
            evaluate(&trained, test)
        })
        .collect::<Result<_, _>>()?;

    let rows = variants
        .iter()
        .enumerate()
        .map(|(v, toggles)| {
            let runs: Vec<Metrics> = results[v * seeds.len()..(v + 1) * seeds.len()].to_vec();
            let col = |f: fn(&Metrics) -> f64| MeanStd::of(&runs.iter().map(f).collect::<Vec<_>>());
            AblationRow {
                variant: variant_name(toggles),
                toggles: toggles.clone(),
                accuracy: col(|m| m.accuracy),
                precision: col(|m| m.precision),
                recall: col(|m| m.recall),
                f1: col(|m| m.f1),
                runs,
            }
        })
        .collect();
    Ok(AblationReport {
        seeds: seeds.to_vec(),
        rows,
    })
}
