//! Shipped tournament configurations and matching synthetic rule sets.

use super::synthetic::RuleSet;
use crate::multiclass::TournamentConfig;

pub const HANS3_CONFIG: &str = include_str!("../../../../presets/hans3.json");
pub const HANS7_CONFIG: &str = include_str!("../../../../presets/hans7.json");
pub const HANS3_RULES: &str = include_str!("../../../../presets/hans3-rules.json");
pub const HANS7_RULES: &str = include_str!("../../../../presets/hans7-rules.json");

/// Preset names accepted by [`config`] and [`rules`].
pub const NAMES: [&str; 2] = ["hans3", "hans7"];

/// Two models: class 2 vs rest, then class 1 vs class 0.
pub fn hans3_config() -> TournamentConfig {
    serde_json::from_str(HANS3_CONFIG).expect("shipped preset parses")
}

/// Five models over classes 0, 1, 3, 4, 5, 6; the last one is position-aware.
pub fn hans7_config() -> TournamentConfig {
    serde_json::from_str(HANS7_CONFIG).expect("shipped preset parses")
}

/// Three-class rules with a grey-large-cube confounder on class 0.
pub fn hans3_rules() -> RuleSet {
    serde_json::from_str(HANS3_RULES).expect("shipped rules parse")
}

pub fn hans7_rules() -> RuleSet {
    serde_json::from_str(HANS7_RULES).expect("shipped rules parse")
}

pub fn config(name: &str) -> Option<TournamentConfig> {
    match name {
        "hans3" => Some(hans3_config()),
        "hans7" => Some(hans7_config()),
        _ => None,
    }
}

pub fn rules(name: &str) -> Option<RuleSet> {
    match name {
        "hans3" => Some(hans3_rules()),
        "hans7" => Some(hans7_rules()),
        _ => None,
    }
}
