//! File formats: scene streams, synthetic data, bundles and presets.

pub mod bundle;
pub mod casefile;
pub mod presets;
pub mod scenes;
pub mod synthetic;

pub use bundle::{load_bundle, save_bundle, BundleError};
pub use casefile::CaseFile;
pub use scenes::{
    emit_scenes, parse_scenes, ParseError, ParseErrorKind, SceneReader, DEFAULT_MAX_OBJECTS,
};
pub use synthetic::{
    generate_synthetic, ClassRule, Confounder, Requirement, RuleSet, SyntheticError,
};
