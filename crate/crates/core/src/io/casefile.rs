//! A raw casebase plus one query, for explaining a single framework without
//! a trained tournament.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::aacbr::{Casebase, OutcomeNames};
use crate::characterisation::Characterisation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFile {
    pub casebase: Casebase,
    pub query: Characterisation,
    #[serde(default)]
    pub outcomes: Option<OutcomeNames>,
    #[serde(default)]
    pub use_supports: bool,
}

impl CaseFile {
    pub fn read<R: Read>(source: R) -> serde_json::Result<Self> {
        serde_json::from_reader(source)
    }

    pub fn outcome_names(&self) -> OutcomeNames {
        self.outcomes.clone().unwrap_or_default()
    }
}
