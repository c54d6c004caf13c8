//! Abstract argumentation for case-based reasoning.
//!
//! A [`Casebase`] of binary-outcome cases plus a default case with the least
//! characterisation is turned into an argumentation framework for every new
//! characterisation: a case attacks a case of the other outcome when it is
//! strictly more exceptional and no case of its own outcome sits strictly in
//! between; the new case attacks every case it is not at least as
//! exceptional as. The default outcome is predicted iff the default case is
//! in the grounded extension.

mod explain;
mod mining;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::af::{
    self, AfError, ArgumentId, ArgumentationFramework, FrameworkBuilder, GroundedResult,
};
use crate::characterisation::{
    default_characterisation, Case, Characterisation, CharacterisationError, CharacterisationKind,
    Outcome,
};

pub use explain::{explain, explain_with, Explanation, Move, MoveKind, OutcomeNames};
use mining::CasebaseIndex;

pub const DEFAULT_ARGUMENT: &str = "default";
pub const NEW_ARGUMENT: &str = "N";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AacbrError {
    #[error("case {index} ({provenance}) is a {found} characterisation in a {expected} casebase")]
    CaseKind {
        index: usize,
        provenance: String,
        expected: CharacterisationKind,
        found: CharacterisationKind,
    },
    #[error(transparent)]
    Characterisation(#[from] CharacterisationError),
    #[error(transparent)]
    Framework(#[from] AfError),
}

#[derive(Deserialize)]
struct CasebaseRepr {
    kind: CharacterisationKind,
    cases: Vec<Case>,
}

/// Binary-outcome cases sharing one characterisation kind.
///
/// Case-to-case relations do not depend on the query, so they are mined once
/// on first use and reused by every prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CasebaseRepr")]
pub struct Casebase {
    kind: CharacterisationKind,
    cases: Vec<Case>,
    #[serde(skip)]
    index: OnceLock<CasebaseIndex>,
}

impl TryFrom<CasebaseRepr> for Casebase {
    type Error = AacbrError;

    fn try_from(repr: CasebaseRepr) -> Result<Self, Self::Error> {
        Casebase::new(repr.kind, repr.cases)
    }
}

impl PartialEq for Casebase {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.cases == other.cases
    }
}

impl Casebase {
    pub fn new(kind: CharacterisationKind, cases: Vec<Case>) -> Result<Self, AacbrError> {
        for (index, case) in cases.iter().enumerate() {
            let found = case.characterisation.kind();
            if found != kind {
                return Err(AacbrError::CaseKind {
                    index,
                    provenance: case.provenance.clone(),
                    expected: kind,
                    found,
                });
            }
            if !(0.0..=1.0).contains(&case.confidence) {
                return Err(CharacterisationError::Confidence(case.confidence).into());
            }
        }
        Ok(Casebase {
            kind,
            cases,
            index: OnceLock::new(),
        })
    }

    pub fn empty(kind: CharacterisationKind) -> Self {
        Casebase {
            kind,
            cases: Vec::new(),
            index: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> CharacterisationKind {
        self.kind
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn default_characterisation(&self) -> Characterisation {
        default_characterisation(self.kind)
    }

    fn index(&self) -> &CasebaseIndex {
        self.index.get_or_init(|| CasebaseIndex::build(self))
    }

    /// Forces the case-to-case mining so that later predictions only pay for
    /// the new case.
    pub fn prepare(&self) {
        self.index();
    }

    fn check_query(&self, x_new: &Characterisation) -> Result<(), AacbrError> {
        if x_new.kind() != self.kind {
            return Err(CharacterisationError::KindMismatch(self.kind, x_new.kind()).into());
        }
        Ok(())
    }

    fn argument_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.cases.len() + 2);
        names.push(DEFAULT_ARGUMENT.to_string());
        names.extend(self.cases.iter().enumerate().map(|(i, c)| {
            if c.provenance.is_empty() {
                format!("case{}", i + 1)
            } else {
                c.provenance.clone()
            }
        }));
        names.push(NEW_ARGUMENT.to_string());
        names
    }
}

/// What an argument of a mined framework stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgumentRole {
    Default,
    /// Index into [`Casebase::cases`].
    Case(usize),
    New,
}

/// The framework mined for one query. Argument 0 is the default case,
/// arguments `1..=n` are the cases in casebase order and the last one is the
/// new case.
#[derive(Debug, Clone)]
pub struct MinedFramework<'a> {
    casebase: &'a Casebase,
    x_new: Characterisation,
    framework: ArgumentationFramework,
}

impl<'a> MinedFramework<'a> {
    pub fn framework(&self) -> &ArgumentationFramework {
        &self.framework
    }

    pub fn casebase(&self) -> &'a Casebase {
        self.casebase
    }

    pub fn new_characterisation(&self) -> &Characterisation {
        &self.x_new
    }

    pub fn default_id(&self) -> ArgumentId {
        ArgumentId(0)
    }

    pub fn new_case_id(&self) -> ArgumentId {
        ArgumentId(self.casebase.len() as u32 + 1)
    }

    pub fn role(&self, id: ArgumentId) -> ArgumentRole {
        match id.index() {
            0 => ArgumentRole::Default,
            i if i == self.casebase.len() + 1 => ArgumentRole::New,
            i => ArgumentRole::Case(i - 1),
        }
    }

    pub fn case_of(&self, id: ArgumentId) -> Option<&'a Case> {
        match self.role(id) {
            ArgumentRole::Case(i) => Some(&self.casebase.cases[i]),
            _ => None,
        }
    }

    pub fn characterisation_of(&self, id: ArgumentId) -> Characterisation {
        match self.role(id) {
            ArgumentRole::Default => self.casebase.default_characterisation(),
            ArgumentRole::Case(i) => self.casebase.cases[i].characterisation.clone(),
            ArgumentRole::New => self.x_new.clone(),
        }
    }

    pub fn outcome_of(&self, id: ArgumentId) -> Option<Outcome> {
        match self.role(id) {
            ArgumentRole::Default => Some(Outcome::Default),
            ArgumentRole::Case(i) => Some(self.casebase.cases[i].outcome),
            ArgumentRole::New => None,
        }
    }
}

fn mine<'a>(
    casebase: &'a Casebase,
    x_new: &Characterisation,
    with_supports: bool,
) -> Result<MinedFramework<'a>, AacbrError> {
    casebase.check_query(x_new)?;
    let index = casebase.index();
    let names = casebase.argument_names();
    let mut builder = FrameworkBuilder::with_capacity(names.len());
    for name in names {
        builder.add_argument(name);
    }
    let new_id = ArgumentId(casebase.len() as u32 + 1);
    builder.extend_attacks(
        index
            .attacks()
            .iter()
            .map(|&(a, b)| (ArgumentId(a), ArgumentId(b))),
    );
    builder.extend_attacks(index.irrelevant_to(x_new).map(|i| (new_id, ArgumentId(i))));
    if with_supports {
        builder.extend_supports(
            index
                .supports()
                .iter()
                .map(|&(a, b)| (ArgumentId(a), ArgumentId(b))),
        );
    }
    Ok(MinedFramework {
        casebase,
        x_new: x_new.clone(),
        framework: builder.build()?,
    })
}

/// Mines the attack-only framework for `x_new`.
pub fn mine_attacks<'a>(
    casebase: &'a Casebase,
    x_new: &Characterisation,
) -> Result<MinedFramework<'a>, AacbrError> {
    mine(casebase, x_new, false)
}

/// Same-outcome support pairs, as argument ids of any framework mined from
/// this casebase.
pub fn mine_supports(casebase: &Casebase) -> Vec<(ArgumentId, ArgumentId)> {
    casebase
        .index()
        .supports()
        .iter()
        .map(|&(a, b)| (ArgumentId(a), ArgumentId(b)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Prediction<'a> {
    pub outcome: Outcome,
    pub grounded: GroundedResult,
    /// Mined framework, carrying supports when they were requested.
    pub framework: MinedFramework<'a>,
    effective: Option<ArgumentationFramework>,
}

impl Prediction<'_> {
    /// The framework the grounded extension was computed on: the mined one
    /// with supports folded into attacks.
    pub fn effective_framework(&self) -> &ArgumentationFramework {
        self.effective.as_ref().unwrap_or(&self.framework.framework)
    }
}

impl fmt::Display for Prediction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outcome)
    }
}

pub fn predict<'a>(
    casebase: &'a Casebase,
    x_new: &Characterisation,
    use_supports: bool,
) -> Result<Prediction<'a>, AacbrError> {
    let framework = mine(casebase, x_new, use_supports)?;
    let effective = if use_supports && !framework.framework.supports().is_empty() {
        Some(af::effective_attacks(&framework.framework)?)
    } else {
        None
    };
    let grounded = af::grounded(effective.as_ref().unwrap_or(&framework.framework));
    let outcome = if grounded.contains(framework.default_id()) {
        Outcome::Default
    } else {
        Outcome::NonDefault
    };
    Ok(Prediction {
        outcome,
        grounded,
        framework,
        effective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(fs: &[&str]) -> Characterisation {
        Characterisation::set(fs.iter().copied())
    }

    fn case(fs: &[&str], outcome: Outcome, name: &str) -> Case {
        Case::new(set(fs), outcome, 1.0, name).unwrap()
    }

    fn pairs(mined: &MinedFramework<'_>) -> Vec<(String, String)> {
        let af = mined.framework();
        let mut v: Vec<_> = af
            .attacks()
            .iter()
            .map(|&(a, b)| (af.name(a).to_string(), af.name(b).to_string()))
            .collect();
        v.sort();
        v
    }

    fn p(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    pub(crate) fn worked_example() -> (Casebase, Characterisation) {
        use Outcome::*;
        let cb = Casebase::new(
            CharacterisationKind::Set,
            vec![
                case(&["l_cy"], NonDefault, "C1"),
                case(&["l_cy", "l_cu", "s_sp"], NonDefault, "C2"),
                case(&["l_cy", "l_cu"], Default, "C3"),
                case(&["s_sp"], NonDefault, "C4"),
            ],
        )
        .unwrap();
        (cb, set(&["l_cy", "l_cu", "cu"]))
    }

    #[test]
    fn worked_example_attacks_and_prediction() {
        let (cb, x) = worked_example();
        let mined = mine_attacks(&cb, &x).unwrap();
        let mut expected = vec![
            p("C1", "default"),
            p("C3", "C1"),
            p("C2", "C3"),
            p("C4", "default"),
            p("N", "C2"),
            p("N", "C4"),
        ];
        expected.sort();
        assert_eq!(pairs(&mined), expected);

        let pred = predict(&cb, &x, false).unwrap();
        assert_eq!(pred.outcome, Outcome::Default);
        let af = pred.effective_framework();
        let mut ext: Vec<_> = pred
            .grounded
            .extension()
            .iter()
            .map(|&i| af.name(i))
            .collect();
        ext.sort();
        assert_eq!(ext, ["C3", "N", "default"]);
    }

    #[test]
    fn empty_casebase() {
        let cb = Casebase::empty(CharacterisationKind::Count);
        let x = Characterisation::count([("cu", 3)]).unwrap();
        let mined = mine_attacks(&cb, &x).unwrap();
        assert_eq!(mined.framework().len(), 2);
        assert!(mined.framework().attacks().is_empty());
        assert_eq!(predict(&cb, &x, true).unwrap().outcome, Outcome::Default);
    }

    #[test]
    fn minimality_blocks_long_attack() {
        use Outcome::*;
        let cb = Casebase::new(
            CharacterisationKind::Set,
            vec![
                case(&["cu"], NonDefault, "a"),
                case(&["cu", "sp"], Default, "b"),
                case(&["cu", "sp", "cy"], NonDefault, "c"),
            ],
        )
        .unwrap();
        let mined = mine_attacks(&cb, &set(&["cu", "sp", "cy"])).unwrap();
        assert_eq!(
            pairs(&mined),
            vec![p("a", "default"), p("b", "a"), p("c", "b")]
        );
    }

    #[test]
    fn supports_follow_same_outcome_minimal_pairs() {
        use Outcome::*;
        let cb = Casebase::new(
            CharacterisationKind::Set,
            vec![
                case(&["cu"], Default, "a"),
                case(&["cu", "sp"], Default, "b"),
            ],
        )
        .unwrap();
        let sup = mine_supports(&cb);
        assert_eq!(
            sup,
            vec![
                (ArgumentId(1), ArgumentId(0)),
                (ArgumentId(2), ArgumentId(1))
            ]
        );

        let chain = Casebase::new(
            CharacterisationKind::Set,
            vec![
                case(&["cu"], Default, "a"),
                case(&["cu", "sp"], Default, "b"),
                case(&["cu", "sp", "cy"], Default, "c"),
            ],
        )
        .unwrap();
        assert_eq!(
            mine_supports(&chain),
            vec![
                (ArgumentId(1), ArgumentId(0)),
                (ArgumentId(2), ArgumentId(1)),
                (ArgumentId(3), ArgumentId(2))
            ]
        );

        let flat = Casebase::new(
            CharacterisationKind::Set,
            vec![
                case(&["cu"], NonDefault, "a"),
                case(&["sp"], NonDefault, "b"),
            ],
        )
        .unwrap();
        assert!(mine_supports(&flat).is_empty());
    }

    #[test]
    fn supports_change_prediction_through_indirect_attack() {
        use Outcome::*;
        // b → default is blocked by minimality (a interposes); with supports,
        // c supports a and inherits a's attack on the default.
        let cb = Casebase::new(
            CharacterisationKind::Set,
            vec![
                case(&["cu"], NonDefault, "a"),
                case(&["cu", "sp"], Default, "b"),
                case(&["cu", "cy"], NonDefault, "c"),
            ],
        )
        .unwrap();
        // Every case is relevant: b defeats a, which alone would let the
        // default stand; c's inherited attack is unopposed.
        let x = set(&["cu", "sp", "cy"]);
        let plain = predict(&cb, &x, false).unwrap();
        let supported = predict(&cb, &x, true).unwrap();
        assert_eq!(plain.outcome, Outcome::Default);
        assert_eq!(supported.outcome, Outcome::NonDefault);
        let eff = supported.effective_framework();
        assert!(eff.attacks_pair(ArgumentId(3), ArgumentId(0)));
    }

    #[test]
    fn kind_mismatch() {
        let (cb, _) = worked_example();
        let x = Characterisation::count([("cu", 1)]).unwrap();
        assert!(matches!(
            mine_attacks(&cb, &x),
            Err(AacbrError::Characterisation(_))
        ));
        let bad = Casebase::new(
            CharacterisationKind::Count,
            vec![case(&["cu"], Outcome::Default, "a")],
        );
        assert!(matches!(bad, Err(AacbrError::CaseKind { index: 0, .. })));
    }

    #[test]
    fn contradictory_duplicates_do_not_attack_each_other() {
        use Outcome::*;
        let cb = Casebase::new(
            CharacterisationKind::Set,
            vec![case(&["cu"], Default, "a"), case(&["cu"], NonDefault, "b")],
        )
        .unwrap();
        let mined = mine_attacks(&cb, &set(&["cu"])).unwrap();
        assert_eq!(pairs(&mined), vec![p("b", "default")]);
    }

    #[test]
    fn casebase_serde_round_trip() {
        let (cb, _) = worked_example();
        let json = serde_json::to_string(&cb).unwrap();
        let back: Casebase = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cb);
        let bad = json.replace(r#""kind":"set","cases""#, r#""kind":"count","cases""#);
        assert!(serde_json::from_str::<Casebase>(&bad).is_err());
    }
}
