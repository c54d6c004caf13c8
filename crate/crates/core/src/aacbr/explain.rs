use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ArgumentRole, Prediction};
use crate::af::{ArgumentId, Label};
use crate::characterisation::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    /// An argument for the other outcome attacks the target.
    Challenge,
    /// An accepted argument knocks out the target.
    Defeat,
    /// The new case knocks out an irrelevant target.
    Dismiss,
    /// The speaker's attack on the target goes unanswered.
    Stand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub speaker: String,
    #[serde(rename = "move")]
    pub kind: MoveKind,
    pub target: String,
    #[serde(skip)]
    pub speaker_id: ArgumentId,
    #[serde(skip)]
    pub target_id: ArgumentId,
}

/// Display names for the two outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeNames {
    pub default: String,
    pub non_default: String,
}

impl Default for OutcomeNames {
    fn default() -> Self {
        OutcomeNames {
            default: Outcome::Default.to_string(),
            non_default: Outcome::NonDefault.to_string(),
        }
    }
}

impl OutcomeNames {
    pub fn of(&self, outcome: Outcome) -> &str {
        match outcome {
            Outcome::Default => &self.default,
            Outcome::NonDefault => &self.non_default,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub outcome: Outcome,
    pub moves: Vec<Move>,
    pub text: String,
}

pub fn explain(prediction: &Prediction<'_>) -> Explanation {
    explain_with(prediction, &OutcomeNames::default())
}

/// Walks the debate outward from the default case, one grounded round per
/// level. Every argument is tagged with its grounded label, e.g. `C3 [IN]`.
pub fn explain_with(prediction: &Prediction<'_>, names: &OutcomeNames) -> Explanation {
    let mut narrator = Narrator {
        prediction,
        names,
        moves: Vec::new(),
        text: String::new(),
        visited: BTreeSet::new(),
    };
    narrator.run();
    Explanation {
        outcome: prediction.outcome,
        moves: narrator.moves,
        text: narrator.text,
    }
}

struct Narrator<'p, 'a> {
    prediction: &'p Prediction<'a>,
    names: &'p OutcomeNames,
    moves: Vec<Move>,
    text: String,
    visited: BTreeSet<ArgumentId>,
}

impl Narrator<'_, '_> {
    fn tag(&self, id: ArgumentId) -> String {
        let af = self.prediction.effective_framework();
        format!(
            "{} [{}] {}",
            af.name(id),
            self.prediction.grounded.label(id),
            self.prediction.framework.characterisation_of(id)
        )
    }

    fn name(&self, id: ArgumentId) -> String {
        self.prediction.effective_framework().name(id).to_string()
    }

    fn outcome_name(&self, id: ArgumentId) -> &str {
        match self.prediction.framework.outcome_of(id) {
            Some(y) => self.names.of(y),
            None => "?",
        }
    }

    fn push(&mut self, speaker: ArgumentId, kind: MoveKind, target: ArgumentId) {
        self.moves.push(Move {
            speaker: self.name(speaker),
            kind,
            target: self.name(target),
            speaker_id: speaker,
            target_id: target,
        });
    }

    fn run(&mut self) {
        let mined = &self.prediction.framework;
        let default = mined.default_id();
        let _ = writeln!(
            self.text,
            "The debate starts with {}, the default rule arguing for {}.",
            self.tag(default),
            self.names.default
        );
        let depth_cap = self.prediction.grounded.layers().len().max(1);
        if self
            .prediction
            .effective_framework()
            .attackers_of(default)
            .is_empty()
        {
            let _ = writeln!(
                self.text,
                "No case challenges it, so the default stands unchallenged."
            );
        } else {
            self.visited.insert(default);
            self.answer(default, 0, depth_cap);
        }
        let x_new = mined.new_characterisation();
        let verdict = if self.prediction.outcome == Outcome::Default {
            "accepted"
        } else {
            "rejected"
        };
        let _ = writeln!(
            self.text,
            "The default is {verdict}, so the new case {} {} is predicted as {}.",
            self.name(mined.new_case_id()),
            x_new,
            self.names.of(self.prediction.outcome)
        );
    }

    /// Narrates every attack on `target` and how it was resolved.
    fn answer(&mut self, target: ArgumentId, depth: usize, depth_cap: usize) {
        let prediction = self.prediction;
        let af = prediction.effective_framework();
        let mined = &prediction.framework;
        let new_id = mined.new_case_id();
        for &attacker in af.attackers_of(target) {
            if mined.role(attacker) == ArgumentRole::New {
                continue;
            }
            let attacker_tag = self.tag(attacker);
            let target_name = self.name(target);
            let claim = self.outcome_name(attacker).to_string();
            self.push(attacker, MoveKind::Challenge, target);

            if af.attacks_pair(new_id, attacker) {
                let surplus: Vec<String> = mined
                    .characterisation_of(attacker)
                    .surplus_over(mined.new_characterisation())
                    .into_iter()
                    .map(|(f, n)| {
                        if n > 1 {
                            format!("{n} more {f}")
                        } else {
                            f.to_string()
                        }
                    })
                    .collect();
                let _ = writeln!(
                    self.text,
                    "{attacker_tag} challenges {target_name} arguing for {claim}, but it is dismissed as \
                     irrelevant since it contains {} which the new case lacks.",
                    surplus.join(", ")
                );
                self.push(new_id, MoveKind::Dismiss, attacker);
                continue;
            }

            match prediction.grounded.label(attacker) {
                Label::Out => {
                    // Earliest accepted attacker: the one the grounded
                    // iteration used to knock this challenge out.
                    let defeater = af
                        .attackers_of(attacker)
                        .iter()
                        .copied()
                        .filter(|&d| prediction.grounded.contains(d))
                        .min_by_key(|&d| (prediction.grounded.layer_of(d), d))
                        .expect("an OUT argument has an IN attacker");
                    let _ = writeln!(
                        self.text,
                        "{attacker_tag} challenges {target_name} arguing for {claim}."
                    );
                    let defeater_tag = self.tag(defeater);
                    let defeater_claim = self.outcome_name(defeater).to_string();
                    let attacker_name = self.name(attacker);
                    let _ = writeln!(
                        self.text,
                        "{defeater_tag} defeats {attacker_name} arguing for {defeater_claim}."
                    );
                    self.push(defeater, MoveKind::Defeat, attacker);
                    if depth + 1 < depth_cap && self.visited.insert(defeater) {
                        self.answer(defeater, depth + 1, depth_cap);
                    }
                }
                Label::In => {
                    let _ = writeln!(
                        self.text,
                        "{attacker_tag} challenges {target_name} arguing for {claim} and stands unrefuted."
                    );
                    self.push(attacker, MoveKind::Stand, target);
                }
                Label::Undec => {
                    let _ = writeln!(
                        self.text,
                        "{attacker_tag} challenges {target_name} arguing for {claim}; the dispute is undecided."
                    );
                }
            }
        }
    }
}
