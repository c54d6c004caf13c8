//! Symbolic characterisations of scenes and the exceptionality orders over
//! them.
//!
//! Objects are described by a fixed set of attribute slots. A
//! [`SuperFeature`] assigns values to some of those slots (always including
//! the shape); a scene is characterised by mapping every object onto the most
//! specific active super-feature it matches and then either collecting the
//! distinct names ([`CharacterisationKind::Set`]) or counting them
//! ([`CharacterisationKind::Count`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{ObjectRecord, SceneRecord};

pub const SLOT_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Size,
    #[serde(rename = "color")]
    Colour,
    Material,
    Shape,
    Side,
}

impl Slot {
    pub const ALL: [Slot; SLOT_COUNT] = [
        Slot::Size,
        Slot::Colour,
        Slot::Material,
        Slot::Shape,
        Slot::Side,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::Size => "size",
            Slot::Colour => "color",
            Slot::Material => "material",
            Slot::Shape => "shape",
            Slot::Side => "side",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharacterisationError {
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("scene {image_id}: object {object} has {slot} value {value:?} outside the vocabulary")]
    UnknownValue {
        image_id: String,
        object: usize,
        slot: Slot,
        value: String,
    },
    #[error("position features requested but the vocabulary has no side slot")]
    NoSideSlot,
    #[error("unknown super-feature {0:?}")]
    UnknownFeature(String),
    #[error("super-feature {0:?} does not assign a shape")]
    MissingShape(String),
    #[error("super-feature {0:?} uses the side slot but position features are disabled")]
    SideWithoutPosition(String),
    #[error("feature selection is empty")]
    EmptySelection,
    #[error("mined feature selections are only available after training")]
    NeedsTrainingData,
    #[error("cannot compare a {0} characterisation with a {1} characterisation")]
    KindMismatch(CharacterisationKind, CharacterisationKind),
    #[error("count for feature {0:?} must be positive")]
    ZeroCount(String),
    #[error("case confidence {0} is outside [0, 1]")]
    Confidence(f64),
}

/// Value codes for every slot. Codes must be unique across all slots so that
/// super-feature names parse unambiguously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeVocabulary {
    pub size: Vec<String>,
    #[serde(rename = "color")]
    pub colour: Vec<String>,
    pub material: Vec<String>,
    pub shape: Vec<String>,
    /// Either empty (no position slot) or `[left, right]`.
    #[serde(default)]
    pub side: Vec<String>,
    /// Objects with `x` strictly below this value are on the left.
    #[serde(default = "default_midpoint")]
    pub midpoint: f64,
}

fn default_midpoint() -> f64 {
    0.5
}

fn codes(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl AttributeVocabulary {
    /// CLEVR attribute codes without the position slot.
    pub fn clevr() -> Self {
        AttributeVocabulary {
            size: codes(&["sm", "l"]),
            colour: codes(&["gry", "red", "blu", "grn", "brn", "pur", "cyn", "yel"]),
            material: codes(&["m", "ru"]),
            shape: codes(&["cu", "sp", "cy"]),
            side: Vec::new(),
            midpoint: default_midpoint(),
        }
    }

    pub fn with_side(mut self) -> Self {
        self.side = codes(&["left", "right"]);
        self
    }

    pub fn values(&self, slot: Slot) -> &[String] {
        match slot {
            Slot::Size => &self.size,
            Slot::Colour => &self.colour,
            Slot::Material => &self.material,
            Slot::Shape => &self.shape,
            Slot::Side => &self.side,
        }
    }

    pub fn has_side(&self) -> bool {
        !self.side.is_empty()
    }

    /// Slots with at least one value, in canonical order.
    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        Slot::ALL
            .into_iter()
            .filter(|&s| !self.values(s).is_empty())
    }

    pub fn validate(&self) -> Result<(), CharacterisationError> {
        let bad = |msg: String| Err(CharacterisationError::InvalidVocabulary(msg));
        if self.shape.is_empty() {
            return bad("the shape slot must have at least one value".into());
        }
        if !self.side.is_empty() && self.side.len() != 2 {
            return bad("the side slot must list exactly [left, right]".into());
        }
        if !self.midpoint.is_finite() {
            return bad("midpoint must be finite".into());
        }
        let mut seen = std::collections::HashSet::new();
        for slot in Slot::ALL {
            let values = self.values(slot);
            if values.len() > u8::MAX as usize {
                return bad(format!("too many values for {slot}"));
            }
            for code in values {
                if code.is_empty() || code.contains('_') {
                    return bad(format!(
                        "code {code:?} must be non-empty and contain no underscore"
                    ));
                }
                if !seen.insert(code.as_str()) {
                    return bad(format!("code {code:?} appears more than once"));
                }
            }
        }
        Ok(())
    }

    pub fn code_index(&self, slot: Slot, code: &str) -> Option<u8> {
        self.values(slot)
            .iter()
            .position(|c| c == code)
            .map(|i| i as u8)
    }

    fn lookup_code(&self, code: &str) -> Option<(Slot, u8)> {
        Slot::ALL
            .into_iter()
            .find_map(|slot| self.code_index(slot, code).map(|i| (slot, i)))
    }

    /// Resolves an object's attributes to value indices. The side entry is
    /// filled only when `use_position` is set.
    pub fn encode_object(
        &self,
        image_id: &str,
        object_index: usize,
        object: &ObjectRecord,
        use_position: bool,
    ) -> Result<[Option<u8>; SLOT_COUNT], CharacterisationError> {
        let mut out = [None; SLOT_COUNT];
        let fields = [
            (Slot::Size, &object.size),
            (Slot::Colour, &object.colour),
            (Slot::Material, &object.material),
            (Slot::Shape, &object.shape),
        ];
        for (slot, value) in fields {
            let idx = self.code_index(slot, value).ok_or_else(|| {
                CharacterisationError::UnknownValue {
                    image_id: image_id.to_string(),
                    object: object_index,
                    slot,
                    value: value.clone(),
                }
            })?;
            out[slot.index()] = Some(idx);
        }
        if use_position {
            if !self.has_side() {
                return Err(CharacterisationError::NoSideSlot);
            }
            out[Slot::Side.index()] = Some(if object.x < self.midpoint { 0 } else { 1 });
        }
        Ok(out)
    }
}

/// A partial assignment of attribute values.
///
/// The derived ordering (per slot in canonical order, unassigned before
/// assigned, then by value index) is the canonical enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SuperFeature {
    assignment: [Option<u8>; SLOT_COUNT],
}

impl SuperFeature {
    pub fn new(assignment: [Option<u8>; SLOT_COUNT]) -> Self {
        SuperFeature { assignment }
    }

    pub fn assignment(&self) -> &[Option<u8>; SLOT_COUNT] {
        &self.assignment
    }

    pub fn get(&self, slot: Slot) -> Option<u8> {
        self.assignment[slot.index()]
    }

    pub fn specificity(&self) -> usize {
        self.assignment.iter().filter(|v| v.is_some()).count()
    }

    /// Assigned slots as a bitmask with the first canonical slot in the
    /// highest bit, so a larger mask assigns earlier slots.
    fn slot_mask(&self) -> u8 {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .fold(0u8, |m, (i, _)| m | (1 << (SLOT_COUNT - 1 - i)))
    }

    pub fn matches(&self, object: &[Option<u8>; SLOT_COUNT]) -> bool {
        self.assignment
            .iter()
            .zip(object)
            .all(|(want, have)| want.is_none() || want == have)
    }

    /// `self` assigns a superset of `other`'s slots with the same values.
    pub fn refines(&self, other: &SuperFeature) -> bool {
        self != other
            && other
                .assignment
                .iter()
                .zip(&self.assignment)
                .all(|(o, s)| o.is_none() || o == s)
    }

    pub fn name(&self, vocab: &AttributeVocabulary) -> String {
        Slot::ALL
            .into_iter()
            .filter_map(|slot| {
                self.get(slot)
                    .map(|i| vocab.values(slot)[i as usize].as_str())
            })
            .collect::<Vec<_>>()
            .join("_")
    }

    /// Parses a canonical name; codes must appear in slot order.
    pub fn parse(name: &str, vocab: &AttributeVocabulary) -> Result<Self, CharacterisationError> {
        let unknown = || CharacterisationError::UnknownFeature(name.to_string());
        let mut assignment = [None; SLOT_COUNT];
        let mut last: Option<usize> = None;
        for code in name.split('_') {
            let (slot, idx) = vocab.lookup_code(code).ok_or_else(unknown)?;
            if last.is_some_and(|l| l >= slot.index()) {
                return Err(unknown());
            }
            last = Some(slot.index());
            assignment[slot.index()] = Some(idx);
        }
        Ok(SuperFeature { assignment })
    }
}

/// Every super-feature over the vocabulary's slots that assigns the shape and
/// at most `max_slots` slots in total, in canonical order.
pub fn enumerate_superfeatures(vocab: &AttributeVocabulary, max_slots: usize) -> Vec<SuperFeature> {
    let optional: Vec<Slot> = vocab.slots().filter(|&s| s != Slot::Shape).collect();
    let mut out = Vec::new();
    for subset in 0u32..(1 << optional.len()) {
        if subset.count_ones() as usize + 1 > max_slots {
            continue;
        }
        let mut slots: Vec<Slot> = optional
            .iter()
            .enumerate()
            .filter(|(i, _)| subset & (1 << i) != 0)
            .map(|(_, &s)| s)
            .collect();
        slots.push(Slot::Shape);
        out.extend(full_assignments(vocab, &slots));
    }
    out.sort();
    out
}

/// Every candidate feature an object matches: its shape plus any subset of
/// its other assigned slots.
fn generalisations(object: &[Option<u8>; SLOT_COUNT]) -> impl Iterator<Item = SuperFeature> + '_ {
    let optional: Vec<Slot> = Slot::ALL
        .into_iter()
        .filter(|&s| s != Slot::Shape && object[s.index()].is_some())
        .collect();
    (0u32..1 << optional.len()).map(move |mask| {
        let mut a = [None; SLOT_COUNT];
        a[Slot::Shape.index()] = object[Slot::Shape.index()];
        for (i, &slot) in optional.iter().enumerate() {
            if mask & (1 << i) != 0 {
                a[slot.index()] = object[slot.index()];
            }
        }
        SuperFeature::new(a)
    })
}

/// Feature selection from labelled scenes: the `top` super-features whose
/// presence rate differs most between the two groups (fewer slots first on
/// ties), followed by every shape-only feature so that no object goes
/// unmatched.
pub fn mine_features(
    vocab: &AttributeVocabulary,
    use_position: bool,
    top: usize,
    groups: [&[&SceneRecord]; 2],
) -> Result<Vec<SuperFeature>, CharacterisationError> {
    vocab.validate()?;
    let mut presence: [HashMap<SuperFeature, u64>; 2] = Default::default();
    for (g, scenes) in groups.iter().enumerate() {
        for scene in scenes.iter() {
            let mut matched = HashSet::new();
            for (i, object) in scene.objects.iter().enumerate() {
                let encoded = vocab.encode_object(&scene.image_id, i, object, use_position)?;
                matched.extend(generalisations(&encoded));
            }
            for f in matched {
                *presence[g].entry(f).or_insert(0) += 1;
            }
        }
    }
    let (n0, n1) = (groups[0].len() as u64, groups[1].len() as u64);
    let mut ranked: Vec<(u64, SuperFeature)> = presence[0]
        .keys()
        .chain(presence[1].keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|f| f.specificity() > 1)
        .map(|f| {
            let c0 = presence[0].get(f).copied().unwrap_or(0);
            let c1 = presence[1].get(f).copied().unwrap_or(0);
            // |c0/n0 - c1/n1| over the common denominator n0 * n1.
            ((c0 * n1).abs_diff(c1 * n0), *f)
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.1.specificity().cmp(&b.1.specificity()))
            .then(a.1.cmp(&b.1))
    });
    let mut features: Vec<SuperFeature> = ranked.into_iter().take(top).map(|(_, f)| f).collect();
    features.extend((0..vocab.values(Slot::Shape).len() as u8).map(|v| {
        let mut a = [None; SLOT_COUNT];
        a[Slot::Shape.index()] = Some(v);
        SuperFeature::new(a)
    }));
    features.sort();
    features.dedup();
    Ok(features)
}

/// All assignments giving every slot in `slots` a value.
fn full_assignments(vocab: &AttributeVocabulary, slots: &[Slot]) -> Vec<SuperFeature> {
    let mut acc = vec![[None; SLOT_COUNT]];
    for &slot in slots {
        let n = vocab.values(slot).len() as u8;
        acc = acc
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |v| {
                    let mut a = a;
                    a[slot.index()] = Some(v);
                    a
                })
            })
            .collect();
    }
    acc.into_iter().map(SuperFeature::new).collect()
}

/// How a model chooses its features, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpec {
    /// Every full assignment over these slots. Shape is always added, and the
    /// side slot too when the model is position-aware.
    Slots(Vec<Slot>),
    /// Explicit super-feature names.
    Features(Vec<String>),
    /// No combination: each attribute value is a feature of its own.
    Atomic,
    /// Chosen from training data by [`mine_features`]; replaced by the
    /// explicit list when a model is trained.
    Mined { top: usize },
}

impl FeatureSpec {
    pub fn resolve(
        &self,
        vocab: &AttributeVocabulary,
        use_position: bool,
    ) -> Result<FeatureSelection, CharacterisationError> {
        vocab.validate()?;
        if use_position && !vocab.has_side() {
            return Err(CharacterisationError::NoSideSlot);
        }
        match self {
            FeatureSpec::Mined { .. } => Err(CharacterisationError::NeedsTrainingData),
            FeatureSpec::Atomic => Ok(FeatureSelection {
                vocab: vocab.clone(),
                features: Vec::new(),
                atomic: true,
            }),
            FeatureSpec::Slots(slots) => {
                let mut slots: Vec<Slot> =
                    slots.iter().copied().filter(|&s| s != Slot::Side).collect();
                slots.push(Slot::Shape);
                if use_position {
                    slots.push(Slot::Side);
                }
                slots.sort();
                slots.dedup();
                FeatureSelection::new(vocab.clone(), full_assignments(vocab, &slots))
            }
            FeatureSpec::Features(names) => {
                let features = names
                    .iter()
                    .map(|n| {
                        let f = SuperFeature::parse(n, vocab)?;
                        if f.get(Slot::Shape).is_none() {
                            return Err(CharacterisationError::MissingShape(n.clone()));
                        }
                        if f.get(Slot::Side).is_some() && !use_position {
                            return Err(CharacterisationError::SideWithoutPosition(n.clone()));
                        }
                        Ok(f)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                FeatureSelection::new(vocab.clone(), features)
            }
        }
    }
}

/// The active feature set of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSelection {
    vocab: AttributeVocabulary,
    features: Vec<SuperFeature>,
    atomic: bool,
}

impl FeatureSelection {
    pub fn new(
        vocab: AttributeVocabulary,
        mut features: Vec<SuperFeature>,
    ) -> Result<Self, CharacterisationError> {
        features.sort();
        features.dedup();
        if features.is_empty() {
            return Err(CharacterisationError::EmptySelection);
        }
        Ok(FeatureSelection {
            vocab,
            features,
            atomic: false,
        })
    }

    pub fn atomic(vocab: AttributeVocabulary) -> Self {
        FeatureSelection {
            vocab,
            features: Vec::new(),
            atomic: true,
        }
    }

    pub fn vocabulary(&self) -> &AttributeVocabulary {
        &self.vocab
    }

    pub fn features(&self) -> &[SuperFeature] {
        &self.features
    }

    pub fn is_atomic(&self) -> bool {
        self.atomic
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name(&self.vocab)).collect()
    }

    /// Most specific matching feature: most assigned slots first, then the
    /// one whose assigned slots come earliest in canonical order.
    pub fn best_match(&self, object: &[Option<u8>; SLOT_COUNT]) -> Option<&SuperFeature> {
        self.features
            .iter()
            .filter(|f| f.matches(object))
            .max_by_key(|f| (f.specificity(), f.slot_mask()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharacterisationKind {
    Set,
    Count,
}

impl fmt::Display for CharacterisationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CharacterisationKind::Set => "set",
            CharacterisationKind::Count => "count",
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CharacterisationRepr {
    Set { features: Vec<String> },
    Count { counts: BTreeMap<String, u32> },
}

/// A set of feature names, or a feature → positive count map.
///
/// Set characterisations store every present feature with count 1, so both
/// orders reduce to the same component-wise comparison with absent features
/// read as zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CharacterisationRepr", into = "CharacterisationRepr")]
pub struct Characterisation {
    kind: CharacterisationKind,
    counts: BTreeMap<String, u32>,
}

impl TryFrom<CharacterisationRepr> for Characterisation {
    type Error = CharacterisationError;

    fn try_from(repr: CharacterisationRepr) -> Result<Self, Self::Error> {
        match repr {
            CharacterisationRepr::Set { features } => Ok(Characterisation::set(features)),
            CharacterisationRepr::Count { counts } => Characterisation::count(counts),
        }
    }
}

impl From<Characterisation> for CharacterisationRepr {
    fn from(c: Characterisation) -> Self {
        match c.kind {
            CharacterisationKind::Set => CharacterisationRepr::Set {
                features: c.counts.into_keys().collect(),
            },
            CharacterisationKind::Count => CharacterisationRepr::Count { counts: c.counts },
        }
    }
}

impl Characterisation {
    pub fn set<S: Into<String>>(features: impl IntoIterator<Item = S>) -> Self {
        Characterisation {
            kind: CharacterisationKind::Set,
            counts: features.into_iter().map(|f| (f.into(), 1)).collect(),
        }
    }

    pub fn count<S: Into<String>>(
        counts: impl IntoIterator<Item = (S, u32)>,
    ) -> Result<Self, CharacterisationError> {
        let mut map = BTreeMap::new();
        for (name, n) in counts {
            let name = name.into();
            if n == 0 {
                return Err(CharacterisationError::ZeroCount(name));
            }
            *map.entry(name).or_insert(0) += n;
        }
        Ok(Characterisation {
            kind: CharacterisationKind::Count,
            counts: map,
        })
    }

    /// The least element of the order for `kind`.
    pub fn default_for(kind: CharacterisationKind) -> Self {
        Characterisation {
            kind,
            counts: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> CharacterisationKind {
        self.kind
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// Present features with their multiplicities (1 for sets).
    pub fn counts(&self) -> &BTreeMap<String, u32> {
        &self.counts
    }

    pub fn count_of(&self, feature: &str) -> u32 {
        self.counts.get(feature).copied().unwrap_or(0)
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    fn check_kind(&self, other: &Self) -> Result<(), CharacterisationError> {
        if self.kind != other.kind {
            return Err(CharacterisationError::KindMismatch(self.kind, other.kind));
        }
        Ok(())
    }

    /// `self ≽ other`: every feature count of `other` is matched or exceeded.
    pub fn at_least(&self, other: &Self) -> Result<bool, CharacterisationError> {
        self.check_kind(other)?;
        Ok(other.counts.len() <= self.counts.len()
            && other.counts.iter().all(|(f, &n)| self.count_of(f) >= n))
    }

    /// Features where `self` exceeds `other`, with the surplus.
    pub fn surplus_over(&self, other: &Self) -> Vec<(&str, u32)> {
        self.counts
            .iter()
            .filter_map(|(f, &n)| {
                let m = other.count_of(f);
                (n > m).then(|| (f.as_str(), n - m))
            })
            .collect()
    }
}

impl fmt::Display for Characterisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return f.write_str("∅");
        }
        match self.kind {
            CharacterisationKind::Set => {
                let names: Vec<_> = self.counts.keys().map(String::as_str).collect();
                write!(f, "{{{}}}", names.join(", "))
            }
            CharacterisationKind::Count => {
                let parts: Vec<_> = self
                    .counts
                    .iter()
                    .map(|(k, v)| format!("{k}:{v}"))
                    .collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

/// Strict exceptionality: `a ≻ b`.
pub fn more_exceptional(
    a: &Characterisation,
    b: &Characterisation,
) -> Result<bool, CharacterisationError> {
    Ok(a.at_least(b)? && a != b)
}

/// Regular irrelevance: the new case is not at least as exceptional as the
/// case.
pub fn irrelevant(
    x_new: &Characterisation,
    x_case: &Characterisation,
) -> Result<bool, CharacterisationError> {
    Ok(!x_new.at_least(x_case)?)
}

pub fn default_characterisation(kind: CharacterisationKind) -> Characterisation {
    Characterisation::default_for(kind)
}

/// Characterises a scene under a feature selection.
///
/// Objects that match no active feature contribute nothing.
pub fn characterise(
    scene: &SceneRecord,
    selection: &FeatureSelection,
    kind: CharacterisationKind,
    use_position: bool,
) -> Result<Characterisation, CharacterisationError> {
    let vocab = &selection.vocab;
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for (i, object) in scene.objects.iter().enumerate() {
        let encoded = vocab.encode_object(&scene.image_id, i, object, use_position)?;
        if selection.atomic {
            for slot in Slot::ALL {
                if let Some(v) = encoded[slot.index()] {
                    *counts
                        .entry(vocab.values(slot)[v as usize].clone())
                        .or_insert(0) += 1;
                }
            }
            continue;
        }
        match selection.best_match(&encoded) {
            Some(feature) => *counts.entry(feature.name(vocab)).or_insert(0) += 1,
            None => log::debug!("{}: object {i} matches no active feature", scene.image_id),
        }
    }
    Ok(match kind {
        CharacterisationKind::Set => Characterisation::set(counts.into_keys()),
        CharacterisationKind::Count => Characterisation { kind, counts },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Default,
    NonDefault,
}

impl Outcome {
    pub fn opposite(self) -> Self {
        match self {
            Outcome::Default => Outcome::NonDefault,
            Outcome::NonDefault => Outcome::Default,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Default => "δ",
            Outcome::NonDefault => "δ̄",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub characterisation: Characterisation,
    pub outcome: Outcome,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
    pub provenance: String,
}

fn full_confidence() -> f64 {
    1.0
}

impl Case {
    pub fn new(
        characterisation: Characterisation,
        outcome: Outcome,
        confidence: f64,
        provenance: impl Into<String>,
    ) -> Result<Self, CharacterisationError> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(CharacterisationError::Confidence(confidence));
        }
        Ok(Case {
            characterisation,
            outcome,
            confidence,
            provenance: provenance.into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn object(size: &str, colour: &str, material: &str, shape: &str, x: f64) -> ObjectRecord {
        ObjectRecord {
            size: size.into(),
            colour: colour.into(),
            material: material.into(),
            shape: shape.into(),
            x,
            confidence: 1.0,
        }
    }

    fn scene(objects: Vec<ObjectRecord>) -> SceneRecord {
        SceneRecord {
            image_id: "img".into(),
            class_label: None,
            objects,
        }
    }

    fn selection(names: &[&str]) -> FeatureSelection {
        FeatureSpec::Features(names.iter().map(|s| s.to_string()).collect())
            .resolve(&AttributeVocabulary::clevr(), false)
            .unwrap()
    }

    fn count(pairs: &[(&str, u32)]) -> Characterisation {
        Characterisation::count(pairs.iter().map(|&(k, v)| (k, v))).unwrap()
    }

    #[test]
    fn clevr_vocabulary_is_valid() {
        AttributeVocabulary::clevr().validate().unwrap();
        AttributeVocabulary::clevr().with_side().validate().unwrap();
    }

    #[test]
    fn vocabulary_rejects_shared_codes() {
        let mut v = AttributeVocabulary::clevr();
        v.colour.push("l".into());
        assert!(v.validate().is_err());
        let mut v = AttributeVocabulary::clevr();
        v.shape.clear();
        assert!(v.validate().is_err());
    }

    #[test]
    fn small_metal_cube_and_small_sphere() {
        let s = scene(vec![
            object("sm", "red", "m", "cu", 0.2),
            object("sm", "blu", "ru", "sp", 0.7),
        ]);
        let c = characterise(
            &s,
            &selection(&["sm_m_cu", "sm_sp"]),
            CharacterisationKind::Set,
            false,
        )
        .unwrap();
        assert_eq!(c, Characterisation::set(["sm_m_cu", "sm_sp"]));
    }

    #[test]
    fn two_cubes_and_a_large_cylinder() {
        let s = scene(vec![
            object("sm", "red", "m", "cu", 0.1),
            object("l", "gry", "ru", "cu", 0.2),
            object("l", "gry", "m", "cy", 0.3),
        ]);
        let c = characterise(
            &s,
            &selection(&["cu", "l_cy"]),
            CharacterisationKind::Count,
            false,
        )
        .unwrap();
        assert_eq!(c, count(&[("cu", 2), ("l_cy", 1)]));
        assert_eq!(c.to_string(), "(cu:2, l_cy:1)");
    }

    #[test]
    fn empty_scene() {
        let sel = selection(&["cu"]);
        for kind in [CharacterisationKind::Set, CharacterisationKind::Count] {
            let c = characterise(&scene(vec![]), &sel, kind, false).unwrap();
            assert!(c.is_empty());
            assert_eq!(c.kind(), kind);
        }
    }

    #[test]
    fn most_specific_feature_wins() {
        let s = scene(vec![object("sm", "red", "m", "cu", 0.1)]);
        let c = characterise(
            &s,
            &selection(&["cu", "sm_cu", "sm_m_cu"]),
            CharacterisationKind::Set,
            false,
        )
        .unwrap();
        assert_eq!(c, Characterisation::set(["sm_m_cu"]));
    }

    #[test]
    fn equally_specific_tie_prefers_earlier_slots() {
        let s = scene(vec![object("sm", "red", "m", "cu", 0.1)]);
        let c = characterise(
            &s,
            &selection(&["m_cu", "sm_cu", "red_cu"]),
            CharacterisationKind::Set,
            false,
        )
        .unwrap();
        assert_eq!(c, Characterisation::set(["sm_cu"]));
    }

    #[test]
    fn unmatched_objects_are_dropped() {
        let s = scene(vec![
            object("sm", "red", "m", "cu", 0.1),
            object("l", "red", "m", "cy", 0.1),
        ]);
        let c = characterise(
            &s,
            &selection(&["sm_cu"]),
            CharacterisationKind::Count,
            false,
        )
        .unwrap();
        assert_eq!(c, count(&[("sm_cu", 1)]));
    }

    #[test]
    fn unknown_value_names_object_and_slot() {
        let s = scene(vec![
            object("sm", "red", "m", "cu", 0.1),
            object("huge", "red", "m", "cu", 0.1),
        ]);
        let err =
            characterise(&s, &selection(&["cu"]), CharacterisationKind::Set, false).unwrap_err();
        assert_eq!(
            err,
            CharacterisationError::UnknownValue {
                image_id: "img".into(),
                object: 1,
                slot: Slot::Size,
                value: "huge".into()
            }
        );
    }

    #[test]
    fn position_features_split_on_midpoint() {
        let vocab = AttributeVocabulary::clevr().with_side();
        let sel = FeatureSpec::Slots(vec![Slot::Size])
            .resolve(&vocab, true)
            .unwrap();
        let s = scene(vec![
            object("l", "red", "m", "sp", 0.1),
            object("l", "red", "m", "sp", 0.5),
            object("l", "red", "m", "sp", 0.9),
        ]);
        let c = characterise(&s, &sel, CharacterisationKind::Count, true).unwrap();
        assert_eq!(c, count(&[("l_sp_left", 1), ("l_sp_right", 2)]));
        assert!(FeatureSpec::Slots(vec![])
            .resolve(&AttributeVocabulary::clevr(), true)
            .is_err());
        assert_eq!(
            FeatureSpec::Features(vec!["l_sp_left".into()]).resolve(&vocab, false),
            Err(CharacterisationError::SideWithoutPosition(
                "l_sp_left".into()
            ))
        );
    }

    #[test]
    fn atomic_features_are_never_combined() {
        let sel = FeatureSpec::Atomic
            .resolve(&AttributeVocabulary::clevr(), false)
            .unwrap();
        let s = scene(vec![
            object("sm", "red", "m", "cu", 0.1),
            object("l", "red", "ru", "cu", 0.1),
        ]);
        let c = characterise(&s, &sel, CharacterisationKind::Count, false).unwrap();
        assert_eq!(
            c,
            count(&[
                ("sm", 1),
                ("l", 1),
                ("red", 2),
                ("m", 1),
                ("ru", 1),
                ("cu", 2)
            ])
        );
    }

    #[test]
    fn names_round_trip() {
        let vocab = AttributeVocabulary::clevr().with_side();
        for f in enumerate_superfeatures(&vocab, 5) {
            let name = f.name(&vocab);
            assert_eq!(SuperFeature::parse(&name, &vocab).unwrap(), f, "{name}");
        }
        assert!(SuperFeature::parse("cu_sm", &vocab).is_err());
        assert!(SuperFeature::parse("sm_xx", &vocab).is_err());
    }

    #[test]
    fn enumerate_small_vocabulary() {
        let vocab = AttributeVocabulary {
            size: codes(&["sm", "l"]),
            colour: vec![],
            material: vec![],
            shape: codes(&["cu", "sp"]),
            side: vec![],
            midpoint: 0.5,
        };
        let names: Vec<_> = enumerate_superfeatures(&vocab, 2)
            .iter()
            .map(|f| f.name(&vocab))
            .collect();
        assert_eq!(names, ["cu", "sp", "sm_cu", "sm_sp", "l_cu", "l_sp"]);
        let names: Vec<_> = enumerate_superfeatures(&vocab, 1)
            .iter()
            .map(|f| f.name(&vocab))
            .collect();
        assert_eq!(names, ["cu", "sp"]);
    }

    #[test]
    fn enumerate_full_clevr() {
        // 3 shapes × (1 + 2 sizes)(1 + 8 colours)(1 + 2 materials)
        let all = enumerate_superfeatures(&AttributeVocabulary::clevr(), 4);
        assert_eq!(all.len(), 3 * 3 * 9 * 3);
        let mut sorted = all.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 243);
        // Non-shape sub-assignments per shape.
        let cubes = all.iter().filter(|f| f.get(Slot::Shape) == Some(0)).count();
        assert_eq!(cubes, 81);
        assert!(all.iter().all(|f| f.get(Slot::Shape).is_some()));
    }

    #[test]
    fn set_order_examples() {
        let a = Characterisation::set(["cu", "l_cy"]);
        let b = Characterisation::set(["cu"]);
        assert!(more_exceptional(&a, &b).unwrap());
        assert!(!more_exceptional(&b, &a).unwrap());
        assert!(!more_exceptional(&a, &a).unwrap());
    }

    #[test]
    fn count_order_examples() {
        let a = count(&[("cu", 2), ("l_cy", 1)]);
        let b = count(&[("cu", 2)]);
        assert!(more_exceptional(&a, &b).unwrap());
        let c = count(&[("cu", 1)]);
        let d = count(&[("sp", 1)]);
        assert!(!more_exceptional(&c, &d).unwrap());
        assert!(!more_exceptional(&d, &c).unwrap());
        assert!(irrelevant(&c, &count(&[("cu", 2)])).unwrap());
    }

    #[test]
    fn mixed_kinds_are_rejected() {
        let a = Characterisation::set(["cu"]);
        let b = count(&[("cu", 1)]);
        assert!(matches!(
            more_exceptional(&a, &b),
            Err(CharacterisationError::KindMismatch(..))
        ));
        assert!(irrelevant(&a, &b).is_err());
    }

    #[test]
    fn irrelevance_examples() {
        let new = Characterisation::set(["l_cy", "l_cu", "cu"]);
        let case = Characterisation::set(["l_cy", "l_cu", "s_sp"]);
        assert!(irrelevant(&new, &case).unwrap());
        assert!(!irrelevant(&new, &new).unwrap());
    }

    #[test]
    fn default_is_least() {
        for kind in [CharacterisationKind::Set, CharacterisationKind::Count] {
            let d = default_characterisation(kind);
            assert!(d.is_empty());
            assert!(!more_exceptional(&d, &d).unwrap());
        }
        let c = count(&[("cu", 1)]);
        assert!(
            more_exceptional(&c, &default_characterisation(CharacterisationKind::Count)).unwrap()
        );
        assert_eq!(
            default_characterisation(CharacterisationKind::Set).to_string(),
            "∅"
        );
    }

    #[test]
    fn serde_forms() {
        let s = Characterisation::set(["b", "a"]);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"kind":"set","features":["a","b"]}"#
        );
        let c = count(&[("cu", 2)]);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"kind":"count","counts":{"cu":2}}"#);
        assert_eq!(serde_json::from_str::<Characterisation>(&json).unwrap(), c);
        assert!(
            serde_json::from_str::<Characterisation>(r#"{"kind":"count","counts":{"cu":0}}"#)
                .is_err()
        );
    }

    #[test]
    fn case_confidence_range() {
        let c = Characterisation::set(["cu"]);
        assert!(Case::new(c.clone(), Outcome::Default, 1.2, "x").is_err());
        assert!(Case::new(c, Outcome::Default, 0.3, "x").is_ok());
    }
}
