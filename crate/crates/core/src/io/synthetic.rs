//! Seeded CLEVR-Hans-style scene generator with planted class rules.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characterisation::{
    AttributeVocabulary, CharacterisationError, Slot, SuperFeature, SLOT_COUNT,
};
use crate::scene::{ClassLabel, ObjectRecord, SceneRecord};

const MAX_ATTEMPTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("rule for class {class}: {source}")]
    Feature {
        class: ClassLabel,
        source: CharacterisationError,
    },
    #[error("rule for class {class} needs {required} objects but scenes hold at most {max}")]
    TooManyRequired {
        class: ClassLabel,
        required: usize,
        max: usize,
    },
    #[error("rule for class {0} could not be satisfied exclusively after {MAX_ATTEMPTS} attempts")]
    Unsatisfiable(ClassLabel),
    #[error("invalid object range {min}..={max}")]
    ObjectRange { min: usize, max: usize },
    #[error("noise {0} is outside [0, 1]")]
    Noise(f64),
    #[error("class {0} has more than one rule")]
    DuplicateClass(ClassLabel),
    #[error("more than one catch-all rule")]
    MultipleCatchAll,
    #[error("confounder: {0}")]
    Confounder(String),
    #[error(transparent)]
    Vocabulary(#[from] CharacterisationError),
}

/// At least `at_least` objects matching `feature`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub feature: String,
    #[serde(default = "one")]
    pub at_least: u32,
}

fn one() -> u32 {
    1
}

/// A conjunction of requirements. An empty conjunction is the catch-all
/// class, assigned to scenes satisfying no other rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRule {
    pub class: ClassLabel,
    #[serde(default)]
    pub requires: Vec<Requirement>,
}

/// Recolours (or otherwise rewrites) one attribute of every matching object
/// in scenes of one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confounder {
    pub class: ClassLabel,
    pub feature: String,
    pub slot: Slot,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub vocabulary: AttributeVocabulary,
    pub rules: Vec<ClassRule>,
    #[serde(default = "default_min_objects")]
    pub min_objects: usize,
    #[serde(default = "default_max_objects")]
    pub max_objects: usize,
    #[serde(default)]
    pub confounder: Option<Confounder>,
}

fn default_min_objects() -> usize {
    3
}

fn default_max_objects() -> usize {
    6
}

struct CompiledRule {
    class: ClassLabel,
    requires: Vec<(SuperFeature, u32)>,
}

impl CompiledRule {
    fn holds(&self, objects: &[[Option<u8>; SLOT_COUNT]]) -> bool {
        self.requires
            .iter()
            .all(|(f, n)| objects.iter().filter(|o| f.matches(o)).count() >= *n as usize)
    }
}

impl RuleSet {
    pub fn classes(&self) -> Vec<ClassLabel> {
        self.rules.iter().map(|r| r.class).collect()
    }

    pub fn without_confounder(&self) -> Self {
        RuleSet {
            confounder: None,
            ..self.clone()
        }
    }

    fn compile(&self) -> Result<Vec<CompiledRule>, SyntheticError> {
        self.vocabulary.validate()?;
        if self.min_objects > self.max_objects || self.max_objects == 0 {
            return Err(SyntheticError::ObjectRange {
                min: self.min_objects,
                max: self.max_objects,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut catch_all = 0;
        self.rules
            .iter()
            .map(|rule| {
                if !seen.insert(rule.class) {
                    return Err(SyntheticError::DuplicateClass(rule.class));
                }
                if rule.requires.is_empty() {
                    catch_all += 1;
                    if catch_all > 1 {
                        return Err(SyntheticError::MultipleCatchAll);
                    }
                }
                let requires = rule
                    .requires
                    .iter()
                    .map(|r| {
                        SuperFeature::parse(&r.feature, &self.vocabulary)
                            .map(|f| (f, r.at_least))
                            .map_err(|source| SyntheticError::Feature {
                                class: rule.class,
                                source,
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let required: usize = requires.iter().map(|(_, n)| *n as usize).sum();
                if required > self.max_objects {
                    return Err(SyntheticError::TooManyRequired {
                        class: rule.class,
                        required,
                        max: self.max_objects,
                    });
                }
                Ok(CompiledRule {
                    class: rule.class,
                    requires,
                })
            })
            .collect()
    }

    fn encode(&self, scene: &SceneRecord) -> Option<Vec<[Option<u8>; SLOT_COUNT]>> {
        let position = self.vocabulary.has_side();
        scene
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| {
                self.vocabulary
                    .encode_object(&scene.image_id, i, o, position)
                    .ok()
            })
            .collect()
    }

    /// The class whose rule the scene satisfies, if exactly one applies.
    /// Scenes satisfying no specific rule fall to the catch-all class.
    pub fn label_of(&self, scene: &SceneRecord) -> Option<ClassLabel> {
        let compiled = self.compile().ok()?;
        let objects = self.encode(scene)?;
        label_with(&compiled, &objects)
    }
}

fn label_with(rules: &[CompiledRule], objects: &[[Option<u8>; SLOT_COUNT]]) -> Option<ClassLabel> {
    let mut hits = rules
        .iter()
        .filter(|r| !r.requires.is_empty() && r.holds(objects));
    match (hits.next(), hits.next()) {
        (Some(r), None) => Some(r.class),
        (None, None) => rules
            .iter()
            .find(|r| r.requires.is_empty())
            .map(|r| r.class),
        _ => None,
    }
}

struct Generator<'a> {
    rules: &'a RuleSet,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn value(&mut self, slot: Slot, fixed: Option<u8>) -> u8 {
        fixed.unwrap_or_else(|| {
            self.rng
                .gen_range(0..self.rules.vocabulary.values(slot).len() as u8)
        })
    }

    /// An object matching `feature`; unassigned slots are drawn uniformly.
    fn object(&mut self, feature: Option<&SuperFeature>) -> [Option<u8>; SLOT_COUNT] {
        let mut out = [None; SLOT_COUNT];
        for slot in Slot::ALL {
            if slot == Slot::Side && !self.rules.vocabulary.has_side() {
                continue;
            }
            out[slot.index()] = Some(self.value(slot, feature.and_then(|f| f.get(slot))));
        }
        out
    }

    fn record(&mut self, encoded: &[Option<u8>; SLOT_COUNT]) -> ObjectRecord {
        let vocab = &self.rules.vocabulary;
        let code = |slot: Slot| {
            vocab.values(slot)[encoded[slot.index()].expect("filled") as usize].clone()
        };
        let x = match encoded[Slot::Side.index()] {
            Some(0) => self.rng.gen_range(0.0..vocab.midpoint),
            Some(_) => self.rng.gen_range(vocab.midpoint..1.0),
            None => self.rng.gen_range(0.0..1.0),
        };
        ObjectRecord {
            size: code(Slot::Size),
            colour: code(Slot::Colour),
            material: code(Slot::Material),
            shape: code(Slot::Shape),
            x,
            confidence: 1.0,
        }
    }

    fn confound(
        &self,
        encoded: &mut [[Option<u8>; SLOT_COUNT]],
        class: ClassLabel,
    ) -> Result<(), SyntheticError> {
        let Some(c) = &self.rules.confounder else {
            return Ok(());
        };
        if c.class != class {
            return Ok(());
        }
        let vocab = &self.rules.vocabulary;
        let feature = SuperFeature::parse(&c.feature, vocab)
            .map_err(|e| SyntheticError::Confounder(e.to_string()))?;
        let value = vocab.code_index(c.slot, &c.value).ok_or_else(|| {
            SyntheticError::Confounder(format!("unknown {} code {:?}", c.slot, c.value))
        })?;
        for o in encoded.iter_mut().filter(|o| feature.matches(o)) {
            o[c.slot.index()] = Some(value);
        }
        Ok(())
    }

    fn scene(
        &mut self,
        compiled: &[CompiledRule],
        rule: &CompiledRule,
    ) -> Result<Vec<[Option<u8>; SLOT_COUNT]>, SyntheticError> {
        let (min, max) = (self.rules.min_objects, self.rules.max_objects);
        for _ in 0..MAX_ATTEMPTS {
            let mut objects = Vec::new();
            for (feature, n) in &rule.requires {
                for _ in 0..*n {
                    objects.push(self.object(Some(feature)));
                }
            }
            let total = self.rng.gen_range(min.max(objects.len())..=max);
            while objects.len() < total {
                objects.push(self.object(None));
            }
            objects.shuffle(&mut self.rng);
            self.confound(&mut objects, rule.class)?;
            if label_with(compiled, &objects) == Some(rule.class) {
                return Ok(objects);
            }
        }
        Err(SyntheticError::Unsatisfiable(rule.class))
    }

    /// Flips each attribute to another value with probability `noise`; the
    /// object's confidence drops for every flip.
    fn perturb(&mut self, object: &mut ObjectRecord, noise: f64) {
        if noise == 0.0 {
            return;
        }
        let vocab = self.rules.vocabulary.clone();
        let mut confidence = 0.0;
        for slot in [Slot::Size, Slot::Colour, Slot::Material, Slot::Shape] {
            let values = vocab.values(slot);
            let flip = values.len() > 1 && self.rng.gen_bool(noise);
            if flip {
                let field = match slot {
                    Slot::Size => &mut object.size,
                    Slot::Colour => &mut object.colour,
                    Slot::Material => &mut object.material,
                    _ => &mut object.shape,
                };
                let others: Vec<&String> = values.iter().filter(|v| *v != field).collect();
                *field = (*others.choose(&mut self.rng).expect("at least two values")).clone();
                confidence += self.rng.gen_range(0.3..0.7);
            } else {
                confidence += 1.0 - noise * self.rng.gen_range(0.0..1.0);
            }
        }
        object.confidence = confidence / 4.0;
    }
}

/// Generates `scenes_per_class` scenes for every rule, each satisfying
/// exactly its own rule before noise, in shuffled order. The confounder, if
/// any, is applied; use [`RuleSet::without_confounder`] for clean splits.
pub fn generate_synthetic(
    rules: &RuleSet,
    scenes_per_class: usize,
    noise: f64,
    seed: u64,
) -> Result<Vec<SceneRecord>, SyntheticError> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(SyntheticError::Noise(noise));
    }
    let compiled = rules.compile()?;
    let mut generator = Generator {
        rules,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let mut scenes = Vec::with_capacity(scenes_per_class * compiled.len());
    for rule in &compiled {
        for i in 0..scenes_per_class {
            let encoded = generator.scene(&compiled, rule)?;
            let mut objects: Vec<ObjectRecord> =
                encoded.iter().map(|o| generator.record(o)).collect();
            for o in &mut objects {
                generator.perturb(o, noise);
            }
            scenes.push(SceneRecord {
                image_id: format!("s{seed}-c{}-{i}", rule.class),
                class_label: Some(rule.class),
                objects,
            });
        }
    }
    scenes.shuffle(&mut generator.rng);
    Ok(scenes)
}
