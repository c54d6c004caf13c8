//! Line-delimited JSON scene files.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::characterisation::{AttributeVocabulary, Slot};
use crate::scene::SceneRecord;

/// Slot count of the perception front end.
pub const DEFAULT_MAX_OBJECTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("read failed: {0}")]
    Io(String),
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unknown {slot} code {value:?}")]
    UnknownValue { slot: Slot, value: String },
    #[error("confidence {0} is outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("x position is not a finite number")]
    Position,
    #[error("duplicate image_id {0:?}")]
    DuplicateImageId(String),
    #[error("{found} objects exceed the maximum of {max}")]
    TooManyObjects { found: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, {path}: {kind}")]
pub struct ParseError {
    pub line: usize,
    /// Field path inside the line, e.g. `objects[1].confidence`.
    pub path: String,
    pub kind: ParseErrorKind,
}

/// Streams validated scenes from line-delimited JSON. Blank lines are
/// ignored; the first invalid line ends the stream with an error.
pub struct SceneReader<'v, R> {
    lines: std::io::Lines<R>,
    line: usize,
    vocab: &'v AttributeVocabulary,
    max_objects: usize,
    seen: HashSet<String>,
    failed: bool,
}

impl<'v, R: BufRead> SceneReader<'v, R> {
    pub fn new(source: R, vocab: &'v AttributeVocabulary, max_objects: usize) -> Self {
        SceneReader {
            lines: source.lines(),
            line: 0,
            vocab,
            max_objects,
            seen: HashSet::new(),
            failed: false,
        }
    }

    fn error(&self, path: impl Into<String>, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            path: path.into(),
            kind,
        }
    }

    fn parse_line(&mut self, text: &str) -> Result<SceneRecord, ParseError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: SceneRecord = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            self.error(
                path,
                ParseErrorKind::MalformedJson(e.into_inner().to_string()),
            )
        })?;
        if scene.objects.len() > self.max_objects {
            return Err(self.error(
                "objects",
                ParseErrorKind::TooManyObjects {
                    found: scene.objects.len(),
                    max: self.max_objects,
                },
            ));
        }
        for (i, object) in scene.objects.iter().enumerate() {
            let fields = [
                (Slot::Size, &object.size),
                (Slot::Colour, &object.colour),
                (Slot::Material, &object.material),
                (Slot::Shape, &object.shape),
            ];
            for (slot, value) in fields {
                if self.vocab.code_index(slot, value).is_none() {
                    return Err(self.error(
                        format!("objects[{i}].{}", slot.name()),
                        ParseErrorKind::UnknownValue {
                            slot,
                            value: value.clone(),
                        },
                    ));
                }
            }
            if !object.x.is_finite() {
                return Err(self.error(format!("objects[{i}].x"), ParseErrorKind::Position));
            }
            if !(0.0..=1.0).contains(&object.confidence) {
                return Err(self.error(
                    format!("objects[{i}].confidence"),
                    ParseErrorKind::ConfidenceOutOfRange(object.confidence),
                ));
            }
        }
        if !self.seen.insert(scene.image_id.clone()) {
            return Err(self.error("image_id", ParseErrorKind::DuplicateImageId(scene.image_id)));
        }
        Ok(scene)
    }
}

impl<R: BufRead> Iterator for SceneReader<'_, R> {
    type Item = Result<SceneRecord, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let text = self.lines.next()?;
            self.line += 1;
            let result = match text {
                Err(e) => Err(self.error("", ParseErrorKind::Io(e.to_string()))),
                Ok(text) if text.trim().is_empty() => continue,
                Ok(text) => self.parse_line(&text),
            };
            self.failed = result.is_err();
            return Some(result);
        }
    }
}

pub fn parse_scenes<R: BufRead>(
    source: R,
    vocab: &AttributeVocabulary,
    max_objects: usize,
) -> Result<Vec<SceneRecord>, ParseError> {
    SceneReader::new(source, vocab, max_objects).collect()
}

/// Writes one compact JSON object per line.
pub fn emit_scenes<W: Write>(mut sink: W, scenes: &[SceneRecord]) -> std::io::Result<()> {
    for scene in scenes {
        serde_json::to_writer(&mut sink, scene)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}
