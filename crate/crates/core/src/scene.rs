//! Object-level scene annotations as produced by the perception front end.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(pub u32);

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One detected object. Attribute values are vocabulary codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRecord {
    pub size: String,
    #[serde(rename = "color")]
    pub colour: String,
    pub material: String,
    pub shape: String,
    pub x: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRecord {
    pub image_id: String,
    pub class_label: Option<ClassLabel>,
    pub objects: Vec<ObjectRecord>,
}

impl SceneRecord {
    /// Mean per-object confidence; an empty scene carries no uncertain
    /// detections and scores 1.
    pub fn confidence(&self) -> f64 {
        if self.objects.is_empty() {
            return 1.0;
        }
        self.objects.iter().map(|o| o.confidence).sum::<f64>() / self.objects.len() as f64
    }
}
