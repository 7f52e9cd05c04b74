//! Detection and ground-truth records shared by ranking, evaluation and I/O.
//!
//! Both serialize as flat JSON objects (`x1 y1 x2 y2 cx cy cz w h l yaw ...`);
//! keys this crate does not know are preserved in `extra`.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::geometry::{Cuboid3D, Rect2D};

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn is_zero_u8(x: &u8) -> bool {
    *x == 0
}

/// One candidate box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    #[serde(flatten)]
    pub rect: Rect2D,
    #[serde(flatten)]
    pub cuboid: Cuboid3D,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_conf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred_conf: Option<f64>,
    #[serde(default, rename = "class", skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl DetectionBox {
    pub fn new(rect: Rect2D, cuboid: Cuboid3D, score: f64) -> Self {
        Self {
            rect,
            cuboid,
            score,
            class_conf: None,
            pred_conf: None,
            class: None,
            alpha: None,
            extra: Map::new(),
        }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }
}

/// One annotated object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(flatten)]
    pub rect: Rect2D,
    #[serde(flatten)]
    pub cuboid: Cuboid3D,
    #[serde(default, rename = "class", skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Fraction of the object outside the image, in `[0, 1]`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub truncated: f64,
    /// 0 fully visible, 1 partly occluded, 2 largely occluded, 3 unknown.
    #[serde(default, skip_serializing_if = "is_zero_u8")]
    pub occluded: u8,
    #[serde(default, skip_serializing_if = "is_false")]
    pub dont_care: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl GroundTruth {
    pub fn new(rect: Rect2D, cuboid: Cuboid3D) -> Self {
        Self {
            rect,
            cuboid,
            class: None,
            truncated: 0.0,
            occluded: 0,
            dont_care: false,
            alpha: None,
            extra: Map::new(),
        }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }

    /// Image-space height in pixels.
    pub fn height_px(&self) -> f64 {
        self.rect.height()
    }
}
