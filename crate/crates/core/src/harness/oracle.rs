//! Oracle scores: each box scored by its best true overlap with a ground
//! truth, to see how much a better score would help NMS.

use super::scene::Scene;
use crate::geometry::{iou2d, iou3d};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleOverlap {
    Iou2d,
    #[default]
    Iou3d,
}

impl OracleOverlap {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "iou2d" => Some(Self::Iou2d),
            "iou3d" => Some(Self::Iou3d),
            _ => None,
        }
    }
}

/// Best overlap of every box with a non-don't-care ground truth; 0 when the
/// scene has none.
pub fn oracle_scores(scene: &Scene, kind: OracleOverlap) -> Vec<f64> {
    scene
        .boxes
        .iter()
        .map(|b| {
            scene
                .gts
                .iter()
                .filter(|g| !g.dont_care)
                .map(|g| match kind {
                    OracleOverlap::Iou2d => iou2d(&b.rect, &g.rect),
                    OracleOverlap::Iou3d => iou3d(&b.cuboid, &g.cuboid),
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// The scene with every box's score replaced by its oracle score.
pub fn with_oracle_scores(scene: &Scene, kind: OracleOverlap) -> Scene {
    let mut out = scene.clone();
    for (b, s) in out.boxes.iter_mut().zip(oracle_scores(scene, kind)) {
        b.score = s;
        b.class_conf = None;
        b.pred_conf = None;
    }
    out
}
