use crate::boxes::DetectionBox;

/// How a box's NMS input score is formed from its confidences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    /// `class_conf * pred_conf`
    #[default]
    Product,
    ClassOnly,
    PredOnly,
}

impl ScoreMode {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "product" => Some(Self::Product),
            "class" => Some(Self::ClassOnly),
            "pred" => Some(Self::PredOnly),
            _ => None,
        }
    }
}

/// Combines a classification confidence with an optional 3D-quality
/// confidence. A missing `pred_conf` counts as 1.
pub fn combine_scores(class_conf: f64, pred_conf: Option<f64>, mode: ScoreMode) -> f64 {
    match mode {
        ScoreMode::Product => class_conf * pred_conf.unwrap_or(1.0),
        ScoreMode::ClassOnly => class_conf,
        ScoreMode::PredOnly => pred_conf.unwrap_or(class_conf),
    }
}

/// The score a box enters NMS with: combined confidences when the box has a
/// `class_conf`, its plain `score` otherwise.
pub fn nms_score(b: &DetectionBox, mode: ScoreMode) -> f64 {
    match b.class_conf {
        Some(c) => combine_scores(c, b.pred_conf, mode),
        None => b.score,
    }
}
