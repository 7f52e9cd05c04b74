use crate::boxes::{DetectionBox, GroundTruth};
use crate::geometry::{giou3d, iou2d};

/// Default threshold on the match quality for a positive target.
pub const DEFAULT_BETA: f64 = 0.3;

/// Match quality `IoU2D * (1 + gIoU3D) / 2`.
pub fn q_match(b: &DetectionBox, g: &GroundTruth) -> f64 {
    iou2d(&b.rect, &g.rect) * (1.0 + giou3d(&b.cuboid, &g.cuboid)) / 2.0
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetAssignment {
    /// One binary target per box.
    pub targets: Vec<bool>,
    /// For each positive box, the first ground truth it was chosen for.
    pub matched_gt: Vec<Option<usize>>,
    /// `quality[i][l] = q(box i, gt l)`; zero for don't-care ground truths.
    pub quality: Vec<Vec<f64>>,
}

impl TargetAssignment {
    pub fn positives(&self) -> usize {
        self.targets.iter().filter(|&&t| t).count()
    }
}

/// Marks, for every ground truth, its best box (maximal `q`, lowest index on
/// ties) as positive when `q >= beta`. A box that is best for several ground
/// truths is a single positive recorded against the first of them.
pub fn assign_targets(boxes: &[DetectionBox], gts: &[GroundTruth], beta: f64) -> TargetAssignment {
    let quality: Vec<Vec<f64>> = boxes
        .iter()
        .map(|b| {
            gts.iter()
                .map(|g| if g.dont_care { 0.0 } else { q_match(b, g) })
                .collect()
        })
        .collect();
    let mut targets = vec![false; boxes.len()];
    let mut matched_gt = vec![None; boxes.len()];
    for (l, g) in gts.iter().enumerate() {
        if g.dont_care {
            continue;
        }
        let mut best: Option<usize> = None;
        for i in 0..boxes.len() {
            if best.is_none_or(|b| quality[i][l] > quality[b][l]) {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            if quality[i][l] >= beta && !targets[i] {
                targets[i] = true;
                matched_gt[i] = Some(l);
            }
        }
    }
    TargetAssignment {
        targets,
        matched_gt,
        quality,
    }
}
