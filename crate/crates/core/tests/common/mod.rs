//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use diffnms::boxes::{DetectionBox, GroundTruth};
use diffnms::geometry::iou3d;
use diffnms::harness::Scene;
use diffnms::ranking::Difficulty;

/// AP|R40 by enumerating every score threshold and rescanning the matched
/// detections for each one. Slow and literal on purpose.
pub fn reference_ap_r40(scenes: &[Scene], threshold: f64, diff: &Difficulty, class: Option<&str>) -> Option<f64> {
    let mut labelled: Vec<(f64, bool)> = Vec::new();
    let mut npos = 0usize;
    for scene in scenes {
        let wanted = |c: &Option<String>| class.is_none() || c.as_deref() == class;
        let gts: Vec<&GroundTruth> = scene.gts.iter().filter(|g| !g.dont_care && wanted(&g.class)).collect();
        let counted: Vec<bool> = gts
            .iter()
            .map(|g| {
                g.rect.y2 - g.rect.y1 >= diff.min_height
                    && g.occluded <= diff.max_occlusion
                    && g.truncated <= diff.max_truncation
            })
            .collect();
        npos += counted.iter().filter(|&&c| c).count();

        let mut dets: Vec<&DetectionBox> = scene.boxes.iter().filter(|d| wanted(&d.class)).collect();
        // stable: equal scores keep input order
        dets.sort_by(|a, b| b.score.total_cmp(&a.score));
        let mut taken = vec![false; gts.len()];
        for d in dets {
            let overlaps: Vec<f64> = gts.iter().map(|g| iou3d(&d.cuboid, &g.cuboid)).collect();
            let mut pick = None;
            let mut pick_overlap = f64::NEG_INFINITY;
            for k in 0..gts.len() {
                if counted[k] && !taken[k] && overlaps[k] >= threshold && overlaps[k] > pick_overlap {
                    pick = Some(k);
                    pick_overlap = overlaps[k];
                }
            }
            if let Some(k) = pick {
                taken[k] = true;
                labelled.push((d.score, true));
            } else if !(0..gts.len()).any(|k| !counted[k] && overlaps[k] >= threshold) {
                labelled.push((d.score, false));
            }
        }
    }
    if npos == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = labelled.iter().map(|l| l.0).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let points: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let tp = labelled.iter().filter(|l| l.0 >= t && l.1).count() as f64;
            let fp = labelled.iter().filter(|l| l.0 >= t && !l.1).count() as f64;
            (tp / npos as f64, tp / (tp + fp))
        })
        .collect();
    let mut total = 0.0;
    for k in 1..=40 {
        let level = k as f64 / 40.0;
        let best = points
            .iter()
            .filter(|p| p.0 >= level)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        total += best;
    }
    Some(100.0 * total / 40.0)
}

/// Rescores by the sequential recursion with plain nested loops over a
/// dense lower-triangular prune matrix, already in sorted order.
pub fn reference_recursion(scores: &[f64], prune: &[Vec<f64>]) -> Vec<f64> {
    let mut r = vec![0.0; scores.len()];
    for i in 0..scores.len() {
        let mut acc = scores[i];
        for j in 0..i {
            acc -= prune[i][j] * r[j];
        }
        r[i] = acc.max(0.0);
    }
    r
}
