//! AP at 40 recall points, with greedy 3D-IoU matching and difficulty filters.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::boxes::{DetectionBox, GroundTruth};
use crate::geometry::iou3d;

pub const RECALL_POINTS: usize = 40;

/// Ground truths outside these limits are ignored: they count neither as
/// misses nor, when matched, as false positives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Difficulty {
    pub name: String,
    pub min_height: f64,
    pub max_occlusion: u8,
    pub max_truncation: f64,
}

impl Difficulty {
    pub fn easy() -> Self {
        Self { name: "Easy".into(), min_height: 40.0, max_occlusion: 0, max_truncation: 0.15 }
    }

    pub fn moderate() -> Self {
        Self { name: "Moderate".into(), min_height: 25.0, max_occlusion: 1, max_truncation: 0.30 }
    }

    pub fn hard() -> Self {
        Self { name: "Hard".into(), min_height: 25.0, max_occlusion: 2, max_truncation: 0.50 }
    }

    pub fn admits(&self, g: &GroundTruth) -> bool {
        g.height_px() >= self.min_height && g.occluded <= self.max_occlusion && g.truncated <= self.max_truncation
    }
}

/// Evaluator settings, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub iou3d_threshold: f64,
    /// Only detections and ground truths of this class are evaluated.
    pub class: Option<String>,
    pub difficulties: Vec<Difficulty>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou3d_threshold: 0.7,
            class: None,
            difficulties: vec![Difficulty::easy(), Difficulty::moderate(), Difficulty::hard()],
        }
    }
}

impl EvalConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// Detections and ground truths of one image.
#[derive(Debug, Clone, Copy)]
pub struct EvalImage<'a> {
    pub detections: &'a [DetectionBox],
    pub gts: &'a [GroundTruth],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GtStatus {
    Counted,
    Ignored,
}

fn class_matches(class: Option<&str>, label: Option<&String>) -> bool {
    match class {
        None => true,
        Some(c) => label.is_some_and(|l| l == c),
    }
}

/// Greedy matching for one image: `(score, true_positive)` per non-ignored
/// detection, and the number of counted ground truths.
fn match_image(img: &EvalImage<'_>, threshold: f64, filter: &Difficulty, class: Option<&str>) -> (Vec<(f64, bool)>, usize) {
    let gts: Vec<(&GroundTruth, GtStatus)> = img
        .gts
        .iter()
        .filter(|g| !g.dont_care && class_matches(class, g.class.as_ref()))
        .map(|g| (g, if filter.admits(g) { GtStatus::Counted } else { GtStatus::Ignored }))
        .collect();
    let npos = gts.iter().filter(|(_, s)| *s == GtStatus::Counted).count();

    let mut dets: Vec<&DetectionBox> = img
        .detections
        .iter()
        .filter(|d| class_matches(class, d.class.as_ref()))
        .collect();
    dets.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));

    let mut used = vec![false; gts.len()];
    let mut out = Vec::with_capacity(dets.len());
    for d in dets {
        let mut best: Option<(usize, f64)> = None;
        let mut hits_ignored = false;
        for (k, (g, status)) in gts.iter().enumerate() {
            let o = iou3d(&d.cuboid, &g.cuboid);
            if o < threshold {
                continue;
            }
            match status {
                GtStatus::Ignored => hits_ignored = true,
                GtStatus::Counted if !used[k] => {
                    if best.is_none_or(|(_, bo)| o > bo) {
                        best = Some((k, o));
                    }
                }
                GtStatus::Counted => {}
            }
        }
        match best {
            Some((k, _)) => {
                used[k] = true;
                out.push((d.score, true));
            }
            None if hits_ignored => {}
            None => out.push((d.score, false)),
        }
    }
    (out, npos)
}

/// AP in percent, interpolated at recall `1/40, 2/40, ..., 1`. Precision at a
/// recall point is the best precision over score thresholds reaching it.
/// `None` when no ground truth passes the filter.
pub fn eval_ap_r40(images: &[EvalImage<'_>], iou3d_threshold: f64, filter: &Difficulty, class: Option<&str>) -> Option<f64> {
    let mut scored = Vec::new();
    let mut npos = 0;
    for img in images {
        let (m, p) = match_image(img, iou3d_threshold, filter, class);
        scored.extend(m);
        npos += p;
    }
    if npos == 0 {
        return None;
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));

    // (true positives, precision) at every distinct score threshold
    let mut curve: Vec<(usize, f64)> = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (k, &(score, hit)) in scored.iter().enumerate() {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        if scored.get(k + 1).is_none_or(|next| next.0 != score) {
            curve.push((tp, tp as f64 / (tp + fp) as f64));
        }
    }
    // best precision among thresholds at or beyond each point of the curve
    let mut best_after = vec![0.0; curve.len() + 1];
    for k in (0..curve.len()).rev() {
        best_after[k] = curve[k].1.max(best_after[k + 1]);
    }
    let mut sum = 0.0;
    let mut idx = 0;
    for point in 1..=RECALL_POINTS {
        // recall tp / npos >= point / 40
        while idx < curve.len() && curve[idx].0 * RECALL_POINTS < point * npos {
            idx += 1;
        }
        sum += best_after[idx];
    }
    Some(100.0 * sum / RECALL_POINTS as f64)
}

/// One row per configured difficulty.
pub fn eval_table(images: &[EvalImage<'_>], cfg: &EvalConfig) -> Vec<(String, Option<f64>)> {
    cfg.difficulties
        .iter()
        .map(|d| (d.name.clone(), eval_ap_r40(images, cfg.iou3d_threshold, d, cfg.class.as_deref())))
        .collect()
}
