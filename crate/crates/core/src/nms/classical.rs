use crate::error::Result;
use crate::geometry::OverlapMatrix;

use super::config::NmsConfig;
use super::rescore::{validate_inputs, RescoreResult};

/// Greedy classical / Soft-NMS.
///
/// Repeatedly takes the highest current rescore among unvisited boxes (lowest
/// index on ties) and multiplies every other unvisited rescore by
/// `1 - p(o)`. With [`Pruning::HardThreshold`](super::Pruning::HardThreshold)
/// this is classical NMS. Boxes with `rescore >= valid_threshold` are kept, in
/// visiting order.
pub fn classical_soft_nms(scores: &[f64], overlaps: &OverlapMatrix, cfg: &NmsConfig) -> Result<RescoreResult> {
    validate_inputs(scores, overlaps, cfg)?;
    let n = scores.len();
    let mut r = scores.to_vec();
    let mut visited = vec![false; n];
    let mut kept = Vec::new();
    for _ in 0..n {
        let mut best: Option<usize> = None;
        for i in (0..n).filter(|&i| !visited[i]) {
            if best.is_none_or(|b| r[i] > r[b]) {
                best = Some(i);
            }
        }
        let Some(nu) = best else { break };
        visited[nu] = true;
        if r[nu] >= cfg.valid_threshold {
            kept.push(nu);
        }
        for i in (0..n).filter(|&i| !visited[i]) {
            r[i] *= 1.0 - cfg.prune(overlaps.get(nu, i));
        }
    }
    Ok(RescoreResult {
        preclip: r.clone(),
        rescores: r,
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nms::Pruning;

    #[test]
    fn dominant_box_suppresses() {
        let o = OverlapMatrix::from_row_major(2, vec![1.0, 0.9, 0.9, 1.0]);
        let cfg = NmsConfig::default().with_pruning(Pruning::HardThreshold);
        let r = classical_soft_nms(&[0.9, 0.8], &o, &cfg).unwrap();
        assert_eq!(r.kept, vec![0]);
        assert_eq!(r.rescores, vec![0.9, 0.0]);
    }

    #[test]
    fn disjoint_boxes_are_all_kept() {
        let o = OverlapMatrix::zeros(3);
        let s = [0.5, 0.9, 0.4];
        let r = classical_soft_nms(&s, &o, &NmsConfig::default()).unwrap();
        assert_eq!(r.rescores, s.to_vec());
        assert_eq!(r.kept, vec![1, 0, 2]);
    }

    #[test]
    fn one_linear_rescale_step() {
        let o = OverlapMatrix::from_row_major(2, vec![1.0, 0.5, 0.5, 1.0]);
        let r = classical_soft_nms(&[0.9, 0.6], &o, &NmsConfig::default()).unwrap();
        assert!((r.rescores[1] - 0.3).abs() < 1e-15);
        assert_eq!(r.kept, vec![0, 1]);
    }

    #[test]
    fn suppressed_box_does_not_suppress_others() {
        // 0 suppresses 1; 1 would suppress 2, but 2 survives
        let mut o = OverlapMatrix::zeros(3);
        o.set_symmetric(0, 1, 0.9);
        o.set_symmetric(1, 2, 0.9);
        let cfg = NmsConfig::default().with_pruning(Pruning::HardThreshold);
        let r = classical_soft_nms(&[0.9, 0.8, 0.7], &o, &cfg).unwrap();
        assert_eq!(r.kept, vec![0, 2]);
    }
}
