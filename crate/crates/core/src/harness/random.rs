//! Seeded random NMS instances: clustered image boxes with uniform scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{finite_difference_check, GradCheckConfig, GradCheckReport};
use crate::error::Result;
use crate::geometry::{overlap_matrix, OverlapMatrix, Rect2D};
use crate::nms::NmsConfig;

/// `n` boxes in a 1000 x 400 image, drawn around a few cluster centers so
/// that overlaps span the whole `[0, 1]` range.
pub fn random_rects(rng: &mut impl Rng, n: usize) -> Vec<Rect2D> {
    let clusters = rng.random_range(1..=n.div_ceil(4).max(1));
    let centers: Vec<(f64, f64, f64, f64)> = (0..clusters)
        .map(|_| {
            (
                rng.random_range(50.0..950.0),
                rng.random_range(50.0..350.0),
                rng.random_range(20.0..120.0),
                rng.random_range(20.0..80.0),
            )
        })
        .collect();
    (0..n)
        .map(|_| {
            let (cx, cy, w, h) = centers[rng.random_range(0..clusters)];
            let jx = rng.random_range(-0.3..0.3) * w;
            let jy = rng.random_range(-0.3..0.3) * h;
            let sw = w * rng.random_range(0.7..1.3);
            let sh = h * rng.random_range(0.7..1.3);
            Rect2D::new(cx + jx - sw / 2.0, cy + jy - sh / 2.0, cx + jx + sw / 2.0, cy + jy + sh / 2.0)
        })
        .collect()
}

/// Scores uniform in `[0, 1)` and the 2D-IoU matrix of [`random_rects`].
pub fn random_instance(rng: &mut impl Rng, n: usize) -> (Vec<f64>, OverlapMatrix) {
    let rects = random_rects(rng, n);
    let scores = (0..n).map(|_| rng.random::<f64>()).collect();
    (scores, overlap_matrix(&rects))
}

/// Finite-difference checks on `instances` seeded random instances of 2 to
/// `max_boxes` boxes, merged into one report.
pub fn gradcheck_random(
    cfg: &NmsConfig,
    check: &GradCheckConfig,
    seed: u64,
    instances: usize,
    max_boxes: usize,
) -> Result<Option<GradCheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(instances);
    for _ in 0..instances {
        let n = rng.random_range(2..=max_boxes.max(2));
        let (scores, overlaps) = random_instance(&mut rng, n);
        reports.push(finite_difference_check(&scores, &overlaps, cfg, check)?);
    }
    Ok(GradCheckReport::merge(reports))
}
