//! Gradient descent on box scores through the grouped rescorer, driven by
//! the imagewise AP loss, on a toy scene of two objects with five proposals
//! each. Targets are the best box per ground truth.

use diffnms::autodiff::groomed_backward;
use diffnms::harness::pipeline::{scene_overlaps, scene_scores};
use diffnms::harness::{synthesize, ScoreMode, SyntheticConfig};
use diffnms::nms::{groomed_rescore, NmsConfig};
use diffnms::ranking::{ap_loss_gradient, assign_targets, average_precision, DEFAULT_BETA};

fn main() -> diffnms::Result<()> {
    let cfg = SyntheticConfig {
        seed: 7,
        scenes: 1,
        objects: 2,
        proposals_per_object: 5,
        center_jitter: 0.4,
        score_noise: 0.3,
        ..SyntheticConfig::default()
    };
    let scene = synthesize(&cfg)?.remove(0);
    let targets = assign_targets(&scene.boxes, &scene.gts, DEFAULT_BETA).targets;
    let overlaps = scene_overlaps(&scene);
    let mut scores = scene_scores(&scene, ScoreMode::Product);
    let nms = NmsConfig::default();
    let lr = 0.05;

    for step in 0..=200 {
        let r = groomed_rescore(&scores, &overlaps, &nms)?.rescores;
        let ap = average_precision(&r, &targets).unwrap_or(0.0);
        if step % 5 == 0 || ap == 1.0 {
            let row: Vec<String> = r
                .iter()
                .zip(&targets)
                .map(|(r, t)| format!("{}{r:.2}", if *t { '+' } else { ' ' }))
                .collect();
            println!("step {step:3}  AP {ap:.4}  r [{}]", row.join(" "));
        }
        if ap == 1.0 {
            break;
        }
        let upstream = ap_loss_gradient(&r, &targets, 0.0);
        let ds = groomed_backward(&scores, &overlaps, &nms, &upstream)?.ds;
        for (s, g) in scores.iter_mut().zip(ds) {
            *s = (*s - lr * g).clamp(0.0, 1.0);
        }
    }
    Ok(())
}
