//! Rescoring a single cluster of overlapping boxes with the grouped
//! rescorer, next to greedy NMS under the same pruning.

use diffnms::geometry::{overlap_matrix, Rect2D};
use diffnms::nms::{classical_soft_nms, groomed_rescore, NmsConfig, Pruning};

fn main() -> diffnms::Result<()> {
    let rects = [
        Rect2D::new(100.0, 100.0, 200.0, 200.0),
        Rect2D::new(110.0, 105.0, 210.0, 205.0),
        Rect2D::new(140.0, 100.0, 240.0, 200.0),
        Rect2D::new(400.0, 120.0, 480.0, 220.0),
        Rect2D::new(405.0, 118.0, 482.0, 215.0),
    ];
    let scores = [0.9, 0.8, 0.6, 0.7, 0.65];
    let overlaps = overlap_matrix(&rects);

    for pruning in [Pruning::HardThreshold, Pruning::Linear, Pruning::Exponential { tau: 0.5 }] {
        let cfg = NmsConfig::default().with_pruning(pruning);
        let g = groomed_rescore(&scores, &overlaps, &cfg)?;
        let c = classical_soft_nms(&scores, &overlaps, &cfg)?;
        println!("{pruning:?}");
        for i in 0..scores.len() {
            println!(
                "  box {i}: s {:.2}  groomed {:.4}  greedy {:.4}",
                scores[i], g.rescores[i], c.rescores[i]
            );
        }
        println!("  kept groomed {:?}  greedy {:?}", g.kept, c.kept);
    }
    Ok(())
}
