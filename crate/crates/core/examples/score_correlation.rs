//! Pearson correlation between the scores of kept boxes and their 3D IoU
//! with the best ground truth, for noisy and for oracle scores.

use diffnms::harness::{score_iou_correlation, synthesize, with_oracle_scores, NmsSetup, OracleOverlap, SyntheticConfig};

fn show(label: &str, r: Option<f64>) {
    match r {
        Some(r) => println!("{label:<12} rho {r:.4}"),
        None => println!("{label:<12} rho undefined"),
    }
}

fn main() -> diffnms::Result<()> {
    let setup = NmsSetup::default();
    for noise in [0.0, 0.1, 0.3] {
        let scenes = synthesize(&SyntheticConfig { seed: 9, scenes: 30, score_noise: noise, ..SyntheticConfig::default() })?;
        let report = score_iou_correlation(&scenes, &setup)?;
        show(&format!("noise {noise}"), report.pearson);
    }
    let scenes = synthesize(&SyntheticConfig { seed: 9, scenes: 30, score_noise: 0.3, ..SyntheticConfig::default() })?;
    let oracle: Vec<_> = scenes.iter().map(|s| with_oracle_scores(s, OracleOverlap::Iou3d)).collect();
    show("oracle", score_iou_correlation(&oracle, &setup)?.pearson);
    Ok(())
}
