//! Replacing detector scores by the true 3D IoU with the best ground truth
//! shows how much of the AP gap is a ranking problem.

use diffnms::harness::{run_scenes, synthesize, with_oracle_scores, NmsSetup, OracleOverlap, Scene, SyntheticConfig};
use diffnms::nms::NmsVariant;
use diffnms::ranking::{eval_table, EvalConfig, EvalImage};

fn table(scenes: &[Scene]) -> String {
    let images: Vec<EvalImage<'_>> = scenes.iter().map(|s| EvalImage { detections: &s.boxes, gts: &s.gts }).collect();
    eval_table(&images, &EvalConfig::default())
        .into_iter()
        .map(|(d, ap)| format!("{d} {}", ap.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())))
        .collect::<Vec<_>>()
        .join("  ")
}

fn main() -> diffnms::Result<()> {
    let cfg = SyntheticConfig { seed: 5, scenes: 50, score_noise: 0.3, ..SyntheticConfig::default() };
    let scenes = synthesize(&cfg)?;
    let setup = NmsSetup { variant: NmsVariant::Classical, ..NmsSetup::default() };
    let oracle: Vec<Scene> = scenes.iter().map(|s| with_oracle_scores(s, OracleOverlap::Iou3d)).collect();
    println!("detector scores  {}", table(&run_scenes(&scenes, &setup)?));
    println!("oracle scores    {}", table(&run_scenes(&oracle, &setup)?));
    Ok(())
}
