//! Reading KITTI label files, suppressing the detections in them and
//! evaluating AP|R40 per difficulty.

use std::path::PathBuf;

use diffnms::harness::{read_kitti, run_scenes, NmsSetup};
use diffnms::ranking::{eval_table, EvalConfig, EvalImage};

fn main() -> diffnms::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/kitti"));
    let scenes = read_kitti(&dir)?;
    let boxes: usize = scenes.iter().map(|s| s.boxes.len()).sum();
    let gts: usize = scenes.iter().map(|s| s.gts.len()).sum();
    println!("{} frames, {boxes} detections, {gts} labels", scenes.len());

    let kept = run_scenes(&scenes, &NmsSetup::default())?;
    let images: Vec<EvalImage<'_>> = kept.iter().map(|s| EvalImage { detections: &s.boxes, gts: &s.gts }).collect();
    let cfg = EvalConfig { class: Some("Car".into()), ..EvalConfig::default() };
    for (difficulty, ap) in eval_table(&images, &cfg) {
        match ap {
            Some(ap) => println!("{difficulty:<9} {ap:.2}"),
            None => println!("{difficulty:<9} no ground truth"),
        }
    }
    Ok(())
}
