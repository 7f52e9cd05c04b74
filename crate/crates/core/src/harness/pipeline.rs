//! Running an NMS variant over whole scenes, in parallel.

use rayon::prelude::*;

use super::scene::Scene;
use super::scores::{nms_score, ScoreMode};
use crate::error::{Error, Result};
use crate::geometry::{overlap_matrix, OverlapMatrix, Rect2D};
use crate::nms::{NmsConfig, NmsVariant, RescoreResult};

/// Everything that decides how a scene is suppressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsSetup {
    pub variant: NmsVariant,
    pub config: NmsConfig,
    pub score_mode: ScoreMode,
}

impl Default for NmsSetup {
    fn default() -> Self {
        Self {
            variant: NmsVariant::Groomed,
            config: NmsConfig::default(),
            score_mode: ScoreMode::default(),
        }
    }
}

pub fn scene_scores(scene: &Scene, mode: ScoreMode) -> Vec<f64> {
    scene.boxes.iter().map(|b| nms_score(b, mode)).collect()
}

pub fn scene_overlaps(scene: &Scene) -> OverlapMatrix {
    let rects: Vec<Rect2D> = scene.boxes.iter().map(|b| b.rect).collect();
    overlap_matrix(&rects)
}

pub fn suppress(scene: &Scene, setup: &NmsSetup) -> Result<RescoreResult> {
    let scores = scene_scores(scene, setup.score_mode);
    setup
        .variant
        .run(&scores, &scene_overlaps(scene), &setup.config)
        .map_err(|e| e.in_scene(&scene.id))
}

/// The scene with only its kept boxes, in input order, scored by their
/// rescores. Confidences are dropped since `score` is now final.
pub fn suppressed_scene(scene: &Scene, result: &RescoreResult) -> Scene {
    let boxes = scene
        .boxes
        .iter()
        .enumerate()
        .filter(|(i, _)| result.is_kept(*i))
        .map(|(i, b)| {
            let mut b = b.clone();
            b.score = result.rescores[i];
            b.class_conf = None;
            b.pred_conf = None;
            b
        })
        .collect();
    Scene {
        boxes,
        ..scene.clone()
    }
}

/// Worker count from `NMS_THREADS`, or rayon's default when unset or zero.
pub fn thread_count() -> Result<usize> {
    match std::env::var("NMS_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("NMS_THREADS must be a count, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Maps `f` over `items` on a pool sized by [`thread_count`]. Output order
/// follows input order whatever the thread count.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

/// Suppresses every scene and returns the reduced scenes.
pub fn run_scenes(scenes: &[Scene], setup: &NmsSetup) -> Result<Vec<Scene>> {
    par_map(scenes, |s| suppress(s, setup).map(|r| suppressed_scene(s, &r)))
}
