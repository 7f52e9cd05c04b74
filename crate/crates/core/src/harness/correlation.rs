//! Correlation between kept scores and true 3D overlap.

use std::io::Write;

use super::pipeline::{par_map, suppress, NmsSetup};
use super::scene::Scene;
use crate::error::Result;
use crate::geometry::{iou3d, iou3d_axis_aligned};

/// One kept box.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPoint {
    pub scene: String,
    pub index: usize,
    pub score: f64,
    /// Best rotated 3D IoU with a ground truth.
    pub iou3d: f64,
    /// Best 3D IoU with the yaw ignored.
    pub iou3d_axis_aligned: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub points: Vec<CorrelationPoint>,
    pub pearson: Option<f64>,
    pub pearson_axis_aligned: Option<f64>,
}

/// Sample Pearson correlation; `None` for fewer than two points or a
/// constant series.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "series differ in length");
    let n = x.len();
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if n < 2 || constant(x) || constant(y) {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn best(scene: &Scene, i: usize, f: fn(&crate::geometry::Cuboid3D, &crate::geometry::Cuboid3D) -> f64) -> f64 {
    scene
        .gts
        .iter()
        .filter(|g| !g.dont_care)
        .map(|g| f(&scene.boxes[i].cuboid, &g.cuboid))
        .fold(0.0, f64::max)
}

/// Runs NMS and correlates each kept box's rescore with its best 3D IoU.
pub fn score_iou_correlation(scenes: &[Scene], setup: &NmsSetup) -> Result<CorrelationReport> {
    let per_scene = par_map(scenes, |s| {
        let r = suppress(s, setup)?;
        let mut kept = r.kept.clone();
        kept.sort_unstable();
        Ok(kept
            .into_iter()
            .map(|i| CorrelationPoint {
                scene: s.id.clone(),
                index: i,
                score: r.rescores[i],
                iou3d: best(s, i, iou3d),
                iou3d_axis_aligned: best(s, i, iou3d_axis_aligned),
            })
            .collect::<Vec<_>>())
    })?;
    let points: Vec<CorrelationPoint> = per_scene.into_iter().flatten().collect();
    let scores: Vec<f64> = points.iter().map(|p| p.score).collect();
    let rot: Vec<f64> = points.iter().map(|p| p.iou3d).collect();
    let aligned: Vec<f64> = points.iter().map(|p| p.iou3d_axis_aligned).collect();
    Ok(CorrelationReport {
        pearson: pearson(&scores, &rot),
        pearson_axis_aligned: pearson(&scores, &aligned),
        points,
    })
}

impl CorrelationReport {
    /// Scatter CSV: `scene,index,score,iou3d,iou3d_axis_aligned`.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["scene", "index", "score", "iou3d", "iou3d_axis_aligned"])?;
        for p in &self.points {
            w.write_record([
                p.scene.clone(),
                p.index.to_string(),
                p.score.to_string(),
                p.iou3d.to_string(),
                p.iou3d_axis_aligned.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
