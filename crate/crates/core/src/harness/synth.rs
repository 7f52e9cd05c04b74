//! Seeded synthetic scenes: non-overlapping cars seen by a KITTI-like camera,
//! each with a cloud of jittered proposals scored by their true 3D overlap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::scene::Scene;
use crate::boxes::{DetectionBox, GroundTruth};
use crate::error::{Error, Result};
use crate::geometry::{iou2d, iou3d, rotated_bev_intersection_area, Cuboid3D, Rect2D};

/// Pinhole camera with square pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub focal: f64,
    pub cu: f64,
    pub cv: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            focal: 721.5377,
            cu: 609.5593,
            cv: 172.854,
            width: 1242.0,
            height: 375.0,
        }
    }
}

impl Camera {
    /// Image-space bounds of the eight projected corners, clipped to the
    /// image. `None` if a corner is behind the camera.
    pub fn project(&self, c: &Cuboid3D) -> Option<Rect2D> {
        let (top, bottom) = c.vertical_extent();
        let footprint = c.bev_polygon();
        let (mut u0, mut v0, mut u1, mut v1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for &[x, z] in footprint.vertices() {
            if z <= 0.1 {
                return None;
            }
            for y in [top, bottom] {
                let u = self.focal * x / z + self.cu;
                let v = self.focal * y / z + self.cv;
                u0 = u0.min(u);
                u1 = u1.max(u);
                v0 = v0.min(v);
                v1 = v1.max(v);
            }
        }
        Some(Rect2D::new(
            u0.clamp(0.0, self.width),
            v0.clamp(0.0, self.height),
            u1.clamp(0.0, self.width),
            v1.clamp(0.0, self.height),
        ))
    }

    fn fully_visible(&self, c: &Cuboid3D) -> Option<Rect2D> {
        let r = self.project(c)?;
        let inside = r.x1 > 0.0 && r.y1 > 0.0 && r.x2 < self.width && r.y2 < self.height;
        inside.then_some(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub scenes: usize,
    pub objects: usize,
    pub proposals_per_object: usize,
    /// Standard deviation of the proposal center offset, in meters.
    pub center_jitter: f64,
    /// Standard deviation of the relative size change.
    pub size_jitter: f64,
    /// Standard deviation of the heading change, in radians.
    pub yaw_jitter: f64,
    /// Standard deviation of the noise added to the 3D-IoU score.
    pub score_noise: f64,
    /// Make the first proposal of every object an exact copy of it.
    pub exact_proposal: bool,
    /// Largest 2D IoU allowed between two objects of a scene.
    pub max_object_overlap: f64,
    pub max_attempts: usize,
    pub camera: Camera,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenes: 10,
            objects: 4,
            proposals_per_object: 8,
            center_jitter: 0.3,
            size_jitter: 0.05,
            yaw_jitter: 0.05,
            score_noise: 0.05,
            exact_proposal: false,
            max_object_overlap: 0.4,
            max_attempts: 10_000,
            camera: Camera::default(),
        }
    }
}

impl SyntheticConfig {
    pub fn noise_free(mut self) -> Self {
        self.center_jitter = 0.0;
        self.size_jitter = 0.0;
        self.yaw_jitter = 0.0;
        self.score_noise = 0.0;
        self
    }
}

fn normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    sigma * z
}

fn random_car(rng: &mut ChaCha8Rng) -> Cuboid3D {
    let h = rng.random_range(1.4..1.7);
    let w = rng.random_range(1.5..1.8);
    let l = rng.random_range(3.5..4.5);
    let x = rng.random_range(-10.0..10.0);
    let z = rng.random_range(6.0..25.0);
    // cars rest on the ground 1.65 m below the camera
    let cy = 1.65 - 0.5 * h;
    let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Cuboid3D::new([x, cy, z], [w, h, l], yaw)
}

fn place_objects(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<Vec<GroundTruth>> {
    let mut placed: Vec<GroundTruth> = Vec::with_capacity(cfg.objects);
    let mut attempts = 0;
    while placed.len() < cfg.objects {
        attempts += 1;
        if attempts > cfg.max_attempts {
            return Err(Error::InfeasiblePlacement { objects: cfg.objects, attempts: cfg.max_attempts });
        }
        let c = random_car(rng);
        let Some(rect) = cfg.camera.fully_visible(&c) else {
            continue;
        };
        let clear = placed.iter().all(|g| {
            iou2d(&rect, &g.rect) <= cfg.max_object_overlap && rotated_bev_intersection_area(&c, &g.cuboid) == 0.0
        });
        if clear {
            placed.push(GroundTruth::new(rect, c).with_class("Car"));
        }
    }
    Ok(placed)
}

fn proposal(cfg: &SyntheticConfig, gt: &GroundTruth, rng: &mut ChaCha8Rng) -> DetectionBox {
    let g = &gt.cuboid;
    let scale = |rng: &mut ChaCha8Rng| (1.0 + normal(rng, cfg.size_jitter)).max(0.1);
    let dims = [g.w * scale(rng), g.h * scale(rng), g.l * scale(rng)];
    let center = [
        g.cx + normal(rng, cfg.center_jitter),
        g.cy + normal(rng, 0.25 * cfg.center_jitter),
        g.cz + normal(rng, cfg.center_jitter),
    ];
    let cuboid = Cuboid3D::new(center, dims, g.yaw + normal(rng, cfg.yaw_jitter));
    let rect = cfg.camera.project(&cuboid).unwrap_or(gt.rect);
    let score = (iou3d(&cuboid, g) + normal(rng, cfg.score_noise)).clamp(0.0, 1.0);
    DetectionBox::new(rect, cuboid, score).with_class("Car")
}

/// Generates `cfg.scenes` scenes. The same configuration always yields the
/// same scenes.
pub fn synthesize(cfg: &SyntheticConfig) -> Result<Vec<Scene>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.scenes)
        .map(|k| {
            let gts = place_objects(cfg, &mut rng)?;
            let mut boxes = Vec::with_capacity(gts.len() * cfg.proposals_per_object);
            for g in &gts {
                for p in 0..cfg.proposals_per_object {
                    if p == 0 && cfg.exact_proposal {
                        let score = (1.0 + normal(&mut rng, cfg.score_noise)).clamp(0.0, 1.0);
                        boxes.push(DetectionBox::new(g.rect, g.cuboid, score).with_class("Car"));
                    } else {
                        boxes.push(proposal(cfg, g, &mut rng));
                    }
                }
            }
            Ok(Scene {
                boxes,
                gts,
                camera: Some("synthetic".into()),
                ..Scene::new(format!("synth_{k:06}"))
            })
        })
        .collect()
}
