//! KITTI object label lines.
//!
//! Layout: `type truncated occluded alpha left top right bottom h w l x y z
//! rotation_y [score]`. Locations are bottom centers; [`KittiObject::cuboid`]
//! converts to the center-based [`Cuboid3D`].

use std::fmt::Write as _;

use crate::boxes::{DetectionBox, GroundTruth};
use crate::error::{Error, Result};
use crate::geometry::{Cuboid3D, Rect2D};

pub const DONT_CARE: &str = "DontCare";

/// One label line, field for field.
#[derive(Debug, Clone, PartialEq)]
pub struct KittiObject {
    pub kind: String,
    pub truncated: f64,
    pub occluded: i32,
    pub alpha: f64,
    /// left, top, right, bottom
    pub bbox: [f64; 4],
    /// height, width, length
    pub dimensions: [f64; 3],
    /// bottom center x, y, z
    pub location: [f64; 3],
    pub rotation_y: f64,
    pub score: Option<f64>,
}

/// A parsed line: ground truth without a score, detection with one.
#[derive(Debug, Clone, PartialEq)]
pub enum KittiRecord {
    GroundTruth(GroundTruth),
    Detection(DetectionBox),
}

fn num<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("field `{name}`: cannot parse {field:?}"),
    })
}

impl KittiObject {
    /// Parses one whitespace-separated line; `line` is used in error messages.
    pub fn parse(text: &str, line: usize) -> Result<Self> {
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != 15 && f.len() != 16 {
            return Err(Error::Parse {
                line,
                message: format!("expected 15 or 16 fields, found {}", f.len()),
            });
        }
        let occluded = match f[2].parse::<i32>() {
            Ok(v) => v,
            // some tools write occlusion as a float
            Err(_) => num::<f64>(f[2], "occluded", line)? as i32,
        };
        Ok(Self {
            kind: f[0].to_string(),
            truncated: num(f[1], "truncated", line)?,
            occluded,
            alpha: num(f[3], "alpha", line)?,
            bbox: [
                num(f[4], "left", line)?,
                num(f[5], "top", line)?,
                num(f[6], "right", line)?,
                num(f[7], "bottom", line)?,
            ],
            dimensions: [
                num(f[8], "height", line)?,
                num(f[9], "width", line)?,
                num(f[10], "length", line)?,
            ],
            location: [num(f[11], "x", line)?, num(f[12], "y", line)?, num(f[13], "z", line)?],
            rotation_y: num(f[14], "rotation_y", line)?,
            score: f.get(15).map(|s| num(s, "score", line)).transpose()?,
        })
    }

    /// Serializes with shortest round-trip number formatting.
    pub fn to_line(&self) -> String {
        let mut s = String::with_capacity(96);
        let _ = write!(s, "{} {} {} {}", self.kind, self.truncated, self.occluded, self.alpha);
        for v in self.bbox.iter().chain(&self.dimensions).chain(&self.location) {
            let _ = write!(s, " {v}");
        }
        let _ = write!(s, " {}", self.rotation_y);
        if let Some(score) = self.score {
            let _ = write!(s, " {score}");
        }
        s
    }

    pub fn is_dont_care(&self) -> bool {
        self.kind == DONT_CARE
    }

    pub fn rect(&self) -> Rect2D {
        Rect2D::new(self.bbox[0], self.bbox[1], self.bbox[2], self.bbox[3])
    }

    pub fn cuboid(&self) -> Cuboid3D {
        let [h, w, l] = self.dimensions;
        let [x, y, z] = self.location;
        Cuboid3D::new([x, y - 0.5 * h, z], [w, h, l], self.rotation_y)
    }

    pub fn into_record(self) -> KittiRecord {
        let rect = self.rect();
        let cuboid = self.cuboid();
        match self.score {
            Some(score) => {
                let mut d = DetectionBox::new(rect, cuboid, score).with_class(self.kind);
                d.alpha = Some(self.alpha);
                KittiRecord::Detection(d)
            }
            None => {
                let mut g = GroundTruth::new(rect, cuboid);
                g.dont_care = self.kind == DONT_CARE;
                g.class = Some(self.kind);
                g.truncated = self.truncated.clamp(0.0, 1.0);
                g.occluded = u8::try_from(self.occluded).unwrap_or(3);
                g.alpha = Some(self.alpha);
                KittiRecord::GroundTruth(g)
            }
        }
    }

    fn from_parts(kind: &str, rect: &Rect2D, c: &Cuboid3D, alpha: Option<f64>) -> Self {
        Self {
            kind: kind.to_string(),
            truncated: -1.0,
            occluded: -1,
            alpha: alpha.unwrap_or(-10.0),
            bbox: [rect.x1, rect.y1, rect.x2, rect.y2],
            dimensions: [c.h, c.w, c.l],
            location: [c.cx, bottom_y(c), c.cz],
            rotation_y: c.yaw,
            score: None,
        }
    }

    pub fn from_detection(d: &DetectionBox) -> Self {
        let mut o = Self::from_parts(d.class.as_deref().unwrap_or("Car"), &d.rect, &d.cuboid, d.alpha);
        o.score = Some(d.score);
        o
    }

    pub fn from_ground_truth(g: &GroundTruth) -> Self {
        let kind = if g.dont_care { DONT_CARE } else { g.class.as_deref().unwrap_or("Car") };
        let mut o = Self::from_parts(kind, &g.rect, &g.cuboid, g.alpha);
        o.truncated = g.truncated;
        o.occluded = i32::from(g.occluded);
        o
    }
}

/// Bottom y whose conversion back gives `c.cy` exactly, when one exists
/// next to the rounded sum. Keeps write-read cycles at a fixpoint.
fn bottom_y(c: &Cuboid3D) -> f64 {
    let y = c.cy + 0.5 * c.h;
    [y, y.next_up(), y.next_down()]
        .into_iter()
        .find(|&v| v - 0.5 * c.h == c.cy)
        .unwrap_or(y)
}

/// Parses one label line into a ground truth (15 fields) or detection (16).
pub fn parse_kitti_label(text: &str, line: usize) -> Result<KittiRecord> {
    KittiObject::parse(text, line).map(KittiObject::into_record)
}

/// Parses a whole label file, skipping blank lines. Line numbers are 1-based.
pub fn parse_kitti_file(text: &str) -> Result<(Vec<DetectionBox>, Vec<GroundTruth>)> {
    let mut boxes = Vec::new();
    let mut gts = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_kitti_label(line, k + 1)? {
            KittiRecord::Detection(d) => boxes.push(d),
            KittiRecord::GroundTruth(g) => gts.push(g),
        }
    }
    Ok((boxes, gts))
}
