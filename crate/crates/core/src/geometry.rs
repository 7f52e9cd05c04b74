//! Box overlap measures in the image plane, bird's-eye view and 3D.
//!
//! Camera coordinates follow the usual driving-dataset convention: `y` points
//! down, so the vertical extent of a cuboid is `[cy - h/2, cy + h/2]` and the
//! bird's-eye-view (BEV) plane is spanned by `x` and `z`. A cuboid's length
//! `l` lies along its heading `(cos yaw, -sin yaw)` in that plane and its
//! width `w` along the perpendicular.

use serde::{Deserialize, Serialize};

/// Vertices closer than this are merged after clipping.
const DEDUP_TOL: f64 = 1e-9;

/// Axis-aligned image-plane rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2D {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Rect2D {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> f64 {
        (self.x2 - self.x1).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y2 - self.y1).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_valid(&self) -> bool {
        self.x1 <= self.x2 && self.y1 <= self.y2
    }
}

/// Yaw-rotated cuboid in camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuboid3D {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
    pub w: f64,
    pub h: f64,
    pub l: f64,
    pub yaw: f64,
}

impl Cuboid3D {
    pub fn new(center: [f64; 3], dims_whl: [f64; 3], yaw: f64) -> Self {
        Self {
            cx: center[0],
            cy: center[1],
            cz: center[2],
            w: dims_whl[0],
            h: dims_whl[1],
            l: dims_whl[2],
            yaw,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.w > 0.0 && self.h > 0.0 && self.l > 0.0)
    }

    /// Vertical interval `(top, bottom)` with `top <= bottom`.
    pub fn vertical_extent(&self) -> (f64, f64) {
        let half = 0.5 * self.h.max(0.0);
        (self.cy - half, self.cy + half)
    }

    /// Footprint with yaw discarded: `[x_min, x_max] x [z_min, z_max]`.
    pub fn bev_rect(&self) -> [f64; 4] {
        let hl = 0.5 * self.l.max(0.0);
        let hw = 0.5 * self.w.max(0.0);
        [self.cx - hl, self.cx + hl, self.cz - hw, self.cz + hw]
    }

    /// Footprint area computed from the yaw-discarded extents, so that
    /// identical boxes produce bitwise-identical areas, volumes and hulls.
    pub fn bev_area(&self) -> f64 {
        let [x0, x1, z0, z1] = self.bev_rect();
        (x1 - x0) * (z1 - z0)
    }

    pub fn volume(&self) -> f64 {
        let (top, bottom) = self.vertical_extent();
        self.bev_area() * (bottom - top)
    }

    /// Rotated BEV footprint as a counter-clockwise polygon in the `(x, z)` plane.
    pub fn bev_polygon(&self) -> ConvexPolygon {
        if self.w <= 0.0 || self.l <= 0.0 {
            return ConvexPolygon::empty();
        }
        let (s, c) = self.yaw.sin_cos();
        // heading and its perpendicular in (x, z)
        let hx = [c * 0.5 * self.l, -s * 0.5 * self.l];
        let wx = [s * 0.5 * self.w, c * 0.5 * self.w];
        let corner = |a: f64, b: f64| {
            [
                self.cx + a * hx[0] + b * wx[0],
                self.cz + a * hx[1] + b * wx[1],
            ]
        };
        ConvexPolygon::from_vertices(vec![
            corner(1.0, 1.0),
            corner(-1.0, 1.0),
            corner(-1.0, -1.0),
            corner(1.0, -1.0),
        ])
    }

    /// True when `(x, z)` lies inside the rotated footprint. Used by sampling
    /// checks; independent of the clipping path.
    pub fn bev_contains(&self, x: f64, z: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.cx;
        let dz = z - self.cz;
        let along = c * dx - s * dz;
        let across = s * dx + c * dz;
        along.abs() <= 0.5 * self.l && across.abs() <= 0.5 * self.w
    }

    /// Same cuboid shifted by `(dx, dy, dz)`.
    pub fn translated(&self, dx: f64, dy: f64, dz: f64) -> Self {
        Self {
            cx: self.cx + dx,
            cy: self.cy + dy,
            cz: self.cz + dz,
            ..*self
        }
    }

    fn same_footprint(&self, other: &Self) -> bool {
        self.cx == other.cx
            && self.cz == other.cz
            && self.w == other.w
            && self.l == other.l
            && self.yaw == other.yaw
    }
}

/// Convex polygon with counter-clockwise winding, or empty.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a polygon from convex vertices in either winding. Near-duplicate
    /// vertices are merged; fewer than three survivors give the empty polygon.
    pub fn from_vertices(mut vertices: Vec<[f64; 2]>) -> Self {
        dedup_ring(&mut vertices);
        if vertices.len() < 3 {
            return Self::empty();
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).max(0.0)
    }

    /// Sutherland-Hodgman clip of `self` against the convex `clip`.
    pub fn intersect(&self, clip: &ConvexPolygon) -> ConvexPolygon {
        if self.is_empty() || clip.is_empty() {
            return Self::empty();
        }
        let mut output = self.vertices.clone();
        let m = clip.vertices.len();
        for k in 0..m {
            if output.is_empty() {
                break;
            }
            let a = clip.vertices[k];
            let b = clip.vertices[(k + 1) % m];
            let input = std::mem::take(&mut output);
            let side = |p: [f64; 2]| cross(a, b, p);
            for i in 0..input.len() {
                let cur = input[i];
                let prev = input[(i + input.len() - 1) % input.len()];
                let (sc, sp) = (side(cur), side(prev));
                if sc >= 0.0 {
                    if sp < 0.0 {
                        output.push(segment_intersection(prev, cur, sp, sc));
                    }
                    output.push(cur);
                } else if sp >= 0.0 {
                    output.push(segment_intersection(prev, cur, sp, sc));
                }
            }
        }
        Self::from_vertices(output)
    }
}

fn cross(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn segment_intersection(p: [f64; 2], q: [f64; 2], sp: f64, sq: f64) -> [f64; 2] {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    // shoelace about the first vertex to limit cancellation
    let o = v[0];
    let mut acc = 0.0;
    for i in 1..v.len() - 1 {
        let a = [v[i][0] - o[0], v[i][1] - o[1]];
        let b = [v[i + 1][0] - o[0], v[i + 1][1] - o[1]];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * acc
}

fn dedup_ring(v: &mut Vec<[f64; 2]>) {
    let close = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).abs() <= DEDUP_TOL && (a[1] - b[1]).abs() <= DEDUP_TOL;
    v.dedup_by(|a, b| close(*a, *b));
    while v.len() > 1 && close(v[0], v[v.len() - 1]) {
        v.pop();
    }
}

/// 2D intersection over union. Zero when disjoint or when the union is empty.
pub fn iou2d(a: &Rect2D, b: &Rect2D) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 || inter <= 0.0 {
        return 0.0;
    }
    (inter / union).min(1.0)
}

/// Area shared by the yaw-rotated BEV footprints, clamped to the smaller
/// footprint area.
pub fn rotated_bev_intersection_area(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    if a.w <= 0.0 || a.l <= 0.0 || b.w <= 0.0 || b.l <= 0.0 {
        return 0.0;
    }
    let cap = a.bev_area().min(b.bev_area());
    if a.same_footprint(b) {
        return cap;
    }
    a.bev_polygon().intersect(&b.bev_polygon()).area().min(cap)
}

fn vertical_overlap(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    let (at, ab) = a.vertical_extent();
    let (bt, bb) = b.vertical_extent();
    (ab.min(bb) - at.max(bt)).max(0.0)
}

fn vertical_hull(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    let (at, ab) = a.vertical_extent();
    let (bt, bb) = b.vertical_extent();
    ab.max(bb) - at.min(bt)
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 && num > 0.0 {
        (num / den).min(1.0)
    } else {
        0.0
    }
}

/// Rotated 3D intersection over union: rotated BEV intersection times the
/// vertical-interval overlap, over the union volume.
pub fn iou3d(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    let (inter, union) = inter_union_volume(a, b);
    ratio_or_zero(inter, union)
}

/// 3D IoU with yaw discarded on both boxes.
pub fn iou3d_axis_aligned(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    let inter = aligned_bev_intersection(a, b) * vertical_overlap(a, b);
    let union = a.volume() + b.volume() - inter;
    ratio_or_zero(inter, union)
}

fn inter_union_volume(a: &Cuboid3D, b: &Cuboid3D) -> (f64, f64) {
    if a.is_degenerate() && b.is_degenerate() {
        return (0.0, 0.0);
    }
    let inter = if a.is_degenerate() || b.is_degenerate() {
        0.0
    } else {
        let h = vertical_overlap(a, b);
        if h > 0.0 {
            rotated_bev_intersection_area(a, b) * h
        } else {
            0.0
        }
    };
    let union = a.volume().max(0.0) + b.volume().max(0.0) - inter;
    (inter, union)
}

fn aligned_bev_intersection(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    let [ax0, ax1, az0, az1] = a.bev_rect();
    let [bx0, bx1, bz0, bz1] = b.bev_rect();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (az1.min(bz1) - az0.max(bz0)).max(0.0);
    iw * ih
}

fn generalized(iou: f64, union: f64, hull: f64) -> f64 {
    if hull <= 0.0 {
        return iou;
    }
    iou - (hull - union) / hull
}

/// Generalized IoU of the yaw-discarded BEV rectangles.
pub fn giou2d_bev(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    let inter = aligned_bev_intersection(a, b);
    let union = a.bev_area().max(0.0) + b.bev_area().max(0.0) - inter;
    let iou = ratio_or_zero(inter, union);
    let [ax0, ax1, az0, az1] = a.bev_rect();
    let [bx0, bx1, bz0, bz1] = b.bev_rect();
    let hull = (ax1.max(bx1) - ax0.min(bx0)) * (az1.max(bz1) - az0.min(bz0));
    generalized(iou, union, hull)
}

/// How the enclosing volume of the 3D generalized IoU is formed in BEV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HullMode {
    /// Axis-aligned hull of the yaw-discarded footprints, never smaller than
    /// the union volume it encloses.
    #[default]
    YawDiscarded,
    /// Axis-aligned bounding rectangle of both rotated footprints.
    RotatedEnvelope,
}

/// 3D generalized IoU with the default [`HullMode`].
pub fn giou3d(a: &Cuboid3D, b: &Cuboid3D) -> f64 {
    giou3d_with(a, b, HullMode::default())
}

/// `V(a∩b)/V(a∪b) + V(a∪b)/V_hull - 1`, where the intersection uses the
/// rotated footprints and the hull is the BEV hull area times the hull of the
/// vertical intervals.
pub fn giou3d_with(a: &Cuboid3D, b: &Cuboid3D, mode: HullMode) -> f64 {
    let (inter, union) = inter_union_volume(a, b);
    let iou = ratio_or_zero(inter, union);
    let bev_hull = match mode {
        HullMode::YawDiscarded => {
            let [ax0, ax1, az0, az1] = a.bev_rect();
            let [bx0, bx1, bz0, bz1] = b.bev_rect();
            (ax1.max(bx1) - ax0.min(bx0)) * (az1.max(bz1) - az0.min(bz0))
        }
        HullMode::RotatedEnvelope => {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for p in a.bev_polygon().vertices().iter().chain(b.bev_polygon().vertices()) {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            if lo[0].is_finite() {
                (hi[0] - lo[0]) * (hi[1] - lo[1])
            } else {
                0.0
            }
        }
    };
    let hull = (bev_hull * vertical_hull(a, b)).max(union);
    generalized(iou, union, hull)
}

/// Dense, symmetric matrix of pairwise overlaps stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    n: usize,
    data: Vec<f64>,
}

impl OverlapMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Wraps row-major values. Panics when `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "overlap matrix must be n x n");
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_symmetric(&mut self, i: usize, j: usize, value: f64) {
        self.set(i, j, value);
        self.set(j, i, value);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows and columns reordered so that new index `k` is old `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.n);
        let mut out = Self::zeros(self.n);
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                out.data[a * self.n + b] = self.get(i, j);
            }
        }
        out
    }
}

/// Pairwise IoU2D of `boxes`.
pub fn overlap_matrix(boxes: &[Rect2D]) -> OverlapMatrix {
    let n = boxes.len();
    let mut m = OverlapMatrix::zeros(n);
    for i in 0..n {
        if boxes[i].area() > 0.0 {
            m.set(i, i, 1.0);
        }
        for j in 0..i {
            m.set_symmetric(i, j, iou2d(&boxes[i], &boxes[j]));
        }
    }
    m
}
