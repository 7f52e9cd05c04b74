//! 3D IoU and generalized IoU of a car and a copy of it rotated about its
//! vertical axis, under both hull conventions.

use std::f64::consts::PI;

use diffnms::geometry::{giou3d_with, iou3d, iou3d_axis_aligned, Cuboid3D, HullMode};

fn main() {
    let car = Cuboid3D::new([2.0, 1.0, 15.0], [1.6, 1.5, 4.0], 0.0);
    println!("{:>6} {:>8} {:>8} {:>10} {:>10}", "yaw", "iou3d", "aligned", "giou", "giou env");
    for k in 0..=8 {
        let yaw = k as f64 * PI / 16.0;
        let turned = Cuboid3D::new([2.0, 1.0, 15.0], [1.6, 1.5, 4.0], yaw);
        let shifted = turned.translated(0.8, 0.0, 0.5);
        println!(
            "{yaw:>6.3} {:>8.4} {:>8.4} {:>10.4} {:>10.4}",
            iou3d(&car, &shifted),
            iou3d_axis_aligned(&car, &shifted),
            giou3d_with(&car, &shifted, HullMode::YawDiscarded),
            giou3d_with(&car, &shifted, HullMode::RotatedEnvelope),
        );
    }
}
