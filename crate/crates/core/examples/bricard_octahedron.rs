//! A line-symmetric flexible octahedron: its volume stays zero while it
//! flexes, and it always passes through itself.

use polyflex::constructions::{build_bricard1, BricardOneLengths, DodecParams};
use polyflex::flex::{continue_flex, flex_dimension, FlexOptions};
use polyflex::geom::Tolerance;
use polyflex::mesh::self_intersections;

fn main() {
    let tol = Tolerance::default();
    let params = DodecParams::standard();
    let lengths = BricardOneLengths::from_params(&params).unwrap();
    println!("{lengths:?}");
    let oct = build_bricard1(&params, 1.5, &tol).unwrap();
    println!("base shape {:.4}, closing angle {:.4}", oct.base_shape, oct.phi);
    println!("flex dimension {}", flex_dimension(&oct.mesh, &oct.config, &tol).unwrap());

    let report = self_intersections(&oct.mesh, &oct.config, &tol).unwrap();
    for (f, g) in report.face_pairs() {
        println!("  faces {:?} and {:?} intersect", oct.mesh.face_labels(f), oct.mesh.face_labels(g));
    }

    let opts = FlexOptions { stop_on_intersection: false, max_samples: 300, ..Default::default() };
    let traj = continue_flex(&oct.mesh, &oct.config, &opts).unwrap();
    let vmax = traj.samples.iter().map(|s| s.volume.abs()).fold(0.0, f64::max);
    println!("{} samples, max |volume| {vmax:.2e}, max residual {:.2e}, stops {:?}", traj.samples.len(), traj.max_residual(), traj.stops);
}
