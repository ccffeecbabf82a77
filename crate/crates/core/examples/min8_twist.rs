//! Cut an extended octahedron along a line-symmetric quadrilateral and twist
//! one side: the result is a flexible pentagonal bipyramid.

use polyflex::constructions::{build_min8_twist, Min8Params};
use polyflex::flex::{continue_flex, flex_dimension, FlexOptions};
use polyflex::geom::Tolerance;
use polyflex::minimality::PlanarTriangulation;
use polyflex::mesh::validate;

fn main() {
    let tol = Tolerance::default();
    let p = Min8Params::default();
    let m = build_min8_twist(&p, &tol).unwrap();
    let rep = validate(&m.mesh);
    println!("V = {}, E = {}, F = {}", rep.vertices, rep.edges, rep.faces);
    let mut degrees: Vec<(String, usize)> = m.mesh.vertices().iter().enumerate().map(|(i, v)| (v.clone(), m.mesh.degree(i))).collect();
    degrees.sort();
    println!("degrees {degrees:?}");
    let bip = PlanarTriangulation::bipyramid(5).degree_profile();
    println!("pentagonal bipyramid degrees {bip:?}");
    println!("flex dimension {}", flex_dimension(&m.mesh, &m.config, &tol).unwrap());

    let opts = FlexOptions { stop_on_intersection: false, max_samples: 200, ..Default::default() };
    let traj = continue_flex(&m.mesh, &m.config, &opts).unwrap();
    println!("{} samples, max residual {:.1e}, stops {:?}", traj.samples.len(), traj.max_residual(), traj.stops);
}
