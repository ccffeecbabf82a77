//! Build the embedded flexible polyhedron on eight vertices and export it.

use std::fs;

use polyflex::constructions::{build_dodecahedron, DodecParams};
use polyflex::flex::flex_dimension;
use polyflex::geom::Tolerance;
use polyflex::io::{export_obj, mesh_to_json};
use polyflex::mesh::{self_intersections, signed_volume, validate};

fn main() {
    let tol = Tolerance::default();
    let params = DodecParams::standard();
    let d = build_dodecahedron(&params, &tol).unwrap();
    let rep = validate(&d.mesh);
    println!("V = {}, E = {}, F = {}, sphere: {}", rep.vertices, rep.edges, rep.faces, rep.is_sphere());
    println!("x = {:.6}, y = {:.6}", d.lengths.x, d.lengths.y);
    println!("reference base shape {:.6}, closing angle {:.6}", d.base_shape, d.phi);
    println!("tent over {:?}", d.tent_face);
    println!("self-intersections: {}", self_intersections(&d.mesh, &d.config, &tol).unwrap().len());
    println!("volume {:.6} (tent tetrahedron {:.6})", signed_volume(&d.mesh, &d.config).unwrap(), d.tent_volume);
    println!("flex dimension {}", flex_dimension(&d.mesh, &d.config, &tol).unwrap());

    let dir = std::env::temp_dir().join("polyflex");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("dodecahedron.json"), mesh_to_json(&d.mesh, &d.config).unwrap()).unwrap();
    fs::write(dir.join("dodecahedron.obj"), export_obj(&d.mesh, &d.config).unwrap()).unwrap();
    println!("wrote {}", dir.display());
}
