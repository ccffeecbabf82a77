//! Lay out a net of the dodecahedron with fold and gluing marks.

use std::fs;

use polyflex::constructions::{build_dodecahedron, DodecParams};
use polyflex::flex::{continue_flex, FlexOptions};
use polyflex::geom::Tolerance;
use polyflex::io::TrajectoryDoc;
use polyflex::net::{export_svg, unfold_auto};

fn main() {
    let tol = Tolerance::default();
    let d = build_dodecahedron(&DodecParams::standard(), &tol).unwrap();
    let traj = continue_flex(&d.mesh, &d.config, &FlexOptions::default()).unwrap();
    let doc = TrajectoryDoc::from(&traj);
    let root = d.mesh.faces().iter().position(|f| f.contains(&d.mesh.index_of("T").unwrap())).unwrap();
    let net = unfold_auto(&d.mesh, &d.config, root, Some(&doc), &tol).unwrap();
    for e in &net.edges {
        let glue = e.color_key.map(|k| format!(" glue #{k}")).unwrap_or_default();
        println!("{:<8} {:?}{glue}", e.edge, e.tag);
    }
    println!("overlaps: {:?}", net.overlaps);
    let dir = std::env::temp_dir().join("polyflex");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("net.svg");
    fs::write(&path, export_svg(&net)).unwrap();
    println!("wrote {}", path.display());
}
