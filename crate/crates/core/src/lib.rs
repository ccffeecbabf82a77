//! Flexible polyhedra built by cutting closed surfaces along symmetric
//! skew quadrilaterals and regluing one side moved by the symmetry.

pub mod cli;
pub mod constructions;
pub mod flex;
pub mod geom;
pub mod io;
pub mod mesh;
pub mod minimality;
pub mod net;
pub mod optimize;
pub mod quad_symmetry;
pub mod service;
pub mod tri_tri;
