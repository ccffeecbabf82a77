//! Enumerate small sphere triangulations and find the ones that could flex.

use polyflex::geom::Tolerance;
use polyflex::minimality::{degree_identity_check, enumerate_triangulations, flexibility_candidates, generic_rigidity_probe};

fn main() {
    let all = enumerate_triangulations(9).unwrap();
    for (n, ts) in &all {
        println!("V = {n}: {} triangulations", ts.len());
    }
    for c in flexibility_candidates(7).unwrap() {
        let id = degree_identity_check(&c.reduced).unwrap();
        let probe = generic_rigidity_probe(&c.triangulation, 20, 1, &Tolerance::default()).unwrap();
        println!(
            "{:<22} V = {}  reduced (V4, V5) = ({}, {})  generic flex dimension {}..{}",
            c.label, c.triangulation.n, id.v4, id.v5, probe.min_flex_dimension, probe.max_flex_dimension
        );
    }
}
