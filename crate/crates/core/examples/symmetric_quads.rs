//! Recover the symmetry of a skew quadrilateral from its side lengths.

use polyflex::geom::{half_rotation, reflect_in_plane, Point3, Tolerance};
use polyflex::quad_symmetry::{classify_quad, symmetry_line, symmetry_plane, QuadSymmetryKind};

fn main() {
    let tol = Tolerance::default();
    let p = Point3::new;

    // opposite sides equal: a half-turn swaps A <-> A' and B <-> B'
    let (a, b, a2, b2) = (p(2.0, -1.0, -1.0), p(1.0, 1.5, 1.5), p(-2.0, 1.0, -1.0), p(-1.0, -1.5, 1.5));
    let line = symmetry_line(&a, &b, &a2, &b2, &tol).unwrap();
    let r = half_rotation(&line);
    println!("rotation axis through {:?} along {:?}", line.anchor, line.direction());
    println!("  |R(A) - A'| = {:.1e}, |R(B) - B'| = {:.1e}", (r.apply(&a) - a2).norm(), (r.apply(&b) - b2).norm());

    // adjacent sides equal at A and at A': a mirror fixes A, A' and swaps B <-> B'
    let (a, b, a2, b2) = (p(2.0, 0.0, 0.0), p(1.8, -1.5, 1.5), p(-2.0, 0.0, 0.0), p(1.8, -1.5, -1.5));
    let plane = symmetry_plane(&a, &b, &a2, &b2, &tol).unwrap();
    let m = reflect_in_plane(&plane);
    println!("mirror plane through {:?} with normal {:?}", plane.point, plane.normal());
    println!("  |M(B) - B'| = {:.1e}", (m.apply(&b) - b2).norm());

    // a generic quadrilateral has neither symmetry
    let q = [p(0.0, 0.0, 0.0), p(1.0, 0.1, 0.0), p(1.3, 1.0, 0.4), p(-0.2, 0.9, -0.3)];
    match classify_quad(&q[0], &q[1], &q[2], &q[3], &tol) {
        QuadSymmetryKind::None => println!("generic quad: no symmetry"),
        k => println!("generic quad: {k:?}"),
    }
}
