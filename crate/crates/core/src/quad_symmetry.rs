//! Symmetries of skew quadrilaterals `A B A' B'`.
//!
//! Equal opposite sides (`AB = A'B'`, `AB' = A'B`) force a half-turn symmetry
//! swapping `A <-> A'` and `B <-> B'`. Equal adjacent sides around `A` and
//! `A'` (`AB = AB'`, `A'B = A'B'`) force a mirror plane through `A` and `A'`
//! swapping `B <-> B'`. Both statements survive any flex of the
//! quadrilateral, which is what makes the surgery in [`crate::mesh`] work.

use crate::geom::{midpoint, GeomError, Line3, Plane3, Point3, Tolerance};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("not rotationally symmetric: |AB - A'B'| = {0:e}, |AB' - A'B| = {1:e}")]
    NotRotational(f64, f64),
    #[error("not reflectionally symmetric: |AB - AB'| = {0:e}, |A'B - A'B'| = {1:e}")]
    NotReflective(f64, f64),
    #[error("degenerate quadrilateral")]
    Degenerate,
    #[error("coincident points")]
    Coincident,
}

impl From<GeomError> for SymmetryError {
    fn from(_: GeomError) -> Self {
        SymmetryError::Degenerate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadSymmetryKind {
    RotationalAboutLine(Line3),
    ReflectiveInPlane(Plane3),
    None,
}

/// Largest pairwise distance among the four points.
pub fn quad_scale(q: &[Point3; 4]) -> f64 {
    let mut s: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            s = s.max((q[i] - q[j]).norm());
        }
    }
    s
}

fn check_sides(q: &[Point3; 4], scale: f64) -> Result<(), SymmetryError> {
    for i in 0..4 {
        if (q[i] - q[(i + 1) % 4]).norm() <= 1e-12 * scale || scale == 0.0 {
            return Err(SymmetryError::Coincident);
        }
    }
    Ok(())
}

fn d(a: &Point3, b: &Point3) -> f64 {
    (a - b).norm()
}

/// Line `l` such that the half-turn about `l` maps `A -> A'` and `B -> B'`.
pub fn symmetry_line(
    a: &Point3,
    b: &Point3,
    a2: &Point3,
    b2: &Point3,
    tol: &Tolerance,
) -> Result<Line3, SymmetryError> {
    let q = [*a, *b, *a2, *b2];
    let scale = quad_scale(&q);
    check_sides(&q, scale)?;
    let r1 = (d(a, b) - d(a2, b2)).abs();
    let r2 = (d(a, b2) - d(a2, b)).abs();
    if r1 > tol.eps_len * scale || r2 > tol.eps_len * scale {
        return Err(SymmetryError::NotRotational(r1, r2));
    }
    let x = midpoint(a, a2);
    let y = midpoint(b, b2);
    if (y - x).norm() > 1e-9 * scale {
        return Ok(Line3::through(x, y)?);
    }
    // diagonals bisect each other: planar parallelogram
    let n = (a2 - a).cross(&(b2 - b));
    if n.norm() <= 1e-12 * scale * scale {
        return Err(SymmetryError::Degenerate);
    }
    Ok(Line3::new(x, n)?)
}

/// Plane `π` through `A` and `A'` whose reflection maps `B -> B'`.
pub fn symmetry_plane(
    a: &Point3,
    b: &Point3,
    a2: &Point3,
    b2: &Point3,
    tol: &Tolerance,
) -> Result<Plane3, SymmetryError> {
    let q = [*a, *b, *a2, *b2];
    let scale = quad_scale(&q);
    check_sides(&q, scale)?;
    let r1 = (d(a, b) - d(a, b2)).abs();
    let r2 = (d(a2, b) - d(a2, b2)).abs();
    if r1 > tol.eps_len * scale || r2 > tol.eps_len * scale {
        return Err(SymmetryError::NotReflective(r1, r2));
    }
    if d(b, b2) <= 1e-12 * scale {
        return Err(SymmetryError::Degenerate);
    }
    let m = midpoint(b, b2);
    let n = (a2 - a).cross(&(m - a));
    if n.norm() > 1e-9 * scale * scale {
        let mut plane = Plane3::new(*a, n)?;
        // orient so that B lies on the positive side
        if plane.signed_distance(b) < 0.0 {
            plane = Plane3::new(*a, -n)?;
        }
        return Ok(plane);
    }
    // planar kite: A, A', M collinear, the mirror is perpendicular to the
    // quadrilateral's plane and contains the diagonal AA'
    Ok(Plane3::new(*a, b - b2)?)
}

/// Which of the two symmetry cases applies; rotational wins when both do.
pub fn classify_quad(
    a: &Point3,
    b: &Point3,
    a2: &Point3,
    b2: &Point3,
    tol: &Tolerance,
) -> QuadSymmetryKind {
    if let Ok(l) = symmetry_line(a, b, a2, b2, tol) {
        return QuadSymmetryKind::RotationalAboutLine(l);
    }
    if let Ok(p) = symmetry_plane(a, b, a2, b2, tol) {
        return QuadSymmetryKind::ReflectiveInPlane(p);
    }
    QuadSymmetryKind::None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{half_rotation, reflect_in_plane, Vec3};

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn rotational_figure_coordinates() {
        let (a, b, a2, b2) = (p(2.0, -1.0, -1.0), p(1.0, 1.5, 1.5), p(-2.0, 1.0, -1.0), p(-1.0, -1.5, 1.5));
        let l = symmetry_line(&a, &b, &a2, &b2, &Tolerance::default()).unwrap();
        assert!(l.direction().cross(&Vec3::z()).norm() < 1e-12);
        assert!(l.distance_to(&Point3::origin()) < 1e-12);
        // midpoints used by the construction
        assert!((l.anchor - p(0.0, 0.0, -1.0)).norm() < 1e-12);
        let r = half_rotation(&l);
        assert!((r.apply(&a) - a2).norm() < 1e-12);
        assert!((r.apply(&b) - b2).norm() < 1e-12);
        // XY is perpendicular to both diagonals
        assert!(l.direction().dot(&(a2 - a)).abs() < 1e-12);
        assert!(l.direction().dot(&(b2 - b)).abs() < 1e-12);
    }

    #[test]
    fn planar_square_uses_normal_axis() {
        let (a, b, a2, b2) = (p(1.0, 1.0, 0.0), p(-1.0, 1.0, 0.0), p(-1.0, -1.0, 0.0), p(1.0, -1.0, 0.0));
        let l = symmetry_line(&a, &b, &a2, &b2, &Tolerance::default()).unwrap();
        assert!(l.direction().cross(&Vec3::z()).norm() < 1e-12);
        assert!(l.distance_to(&p(0.0, 0.0, 7.0)) < 1e-12);
    }

    #[test]
    fn reflective_figure_coordinates() {
        let (a, b, a2, b2) = (p(2.0, 0.0, 0.0), p(1.8, -1.5, 1.5), p(-2.0, 0.0, 0.0), p(1.8, -1.5, -1.5));
        let pl = symmetry_plane(&a, &b, &a2, &b2, &Tolerance::default()).unwrap();
        assert!(pl.normal().cross(&Vec3::z()).norm() < 1e-12);
        assert!(pl.signed_distance(&Point3::origin()).abs() < 1e-12);
        let m = reflect_in_plane(&pl);
        assert!((m.apply(&b) - b2).norm() < 1e-12);
    }

    #[test]
    fn planar_kite() {
        let (a, b, a2, b2) = (p(0.0, 0.0, 1.0), p(1.0, 0.0, 0.0), p(0.0, 0.0, -1.0), p(-1.0, 0.0, 0.0));
        let pl = symmetry_plane(&a, &b, &a2, &b2, &Tolerance::default()).unwrap();
        assert!(pl.normal().cross(&Vec3::x()).norm() < 1e-12);
        assert!(pl.signed_distance(&Point3::origin()).abs() < 1e-12);
    }

    #[test]
    fn classification() {
        let tol = Tolerance::default();
        let f1 = [p(2.0, -1.0, -1.0), p(1.0, 1.5, 1.5), p(-2.0, 1.0, -1.0), p(-1.0, -1.5, 1.5)];
        assert!(matches!(
            classify_quad(&f1[0], &f1[1], &f1[2], &f1[3], &tol),
            QuadSymmetryKind::RotationalAboutLine(_)
        ));
        let f2 = [p(2.0, 0.0, 0.0), p(1.8, -1.5, 1.5), p(-2.0, 0.0, 0.0), p(1.8, -1.5, -1.5)];
        assert!(matches!(
            classify_quad(&f2[0], &f2[1], &f2[2], &f2[3], &tol),
            QuadSymmetryKind::ReflectiveInPlane(_)
        ));
        let g = [p(0.1, 0.3, -0.2), p(1.7, 0.2, 0.9), p(0.4, 2.2, 0.1), p(-1.3, 0.8, 1.4)];
        assert_eq!(classify_quad(&g[0], &g[1], &g[2], &g[3], &tol), QuadSymmetryKind::None);
    }

    #[test]
    fn precondition_and_degeneracy_errors() {
        let tol = Tolerance::default();
        let g = [p(0.1, 0.3, -0.2), p(1.7, 0.2, 0.9), p(0.4, 2.2, 0.1), p(-1.3, 0.8, 1.4)];
        assert!(matches!(symmetry_line(&g[0], &g[1], &g[2], &g[3], &tol), Err(SymmetryError::NotRotational(..))));
        assert!(matches!(symmetry_plane(&g[0], &g[1], &g[2], &g[3], &tol), Err(SymmetryError::NotReflective(..))));
        let c = p(1.0, 1.0, 1.0);
        assert_eq!(symmetry_line(&c, &c, &c, &c, &tol), Err(SymmetryError::Coincident));
    }
}
