//! Plain 3D primitives shared by every other module: points, lines, planes,
//! rigid isometries, trilateration and tetrahedron volume.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("base points are collinear")]
    Collinear,
    #[error("negative distance {0}")]
    NegativeDistance(f64),
    #[error("zero-length direction")]
    ZeroDirection,
}

/// Numerical slack used throughout the crate.
///
/// `eps_len` is relative to the natural length scale of whatever is being
/// checked, `eps_rank` is the singular-value cutoff relative to the largest
/// singular value and `eps_geom` is the absolute slack of intersection
/// predicates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub eps_len: f64,
    pub eps_rank: f64,
    pub eps_geom: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps_len: 1e-9, eps_rank: 1e-8, eps_geom: 1e-12 }
    }
}

impl Tolerance {
    pub fn is_valid(&self) -> bool {
        self.eps_len > 0.0 && self.eps_rank > 0.0 && self.eps_geom > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub anchor: Point3,
    direction: Vec3,
}

impl Line3 {
    pub fn new(anchor: Point3, direction: Vec3) -> Result<Self, GeomError> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::ZeroDirection);
        }
        Ok(Line3 { anchor, direction: direction / n })
    }

    pub fn through(a: Point3, b: Point3) -> Result<Self, GeomError> {
        Line3::new(a, b - a)
    }

    /// Unit direction.
    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn distance_to(&self, p: &Point3) -> f64 {
        let d = p - self.anchor;
        (d - self.direction * d.dot(&self.direction)).norm()
    }

    /// Foot of the perpendicular from `p`.
    pub fn project(&self, p: &Point3) -> Point3 {
        self.anchor + self.direction * (p - self.anchor).dot(&self.direction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane3 {
    pub point: Point3,
    normal: Vec3,
}

impl Plane3 {
    pub fn new(point: Point3, normal: Vec3) -> Result<Self, GeomError> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::ZeroDirection);
        }
        Ok(Plane3 { point, normal: normal / n })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        (p - self.point).dot(&self.normal)
    }
}

/// `x -> rotation * x + translation` with an orthogonal `rotation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry3 {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Isometry3 {
    pub fn identity() -> Self {
        Isometry3 { rotation: Matrix3::identity(), translation: Vec3::zeros() }
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry3) -> Isometry3 {
        Isometry3 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Isometry3 {
        let rt = self.rotation.transpose();
        Isometry3 { rotation: rt, translation: -(rt * self.translation) }
    }

    pub fn determinant(&self) -> f64 {
        self.rotation.determinant()
    }

    pub fn is_orthogonal(&self, eps: f64) -> bool {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax() <= eps
    }
}

/// Rotation by π about `line`.
pub fn half_rotation(line: &Line3) -> Isometry3 {
    let u = line.direction();
    // R = 2 u uᵀ - I
    let rotation = 2.0 * u * u.transpose() - Matrix3::identity();
    let a = line.anchor.coords;
    Isometry3 { rotation, translation: a - rotation * a }
}

/// Mirror reflection in `plane`.
pub fn reflect_in_plane(plane: &Plane3) -> Isometry3 {
    let n = plane.normal();
    let rotation = Matrix3::identity() - 2.0 * n * n.transpose();
    let a = plane.point.coords;
    Isometry3 { rotation, translation: a - rotation * a }
}

/// Points at distances `d1, d2, d3` from `p1, p2, p3`.
///
/// Returns two mirror-image solutions (across the plane of the base), one
/// when the sphere intersection is tangent, and none when infeasible.
pub fn trilaterate(
    p1: &Point3,
    p2: &Point3,
    p3: &Point3,
    d1: f64,
    d2: f64,
    d3: f64,
) -> Result<Vec<Point3>, GeomError> {
    for d in [d1, d2, d3] {
        if d < 0.0 {
            return Err(GeomError::NegativeDistance(d));
        }
    }
    let e12 = p2 - p1;
    let d = e12.norm();
    let e13 = p3 - p1;
    let scale = d.max(e13.norm());
    if d <= f64::EPSILON * scale.max(1.0) {
        return Err(GeomError::Collinear);
    }
    let ex = e12 / d;
    let i = ex.dot(&e13);
    let perp = e13 - ex * i;
    let j = perp.norm();
    if j <= 1e-12 * scale {
        return Err(GeomError::Collinear);
    }
    let ey = perp / j;
    let ez = ex.cross(&ey);

    let x = (d1 * d1 - d2 * d2 + d * d) / (2.0 * d);
    let y = (d1 * d1 - d3 * d3 + i * i + j * j) / (2.0 * j) - (i / j) * x;
    let z2 = d1 * d1 - x * x - y * y;
    let base = p1 + ex * x + ey * y;
    let slack = 1e-12 * (d1 * d1).max(scale * scale);
    if z2 < -slack {
        Ok(Vec::new())
    } else if z2 <= slack {
        Ok(vec![base])
    } else {
        let z = z2.sqrt();
        Ok(vec![base + ez * z, base - ez * z])
    }
}

/// `det(b - a, c - a, d - a) / 6`.
pub fn signed_volume_tetra(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

pub fn midpoint(a: &Point3, b: &Point3) -> Point3 {
    nalgebra::center(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z_axis() -> Line3 {
        Line3::new(Point3::origin(), Vec3::z()).unwrap()
    }

    #[test]
    fn half_rotation_about_z() {
        let r = half_rotation(&z_axis());
        let p = r.apply(&Point3::new(1.0, 0.0, 0.0));
        assert!((p - Point3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        let q = r.apply(&Point3::new(0.0, 0.0, 5.0));
        assert!((q - Point3::new(0.0, 0.0, 5.0)).norm() < 1e-15);
        assert!((r.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reflection_in_xy_plane() {
        let plane = Plane3::new(Point3::origin(), Vec3::z()).unwrap();
        let m = reflect_in_plane(&plane);
        let p = m.apply(&Point3::new(1.8, -1.5, 1.5));
        assert!((p - Point3::new(1.8, -1.5, -1.5)).norm() < 1e-15);
        let on = Point3::new(0.3, -7.0, 0.0);
        assert!((m.apply(&on) - on).norm() < 1e-15);
        assert!((m.determinant() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn trilaterate_symmetric_base() {
        let p1 = Point3::new(0.0, 0.0, 0.0);
        let p2 = Point3::new(2.0, 0.0, 0.0);
        let p3 = Point3::new(1.0, 1.0, 0.0);
        let sols = trilaterate(&p1, &p2, &p3, 1.5, 1.5, 1.2).unwrap();
        assert_eq!(sols.len(), 2);
        for q in &sols {
            assert!(((q - p1).norm() - (q - p2).norm()).abs() < 1e-12);
        }
        // mirror images across z = 0
        assert!((sols[0].z + sols[1].z).abs() < 1e-12);
    }

    #[test]
    fn trilaterate_infeasible_and_errors() {
        let p1 = Point3::new(0.0, 0.0, 0.0);
        let p2 = Point3::new(10.0, 0.0, 0.0);
        let p3 = Point3::new(0.0, 10.0, 0.0);
        assert!(trilaterate(&p1, &p2, &p3, 0.01, 0.01, 0.01).unwrap().is_empty());
        let c = Point3::new(20.0, 0.0, 0.0);
        assert_eq!(trilaterate(&p1, &p2, &c, 1.0, 1.0, 1.0), Err(GeomError::Collinear));
        assert!(matches!(
            trilaterate(&p1, &p2, &p3, -1.0, 1.0, 1.0),
            Err(GeomError::NegativeDistance(_))
        ));
    }

    #[test]
    fn tetra_volume() {
        let o = Point3::origin();
        let x = Point3::new(1.0, 0.0, 0.0);
        let y = Point3::new(0.0, 1.0, 0.0);
        let z = Point3::new(0.0, 0.0, 1.0);
        assert!((signed_volume_tetra(&o, &x, &y, &z) - 1.0 / 6.0).abs() < 1e-15);
        assert!((signed_volume_tetra(&o, &x, &z, &y) + 1.0 / 6.0).abs() < 1e-15);
        let w = Point3::new(0.5, 0.5, 0.0);
        assert_eq!(signed_volume_tetra(&o, &x, &y, &w), 0.0);
    }

    #[test]
    fn compose_and_inverse() {
        let a = half_rotation(&Line3::new(Point3::new(1.0, 2.0, 0.0), Vec3::new(1.0, 1.0, 0.5)).unwrap());
        let b = reflect_in_plane(&Plane3::new(Point3::new(0.0, 1.0, 3.0), Vec3::new(0.2, -1.0, 0.4)).unwrap());
        let c = a.compose(&b);
        let p = Point3::new(0.3, -0.7, 2.0);
        assert!((c.apply(&p) - a.apply(&b.apply(&p))).norm() < 1e-12);
        assert!((c.inverse().apply(&c.apply(&p)) - p).norm() < 1e-12);
        assert!(c.is_orthogonal(1e-12));
    }

    fn pt() -> impl Strategy<Value = Point3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    fn dir() -> impl Strategy<Value = Vec3> {
        pt().prop_filter("non-zero", |p| p.coords.norm() > 1e-3).prop_map(|p| p.coords)
    }

    proptest! {
        #[test]
        fn half_rotation_is_involutive_isometry(a in pt(), d in dir(), pts in proptest::collection::vec(pt(), 2..8)) {
            let r = half_rotation(&Line3::new(a, d).unwrap());
            let eps = 1e-9 * 30.0;
            for p in &pts {
                prop_assert!((r.apply(&r.apply(p)) - p).norm() < eps);
            }
            for (p, q) in pts.iter().zip(pts.iter().skip(1)) {
                let before = (p - q).norm();
                let after = (r.apply(p) - r.apply(q)).norm();
                prop_assert!((before - after).abs() < eps);
            }
        }

        #[test]
        fn reflection_is_involutive_isometry(a in pt(), n in dir(), pts in proptest::collection::vec(pt(), 2..8)) {
            let m = reflect_in_plane(&Plane3::new(a, n).unwrap());
            let eps = 1e-9 * 30.0;
            for p in &pts {
                prop_assert!((m.apply(&m.apply(p)) - p).norm() < eps);
            }
            for (p, q) in pts.iter().zip(pts.iter().skip(1)) {
                prop_assert!(((p - q).norm() - (m.apply(p) - m.apply(q)).norm()).abs() < eps);
            }
        }

        #[test]
        fn trilateration_recovers_known_point(p1 in pt(), p2 in pt(), p3 in pt(), q in pt()) {
            let n = (p2 - p1).cross(&(p3 - p1)).norm();
            prop_assume!(n > 1.0);
            let d = [(q - p1).norm(), (q - p2).norm(), (q - p3).norm()];
            let sols = trilaterate(&p1, &p2, &p3, d[0], d[1], d[2]).unwrap();
            prop_assert!(!sols.is_empty());
            let best = sols.iter().map(|s| (s - q).norm()).fold(f64::INFINITY, f64::min);
            // tangent solutions lose half the digits through the square root
            let h = (q - p1).dot(&(p2 - p1).cross(&(p3 - p1))).abs() / n;
            let tol = if h > 1e-3 { 1e-9 * 30.0 } else { 1e-4 };
            prop_assert!(best < tol, "best {} h {}", best, h);
            for s in &sols {
                prop_assert!(((s - p1).norm() - d[0]).abs() < 1e-9 * 30.0);
            }
        }
    }
}
