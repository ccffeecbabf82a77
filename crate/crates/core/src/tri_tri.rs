//! Triangle/triangle interpenetration and distance.
//!
//! Contacts thinner than the slack are not intersections: two faces that
//! only touch at a point, along a segment of zero length, or at a shared
//! vertex are reported as disjoint.

use crate::geom::{Point3, Vec3};

pub type Triangle = [Point3; 3];

fn plane_distances(t: &Triangle, origin: &Point3, n: &Vec3, eps: f64) -> [f64; 3] {
    let mut d = [0.0; 3];
    for i in 0..3 {
        let v = (t[i] - origin).dot(n);
        d[i] = if v.abs() <= eps { 0.0 } else { v };
    }
    d
}

/// Portion of `t` lying on the plane with signed vertex distances `d`,
/// projected on `dir`. Returns `(tmin, pmin, tmax, pmax)`.
fn plane_section(t: &Triangle, d: &[f64; 3], dir: &Vec3) -> Option<(f64, Point3, f64, Point3)> {
    let mut pts: Vec<Point3> = Vec::with_capacity(3);
    for i in 0..3 {
        if d[i] == 0.0 {
            pts.push(t[i]);
        }
        let j = (i + 1) % 3;
        if d[i] * d[j] < 0.0 {
            let s = d[i] / (d[i] - d[j]);
            pts.push(t[i] + (t[j] - t[i]) * s);
        }
    }
    let first = *pts.first()?;
    let mut lo = (dir.dot(&first.coords), first);
    let mut hi = lo;
    for p in &pts[1..] {
        let s = dir.dot(&p.coords);
        if s < lo.0 {
            lo = (s, *p);
        }
        if s > hi.0 {
            hi = (s, *p);
        }
    }
    Some((lo.0, lo.1, hi.0, hi.1))
}

fn strictly_inside_2d(p: &[f64; 2], t: &[[f64; 2]; 3], eps: f64) -> bool {
    let area = cross2(&t[0], &t[1], &t[2]);
    let sgn = area.signum();
    (0..3).all(|i| sgn * cross2(&t[i], &t[(i + 1) % 3], p) > eps)
}

fn cross2(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn proper_crossing_2d(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2], d: &[f64; 2], eps: f64) -> Option<[f64; 2]> {
    let d1 = cross2(c, d, a);
    let d2 = cross2(c, d, b);
    let d3 = cross2(a, b, c);
    let d4 = cross2(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)) {
        let s = d1 / (d1 - d2);
        Some([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
    } else {
        None
    }
}

fn coplanar_overlap(t1: &Triangle, t2: &Triangle, n: &Vec3, eps: f64) -> Option<(Point3, Point3)> {
    // project on the dominant plane
    let k = n.iamax();
    let (i, j) = match k {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let to2 = |p: &Point3| [p[i], p[j]];
    let a: [[f64; 2]; 3] = [to2(&t1[0]), to2(&t1[1]), to2(&t1[2])];
    let b: [[f64; 2]; 3] = [to2(&t2[0]), to2(&t2[1]), to2(&t2[2])];
    let scale = (0..3)
        .map(|e| (t1[e] - t1[(e + 1) % 3]).norm().max((t2[e] - t2[(e + 1) % 3]).norm()))
        .fold(0.0, f64::max);
    let area_eps = eps * scale;
    for e in 0..3 {
        for f in 0..3 {
            if proper_crossing_2d(&a[e], &a[(e + 1) % 3], &b[f], &b[(f + 1) % 3], area_eps).is_some() {
                let s = (t1[e] + t1[(e + 1) % 3].coords) / 2.0;
                return Some((s, s));
            }
        }
    }
    let samples = |t: &Triangle| {
        let c = Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0);
        let mut v: Vec<Point3> = t.iter().copied().collect();
        v.push(c);
        // points pulled slightly inside from each corner, for shared corners
        for p in t {
            v.push(p + (c - p) * 1e-3);
        }
        v
    };
    for p in samples(t1) {
        if strictly_inside_2d(&to2(&p), &b, area_eps) {
            return Some((p, p));
        }
    }
    for p in samples(t2) {
        if strictly_inside_2d(&to2(&p), &a, area_eps) {
            return Some((p, p));
        }
    }
    None
}

/// Witness segment of the interpenetration of two triangles, if any.
///
/// `eps` is an absolute length slack; overlaps shorter than it are ignored.
pub fn triangle_intersection(t1: &Triangle, t2: &Triangle, eps: f64) -> Option<(Point3, Point3)> {
    let n1 = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let n2 = (t2[1] - t2[0]).cross(&(t2[2] - t2[0]));
    let (l1, l2) = (n1.norm(), n2.norm());
    if l1 == 0.0 || l2 == 0.0 {
        return None;
    }
    let (n1, n2) = (n1 / l1, n2 / l2);
    let d1 = plane_distances(t1, &t2[0], &n2, eps);
    if d1.iter().all(|&v| v > 0.0) || d1.iter().all(|&v| v < 0.0) {
        return None;
    }
    let d2 = plane_distances(t2, &t1[0], &n1, eps);
    if d2.iter().all(|&v| v > 0.0) || d2.iter().all(|&v| v < 0.0) {
        return None;
    }
    if d1.iter().all(|&v| v == 0.0) || d2.iter().all(|&v| v == 0.0) {
        return coplanar_overlap(t1, t2, &n1, eps);
    }
    let dir = n1.cross(&n2);
    let dn = dir.norm();
    if dn < 1e-14 {
        return coplanar_overlap(t1, t2, &n1, eps);
    }
    let dir = dir / dn;
    let (a0, pa0, a1, pa1) = plane_section(t1, &d1, &dir)?;
    let (b0, pb0, b1, pb1) = plane_section(t2, &d2, &dir)?;
    let (lo, plo) = if a0 > b0 { (a0, pa0) } else { (b0, pb0) };
    let (hi, phi) = if a1 < b1 { (a1, pa1) } else { (b1, pb1) };
    if hi - lo > eps {
        Some((plo, phi))
    } else {
        None
    }
}

fn closest_on_segment(p: &Point3, a: &Point3, b: &Point3) -> Point3 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    if l2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / l2).clamp(0.0, 1.0);
    a + ab * t
}

/// Distance from a point to a closed triangle.
pub fn point_triangle_distance(p: &Point3, t: &Triangle) -> f64 {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let nn = n.norm();
    if nn > 0.0 {
        let n = n / nn;
        let h = (p - t[0]).dot(&n);
        let q = p - n * h;
        let inside = (0..3).all(|i| (t[(i + 1) % 3] - t[i]).cross(&(q - t[i])).dot(&n) >= 0.0);
        if inside {
            return h.abs();
        }
    }
    (0..3)
        .map(|i| (p - closest_on_segment(p, &t[i], &t[(i + 1) % 3])).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Distance between two closed segments.
pub fn segment_distance(p1: &Point3, q1: &Point3, p2: &Point3, q2: &Point3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Euclidean distance between two triangles (zero when they interpenetrate).
pub fn triangle_distance(t1: &Triangle, t2: &Triangle) -> f64 {
    if triangle_intersection(t1, t2, 0.0).is_some() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in t1 {
        best = best.min(point_triangle_distance(p, t2));
    }
    for p in t2 {
        best = best.min(point_triangle_distance(p, t1));
    }
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(segment_distance(&t1[i], &t1[(i + 1) % 3], &t2[j], &t2[(j + 1) % 3]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn piercing_triangles() {
        let a = [p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0), p(0.0, 2.0, 0.0)];
        let b = [p(0.5, 0.5, -1.0), p(0.5, 0.5, 1.0), p(1.5, -1.0, 0.0)];
        let (s, e) = triangle_intersection(&a, &b, 1e-12).unwrap();
        assert!(s.z.abs() < 1e-12 && e.z.abs() < 1e-12);
        assert!((s - e).norm() > 0.1);
    }

    #[test]
    fn separated_and_touching() {
        let a = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)];
        let b = [p(0.0, 0.0, 1.0), p(1.0, 0.0, 1.0), p(0.0, 1.0, 1.0)];
        assert!(triangle_intersection(&a, &b, 1e-12).is_none());
        assert!((triangle_distance(&a, &b) - 1.0).abs() < 1e-12);
        // vertex of b touches the interior of a
        let c = [p(0.2, 0.2, 0.0), p(0.2, 0.2, 1.0), p(1.0, 1.0, 1.0)];
        assert!(triangle_intersection(&a, &c, 1e-12).is_none());
    }

    #[test]
    fn shared_vertex() {
        let o = p(0.0, 0.0, 0.0);
        let a = [o, p(2.0, 0.0, 0.0), p(0.0, 2.0, 0.0)];
        // fans out of the plane: touch only at o
        let b = [o, p(1.0, 1.0, 1.0), p(-1.0, 1.0, 1.0)];
        assert!(triangle_intersection(&a, &b, 1e-12).is_none());
        // dives through a along a segment from o
        let c = [o, p(1.0, 0.5, 1.0), p(1.0, 0.5, -1.0)];
        assert!(triangle_intersection(&a, &c, 1e-12).is_some());
        // folded flat onto a
        let d = [o, p(1.0, 0.2, 0.0), p(0.2, 1.0, 0.0)];
        assert!(triangle_intersection(&a, &d, 1e-12).is_some());
        // coplanar, opposite sector
        let e = [o, p(-1.0, 0.0, 0.0), p(0.0, -1.0, 0.0)];
        assert!(triangle_intersection(&a, &e, 1e-12).is_none());
    }

    #[test]
    fn coplanar_overlap_detected() {
        let a = [p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0), p(0.0, 2.0, 0.0)];
        let b = [p(0.5, 0.5, 0.0), p(3.0, 0.5, 0.0), p(0.5, 3.0, 0.0)];
        assert!(triangle_intersection(&a, &b, 1e-12).is_some());
        let c = [p(5.0, 5.0, 0.0), p(6.0, 5.0, 0.0), p(5.0, 6.0, 0.0)];
        assert!(triangle_intersection(&a, &c, 1e-12).is_none());
    }

    #[test]
    fn segment_distances() {
        let d = segment_distance(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(0.5, 1.0, 1.0), &p(0.5, -1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-12);
        let d = segment_distance(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(2.0, 0.0, 0.0), &p(3.0, 0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-12);
    }
}
