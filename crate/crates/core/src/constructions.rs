//! Builders for the Bricard octahedra, the cut-and-reflected decahedron,
//! the tented dodecahedron and the cut-and-twisted pentagonal bipyramid.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flex::{continue_flex, embedded_segment, flex_dimension, EdgeLengthTable, FlexError, FlexOptions, FlexTrajectory};
use crate::geom::{trilaterate, Point3, Tolerance};
use crate::mesh::{
    cut_and_reflect, cut_and_twist, self_intersections, signed_volume, split_edge, split_edge_topology, validate, CapSelector, Configuration,
    MeshError, SurfaceQuad, TriMesh,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("infeasible lengths: {0}")]
    InfeasibleLengths(String),
    #[error("base shape infeasible: no apex for base_shape = {0}")]
    BaseShapeInfeasible(f64),
    #[error("degenerate base")]
    DegenerateBase,
    #[error("construction inconsistent: {0}")]
    Inconsistent(String),
    #[error("nothing to fix: configuration has no self-intersections")]
    NothingToFix,
    #[error("single tent insufficient: no face common to all intersecting pairs")]
    SingleTentInsufficient,
    #[error("tent infeasible: no apex at the requested distances")]
    TentInfeasible,
    #[error("tent degenerate: apex lies in the face plane")]
    TentDegenerate,
    #[error("both tent apex positions leave self-intersections")]
    TentIntersects,
    #[error("no extension point")]
    NoExtensionPoint,
    #[error("no embedded configuration found")]
    NotEmbedded,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Flex(#[from] FlexError),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<ConstructionError> },
}

impl ConstructionError {
    pub fn stage(&self) -> &'static str {
        match self {
            ConstructionError::Stage { stage, .. } => stage,
            ConstructionError::InfeasibleLengths(_) => "derive_xy",
            ConstructionError::BaseShapeInfeasible(_) | ConstructionError::DegenerateBase => "build_bricard1",
            ConstructionError::Inconsistent(_) => "locate_D",
            ConstructionError::NothingToFix | ConstructionError::SingleTentInsufficient => "select_tent_face",
            ConstructionError::TentInfeasible | ConstructionError::TentDegenerate | ConstructionError::TentIntersects => "erect_tent",
            ConstructionError::NoExtensionPoint => "build_min8_twist",
            ConstructionError::NotEmbedded => "reference",
            ConstructionError::Mesh(_) => "mesh",
            ConstructionError::Flex(_) => "flex",
        }
    }

    fn at(self, stage: &'static str) -> Self {
        match self {
            ConstructionError::Stage { .. } => self,
            e => ConstructionError::Stage { stage, source: Box::new(e) },
        }
    }
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// Lengths `l1..l5`, tent distances `h1..h3` and the base quadrilateral's
/// half-diagonal `|AA'| / 2` (chosen automatically when `None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DodecParams {
    pub l: [f64; 5],
    pub h: [f64; 3],
    #[serde(default)]
    pub base_shape: Option<f64>,
}

impl DodecParams {
    pub fn standard() -> Self {
        DodecParams { l: [3.6, 3.9, 1.0, 3.9, 2.9], h: [6.5, 6.5, 6.1], base_shape: None }
    }

    /// The alternative set with the larger range of motion; its fifth
    /// length is printed as `l3 = 3.05` in the source and read as `l5`.
    pub fn alternative() -> Self {
        DodecParams { l: [4.2, 4.3, 1.0, 4.8, 3.05], h: [7.9, 4.0, 6.4], base_shape: None }
    }

    pub fn with_base_shape(mut self, r: f64) -> Self {
        self.base_shape = Some(r);
        self
    }

    /// `l3 + l4`.
    pub fn big_l(&self) -> f64 {
        self.l[2] + self.l[3]
    }

    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.l.iter().chain(&self.h).enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                let name = if i < 5 { format!("l{}", i + 1) } else { format!("h{}", i - 4) };
                return Err(ConstructionError::InfeasibleLengths(format!("{name} = {v} must be positive")));
            }
        }
        if let Some(r) = self.base_shape {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConstructionError::BaseShapeInfeasible(r));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedLengths {
    pub x: f64,
    pub y: f64,
}

fn triangle_ok(a: f64, b: f64, c: f64) -> bool {
    a < b + c && b < a + c && c < a + b
}

/// `x = |BC'|` and `y = |B'C'|` from the law of cosines at `A`.
pub fn derive_xy(l: &[f64; 5]) -> Result<DerivedLengths> {
    let [l1, l2, l3, l4, _] = *l;
    if l.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(ConstructionError::InfeasibleLengths("all lengths must be positive".into()));
    }
    if !triangle_ok(l1, l2, l3) {
        return Err(ConstructionError::InfeasibleLengths(format!("triangle ({l1}, {l2}, {l3}) violates the triangle inequality")));
    }
    let big = l3 + l4;
    let x2 = l2 * l2 + big * big - (big / l3) * (l2 * l2 + l3 * l3 - l1 * l1);
    let y2 = l1 * l1 + big * big - (big / l3) * (l1 * l1 + l3 * l3 - l2 * l2);
    if !(x2 > 0.0 && y2 > 0.0) {
        return Err(ConstructionError::InfeasibleLengths(format!("x^2 = {x2}, y^2 = {y2}")));
    }
    let (x, y) = (x2.sqrt(), y2.sqrt());
    if !triangle_ok(l2, big, x) || !triangle_ok(l1, big, y) {
        return Err(ConstructionError::InfeasibleLengths("triangles (l2, l3+l4, x) or (l1, l3+l4, y) degenerate".into()));
    }
    Ok(DerivedLengths { x, y })
}

/// Lengths of a type I octahedron: base `AB = A'B' = ab`, `AB' = A'B = abp`,
/// apex `C` at `ca, cap, cb, cbp` from `A, A', B, B'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BricardOneLengths {
    pub ab: f64,
    pub abp: f64,
    pub ca: f64,
    pub cap: f64,
    pub cb: f64,
    pub cbp: f64,
}

impl BricardOneLengths {
    pub fn from_params(p: &DodecParams) -> Result<Self> {
        let d = derive_xy(&p.l)?;
        Ok(BricardOneLengths { ab: p.l[1], abp: p.l[0], ca: p.l[4], cap: p.big_l(), cb: d.y, cbp: d.x })
    }

    /// Largest admissible base shape: `|AA'| < AB + BA'` and `< CA + CA'`.
    fn r_max(&self) -> f64 {
        0.5 * (self.ab + self.abp).min(self.ca + self.cap)
    }
}

/// Octahedron with labelled vertices and the base-shape coordinates used
/// to place it.
#[derive(Debug, Clone)]
pub struct Octahedron {
    pub mesh: TriMesh,
    pub config: Configuration,
    pub base_shape: f64,
    pub phi: f64,
}

pub fn octahedron_mesh() -> TriMesh {
    TriMesh::new(
        &["A", "B", "A'", "B'", "C", "C'"],
        &[
            ["C", "A", "B"],
            ["C", "B", "A'"],
            ["C", "A'", "B'"],
            ["C", "B'", "A"],
            ["C'", "B", "A"],
            ["C'", "A'", "B"],
            ["C'", "B'", "A'"],
            ["C'", "A", "B'"],
        ],
    )
    .expect("static octahedron")
}

fn half_turn_z(p: &Point3) -> Point3 {
    Point3::new(-p.x, -p.y, p.z)
}

fn mirror_z(p: &Point3) -> Point3 {
    Point3::new(p.x, p.y, -p.z)
}

/// `A = (r, 0, 0)`, `A' = -A`; `B` on the circle of points at `ab` from `A`
/// and `abp` from `A'`, at angle `phi`.
fn base_point(r: f64, phi: f64, ab: f64, abp: f64) -> Option<(Point3, Point3)> {
    let bx = (abp * abp - ab * ab) / (4.0 * r);
    let rho2 = ab * ab - (bx - r) * (bx - r);
    if !(rho2 > 0.0) {
        return None;
    }
    let rho = rho2.sqrt();
    Some((Point3::new(r, 0.0, 0.0), Point3::new(bx, rho * phi.cos(), rho * phi.sin())))
}

fn bricard1_points(d: &BricardOneLengths, r: f64, phi: f64) -> Option<[Point3; 4]> {
    let (a, b) = base_point(r, phi, d.ab, d.abp)?;
    let sols = trilaterate(&a, &half_turn_z(&a), &b, d.ca, d.cap, d.cb).ok()?;
    let c = *sols.first()?;
    Some([a, b, c, half_turn_z(&b)])
}

fn bricard1_gap(d: &BricardOneLengths, r: f64, phi: f64) -> f64 {
    match bricard1_points(d, r, phi) {
        Some([_, _, c, bp]) => (c - bp).norm() - d.cbp,
        None => f64::NAN,
    }
}

/// Sign-change roots of `g` on a grid over `[lo, hi)`, refined by bisection.
fn grid_roots(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    let vals: Vec<f64> = (0..=n).map(|i| g(lo + step * i as f64)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
            continue;
        }
        if fa == 0.0 {
            out.push(lo + step * i as f64);
            continue;
        }
        if fb == 0.0 {
            continue;
        }
        let (mut a, mut b, mut ga) = (lo + step * i as f64, lo + step * (i + 1) as f64, fa);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = g(m);
            if !gm.is_finite() {
                break;
            }
            if (gm > 0.0) == (ga > 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Angles `phi` in `[-π/2, π/2)` at which the apex closes up for base
/// shape `r`. Turning `phi` by `π` or mirroring gives congruent copies.
pub fn bricard1_roots(d: &BricardOneLengths, r: f64) -> Vec<f64> {
    grid_roots(|phi| bricard1_gap(d, r, phi), -PI / 2.0, PI / 2.0, 720)
}

fn check_lengths(mesh: &TriMesh, config: &Configuration, table: &EdgeLengthTable, tol: &Tolerance) -> Result<()> {
    let scale = table.values().copied().fold(0.0, f64::max);
    for (a, b) in mesh.edge_labels() {
        let want = table.get(&(a.clone(), b.clone())).or_else(|| table.get(&(b.clone(), a.clone())));
        let Some(want) = want else { return Err(ConstructionError::Inconsistent(format!("no target for {a}-{b}"))) };
        let got = (config.position(&a)? - config.position(&b)?).norm();
        if (got - want).abs() > tol.eps_len * scale {
            return Err(ConstructionError::Inconsistent(format!("|{a}{b}| = {got}, expected {want}")));
        }
    }
    Ok(())
}

fn table(entries: &[(&str, &str, f64)]) -> EdgeLengthTable {
    entries.iter().map(|(a, b, l)| ((a.to_string(), b.to_string()), *l)).collect()
}

pub fn bricard1_length_table(d: &BricardOneLengths) -> EdgeLengthTable {
    table(&[
        ("A", "B", d.ab),
        ("A'", "B'", d.ab),
        ("A'", "B", d.abp),
        ("A", "B'", d.abp),
        ("C", "A", d.ca),
        ("C", "A'", d.cap),
        ("C", "B", d.cb),
        ("C", "B'", d.cbp),
        ("C'", "A'", d.ca),
        ("C'", "A", d.cap),
        ("C'", "B'", d.cb),
        ("C'", "B", d.cbp),
    ])
}

/// Type I octahedron at base shape `r` and base angle `phi`.
pub fn build_bricard1_at(d: &BricardOneLengths, r: f64, phi: f64, tol: &Tolerance) -> Result<Octahedron> {
    if !(r > 0.0 && r < d.r_max()) {
        return Err(ConstructionError::BaseShapeInfeasible(r));
    }
    let [a, b, c, bp] = bricard1_points(d, r, phi).ok_or(ConstructionError::BaseShapeInfeasible(r))?;
    let config = Configuration::from_points(&[
        ("A", a),
        ("B", b),
        ("A'", half_turn_z(&a)),
        ("B'", bp),
        ("C", c),
        ("C'", half_turn_z(&c)),
    ]);
    let mesh = octahedron_mesh();
    check_lengths(&mesh, &config, &bricard1_length_table(d), tol).map_err(|_| ConstructionError::BaseShapeInfeasible(r))?;
    Ok(Octahedron { mesh, config, base_shape: r, phi })
}

/// Type I octahedron for the dodecahedron lengths at the first closing
/// angle of base shape `r`.
pub fn build_bricard1(params: &DodecParams, r: f64, tol: &Tolerance) -> Result<Octahedron> {
    let d = BricardOneLengths::from_params(params)?;
    let roots = bricard1_roots(&d, r);
    let phi = *roots.first().ok_or(ConstructionError::BaseShapeInfeasible(r))?;
    build_bricard1_at(&d, r, phi, tol)
}

/// Kite base `AB = AB' = a`, `A'B = A'B' = b` and apex distances
/// `[CA, CA', CB, CB']`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BricardTwoLengths {
    pub a: f64,
    pub b: f64,
    pub apex: [f64; 4],
}

fn bricard2_points(k: &BricardTwoLengths, r: f64, phi: f64) -> Option<[Point3; 4]> {
    let (a, b) = base_point(r, phi, k.a, k.b)?;
    let a2 = half_turn_z(&a);
    let sols = trilaterate(&a, &a2, &b, k.apex[0], k.apex[1], k.apex[2]).ok()?;
    Some([a, b, *sols.first()?, mirror_z(&b)])
}

pub fn bricard2_roots(k: &BricardTwoLengths, r: f64) -> Vec<f64> {
    let g = |phi: f64| match bricard2_points(k, r, phi) {
        Some([_, _, c, bp]) => (c - bp).norm() - k.apex[3],
        None => f64::NAN,
    };
    grid_roots(g, -PI, PI, 1440)
}

/// Plane-symmetric octahedron: the base is a kite symmetric in `z = 0` and
/// `C'` is the mirror image of `C`.
pub fn build_bricard2(k: &BricardTwoLengths, r: f64, tol: &Tolerance) -> Result<Octahedron> {
    if [k.a, k.b].iter().chain(&k.apex).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(ConstructionError::InfeasibleLengths("lengths must be positive".into()));
    }
    let roots = bricard2_roots(k, r);
    // skip closings where B lies in the mirror (B = B')
    let phi = roots
        .into_iter()
        .find(|&phi| phi.sin().abs() > 1e-6)
        .ok_or(ConstructionError::BaseShapeInfeasible(r))?;
    let [a, b, c, bp] = bricard2_points(k, r, phi).ok_or(ConstructionError::BaseShapeInfeasible(r))?;
    let config = Configuration::from_points(&[
        ("A", a),
        ("B", b),
        ("A'", half_turn_z(&a)),
        ("B'", bp),
        ("C", c),
        ("C'", mirror_z(&c)),
    ]);
    // mirroring reverses orientation, so C' sees B and B' swapped
    let t = table(&[
        ("A", "B", k.a),
        ("A", "B'", k.a),
        ("A'", "B", k.b),
        ("A'", "B'", k.b),
        ("C", "A", k.apex[0]),
        ("C", "A'", k.apex[1]),
        ("C", "B", k.apex[2]),
        ("C", "B'", k.apex[3]),
        ("C'", "A", k.apex[0]),
        ("C'", "A'", k.apex[1]),
        ("C'", "B'", k.apex[2]),
        ("C'", "B", k.apex[3]),
    ]);
    let mesh = octahedron_mesh();
    check_lengths(&mesh, &config, &t, tol)?;
    Ok(Octahedron { mesh, config, base_shape: r, phi })
}

/// Insert `D` on `AC'` with `|AD| = l3` and verify `|DB| = l1`,
/// `|DB'| = l2`.
pub fn locate_d(mesh: &TriMesh, config: &Configuration, params: &DodecParams, tol: &Tolerance) -> Result<(TriMesh, Configuration)> {
    let [l1, l2, l3, _, _] = params.l;
    let t = l3 / params.big_l();
    if !(t > 0.0 && t < 1.0) || l3 <= tol.eps_len * params.big_l() {
        return Err(ConstructionError::Inconsistent(format!("D collides with an endpoint (t = {t})")));
    }
    let (m, c) = split_edge(mesh, config, "A", "C'", t, "D")?;
    let d = c.position("D")?;
    let scale = params.l.iter().copied().fold(0.0, f64::max);
    let db = (d - c.position("B")?).norm();
    let dbp = (d - c.position("B'")?).norm();
    if (db - l1).abs() > tol.eps_len * scale || (dbp - l2).abs() > tol.eps_len * scale {
        return Err(ConstructionError::Inconsistent(format!("|DB| = {db} (want {l1}), |DB'| = {dbp} (want {l2})")));
    }
    Ok((m, c))
}

/// Cut along `D B' A' B` and reflect the cone at `C'` into `C''`.
pub fn cut_reflect_to_decahedron(mesh: &TriMesh, config: &Configuration, tol: &Tolerance) -> Result<(TriMesh, Configuration)> {
    // mirror through B' and B, swapping A' and D
    let quad = SurfaceQuad::of_vertices(["B'", "A'", "B", "D"]);
    let s = cut_and_reflect(mesh, config, &quad, &CapSelector::Containing("C'".into()), tol)?;
    Ok((s.mesh, s.config))
}

pub fn decahedron_length_table(params: &DodecParams) -> Result<EdgeLengthTable> {
    let d = derive_xy(&params.l)?;
    let [l1, l2, l3, l4, l5] = params.l;
    let big = l3 + l4;
    Ok(table(&[
        ("A", "C", l5),
        ("C", "A'", big),
        ("A'", "C''", l4),
        ("C''", "D", l5),
        ("D", "A", l3),
        ("B", "A", l2),
        ("B", "C", d.y),
        ("B", "A'", l1),
        ("B", "C''", d.x),
        ("B", "D", l1),
        ("B'", "A", l1),
        ("B'", "C", d.x),
        ("B'", "A'", l2),
        ("B'", "C''", d.y),
        ("B'", "D", l2),
    ]))
}

/// Index of the face present in every self-intersecting pair.
pub fn select_tent_face(mesh: &TriMesh, config: &Configuration, tol: &Tolerance) -> Result<usize> {
    let report = self_intersections(mesh, config, tol)?;
    if report.is_empty() {
        return Err(ConstructionError::NothingToFix);
    }
    match report.common_faces().as_slice() {
        [f] => Ok(*f),
        _ => Err(ConstructionError::SingleTentInsufficient),
    }
}

/// Replace face `face` by a tent with apex `label` at `dists[k]` from the
/// face's `k`-th vertex.
pub fn erect_tent(
    mesh: &TriMesh,
    config: &Configuration,
    face: usize,
    dists: [f64; 3],
    label: &str,
    tol: &Tolerance,
) -> Result<(TriMesh, Configuration)> {
    let f = mesh.faces().get(face).copied().ok_or(ConstructionError::TentInfeasible)?;
    if mesh.index_of(label).is_some() {
        return Err(MeshError::DuplicateLabel(label.to_string()).into());
    }
    let pts = config.points_for(mesh)?;
    let [a, b, c] = [pts[f[0]], pts[f[1]], pts[f[2]]];
    let sols = trilaterate(&a, &b, &c, dists[0], dists[1], dists[2]).map_err(|_| ConstructionError::TentInfeasible)?;
    if sols.is_empty() {
        return Err(ConstructionError::TentInfeasible);
    }
    let n = (b - a).cross(&(c - a));
    let scale = dists.iter().copied().fold((b - a).norm(), f64::max);
    let height = |p: &Point3| n.normalize().dot(&(p - a));
    if sols.iter().all(|p| height(p).abs() <= 1e-9 * scale) {
        return Err(ConstructionError::TentDegenerate);
    }
    let mut ordered = sols.clone();
    ordered.sort_by(|p, q| height(q).total_cmp(&height(p)));

    let mut vertices = mesh.vertices().to_vec();
    vertices.push(label.to_string());
    let t = vertices.len() - 1;
    let mut faces: Vec<[usize; 3]> = mesh.faces().iter().enumerate().filter(|(i, _)| *i != face).map(|(_, f)| *f).collect();
    faces.extend([[t, f[0], f[1]], [t, f[1], f[2]], [t, f[2], f[0]]]);
    let out = TriMesh::from_indexed(vertices, faces)?;
    for apex in ordered {
        let mut cfg = config.clone();
        cfg.insert(label, apex);
        if self_intersections(&out, &cfg, tol)?.is_empty() {
            return Ok((out, cfg));
        }
    }
    Err(ConstructionError::TentIntersects)
}

/// Tent distances aligned with the face's vertex order: `h1`, `h2` on the
/// endpoints of the face's `y`-long edge (`h1` at the edge's head), `h3` on
/// the remaining vertex.
pub fn tent_distances(mesh: &TriMesh, config: &Configuration, face: usize, h: [f64; 3], y: f64, tol: &Tolerance) -> Result<[f64; 3]> {
    let f = mesh.faces()[face];
    let pts = config.points_for(mesh)?;
    let scale = y.max(1.0);
    let k = (0..3)
        .min_by(|&i, &j| {
            let ei = ((pts[f[i]] - pts[f[(i + 1) % 3]]).norm() - y).abs();
            let ej = ((pts[f[j]] - pts[f[(j + 1) % 3]]).norm() - y).abs();
            ei.total_cmp(&ej)
        })
        .unwrap();
    if ((pts[f[k]] - pts[f[(k + 1) % 3]]).norm() - y).abs() > tol.eps_len * scale * 1e3 {
        return Err(ConstructionError::Inconsistent("tent face has no y-long edge".into()));
    }
    let mut d = [0.0; 3];
    d[(k + 1) % 3] = h[0];
    d[k] = h[1];
    d[(k + 2) % 3] = h[2];
    Ok(d)
}

/// Decahedron stage of the construction, kept for diagnostics.
#[derive(Debug, Clone)]
pub struct Decahedron {
    pub octahedron: Octahedron,
    pub mesh: TriMesh,
    pub config: Configuration,
}

pub fn build_decahedron_at(params: &DodecParams, r: f64, phi: f64, tol: &Tolerance) -> Result<Decahedron> {
    params.validate()?;
    let d = BricardOneLengths::from_params(params).map_err(|e| e.at("derive_xy"))?;
    let oct = build_bricard1_at(&d, r, phi, tol).map_err(|e| e.at("build_bricard1"))?;
    let (m, c) = locate_d(&oct.mesh, &oct.config, params, tol).map_err(|e| e.at("locate_D"))?;
    let (mesh, config) = cut_reflect_to_decahedron(&m, &c, tol).map_err(|e| e.at("cut_reflect"))?;
    Ok(Decahedron { octahedron: oct, mesh, config })
}

#[derive(Debug, Clone)]
pub struct Dodecahedron {
    pub mesh: TriMesh,
    pub config: Configuration,
    pub base_shape: f64,
    pub phi: f64,
    pub lengths: DerivedLengths,
    /// Face of the decahedron replaced by the tent.
    pub tent_face: [String; 3],
    pub tent_apex: String,
    /// Volume of the tetrahedron spanned by the tent, sign as in the mesh.
    pub tent_volume: f64,
}

impl Dodecahedron {
    pub fn edge_length_table(&self) -> EdgeLengthTable {
        self.mesh
            .edge_labels()
            .into_iter()
            .map(|(a, b)| {
                let l = (self.config.get(&a).unwrap() - self.config.get(&b).unwrap()).norm();
                ((a, b), l)
            })
            .collect()
    }
}

/// Dodecahedron at explicit base coordinates `(r, phi)`.
pub fn build_dodecahedron_at(params: &DodecParams, r: f64, phi: f64, tol: &Tolerance) -> Result<Dodecahedron> {
    let lengths = derive_xy(&params.l).map_err(|e| e.at("derive_xy"))?;
    let deca = build_decahedron_at(params, r, phi, tol)?;
    let face = select_tent_face(&deca.mesh, &deca.config, tol).map_err(|e| e.at("select_tent_face"))?;
    let dists = tent_distances(&deca.mesh, &deca.config, face, params.h, lengths.y, tol).map_err(|e| e.at("erect_tent"))?;
    let (mesh, config) = erect_tent(&deca.mesh, &deca.config, face, dists, "T", tol).map_err(|e| e.at("erect_tent"))?;
    let vol = signed_volume(&mesh, &config)?;
    let mesh = if vol < 0.0 { mesh.reversed() } else { mesh };
    let tent_face = deca.mesh.face_labels(face).map(|s| s.to_string());
    let p: Vec<Point3> = tent_face.iter().map(|l| config.get(l).unwrap()).collect();
    // closed tetrahedron: the three tent faces plus the removed face reversed
    let tet = [p[0], p[1], p[2], config.get("T").unwrap()];
    let tv = crate::mesh::volume_of(&[[3, 0, 1], [3, 1, 2], [3, 2, 0], [0, 2, 1]], &tet);
    Ok(Dodecahedron {
        mesh,
        config,
        base_shape: r,
        phi,
        lengths,
        tent_face,
        tent_apex: "T".into(),
        tent_volume: if vol < 0.0 { -tv } else { tv },
    })
}

/// First embedded dodecahedron over the closing angles at base shape `r`.
pub fn build_dodecahedron_at_shape(params: &DodecParams, r: f64, tol: &Tolerance) -> Result<Dodecahedron> {
    let d = BricardOneLengths::from_params(params).map_err(|e| e.at("derive_xy"))?;
    let roots = bricard1_roots(&d, r);
    if roots.is_empty() {
        return Err(ConstructionError::BaseShapeInfeasible(r).at("build_bricard1"));
    }
    let mut last = None;
    for phi in roots {
        match build_dodecahedron_at(params, r, phi, tol) {
            Ok(x) => return Ok(x),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Options for locating the reference configuration.
#[derive(Debug, Clone)]
pub struct ReferenceSearch {
    pub grid: usize,
    pub flex: FlexOptions,
}

impl Default for ReferenceSearch {
    fn default() -> Self {
        ReferenceSearch { grid: 120, flex: FlexOptions::default() }
    }
}

/// Half of `|AA'|`, the base-shape coordinate of a configuration.
pub fn base_shape_of(config: &Configuration) -> Option<f64> {
    Some(0.5 * (config.get("A")? - config.get("A'")?).norm())
}

/// Reference base shape: midpoint of the base-shape interval swept by an
/// embedded flex. Every embedded configuration found on a grid of base
/// shapes seeds a trace; the trace sweeping the widest interval wins.
pub fn reference_base_shape(params: &DodecParams, search: &ReferenceSearch, tol: &Tolerance) -> Result<(f64, FlexTrajectory)> {
    let d = BricardOneLengths::from_params(params).map_err(|e| e.at("derive_xy"))?;
    let r_max = d.r_max();
    let mut traced: Vec<(f64, f64)> = Vec::new();
    let mut best: Option<(f64, f64, FlexTrajectory)> = None;
    let slack = r_max / search.grid as f64;
    for i in 1..search.grid {
        let r = r_max * i as f64 / search.grid as f64;
        for phi in bricard1_roots(&d, r) {
            let Ok(seed) = build_dodecahedron_at(params, r, phi, tol) else { continue };
            // skip seeds inside an interval already traced
            if traced.iter().any(|&(lo, hi)| r >= lo - slack && r <= hi + slack) {
                continue;
            }
            let Ok(traj) = continue_flex(&seed.mesh, &seed.config, &search.flex) else { continue };
            let seg = embedded_segment(&traj, search.flex.quality_floor);
            let rs: Vec<f64> = traj.samples[seg].iter().filter_map(|s| base_shape_of(&s.config)).collect();
            let lo = rs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            traced.push((lo, hi));
            if best.as_ref().map_or(true, |(a, b, _)| hi - lo > b - a) {
                best = Some((lo, hi, traj));
            }
        }
    }
    let (lo, hi, traj) = best.ok_or_else(|| ConstructionError::NotEmbedded.at("reference"))?;
    Ok((0.5 * (lo + hi), traj))
}

fn dihedral_distance(a: &Dodecahedron, b: &Configuration) -> f64 {
    let pa = a.config.points_for(&a.mesh).unwrap();
    let Ok(pb) = b.points_for(&a.mesh) else { return f64::INFINITY };
    let da = crate::mesh::all_dihedrals(&a.mesh, &pa);
    let db = crate::mesh::all_dihedrals(&a.mesh, &pb);
    da.iter().map(|(k, v)| (v - db[k]).abs()).fold(0.0, f64::max)
}

/// Full pipeline. With `base_shape = None` the reference base shape is
/// located by tracing the flex.
pub fn build_dodecahedron(params: &DodecParams, tol: &Tolerance) -> Result<Dodecahedron> {
    params.validate()?;
    derive_xy(&params.l).map_err(|e| e.at("derive_xy"))?;
    let Some(r) = params.base_shape else {
        let (r, traj) = reference_base_shape(params, &ReferenceSearch::default(), tol)?;
        let d = BricardOneLengths::from_params(params)?;
        // nearest traced sample in base shape picks the closing angle
        let seg = embedded_segment(&traj, FlexOptions::default().quality_floor);
        let near = traj.samples[seg]
            .iter()
            .min_by(|a, b| {
                let ra = (base_shape_of(&a.config).unwrap() - r).abs();
                let rb = (base_shape_of(&b.config).unwrap() - r).abs();
                ra.total_cmp(&rb)
            })
            .map(|s| s.config.clone())
            .ok_or_else(|| ConstructionError::NotEmbedded.at("reference"))?;
        let mut best: Option<(f64, Dodecahedron)> = None;
        for phi in bricard1_roots(&d, r) {
            if let Ok(x) = build_dodecahedron_at(params, r, phi, tol) {
                let dist = dihedral_distance(&x, &near);
                if best.as_ref().map_or(true, |(b, _)| dist < *b) {
                    best = Some((dist, x));
                }
            }
        }
        return best.map(|(_, x)| x).ok_or_else(|| ConstructionError::NotEmbedded.at("reference"));
    };
    build_dodecahedron_at_shape(params, r, tol)
}

/// Lengths for the cut-and-twist variant: a type I octahedron on base
/// `p1 pT p3 pB` with apex `p2`; `|p2 pT|` is derived so that the
/// extension point `p5` exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Min8Params {
    /// `|p1 pT| = |p3 pB|`
    pub ab: f64,
    /// `|p1 pB| = |p3 pT|`
    pub abp: f64,
    /// `|p2 p1|`
    pub ca: f64,
    /// `|p2 p3|`
    pub cap: f64,
    /// `|p2 pB|`
    pub cbp: f64,
    #[serde(default)]
    pub base_shape: Option<f64>,
}

impl Default for Min8Params {
    fn default() -> Self {
        Min8Params { ab: 3.738, abp: 2.82, ca: 2.631, cap: 3.805, cbp: 3.188, base_shape: None }
    }
}

impl Min8Params {
    /// `|p2 pT|` from `|p1 pT|^2 - |p0 pT|^2 = |p1 pB|^2 - |p0 pB|^2`.
    pub fn cb(&self) -> Result<f64> {
        let cb2 = self.abp * self.abp - self.ab * self.ab + self.cbp * self.cbp;
        if !(cb2 > 0.0) {
            return Err(ConstructionError::NoExtensionPoint);
        }
        Ok(cb2.sqrt())
    }

    pub fn lengths(&self) -> Result<BricardOneLengths> {
        Ok(BricardOneLengths { ab: self.ab, abp: self.abp, ca: self.ca, cap: self.cap, cb: self.cb()?, cbp: self.cbp })
    }
}

#[derive(Debug, Clone)]
pub struct Min8 {
    pub octahedron: Octahedron,
    /// Octahedron with `p5` inserted on the line `p1 p0` beyond `p0`.
    pub extended: (TriMesh, Configuration),
    pub mesh: TriMesh,
    pub config: Configuration,
}

fn octahedron_to_min8_labels() -> BTreeMap<String, String> {
    [("A", "p1"), ("B", "pT"), ("A'", "p3"), ("B'", "pB"), ("C", "p2"), ("C'", "p0")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Cut-and-twist of an extended type I octahedron into a flexible
/// pentagonal bipyramid with equator `p1 p5 p4 p3 p2` and apices `pT`, `pB`.
pub fn build_min8_twist(p: &Min8Params, tol: &Tolerance) -> Result<Min8> {
    let stage = "build_min8_twist";
    let d = p.lengths().map_err(|e| e.at(stage))?;
    if d.ab <= d.cbp {
        return Err(ConstructionError::NoExtensionPoint.at(stage));
    }
    let r = match p.base_shape {
        Some(r) => r,
        None => {
            let n = 80;
            let rs: Vec<f64> = (1..n).map(|i| d.r_max() * i as f64 / n as f64).filter(|&r| !bricard1_roots(&d, r).is_empty()).collect();
            *rs.get(rs.len() / 2).ok_or_else(|| ConstructionError::BaseShapeInfeasible(0.0).at(stage))?
        }
    };
    let phi = *bricard1_roots(&d, r).first().ok_or_else(|| ConstructionError::BaseShapeInfeasible(r).at(stage))?;
    let oct = build_bricard1_at(&d, r, phi, tol).map_err(|e| e.at(stage))?;
    let names = octahedron_to_min8_labels();
    let mesh = oct.mesh.relabel(&names)?;
    let config = oct.config.relabel(&names);

    let (p0, p1) = (config.position("p0")?, config.position("p1")?);
    let (pt, pb) = (config.position("pT")?, config.position("pB")?);
    let u = (p0 - p1).normalize();
    let s = 2.0 * u.dot(&(pt - p1));
    let p5 = p1 + u * s;
    let scale = d.ab.max(d.abp);
    if ((p5 - pb).norm() - (p1 - pb).norm()).abs() > tol.eps_len * scale {
        return Err(ConstructionError::NoExtensionPoint.at(stage));
    }
    if s <= (p0 - p1).norm() * (1.0 + 1e-9) {
        return Err(ConstructionError::NoExtensionPoint.at(stage));
    }
    let ext_mesh = split_edge_topology(&mesh, "p0", "p1", "p5")?;
    let mut ext_cfg = config.clone();
    ext_cfg.insert("p5", p5);

    let quad = SurfaceQuad::of_vertices(["p5", "pT", "p3", "pB"]);
    let twisted = cut_and_twist(&ext_mesh, &ext_cfg, &quad, &CapSelector::Containing("p0".into()), tol).map_err(|e| ConstructionError::from(e).at(stage))?;
    let moved = twisted.renamed.get("p0").cloned().ok_or_else(|| ConstructionError::Inconsistent("p0 did not move".into()).at(stage))?;
    let rename: BTreeMap<String, String> = [(moved, "p4".to_string())].into();
    let out_mesh = twisted.mesh.relabel(&rename)?;
    let out_cfg = twisted.config.relabel(&rename);
    let rep = validate(&out_mesh);
    if rep.vertices != 7 || !rep.is_sphere() {
        return Err(ConstructionError::Inconsistent(format!("expected a 7-vertex sphere, got {rep:?}")).at(stage));
    }
    Ok(Min8 { octahedron: oct, extended: (ext_mesh, ext_cfg), mesh: out_mesh, config: out_cfg })
}

/// Flex dimension of a construction output; a convenience for reports.
pub fn flex_dimension_of_build(mesh: &TriMesh, config: &Configuration, tol: &Tolerance) -> Result<i64> {
    Ok(flex_dimension(mesh, config, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{solids, IntersectionPair, IntersectionReport};
    use crate::quad_symmetry::{classify_quad, QuadSymmetryKind};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn derived_lengths_standard() {
        let d = derive_xy(&DodecParams::standard().l).unwrap();
        let x = 9318f64.sqrt() / 20.0;
        let y = 13.0 * 102f64.sqrt() / 20.0;
        assert!((d.x - x).abs() / x < 1e-12);
        assert!((d.y - y).abs() / y < 1e-12);
    }

    #[test]
    fn derived_lengths_symmetric_and_alternative() {
        let d = derive_xy(&[3.7, 3.7, 1.0, 3.9, 2.9]).unwrap();
        assert!((d.x - d.y).abs() < 1e-14);
        let f = derive_xy(&DodecParams::alternative().l).unwrap();
        assert!(f.x.is_finite() && f.x > 0.0 && f.y.is_finite() && f.y > 0.0);
    }

    #[test]
    fn derived_lengths_errors() {
        assert!(matches!(derive_xy(&[1.0, 1.0, 5.0, 1.0, 1.0]), Err(ConstructionError::InfeasibleLengths(_))));
        assert!(matches!(derive_xy(&[3.6, 3.9, 0.0, 3.9, 2.9]), Err(ConstructionError::InfeasibleLengths(_))));
        assert_eq!(ConstructionError::InfeasibleLengths(String::new()).stage(), "derive_xy");
    }

    #[test]
    fn bricard1_standard_lengths() {
        let p = DodecParams::standard();
        let oct = build_bricard1(&p, 1.5, &tol()).unwrap();
        let v = signed_volume(&oct.mesh, &oct.config).unwrap();
        assert!(v.abs() < 1e-8 * 7f64.powi(3));
        let g = |l: &str| oct.config.get(l).unwrap();
        match classify_quad(&g("A"), &g("B"), &g("A'"), &g("B'"), &tol()) {
            QuadSymmetryKind::RotationalAboutLine(l) => {
                assert!(l.direction().cross(&crate::geom::Vec3::z()).norm() < 1e-9);
                assert!(l.distance_to(&Point3::origin()) < 1e-9);
            }
            k => panic!("{k:?}"),
        }
        assert!(matches!(build_bricard1(&DodecParams { l: [3.6, 3.9, 1.0, 300.0, 2.9], ..p }, 1.5, &tol()), Err(_)));
    }

    #[test]
    fn locate_d_standard() {
        let p = DodecParams::standard();
        let oct = build_bricard1(&p, 1.5, &tol()).unwrap();
        let (m, c) = locate_d(&oct.mesh, &oct.config, &p, &tol()).unwrap();
        assert_eq!(m.num_vertices(), 7);
        let d = c.get("D").unwrap();
        assert!(((d - c.get("A").unwrap()).norm() - 1.0).abs() < 1e-12);
        assert!(((d - c.get("C'").unwrap()).norm() - 3.9).abs() < 1e-12);
    }

    #[test]
    fn decahedron_counts_and_table() {
        let p = DodecParams::standard();
        let d = BricardOneLengths::from_params(&p).unwrap();
        let phi = bricard1_roots(&d, 1.5)[0];
        let deca = build_decahedron_at(&p, 1.5, phi, &tol()).unwrap();
        let r = validate(&deca.mesh);
        assert_eq!((r.vertices, r.edges, r.faces), (7, 15, 10));
        assert!(r.is_sphere());
        check_lengths(&deca.mesh, &deca.config, &decahedron_length_table(&p).unwrap(), &tol()).unwrap();
        assert!(signed_volume(&deca.mesh, &deca.config).unwrap().abs() < 1e-8 * 343.0);
        // B and B' lie in the mirror
        let oc = &deca.octahedron.config;
        for (a, b) in [("B", "C'"), ("B'", "C'")] {
            let before = (oc.get(a).unwrap() - oc.get(b).unwrap()).norm();
            let after = (deca.config.get(a).unwrap() - deca.config.get("C''").unwrap()).norm();
            assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn tent_on_tetrahedron() {
        let (m, c) = solids::tetrahedron();
        let (t, tc) = erect_tent(&m, &c, 0, [3.0, 3.0, 3.0], "T", &tol()).unwrap();
        let r = validate(&t);
        assert_eq!((r.vertices, r.edges, r.faces), (5, 9, 6));
        assert!(signed_volume(&t, &tc).unwrap() > signed_volume(&m, &c).unwrap());
        for (a, b) in t.edge_labels() {
            let (_, s) = crate::mesh::dihedral(&t, &tc, &a, &b, &tol()).unwrap();
            assert_eq!(s, crate::mesh::FoldSign::Mountain);
        }
    }

    #[test]
    fn tent_degenerate_and_infeasible() {
        let (m, c) = solids::tetrahedron();
        let f = m.faces()[0];
        let pts = c.points_for(&m).unwrap();
        let (a, b, cc) = (pts[f[0]], pts[f[1]], pts[f[2]]);
        // circumcentre of the face
        let ab = b - a;
        let ac = cc - a;
        let n = ab.cross(&ac);
        let o = a + (ac.norm_squared() * n.cross(&ab) + ab.norm_squared() * ac.cross(&n)) / (2.0 * n.norm_squared());
        let rad = (o - a).norm();
        assert_eq!(erect_tent(&m, &c, 0, [rad; 3], "T", &tol()).unwrap_err(), ConstructionError::TentDegenerate);
        assert_eq!(erect_tent(&m, &c, 0, [0.1; 3], "T", &tol()).unwrap_err(), ConstructionError::TentInfeasible);
    }

    #[test]
    fn select_tent_face_errors() {
        let (m, c) = solids::octahedron();
        assert_eq!(select_tent_face(&m, &c, &tol()).unwrap_err(), ConstructionError::NothingToFix);
        let pair = |i, j| IntersectionPair { faces: (i, j), witness: ([0.0; 3], [0.0; 3]) };
        let two_clusters = IntersectionReport { pairs: vec![pair(0, 1), pair(2, 3)] };
        assert!(two_clusters.common_faces().is_empty());
        let one = IntersectionReport { pairs: vec![pair(0, 4), pair(2, 4)] };
        assert_eq!(one.common_faces(), vec![4]);
    }

    #[test]
    fn dodecahedron_at_explicit_shape() {
        let p = DodecParams::standard().with_base_shape(1.55);
        let d = build_dodecahedron(&p, &tol()).unwrap();
        let r = validate(&d.mesh);
        assert_eq!((r.vertices, r.edges, r.faces), (8, 18, 12));
        assert!(self_intersections(&d.mesh, &d.config, &tol()).unwrap().is_empty());
        let v = signed_volume(&d.mesh, &d.config).unwrap();
        assert!(v > 0.0);
        assert!((v - d.tent_volume).abs() < 1e-8 * 343.0);
        let mut tf = d.tent_face.to_vec();
        tf.sort();
        assert_eq!(tf, vec!["A'", "B", "C"]);
        let t = d.config.get("T").unwrap();
        assert!(((t - d.config.get("B").unwrap()).norm() - 6.5).abs() < 1e-9);
        assert!(((t - d.config.get("C").unwrap()).norm() - 6.5).abs() < 1e-9);
        assert!(((t - d.config.get("A'").unwrap()).norm() - 6.1).abs() < 1e-9);
    }

    #[test]
    fn alternative_tent_assignment() {
        let p = DodecParams::alternative();
        let d = BricardOneLengths::from_params(&p).unwrap();
        let mut built = None;
        for i in 1..100 {
            let r = d.r_max() * i as f64 / 100.0;
            if let Ok(x) = build_dodecahedron_at_shape(&p, r, &tol()) {
                built = Some(x);
                break;
            }
        }
        let x = built.expect("alternative parameters embed somewhere");
        let t = x.config.get("T").unwrap();
        assert!(((t - x.config.get("B").unwrap()).norm() - 7.9).abs() < 1e-9);
        assert!(((t - x.config.get("C").unwrap()).norm() - 4.0).abs() < 1e-9);
        assert!(((t - x.config.get("A'").unwrap()).norm() - 6.4).abs() < 1e-9);
    }

    #[test]
    fn bricard2_is_plane_symmetric() {
        let k = BricardTwoLengths { a: 2.0, b: 2.6, apex: [2.2, 2.9, 2.4, 1.9] };
        let mut built = None;
        for i in 1..60 {
            if let Ok(o) = build_bricard2(&k, 0.05 * i as f64, &tol()) {
                built = Some(o);
                break;
            }
        }
        let o = built.expect("feasible kite octahedron");
        let g = |l: &str| o.config.get(l).unwrap();
        assert!(matches!(classify_quad(&g("A"), &g("B"), &g("A'"), &g("B'"), &tol()), QuadSymmetryKind::ReflectiveInPlane(_)));
        assert!(signed_volume(&o.mesh, &o.config).unwrap().abs() < 1e-8 * 27.0);
        assert_eq!(flex_dimension(&o.mesh, &o.config, &tol()).unwrap(), 1);
    }

    #[test]
    fn min8_structure() {
        let m = build_min8_twist(&Min8Params::default(), &tol()).unwrap();
        let r = validate(&m.mesh);
        assert_eq!((r.vertices, r.edges, r.faces), (7, 15, 10));
        let deg = |l: &str| m.mesh.degree(m.mesh.index_of(l).unwrap());
        assert_eq!((deg("pT"), deg("pB")), (5, 5));
        for l in ["p1", "p2", "p3", "p4", "p5"] {
            assert_eq!(deg(l), 4);
        }
        assert_eq!(flex_dimension(&m.mesh, &m.config, &tol()).unwrap(), 1);
        let g = |l: &str| m.extended.1.get(l).unwrap();
        assert!(matches!(classify_quad(&g("p5"), &g("pT"), &g("p3"), &g("pB"), &tol()), QuadSymmetryKind::RotationalAboutLine(_)));
    }

    #[test]
    fn min8_rejects_missing_extension() {
        let p = Min8Params { ab: 2.0, cbp: 3.0, ..Min8Params::default() };
        assert_eq!(build_min8_twist(&p, &tol()).unwrap_err().stage(), "build_min8_twist");
    }
}
