//! Labelled triangulated surfaces, their realisations, geometric
//! diagnostics and the quadrilateral surgery (cut, twist/reflect, glue).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{half_rotation, reflect_in_plane, signed_volume_tetra, Isometry3, Point3, Tolerance};
use crate::quad_symmetry::{symmetry_line, symmetry_plane, SymmetryError};
use crate::tri_tri::{triangle_distance, triangle_intersection, Triangle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex label `{0}`")]
    DuplicateLabel(String),
    #[error("face {0} repeats a vertex")]
    DegenerateFace(usize),
    #[error("mesh is not closed")]
    NotClosed,
    #[error("`{0}-{1}` is not an edge")]
    NotAnEdge(String, String),
    #[error("`{0}-{1}` is a boundary edge")]
    BoundaryEdge(String, String),
    #[error("split parameter {0} outside (0, 1)")]
    SplitParameter(f64),
    #[error("configuration does not cover vertex `{0}`")]
    MissingPosition(String),
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(String),
    #[error("quad side `{0}-{1}` does not lie in a face")]
    NotCofacial(String, String),
    #[error("quadrilateral does not separate the surface")]
    NonSeparating,
    #[error("caps incompatible: {0}")]
    CapsIncompatible(String),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// Combinatorial triangulated surface with string vertex labels.
///
/// Faces are oriented index triples into `vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriMesh {
    vertices: Vec<String>,
    faces: Vec<[usize; 3]>,
    index: HashMap<String, usize>,
}

/// Undirected edge as a sorted index pair.
pub type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    pub fn new<S: AsRef<str>>(vertices: &[S], faces: &[[S; 3]]) -> Result<Self, MeshError> {
        let vertices: Vec<String> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(MeshError::DuplicateLabel(v.clone()));
            }
        }
        let mut out = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let mut t = [0usize; 3];
            for k in 0..3 {
                let l = f[k].as_ref();
                t[k] = *index.get(l).ok_or_else(|| MeshError::UnknownVertex(l.to_string()))?;
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::DegenerateFace(fi));
            }
            out.push(t);
        }
        Ok(TriMesh { vertices, faces: out, index })
    }

    pub fn from_indexed(vertices: Vec<String>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let labelled: Vec<[String; 3]> = faces
            .iter()
            .map(|f| {
                f.map(|i| vertices.get(i).cloned().unwrap_or_else(|| format!("#{i}")))
            })
            .collect();
        TriMesh::new(&vertices, &labelled)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn face_labels(&self, f: usize) -> [&str; 3] {
        let t = self.faces[f];
        [&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]]
    }

    fn idx(&self, label: &str) -> Result<usize, MeshError> {
        self.index_of(label).ok_or_else(|| MeshError::UnknownVertex(label.to_string()))
    }

    /// Sorted undirected edges.
    pub fn edges(&self) -> Vec<EdgeKey> {
        let set: BTreeSet<EdgeKey> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| key(f[k], f[(k + 1) % 3])))
            .collect();
        set.into_iter().collect()
    }

    /// Edges as label pairs, in the order of [`TriMesh::edges`].
    pub fn edge_labels(&self) -> Vec<(String, String)> {
        self.edges().into_iter().map(|(a, b)| (self.vertices[a].clone(), self.vertices[b].clone())).collect()
    }

    /// Faces incident to each undirected edge.
    pub fn edge_faces(&self) -> BTreeMap<EdgeKey, Vec<usize>> {
        let mut m: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                m.entry(key(f[k], f[(k + 1) % 3])).or_default().push(fi);
            }
        }
        m
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.faces.iter().any(|f| f.contains(&i) && f.contains(&j)),
            _ => false,
        }
    }

    /// Vertex neighbours, sorted by index.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let set: BTreeSet<usize> =
            self.faces.iter().filter(|f| f.contains(&v)).flat_map(|f| f.iter().copied()).filter(|&w| w != v).collect();
        set.into_iter().collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbours(v).len()
    }

    /// Same surface with every face orientation reversed.
    pub fn reversed(&self) -> TriMesh {
        TriMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect(),
            index: self.index.clone(),
        }
    }

    /// Rename vertices; labels absent from `map` are kept.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> Result<TriMesh, MeshError> {
        let vertices: Vec<String> = self.vertices.iter().map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone())).collect();
        TriMesh::from_indexed(vertices, self.faces.clone())
    }

    /// Faces as sets of labels in a rotation-normalised form, for comparisons
    /// that ignore vertex order in `vertices`.
    pub fn canonical_faces(&self) -> BTreeSet<[String; 3]> {
        self.faces
            .iter()
            .map(|f| {
                let l = f.map(|i| self.vertices[i].clone());
                let m = (0..3).min_by(|&a, &b| l[a].cmp(&l[b])).unwrap();
                [l[m].clone(), l[(m + 1) % 3].clone(), l[(m + 2) % 3].clone()]
            })
            .collect()
    }
}

/// Positions of labelled vertices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    positions: BTreeMap<String, [f64; 3]>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points<S: AsRef<str>>(pairs: &[(S, Point3)]) -> Self {
        let mut c = Configuration::new();
        for (l, p) in pairs {
            c.insert(l.as_ref(), *p);
        }
        c
    }

    pub fn insert(&mut self, label: &str, p: Point3) {
        self.positions.insert(label.to_string(), [p.x, p.y, p.z]);
    }

    pub fn remove(&mut self, label: &str) -> Option<Point3> {
        self.positions.remove(label).map(|a| Point3::new(a[0], a[1], a[2]))
    }

    pub fn get(&self, label: &str) -> Option<Point3> {
        self.positions.get(label).map(|a| Point3::new(a[0], a[1], a[2]))
    }

    pub fn position(&self, label: &str) -> Result<Point3, MeshError> {
        self.get(label).ok_or_else(|| MeshError::MissingPosition(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.positions.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Point3)> {
        self.positions.iter().map(|(k, a)| (k.as_str(), Point3::new(a[0], a[1], a[2])))
    }

    /// Positions in the vertex order of `mesh`.
    pub fn points_for(&self, mesh: &TriMesh) -> Result<Vec<Point3>, MeshError> {
        mesh.vertices().iter().map(|l| self.position(l)).collect()
    }

    pub fn from_mesh_points(mesh: &TriMesh, pts: &[Point3]) -> Self {
        let mut c = Configuration::new();
        for (l, p) in mesh.vertices().iter().zip(pts) {
            c.insert(l, *p);
        }
        c
    }

    /// Every mesh vertex has a finite position and nothing else is stored.
    pub fn covers_exactly(&self, mesh: &TriMesh) -> bool {
        self.len() == mesh.num_vertices()
            && mesh.vertices().iter().all(|l| self.get(l).map_or(false, |p| p.iter().all(|c| c.is_finite())))
    }

    pub fn relabel(&self, map: &BTreeMap<String, String>) -> Configuration {
        let mut c = Configuration::new();
        for (l, p) in self.iter() {
            c.insert(map.get(l).map_or(l, |s| s.as_str()), p);
        }
        c
    }

    pub fn transformed(&self, iso: &Isometry3) -> Configuration {
        let mut c = Configuration::new();
        for (l, p) in self.iter() {
            c.insert(l, iso.apply(&p));
        }
        c
    }

    /// Largest distance between any two stored points.
    pub fn scale(&self) -> f64 {
        let pts: Vec<Point3> = self.iter().map(|(_, p)| p).collect();
        let mut s: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                s = s.max((pts[i] - pts[j]).norm());
            }
        }
        s
    }

    /// Largest position difference over the shared labels; infinite when
    /// the label sets differ.
    pub fn max_deviation(&self, other: &Configuration) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for (l, p) in self.iter() {
            match other.get(l) {
                Some(q) => m = m.max((p - q).norm()),
                None => return f64::INFINITY,
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    /// Every edge lies in exactly two faces.
    pub closed: bool,
    /// Every directed edge is used at most once.
    pub oriented: bool,
    /// Every vertex link is a single cycle (or path on the boundary).
    pub manifold: bool,
    pub connected: bool,
}

impl MeshReport {
    /// Closed, oriented, connected 2-sphere.
    pub fn is_sphere(&self) -> bool {
        self.closed && self.oriented && self.manifold && self.connected && self.euler_characteristic == 2
    }
}

pub fn validate(mesh: &TriMesh) -> MeshReport {
    let ef = mesh.edge_faces();
    let closed = !ef.is_empty() && ef.values().all(|v| v.len() == 2);
    let mut directed = BTreeSet::new();
    let mut oriented = true;
    for f in mesh.faces() {
        for k in 0..3 {
            if !directed.insert((f[k], f[(k + 1) % 3])) {
                oriented = false;
            }
        }
    }
    let manifold = (0..mesh.num_vertices()).all(|v| link_is_connected(mesh, v));
    let connected = faces_connected(mesh);
    let v = mesh.num_vertices() as i64;
    let e = ef.len() as i64;
    let f = mesh.num_faces() as i64;
    MeshReport {
        vertices: v as usize,
        edges: e as usize,
        faces: f as usize,
        euler_characteristic: v - e + f,
        closed,
        oriented,
        manifold,
        connected,
    }
}

fn link_is_connected(mesh: &TriMesh, v: usize) -> bool {
    let link: Vec<(usize, usize)> = mesh
        .faces()
        .iter()
        .filter(|f| f.contains(&v))
        .map(|f| {
            let k = f.iter().position(|&x| x == v).unwrap();
            (f[(k + 1) % 3], f[(k + 2) % 3])
        })
        .collect();
    if link.is_empty() {
        return false;
    }
    let mut seen = vec![false; link.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..link.len() {
            if !seen[j] {
                let (a, b) = link[i];
                let (c, d) = link[j];
                if a == c || a == d || b == c || b == d {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn faces_connected(mesh: &TriMesh) -> bool {
    if mesh.num_faces() == 0 {
        return false;
    }
    let comps = face_components(mesh, &BTreeSet::new());
    comps.len() == 1
}

/// Face components when adjacency across `blocked` edges is removed.
fn face_components(mesh: &TriMesh, blocked: &BTreeSet<EdgeKey>) -> Vec<Vec<usize>> {
    let ef = mesh.edge_faces();
    let mut comp = vec![usize::MAX; mesh.num_faces()];
    let mut out = Vec::new();
    for start in 0..mesh.num_faces() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let t = mesh.faces()[f];
            for k in 0..3 {
                let e = key(t[k], t[(k + 1) % 3]);
                if blocked.contains(&e) {
                    continue;
                }
                for &g in &ef[&e] {
                    if comp[g] == usize::MAX {
                        comp[g] = id;
                        members.push(g);
                        queue.push_back(g);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Enclosed (algebraic) volume of a closed oriented surface.
pub fn signed_volume(mesh: &TriMesh, config: &Configuration) -> Result<f64, MeshError> {
    if !validate(mesh).closed {
        return Err(MeshError::NotClosed);
    }
    let pts = config.points_for(mesh)?;
    Ok(volume_of(mesh.faces(), &pts))
}

pub(crate) fn volume_of(faces: &[[usize; 3]], pts: &[Point3]) -> f64 {
    // reference point at the first vertex keeps the sum translation-exact
    let o = pts.first().copied().unwrap_or_else(Point3::origin);
    faces.iter().map(|f| signed_volume_tetra(&o, &pts[f[0]], &pts[f[1]], &pts[f[2]])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldSign {
    Mountain,
    Valley,
    Flat,
}

impl FoldSign {
    pub fn as_str(&self) -> &'static str {
        match self {
            FoldSign::Mountain => "mountain",
            FoldSign::Valley => "valley",
            FoldSign::Flat => "flat",
        }
    }
}

/// Interior dihedral angle in `[0, 2π)` at the edge `(u, v)` with face
/// normals taken from the mesh orientation, plus its fold sign.
pub fn dihedral(
    mesh: &TriMesh,
    config: &Configuration,
    u: &str,
    v: &str,
    tol: &Tolerance,
) -> Result<(f64, FoldSign), MeshError> {
    let (iu, iv) = (mesh.idx(u)?, mesh.idx(v)?);
    let pts = config.points_for(mesh)?;
    let ef = mesh.edge_faces();
    let faces = ef.get(&key(iu, iv)).ok_or_else(|| MeshError::NotAnEdge(u.into(), v.into()))?;
    if faces.len() != 2 {
        return Err(MeshError::BoundaryEdge(u.into(), v.into()));
    }
    let angle = dihedral_at(mesh.faces(), &pts, iu, iv, faces[0], faces[1]);
    Ok((angle, fold_sign(angle, tol)))
}

pub(crate) fn fold_sign(angle: f64, tol: &Tolerance) -> FoldSign {
    if (angle - std::f64::consts::PI).abs() <= tol.eps_geom {
        FoldSign::Flat
    } else if angle < std::f64::consts::PI {
        FoldSign::Mountain
    } else {
        FoldSign::Valley
    }
}

/// Interior dihedral angle at edge `{a, b}` shared by faces `f0`, `f1`.
pub(crate) fn dihedral_at(faces: &[[usize; 3]], pts: &[Point3], a: usize, b: usize, f0: usize, f1: usize) -> f64 {
    // orient so that f0 traverses u -> v
    let (fu, fv) = {
        let f = faces[f0];
        let k = f.iter().position(|&x| x == a).unwrap();
        if f[(k + 1) % 3] == b {
            (f0, f1)
        } else {
            (f1, f0)
        }
    };
    let (u, v) = (a.min(b), a.max(b));
    let (u, v) = {
        let f = faces[fu];
        let k = f.iter().position(|&x| x == u).unwrap();
        if f[(k + 1) % 3] == v {
            (u, v)
        } else {
            (v, u)
        }
    };
    let third = |f: usize| faces[f].iter().copied().find(|&x| x != u && x != v).unwrap();
    let (w1, w2) = (third(fu), third(fv));
    let (pu, pv) = (pts[u], pts[v]);
    let e = (pv - pu).normalize();
    let mut x = pts[w1] - pu;
    x -= e * x.dot(&e);
    let mut y = pts[w2] - pu;
    y -= e * y.dot(&e);
    let alpha = x.angle(&y);
    let n1 = (pv - pu).cross(&(pts[w1] - pu));
    if n1.dot(&(pts[w2] - pu)) <= 0.0 {
        alpha
    } else {
        2.0 * std::f64::consts::PI - alpha
    }
}

/// Dihedral angle of every interior edge, keyed by the sorted edge.
pub fn all_dihedrals(mesh: &TriMesh, pts: &[Point3]) -> BTreeMap<EdgeKey, f64> {
    mesh.edge_faces()
        .into_iter()
        .filter(|(_, f)| f.len() == 2)
        .map(|(e, f)| (e, dihedral_at(mesh.faces(), pts, e.0, e.1, f[0], f[1])))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionPair {
    pub faces: (usize, usize),
    pub witness: ([f64; 3], [f64; 3]),
}

/// Interpenetrating face pairs `(i, j)`, `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IntersectionReport {
    pub pairs: Vec<IntersectionPair>,
}

impl IntersectionReport {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn face_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| p.faces).collect()
    }

    /// Faces present in every reported pair.
    pub fn common_faces(&self) -> Vec<usize> {
        let mut it = self.pairs.iter();
        let Some(first) = it.next() else { return Vec::new() };
        let mut common: BTreeSet<usize> = [first.faces.0, first.faces.1].into();
        for p in it {
            common.retain(|&f| f == p.faces.0 || f == p.faces.1);
        }
        common.into_iter().collect()
    }
}

fn triangle(pts: &[Point3], f: &[usize; 3]) -> Triangle {
    [pts[f[0]], pts[f[1]], pts[f[2]]]
}

/// Face pairs sharing at most one vertex that interpenetrate by more than
/// `eps_geom` (scaled by the configuration size when it exceeds one).
pub fn self_intersections(mesh: &TriMesh, config: &Configuration, tol: &Tolerance) -> Result<IntersectionReport, MeshError> {
    let pts = config.points_for(mesh)?;
    Ok(intersections_of(mesh.faces(), &pts, tol))
}

pub(crate) fn intersections_of(faces: &[[usize; 3]], pts: &[Point3], tol: &Tolerance) -> IntersectionReport {
    let scale = bbox_diagonal(pts).max(1.0);
    let eps = tol.eps_geom * scale;
    let mut pairs = Vec::new();
    for i in 0..faces.len() {
        for j in i + 1..faces.len() {
            let shared = faces[i].iter().filter(|v| faces[j].contains(v)).count();
            if shared >= 2 {
                continue;
            }
            if let Some((a, b)) = triangle_intersection(&triangle(pts, &faces[i]), &triangle(pts, &faces[j]), eps) {
                pairs.push(IntersectionPair { faces: (i, j), witness: ([a.x, a.y, a.z], [b.x, b.y, b.z]) });
            }
        }
    }
    IntersectionReport { pairs }
}

/// Smallest distance between two faces that share no vertex.
pub fn min_clearance(mesh: &TriMesh, config: &Configuration) -> Result<f64, MeshError> {
    let pts = config.points_for(mesh)?;
    let f = mesh.faces();
    let mut best = f64::INFINITY;
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            if f[i].iter().any(|v| f[j].contains(v)) {
                continue;
            }
            best = best.min(triangle_distance(&triangle(&pts, &f[i]), &triangle(&pts, &f[j])));
        }
    }
    Ok(best)
}

/// Smallest `altitude / longest edge` over all faces.
pub fn min_triangle_quality(mesh: &TriMesh, config: &Configuration) -> Result<f64, MeshError> {
    let pts = config.points_for(mesh)?;
    Ok(mesh.faces().iter().map(|f| triangle_quality(&triangle(&pts, f))).fold(f64::INFINITY, f64::min))
}

pub fn triangle_quality(t: &Triangle) -> f64 {
    let longest = (0..3).map(|k| (t[k] - t[(k + 1) % 3]).norm()).fold(0.0, f64::max);
    if longest == 0.0 {
        return 0.0;
    }
    let area2 = (t[1] - t[0]).cross(&(t[2] - t[0])).norm();
    // smallest altitude is the one onto the longest edge
    (area2 / longest) / longest
}

fn bbox_diagonal(pts: &[Point3]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi - lo).norm()
}

/// Insert `label` on edge `{u, v}`; both incident faces are split in two.
pub fn split_edge_topology(mesh: &TriMesh, u: &str, v: &str, label: &str) -> Result<TriMesh, MeshError> {
    let (iu, iv) = (mesh.idx(u)?, mesh.idx(v)?);
    if mesh.index_of(label).is_some() {
        return Err(MeshError::DuplicateLabel(label.to_string()));
    }
    if !mesh.has_edge(u, v) {
        return Err(MeshError::NotAnEdge(u.into(), v.into()));
    }
    let m = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.push(label.to_string());
    let mut faces = Vec::with_capacity(mesh.num_faces() + 2);
    for f in mesh.faces() {
        let ku = f.iter().position(|&x| x == iu);
        let kv = f.iter().position(|&x| x == iv);
        match (ku, kv) {
            (Some(a), Some(b)) => {
                // f = (p, q, w) with p -> q the edge direction in this face
                let (p, q) = if (a + 1) % 3 == b { (iu, iv) } else { (iv, iu) };
                let w = f.iter().copied().find(|&x| x != iu && x != iv).unwrap();
                faces.push([p, m, w]);
                faces.push([m, q, w]);
            }
            _ => faces.push(*f),
        }
    }
    TriMesh::from_indexed(vertices, faces)
}

/// Split edge `{u, v}` at `u + t (v - u)`, `0 < t < 1`.
pub fn split_edge(
    mesh: &TriMesh,
    config: &Configuration,
    u: &str,
    v: &str,
    t: f64,
    label: &str,
) -> Result<(TriMesh, Configuration), MeshError> {
    if !(t > 0.0 && t < 1.0) {
        return Err(MeshError::SplitParameter(t));
    }
    let out = split_edge_topology(mesh, u, v, label)?;
    let (pu, pv) = (config.position(u)?, config.position(v)?);
    let mut c = config.clone();
    c.insert(label, pu + (pv - pu) * t);
    Ok((out, c))
}

/// Corner of a surface quadrilateral.
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    Vertex(String),
    /// Point `a + t (b - a)` on edge `{a, b}`, materialised as vertex `label`.
    OnEdge { a: String, b: String, t: f64, label: String },
}

impl Anchor {
    pub fn vertex(l: &str) -> Self {
        Anchor::Vertex(l.to_string())
    }

    pub fn label(&self) -> &str {
        match self {
            Anchor::Vertex(l) => l,
            Anchor::OnEdge { label, .. } => label,
        }
    }
}

/// A closed 4-cycle drawn on the surface, anchors in cyclic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceQuad {
    pub anchors: [Anchor; 4],
}

impl SurfaceQuad {
    pub fn new(anchors: [Anchor; 4]) -> Self {
        SurfaceQuad { anchors }
    }

    pub fn of_vertices(labels: [&str; 4]) -> Self {
        SurfaceQuad { anchors: labels.map(Anchor::vertex) }
    }

    pub fn labels(&self) -> [String; 4] {
        [0, 1, 2, 3].map(|i| self.anchors[i].label().to_string())
    }
}

/// One side of a cut: a disk whose boundary is the quadrilateral.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub faces: Vec<[String; 3]>,
    /// The quadrilateral, in the order given by the cut.
    pub boundary: [String; 4],
    pub config: Configuration,
}

impl Cap {
    pub fn vertices(&self) -> BTreeSet<String> {
        self.faces.iter().flat_map(|f| f.iter().cloned()).collect()
    }

    pub fn interior_vertices(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in &self.faces {
            for v in f {
                if !self.boundary.contains(v) && seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn contains_vertex(&self, l: &str) -> bool {
        self.faces.iter().any(|f| f.iter().any(|v| v == l))
    }

    /// Directed boundary edges as traversed by the cap's own faces.
    fn boundary_directed(&self) -> BTreeSet<(String, String)> {
        let mut count: BTreeMap<(String, String), usize> = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k].clone(), f[(k + 1) % 3].clone());
                let e = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                *count.entry(e).or_default() += 1;
            }
        }
        let mut out = BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k].clone(), f[(k + 1) % 3].clone());
                let e = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                if count[&e] == 1 {
                    out.insert((a, b));
                }
            }
        }
        out
    }
}

/// Materialise on-edge anchors; returns the refined surface.
pub fn materialize_quad(
    mesh: &TriMesh,
    config: &Configuration,
    quad: &SurfaceQuad,
) -> Result<(TriMesh, Configuration), MeshError> {
    let labels = quad.labels();
    let distinct: BTreeSet<&String> = labels.iter().collect();
    if distinct.len() != 4 {
        return Err(MeshError::DegenerateQuad("repeated anchors".into()));
    }
    // consecutive anchors must share a face of the original surface
    let carrier = |a: &Anchor| -> Result<BTreeSet<usize>, MeshError> {
        Ok(match a {
            Anchor::Vertex(l) => {
                let i = mesh.idx(l)?;
                (0..mesh.num_vertices()).filter(|_| true).filter(|&j| j == i).collect()
            }
            Anchor::OnEdge { a, b, .. } => [mesh.idx(a)?, mesh.idx(b)?].into(),
        })
    };
    for k in 0..4 {
        let (p, q) = (&quad.anchors[k], &quad.anchors[(k + 1) % 4]);
        let (cp, cq) = (carrier(p)?, carrier(q)?);
        let ok = mesh.faces().iter().any(|f| cp.iter().all(|v| f.contains(v)) && cq.iter().all(|v| f.contains(v)));
        if !ok {
            return Err(MeshError::NotCofacial(p.label().into(), q.label().into()));
        }
    }
    let mut m = mesh.clone();
    let mut c = config.clone();
    for a in &quad.anchors {
        if let Anchor::OnEdge { a, b, t, label } = a {
            let (m2, c2) = split_edge(&m, &c, a, b, *t, label)?;
            m = m2;
            c = c2;
        }
    }
    for k in 0..4 {
        let (p, q) = (&labels[k], &labels[(k + 1) % 4]);
        if !m.has_edge(p, q) {
            return Err(MeshError::NotCofacial(p.clone(), q.clone()));
        }
    }
    Ok((m, c))
}

/// Cut a closed surface along a quadrilateral into two caps.
///
/// The first cap is the one holding the lowest-numbered face of the
/// refined surface.
pub fn cut_along_quad(mesh: &TriMesh, config: &Configuration, quad: &SurfaceQuad) -> Result<(Cap, Cap), MeshError> {
    if !validate(mesh).closed {
        return Err(MeshError::NotClosed);
    }
    let (m, c) = materialize_quad(mesh, config, quad)?;
    let labels = quad.labels();
    let idx: Vec<usize> = labels.iter().map(|l| m.idx(l)).collect::<Result<_, _>>()?;
    let blocked: BTreeSet<EdgeKey> = (0..4).map(|k| key(idx[k], idx[(k + 1) % 4])).collect();
    let comps = face_components(&m, &blocked);
    if comps.len() != 2 {
        return Err(MeshError::NonSeparating);
    }
    let make = |faces: &Vec<usize>| -> Cap {
        let fl: Vec<[String; 3]> = faces.iter().map(|&f| m.faces()[f].map(|i| m.label(i).to_string())).collect();
        let mut cc = Configuration::new();
        for f in &fl {
            for v in f {
                cc.insert(v, c.get(v).expect("materialised configuration covers the mesh"));
            }
        }
        Cap { faces: fl, boundary: labels.clone(), config: cc }
    };
    let caps = (make(&comps[0]), make(&comps[1]));
    for cap in [&caps.0, &caps.1] {
        if cap.boundary_directed().len() != 4 {
            return Err(MeshError::NonSeparating);
        }
    }
    Ok(caps)
}

/// Glue `b` onto `a`; `correspondence[k] = (label in b, label in a)` for the
/// four boundary vertices. Interior labels of `b` must not clash with `a`.
pub fn glue(a: &Cap, b: &Cap, correspondence: &[(String, String); 4], tol: &Tolerance) -> Result<(TriMesh, Configuration), MeshError> {
    let map: BTreeMap<&str, &str> = correspondence.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
    for (x, y) in correspondence {
        if !b.boundary.contains(x) || !a.boundary.contains(y) {
            return Err(MeshError::CapsIncompatible(format!("`{x}` -> `{y}` is not a boundary correspondence")));
        }
    }
    let targets: BTreeSet<&str> = map.values().copied().collect();
    if map.len() != 4 || targets.len() != 4 {
        return Err(MeshError::CapsIncompatible("correspondence is not a bijection".into()));
    }
    let interior_b = b.interior_vertices();
    let a_verts = a.vertices();
    for v in &interior_b {
        if a_verts.contains(v) {
            return Err(MeshError::CapsIncompatible(format!("label `{v}` used by both caps")));
        }
    }
    let rename = |l: &String| -> String { map.get(l.as_str()).map(|s| s.to_string()).unwrap_or_else(|| l.clone()) };
    let a_dir = a.boundary_directed();
    let b_dir: BTreeSet<(String, String)> = b.boundary_directed().iter().map(|(x, y)| (rename(x), rename(y))).collect();
    let scale = a.config.scale().max(b.config.scale()).max(f64::MIN_POSITIVE);
    for (x, y) in &b_dir {
        if !a_dir.contains(&(y.clone(), x.clone())) {
            if a_dir.contains(&(x.clone(), y.clone())) {
                return Err(MeshError::CapsIncompatible("orientation mismatch along the seam".into()));
            }
            return Err(MeshError::CapsIncompatible(format!("seam edge `{x}-{y}` has no partner")));
        }
    }
    for (bx, by) in b.boundary_directed() {
        let (ax, ay) = (rename(&bx), rename(&by));
        let lb = (b.config.position(&bx)? - b.config.position(&by)?).norm();
        let la = (a.config.position(&ax)? - a.config.position(&ay)?).norm();
        if (la - lb).abs() > tol.eps_len * scale {
            return Err(MeshError::CapsIncompatible(format!("seam edge `{ax}-{ay}`: {la} vs {lb}")));
        }
    }
    let mut vertices: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for f in &a.faces {
        for v in f {
            if seen.insert(v.clone()) {
                vertices.push(v.clone());
            }
        }
    }
    for v in interior_b {
        if seen.insert(v.clone()) {
            vertices.push(v);
        }
    }
    let mut faces: Vec<[String; 3]> = a.faces.clone();
    faces.extend(b.faces.iter().map(|f| [rename(&f[0]), rename(&f[1]), rename(&f[2])]));
    let mesh = TriMesh::new(&vertices, &faces)?;
    let mut config = Configuration::new();
    for v in &vertices {
        let p = match a.config.get(v) {
            Some(p) => p,
            None => b.config.position(v)?,
        };
        config.insert(v, p);
    }
    if !validate(&mesh).closed {
        return Err(MeshError::CapsIncompatible("glued surface is not closed".into()));
    }
    Ok((mesh, config))
}

/// Which cap is moved by a twist or reflection.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CapSelector {
    /// The cap with fewer faces (first cap on ties).
    #[default]
    Smaller,
    /// The cap holding this vertex as an interior vertex.
    Containing(String),
    First,
    Second,
}

fn choose_caps(caps: (Cap, Cap), sel: &CapSelector) -> Result<(Cap, Cap), MeshError> {
    let (a, b) = caps;
    let moving_first = match sel {
        CapSelector::Smaller => a.faces.len() <= b.faces.len(),
        CapSelector::First => true,
        CapSelector::Second => false,
        CapSelector::Containing(l) => {
            if a.interior_vertices().contains(l) {
                true
            } else if b.interior_vertices().contains(l) {
                false
            } else {
                return Err(MeshError::UnknownVertex(l.clone()));
            }
        }
    };
    Ok(if moving_first { (b, a) } else { (a, b) })
}

fn fresh_label(base: &str, taken: &BTreeSet<String>) -> String {
    let mut l = format!("{base}'");
    while taken.contains(&l) {
        l.push('\'');
    }
    l
}

/// Apply `iso` to `cap`, relabel boundary vertices through `swap`, give
/// interior vertices fresh primed labels and optionally flip orientation.
fn move_cap(cap: &Cap, iso: &Isometry3, swap: &BTreeMap<String, String>, taken: &BTreeSet<String>, flip: bool) -> (Cap, BTreeMap<String, String>) {
    let mut taken = taken.clone();
    let mut names: BTreeMap<String, String> = swap.clone();
    for v in cap.interior_vertices() {
        let n = fresh_label(&v, &taken);
        taken.insert(n.clone());
        names.insert(v, n);
    }
    let moved = cap.config.transformed(iso);
    let mut config = Configuration::new();
    for (l, p) in moved.iter() {
        config.insert(&names[l], p);
    }
    let faces = cap
        .faces
        .iter()
        .map(|f| {
            let g = f.clone().map(|v| names[&v].clone());
            if flip {
                [g[0].clone(), g[2].clone(), g[1].clone()]
            } else {
                g
            }
        })
        .collect();
    let boundary = cap.boundary.clone().map(|v| names[&v].clone());
    let interior_names = cap.interior_vertices().into_iter().map(|v| (v.clone(), names[&v].clone())).collect();
    (Cap { faces, boundary, config }, interior_names)
}

/// Result of a twist or reflection: the new surface, its realisation and
/// the fresh labels given to the moved cap's interior vertices.
#[derive(Debug, Clone)]
pub struct Surgery {
    pub mesh: TriMesh,
    pub config: Configuration,
    pub renamed: BTreeMap<String, String>,
}

/// Cut along `quad = [A, B, A', B']` (opposite sides equal), turn one cap by
/// a half-turn about the quad's symmetry line and glue it back.
pub fn cut_and_twist(
    mesh: &TriMesh,
    config: &Configuration,
    quad: &SurfaceQuad,
    moving: &CapSelector,
    tol: &Tolerance,
) -> Result<Surgery, MeshError> {
    let caps = cut_along_quad(mesh, config, quad)?;
    let q = quad.labels();
    let p: Vec<Point3> = q.iter().map(|l| caps.0.config.position(l)).collect::<Result<_, _>>()?;
    let line = symmetry_line(&p[0], &p[1], &p[2], &p[3], tol)?;
    let iso = half_rotation(&line);
    let (fixed, mover) = choose_caps(caps, moving)?;
    let swap: BTreeMap<String, String> = (0..4).map(|k| (q[k].clone(), q[(k + 2) % 4].clone())).collect();
    let taken: BTreeSet<String> = fixed.vertices().union(&mover.vertices()).cloned().collect();
    let (moved, renamed) = move_cap(&mover, &iso, &swap, &taken, false);
    let corr = [0, 1, 2, 3].map(|k| (q[k].clone(), q[k].clone()));
    let (mesh, config) = glue(&fixed, &moved, &corr, tol)?;
    Ok(Surgery { mesh, config, renamed })
}

/// Cut along `quad = [P0, P1, P2, P3]` with `P0P1 = P0P3` and
/// `P2P1 = P2P3`, reflect one cap in the mirror through `P0, P2` that swaps
/// `P1 <-> P3`, and glue it back.
pub fn cut_and_reflect(
    mesh: &TriMesh,
    config: &Configuration,
    quad: &SurfaceQuad,
    moving: &CapSelector,
    tol: &Tolerance,
) -> Result<Surgery, MeshError> {
    let caps = cut_along_quad(mesh, config, quad)?;
    let q = quad.labels();
    let p: Vec<Point3> = q.iter().map(|l| caps.0.config.position(l)).collect::<Result<_, _>>()?;
    let plane = symmetry_plane(&p[0], &p[1], &p[2], &p[3], tol)?;
    let iso = reflect_in_plane(&plane);
    let (fixed, mover) = choose_caps(caps, moving)?;
    let mut swap = BTreeMap::new();
    swap.insert(q[0].clone(), q[0].clone());
    swap.insert(q[2].clone(), q[2].clone());
    swap.insert(q[1].clone(), q[3].clone());
    swap.insert(q[3].clone(), q[1].clone());
    let taken: BTreeSet<String> = fixed.vertices().union(&mover.vertices()).cloned().collect();
    let (moved, renamed) = move_cap(&mover, &iso, &swap, &taken, true);
    let corr = [0, 1, 2, 3].map(|k| (q[k].clone(), q[k].clone()));
    let (mesh, config) = glue(&fixed, &moved, &corr, tol)?;
    Ok(Surgery { mesh, config, renamed })
}

/// Sorted edge lengths.
pub fn edge_lengths(mesh: &TriMesh, config: &Configuration) -> Result<Vec<f64>, MeshError> {
    let pts = config.points_for(mesh)?;
    let mut l: Vec<f64> = mesh.edges().iter().map(|&(a, b)| (pts[a] - pts[b]).norm()).collect();
    l.sort_by(f64::total_cmp);
    Ok(l)
}

/// A few standard solids used in tests, examples and the enumeration.
pub mod solids {
    use super::*;

    pub fn tetrahedron() -> (TriMesh, Configuration) {
        let m = TriMesh::new(&["a", "b", "c", "d"], &[["a", "c", "b"], ["a", "b", "d"], ["b", "c", "d"], ["c", "a", "d"]]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let c = Configuration::from_points(&[
            ("a", Point3::new(1.0, 0.0, -s)),
            ("b", Point3::new(-1.0, 0.0, -s)),
            ("c", Point3::new(0.0, 1.0, s)),
            ("d", Point3::new(0.0, -1.0, s)),
        ]);
        orient_outward(m, c)
    }

    /// Regular octahedron with equator `e0 e1 e2 e3` and poles `n`, `s`.
    pub fn octahedron() -> (TriMesh, Configuration) {
        let m = TriMesh::new(
            &["e0", "e1", "e2", "e3", "n", "s"],
            &[
                ["n", "e0", "e1"],
                ["n", "e1", "e2"],
                ["n", "e2", "e3"],
                ["n", "e3", "e0"],
                ["s", "e1", "e0"],
                ["s", "e2", "e1"],
                ["s", "e3", "e2"],
                ["s", "e0", "e3"],
            ],
        )
        .unwrap();
        let c = Configuration::from_points(&[
            ("e0", Point3::new(1.0, 0.0, 0.0)),
            ("e1", Point3::new(0.0, 1.0, 0.0)),
            ("e2", Point3::new(-1.0, 0.0, 0.0)),
            ("e3", Point3::new(0.0, -1.0, 0.0)),
            ("n", Point3::new(0.0, 0.0, 1.0)),
            ("s", Point3::new(0.0, 0.0, -1.0)),
        ]);
        orient_outward(m, c)
    }

    /// Unit cube split into twelve triangles.
    pub fn cube() -> (TriMesh, Configuration) {
        let names = ["v000", "v100", "v010", "v110", "v001", "v101", "v011", "v111"];
        let quads = [
            [0, 2, 3, 1], // z = 0
            [4, 5, 7, 6], // z = 1
            [0, 1, 5, 4], // y = 0
            [2, 6, 7, 3], // y = 1
            [0, 4, 6, 2], // x = 0
            [1, 3, 7, 5], // x = 1
        ];
        let mut faces = Vec::new();
        for q in quads {
            faces.push([names[q[0]], names[q[1]], names[q[2]]]);
            faces.push([names[q[0]], names[q[2]], names[q[3]]]);
        }
        let m = TriMesh::new(&names, &faces).unwrap();
        let pts: Vec<(&str, Point3)> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (*n, Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64)))
            .collect();
        orient_outward(m, Configuration::from_points(&pts))
    }

    pub(crate) fn orient_outward(m: TriMesh, c: Configuration) -> (TriMesh, Configuration) {
        if signed_volume(&m, &c).unwrap() < 0.0 {
            (m.reversed(), c)
        } else {
            (m, c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::solids::*;
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn validate_counts() {
        let (t, _) = tetrahedron();
        let r = validate(&t);
        assert_eq!((r.vertices, r.edges, r.faces, r.euler_characteristic), (4, 6, 4, 2));
        assert!(r.is_sphere());
        let (o, _) = octahedron();
        let r = validate(&o);
        assert_eq!((r.vertices, r.edges, r.faces, r.euler_characteristic), (6, 12, 8, 2));
        assert!(r.is_sphere());
        let open = TriMesh::from_indexed(t.vertices().to_vec(), t.faces()[1..].to_vec()).unwrap();
        assert!(!validate(&open).closed);
    }

    #[test]
    fn volumes() {
        let (c, cfg) = cube();
        assert!((signed_volume(&c, &cfg).unwrap() - 1.0).abs() < 1e-14);
        assert!((signed_volume(&c.reversed(), &cfg).unwrap() + 1.0).abs() < 1e-14);
        let (t, tc) = tetrahedron();
        let open = TriMesh::from_indexed(t.vertices().to_vec(), t.faces()[1..].to_vec()).unwrap();
        assert_eq!(signed_volume(&open, &tc), Err(MeshError::NotClosed));
    }

    #[test]
    fn tetrahedron_is_convex() {
        let (t, c) = tetrahedron();
        for (a, b) in t.edge_labels() {
            let (angle, sign) = dihedral(&t, &c, &a, &b, &tol()).unwrap();
            assert_eq!(sign, FoldSign::Mountain);
            assert!((angle - (1.0f64 / 3.0).acos()).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_and_valley_folds() {
        let m = TriMesh::new(&["a", "b", "c", "d"], &[["a", "b", "c"], ["b", "a", "d"]]).unwrap();
        let mut c = Configuration::from_points(&[
            ("a", Point3::new(0.0, 0.0, 0.0)),
            ("b", Point3::new(1.0, 0.0, 0.0)),
            ("c", Point3::new(0.5, 1.0, 0.0)),
            ("d", Point3::new(0.5, -1.0, 0.0)),
        ]);
        let pts = c.points_for(&m).unwrap();
        let a = dihedral_at(m.faces(), &pts, 0, 1, 0, 1);
        assert!((a - PI).abs() < 1e-12);
        assert_eq!(fold_sign(a, &tol()), FoldSign::Flat);
        c.insert("d", Point3::new(0.5, -1.0, 0.3));
        let pts = c.points_for(&m).unwrap();
        let up = dihedral_at(m.faces(), &pts, 0, 1, 0, 1);
        c.insert("d", Point3::new(0.5, -1.0, -0.3));
        let pts = c.points_for(&m).unwrap();
        let down = dihedral_at(m.faces(), &pts, 0, 1, 0, 1);
        assert!((up + down - 2.0 * PI).abs() < 1e-12);
        assert_ne!(fold_sign(up, &tol()), fold_sign(down, &tol()));
    }

    #[test]
    fn boundary_edge_rejected() {
        let m = TriMesh::new(&["a", "b", "c"], &[["a", "b", "c"]]).unwrap();
        let c = Configuration::from_points(&[
            ("a", Point3::new(0.0, 0.0, 0.0)),
            ("b", Point3::new(1.0, 0.0, 0.0)),
            ("c", Point3::new(0.0, 1.0, 0.0)),
        ]);
        assert!(matches!(dihedral(&m, &c, "a", "b", &tol()), Err(MeshError::BoundaryEdge(..))));
    }

    #[test]
    fn convex_solids_do_not_self_intersect() {
        for (m, c) in [tetrahedron(), octahedron(), cube()] {
            assert!(self_intersections(&m, &c, &tol()).unwrap().is_empty());
        }
    }

    #[test]
    fn crossing_faces_are_reported() {
        let (m, mut c) = octahedron();
        // drag the north pole down through the south pyramid
        c.insert("n", Point3::new(2.0, 2.0, -0.5));
        let r = self_intersections(&m, &c, &tol()).unwrap();
        assert!(!r.is_empty());
        let pairs = r.face_pairs();
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
    }

    #[test]
    fn split_edge_counts() {
        let (t, c) = tetrahedron();
        let (s, sc) = split_edge(&t, &c, "a", "b", 0.5, "m").unwrap();
        let r = validate(&s);
        assert_eq!((r.vertices, r.edges, r.faces), (5, 9, 6));
        assert!(r.is_sphere());
        let m = sc.get("m").unwrap();
        assert!((m - nalgebra::center(&c.get("a").unwrap(), &c.get("b").unwrap())).norm() < 1e-15);
        assert!(matches!(split_edge(&t, &c, "a", "b", 1.0, "m"), Err(MeshError::SplitParameter(_))));
        assert!(matches!(split_edge(&t, &c, "a", "b", 0.0, "m"), Err(MeshError::SplitParameter(_))));
    }

    #[test]
    fn equator_cut_gives_two_pyramids() {
        let (o, c) = octahedron();
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        let (a, b) = cut_along_quad(&o, &c, &quad).unwrap();
        assert_eq!(a.faces.len(), 4);
        assert_eq!(b.faces.len(), 4);
        assert_eq!(a.interior_vertices(), vec!["n".to_string()]);
        assert_eq!(b.interior_vertices(), vec!["s".to_string()]);
    }

    #[test]
    fn cut_rejects_bad_quads() {
        let (o, c) = octahedron();
        let rep = SurfaceQuad::of_vertices(["e0", "e1", "e0", "e1"]);
        assert!(matches!(cut_along_quad(&o, &c, &rep), Err(MeshError::DegenerateQuad(_))));
        // e0 and e2 share no face
        let bad = SurfaceQuad::of_vertices(["e0", "e2", "n", "e1"]);
        assert!(matches!(cut_along_quad(&o, &c, &bad), Err(MeshError::NotCofacial(..))));
    }

    #[test]
    fn on_edge_anchors_are_materialised() {
        let (o, c) = octahedron();
        // quad through a point on edge n-e0: m, e1, s, e3 ... replace e0 by m
        let quad = SurfaceQuad::new([
            Anchor::OnEdge { a: "n".into(), b: "e0".into(), t: 0.5, label: "m".into() },
            Anchor::vertex("e1"),
            Anchor::vertex("s"),
            Anchor::vertex("e3"),
        ]);
        let (a, b) = cut_along_quad(&o, &c, &quad).unwrap();
        assert_eq!(a.faces.len() + b.faces.len(), 10);
        assert!(a.contains_vertex("m") && b.contains_vertex("m"));
    }

    #[test]
    fn glue_round_trip() {
        let (o, c) = octahedron();
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        let (a, b) = cut_along_quad(&o, &c, &quad).unwrap();
        let corr = ["e0", "e1", "e2", "e3"].map(|l| (l.to_string(), l.to_string()));
        let (m, mc) = glue(&a, &b, &corr, &tol()).unwrap();
        assert_eq!(m.canonical_faces(), o.canonical_faces());
        assert_eq!(mc, c);
    }

    #[test]
    fn glue_rejects_orientation_flip() {
        let (o, c) = octahedron();
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        let (a, b) = cut_along_quad(&o, &c, &quad).unwrap();
        // mirror correspondence e1 <-> e3 reverses the seam direction
        let corr = [("e0", "e0"), ("e1", "e3"), ("e2", "e2"), ("e3", "e1")].map(|(x, y)| (x.to_string(), y.to_string()));
        assert!(matches!(glue(&a, &b, &corr, &tol()), Err(MeshError::CapsIncompatible(_))));
    }

    #[test]
    fn glue_rejects_length_mismatch() {
        let (o, c) = octahedron();
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        let (a, mut b) = cut_along_quad(&o, &c, &quad).unwrap();
        b.config.insert("e0", Point3::new(1.5, 0.0, 0.0));
        let corr = ["e0", "e1", "e2", "e3"].map(|l| (l.to_string(), l.to_string()));
        assert!(matches!(glue(&a, &b, &corr, &tol()), Err(MeshError::CapsIncompatible(_))));
    }

    fn skew_octahedron() -> (TriMesh, Configuration) {
        // equator with a half-turn symmetry about z, apexes off-axis
        let (m, _) = octahedron();
        let c = Configuration::from_points(&[
            ("e0", Point3::new(1.2, 0.1, -0.2)),
            ("e1", Point3::new(0.2, 1.0, 0.25)),
            ("e2", Point3::new(-1.2, -0.1, -0.2)),
            ("e3", Point3::new(-0.2, -1.0, 0.25)),
            ("n", Point3::new(0.2, 0.1, 1.3)),
            ("s", Point3::new(-0.1, 0.15, -1.1)),
        ]);
        solids::orient_outward(m, c)
    }

    #[test]
    fn twist_preserves_lengths_and_is_involutive() {
        let (m, c) = skew_octahedron();
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        let s = cut_and_twist(&m, &c, &quad, &CapSelector::Smaller, &tol()).unwrap();
        assert!(validate(&s.mesh).is_sphere());
        let before = edge_lengths(&m, &c).unwrap();
        let after = edge_lengths(&s.mesh, &s.config).unwrap();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
        let (old, new) = s.renamed.iter().next().unwrap();
        assert!((s.config.get(new).unwrap() - c.get(old).unwrap()).norm() > 0.1);

        let moved = s.renamed.values().next().unwrap().clone();
        let again = cut_and_twist(&s.mesh, &s.config, &quad, &CapSelector::Containing(moved.clone()), &tol()).unwrap();
        let original = s.renamed.keys().next().unwrap().clone();
        let back = again.renamed[&moved].clone();
        let p = again.config.get(&back).unwrap();
        assert!((p - c.get(&original).unwrap()).norm() < 1e-12);
        for l in ["e0", "e1", "e2", "e3"] {
            assert_eq!(again.config.get(l), c.get(l));
        }
    }

    #[test]
    fn twist_rejects_asymmetric_quad() {
        let (m, mut c) = skew_octahedron();
        c.insert("e0", Point3::new(1.5, 0.3, -0.2));
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        assert!(matches!(
            cut_and_twist(&m, &c, &quad, &CapSelector::Smaller, &tol()),
            Err(MeshError::Symmetry(SymmetryError::NotRotational(..)))
        ));
        assert!(matches!(
            cut_and_reflect(&m, &c, &quad, &CapSelector::Smaller, &tol()),
            Err(MeshError::Symmetry(SymmetryError::NotReflective(..)))
        ));
    }

    #[test]
    fn reflect_is_involutive() {
        // kite equator: e0, e2 on the mirror y = 0, e1 <-> e3
        let (m, _) = octahedron();
        let c = Configuration::from_points(&[
            ("e0", Point3::new(1.0, 0.0, 0.1)),
            ("e1", Point3::new(0.1, 0.9, -0.2)),
            ("e2", Point3::new(-1.3, 0.0, 0.0)),
            ("e3", Point3::new(0.1, -0.9, -0.2)),
            ("n", Point3::new(0.2, 0.3, 1.2)),
            ("s", Point3::new(-0.1, -0.2, -1.0)),
        ]);
        let (m, c) = solids::orient_outward(m, c);
        let quad = SurfaceQuad::of_vertices(["e0", "e1", "e2", "e3"]);
        let s = cut_and_reflect(&m, &c, &quad, &CapSelector::Containing("n".into()), &tol()).unwrap();
        assert!(validate(&s.mesh).is_sphere());
        let n2 = &s.renamed["n"];
        let p = s.config.get(n2).unwrap();
        let q = c.get("n").unwrap();
        assert!((p.y + q.y).abs() < 1e-12 && (p.x - q.x).abs() < 1e-12);
        let again = cut_and_reflect(&s.mesh, &s.config, &quad, &CapSelector::Containing(n2.clone()), &tol()).unwrap();
        let back = again.config.get(&again.renamed[n2]).unwrap();
        assert!((back - q).norm() < 1e-12);
        assert!((signed_volume(&again.mesh, &again.config).unwrap() - signed_volume(&m, &c).unwrap()).abs() < 1e-12);
    }
}
