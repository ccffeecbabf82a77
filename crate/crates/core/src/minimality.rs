//! Sphere triangulations on few vertices: generation by vertex splitting,
//! degree-3 reduction, the degree identity and the flexibility candidates.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::flex::{flex_dimension_of, FlexError};
use crate::geom::{Point3, Tolerance};
use crate::mesh::TriMesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimalityError {
    #[error("n_max = {0} outside 4..=10")]
    OutOfRange(usize),
    #[error("triangulation has a degree-3 vertex; reduce it first")]
    Unreduced,
    #[error("identity only classified for at most 7 vertices, got {0}")]
    TooLarge(usize),
}

/// Oriented triangulation of the sphere on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanarTriangulation {
    pub n: usize,
    pub faces: Vec<[usize; 3]>,
}

impl PlanarTriangulation {
    pub fn tetrahedron() -> Self {
        PlanarTriangulation { n: 4, faces: vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]] }
    }

    pub fn octahedron() -> Self {
        // equator 0 1 2 3, poles 4 and 5
        let mut faces = Vec::new();
        for i in 0..4 {
            let j = (i + 1) % 4;
            faces.push([4, i, j]);
            faces.push([5, j, i]);
        }
        PlanarTriangulation { n: 6, faces }
    }

    pub fn bipyramid(k: usize) -> Self {
        let mut faces = Vec::new();
        for i in 0..k {
            let j = (i + 1) % k;
            faces.push([k, i, j]);
            faces.push([k + 1, j, i]);
        }
        PlanarTriangulation { n: k + 2, faces }
    }

    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.faces.iter().flat_map(|f| (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3])))).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for (a, b) in self.edges() {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// Sorted degree sequence.
    pub fn degree_profile(&self) -> Vec<usize> {
        let mut d = self.degrees();
        d.sort_unstable();
        d
    }

    /// Neighbours of every vertex in rotation order.
    pub fn rotation_system(&self) -> Vec<Vec<usize>> {
        let mut next: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); self.n];
        for f in &self.faces {
            for k in 0..3 {
                next[f[k]].insert(f[(k + 1) % 3], f[(k + 2) % 3]);
            }
        }
        next.iter()
            .map(|m| {
                let Some((&start, _)) = m.iter().next() else { return Vec::new() };
                let mut cyc = vec![start];
                let mut cur = m[&start];
                while cur != start && cyc.len() <= m.len() {
                    cyc.push(cur);
                    cur = m[&cur];
                }
                cyc
            })
            .collect()
    }

    /// Closed, every vertex link a single cycle, `V - E + F = 2`.
    pub fn is_valid(&self) -> bool {
        let rot = self.rotation_system();
        let e = self.edges().len();
        let degs = self.degrees();
        self.n >= 4
            && self.n + self.faces.len() == e + 2
            && 2 * e == 3 * self.faces.len()
            && rot.iter().zip(&degs).all(|(r, d)| r.len() == *d && *d >= 3)
    }

    /// Lexicographically least BFS code over all rooted, oriented starts;
    /// equal for mirror images.
    pub fn canonical_code(&self) -> Vec<usize> {
        let rot = self.rotation_system();
        let mirrored: Vec<Vec<usize>> = rot.iter().map(|r| r.iter().rev().copied().collect()).collect();
        let mut best: Option<Vec<usize>> = None;
        for system in [&rot, &mirrored] {
            for u in 0..self.n {
                for &v in &system[u] {
                    let code = bfs_code(system, u, v);
                    if best.as_ref().map_or(true, |b| code < *b) {
                        best = Some(code);
                    }
                }
            }
        }
        best.unwrap_or_default()
    }

    pub fn to_mesh(&self) -> TriMesh {
        let labels: Vec<String> = (0..self.n).map(|i| format!("v{i}")).collect();
        TriMesh::from_indexed(labels, self.faces.clone()).expect("valid triangulation")
    }

    /// Same triangulation with vertex `i` renamed `perm[i]`.
    fn relabeled(&self, perm: &[usize]) -> Self {
        PlanarTriangulation { n: self.n, faces: self.faces.iter().map(|f| f.map(|v| perm[v])).collect() }
    }
}

fn bfs_code(rot: &[Vec<usize>], root: usize, first: usize) -> Vec<usize> {
    let n = rot.len();
    let mut num = vec![usize::MAX; n];
    let mut entry = vec![usize::MAX; n];
    let mut order = vec![root];
    num[root] = 1;
    entry[root] = first;
    let mut code = Vec::with_capacity(7 * n);
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        let r = &rot[x];
        let k = r.iter().position(|&w| w == entry[x]).unwrap();
        for i in 0..r.len() {
            let w = r[(k + i) % r.len()];
            if num[w] == usize::MAX {
                num[w] = order.len() + 1;
                entry[w] = x;
                order.push(w);
            }
            code.push(num[w]);
        }
        code.push(0);
    }
    code
}

/// Split vertex `v` between neighbours `rot[v][i]` and `rot[v][j]`: the
/// new vertex takes the faces of the fan from `i` to `j`.
fn split_vertex(t: &PlanarTriangulation, rot: &[Vec<usize>], v: usize, i: usize, j: usize) -> PlanarTriangulation {
    let w = &rot[v];
    let d = w.len();
    let nv = t.n;
    let mut moved: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut k = i;
    while k != j {
        moved.insert((w[k], w[(k + 1) % d]));
        k = (k + 1) % d;
    }
    let mut faces = Vec::with_capacity(t.faces.len() + 2);
    for f in &t.faces {
        let pos = f.iter().position(|&x| x == v);
        match pos {
            Some(p) if moved.contains(&(f[(p + 1) % 3], f[(p + 2) % 3])) => {
                let mut g = *f;
                g[p] = nv;
                faces.push(g);
            }
            _ => faces.push(*f),
        }
    }
    faces.push([v, w[i], nv]);
    faces.push([nv, w[j], v]);
    PlanarTriangulation { n: nv + 1, faces }
}

/// All sphere triangulations with `4..=n_max` vertices up to isomorphism
/// (including mirror images), indexed by vertex count.
pub fn enumerate_triangulations(n_max: usize) -> Result<BTreeMap<usize, Vec<PlanarTriangulation>>, MinimalityError> {
    if !(4..=10).contains(&n_max) {
        return Err(MinimalityError::OutOfRange(n_max));
    }
    let mut out = BTreeMap::new();
    let mut level = vec![PlanarTriangulation::tetrahedron()];
    out.insert(4, level.clone());
    for n in 5..=n_max {
        let mut seen: BTreeMap<Vec<usize>, PlanarTriangulation> = BTreeMap::new();
        for t in &level {
            let rot = t.rotation_system();
            for v in 0..t.n {
                let d = rot[v].len();
                for i in 0..d {
                    for j in 0..d {
                        if i == j {
                            continue;
                        }
                        let s = split_vertex(t, &rot, v, i, j);
                        debug_assert!(s.is_valid());
                        seen.entry(s.canonical_code()).or_insert(s);
                    }
                }
            }
        }
        level = seen.into_values().collect();
        out.insert(n, level.clone());
    }
    Ok(out)
}

/// Remove degree-3 vertices (lowest label first) until none remain or the
/// tetrahedron is reached. Labels are compacted afterwards.
pub fn reduce_degree3(t: &PlanarTriangulation) -> PlanarTriangulation {
    let mut cur = t.clone();
    while cur.n > 4 {
        let degs = cur.degrees();
        let Some(v) = (0..cur.n).find(|&v| degs[v] == 3) else { break };
        let fan: Vec<[usize; 3]> = cur.faces.iter().filter(|f| f.contains(&v)).copied().collect();
        let rot = &cur.rotation_system()[v];
        let mut faces: Vec<[usize; 3]> = cur.faces.iter().filter(|f| !f.contains(&v)).copied().collect();
        debug_assert_eq!(fan.len(), 3);
        faces.push([rot[0], rot[1], rot[2]]);
        let perm: Vec<usize> = (0..cur.n).map(|x| if x > v { x - 1 } else { x }).collect();
        cur = PlanarTriangulation { n: cur.n - 1, faces }.relabeled(&perm);
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub v4: usize,
    pub v5: usize,
    pub v6: usize,
    /// `2 V4 + V5 == 12`
    pub identity_holds: bool,
    /// `(V4, V5)` is `(5, 2)` or `(6, 0)`.
    pub admissible_profile: bool,
}

pub fn degree_identity_check(t: &PlanarTriangulation) -> Result<DegreeReport, MinimalityError> {
    let degs = t.degrees();
    if degs.iter().any(|&d| d == 3) {
        return Err(MinimalityError::Unreduced);
    }
    if t.n > 7 {
        return Err(MinimalityError::TooLarge(t.n));
    }
    let count = |k: usize| degs.iter().filter(|&&d| d == k).count();
    let (v4, v5, v6) = (count(4), count(5), count(6));
    Ok(DegreeReport {
        v4,
        v5,
        v6,
        identity_holds: 2 * v4 + v5 == 12 && v4 + v5 + v6 == t.n,
        admissible_profile: matches!((v4, v5), (5, 2) | (6, 0)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub label: String,
    pub triangulation: PlanarTriangulation,
    pub reduced: PlanarTriangulation,
    pub tents: usize,
}

fn reduced_name(r: &PlanarTriangulation) -> String {
    let code = r.canonical_code();
    if code == PlanarTriangulation::octahedron().canonical_code() {
        "octahedron".into()
    } else if code == PlanarTriangulation::bipyramid(5).canonical_code() {
        "pentagonal bipyramid".into()
    } else {
        format!("{}-vertex core", r.n)
    }
}

/// Triangulations whose degree-3 reduction is not the tetrahedron.
pub fn flexibility_candidates(n_max: usize) -> Result<Vec<Candidate>, MinimalityError> {
    let all = enumerate_triangulations(n_max)?;
    let mut out = Vec::new();
    for ts in all.values() {
        for t in ts {
            let r = reduce_degree3(t);
            if r.n == 4 {
                continue;
            }
            let tents = t.n - r.n;
            let base = reduced_name(&r);
            let label = match tents {
                0 => base,
                1 => format!("{base}+tent"),
                k => format!("{base}+{k} tents"),
            };
            out.push(Candidate { label, triangulation: t.clone(), reduced: r, tents });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityProbe {
    pub trials: usize,
    pub min_flex_dimension: i64,
    pub max_flex_dimension: i64,
}

/// Flex dimension at random Gaussian configurations.
pub fn generic_rigidity_probe(t: &PlanarTriangulation, trials: usize, seed: u64, tol: &Tolerance) -> Result<RigidityProbe, FlexError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = t.edges().into_iter().collect();
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for _ in 0..trials {
        let pts: Vec<Point3> = (0..t.n)
            .map(|_| {
                let mut c = [0.0; 3];
                for x in &mut c {
                    *x = StandardNormal.sample(&mut rng);
                }
                Point3::new(c[0], c[1], c[2])
            })
            .collect();
        let d = flex_dimension_of(&edges, &pts, tol)?;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok(RigidityProbe { trials, min_flex_dimension: lo, max_flex_dimension: hi })
}
