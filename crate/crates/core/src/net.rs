//! Unfolding a closed mesh into a planar net, and SVG output.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flex::edge_name;
use crate::geom::Tolerance;
use crate::io::TrajectoryDoc;
use crate::mesh::{all_dihedrals, fold_sign, validate, Configuration, FoldSign, MeshError, TriMesh};

type P2 = Vector2<f64>;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("mesh must be a closed triangulated surface")]
    NotClosed,
    #[error("selected dual edges do not span all faces ({placed} of {faces} reached)")]
    Disconnected { placed: usize, faces: usize },
    #[error("faces {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldTag {
    Mountain,
    Valley,
    ScoreBoth,
}

impl FoldTag {
    /// SVG stroke class.
    pub fn stroke_class(&self) -> &'static str {
        match self {
            FoldTag::Mountain => "solid",
            FoldTag::Valley => "dashed",
            FoldTag::ScoreBoth => "dotted",
        }
    }
}

/// Spanning tree of the dual graph used for the layout.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeSelector {
    BreadthFirstFrom(usize),
    DepthFirstFrom(usize),
    /// Explicit dual edges, rooted at the first face of the first pair.
    Edges(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedFace {
    pub face: usize,
    pub labels: [String; 3],
    pub corners: [[f64; 2]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetEdge {
    pub edge: String,
    pub tag: FoldTag,
    /// One segment for a fold, two for a cut edge.
    pub segments: Vec<[[f64; 2]; 2]>,
    /// Shared by the two halves of a cut edge.
    pub color_key: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLayout {
    pub faces: Vec<PlacedFace>,
    pub edges: Vec<NetEdge>,
    /// Pairs of placed faces whose interiors overlap.
    pub overlaps: Vec<(usize, usize)>,
}

impl NetLayout {
    pub fn score_both(&self) -> Vec<&str> {
        self.edges.iter().filter(|e| e.tag == FoldTag::ScoreBoth).map(|e| e.edge.as_str()).collect()
    }
}

fn third(f: &[usize; 3], a: usize, b: usize) -> usize {
    f.iter().copied().find(|&x| x != a && x != b).unwrap()
}

/// Apex of a triangle over base `pa pb` with sides `da`, `db`, on the left
/// (`left = true`) or right of `pa -> pb`.
fn place(pa: P2, pb: P2, da: f64, db: f64, left: bool) -> P2 {
    let d = (pb - pa).norm();
    let e = (pb - pa) / d;
    let n = Vector2::new(-e.y, e.x);
    let x = (da * da - db * db + d * d) / (2.0 * d);
    let y = (da * da - x * x).max(0.0).sqrt();
    pa + e * x + n * if left { y } else { -y }
}

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a - o).perp(&(b - o))
}

/// Interiors overlap: no edge of either triangle separates them by more
/// than `-eps`.
fn overlap(t: &[P2; 3], u: &[P2; 3], eps: f64) -> bool {
    let sep = |a: &[P2; 3], b: &[P2; 3]| {
        let s = cross(a[0], a[1], a[2]).signum();
        (0..3).any(|i| {
            let (p, q) = (a[i], a[(i + 1) % 3]);
            let len = (q - p).norm();
            b.iter().all(|&x| s * cross(p, q, x) / len <= eps)
        })
    };
    !sep(t, u) && !sep(u, t)
}

pub fn unfold(
    mesh: &TriMesh,
    config: &Configuration,
    selector: &TreeSelector,
    trajectory: Option<&TrajectoryDoc>,
    tol: &Tolerance,
) -> Result<NetLayout, NetError> {
    let rep = validate(mesh);
    if !rep.closed || !rep.manifold {
        return Err(NetError::NotClosed);
    }
    let pts = config.points_for(mesh)?;
    let faces = mesh.faces();
    let nf = faces.len();
    let ef = mesh.edge_faces();
    let mut dual: Vec<Vec<(usize, (usize, usize))>> = vec![Vec::new(); nf];
    for (e, fs) in &ef {
        dual[fs[0]].push((fs[1], *e));
        dual[fs[1]].push((fs[0], *e));
    }
    let (root, allowed): (usize, Option<BTreeSet<(usize, usize)>>) = match selector {
        TreeSelector::BreadthFirstFrom(f) | TreeSelector::DepthFirstFrom(f) => (*f, None),
        TreeSelector::Edges(list) => {
            for &(a, b) in list {
                if !dual.get(a).is_some_and(|d| d.iter().any(|(x, _)| *x == b)) {
                    return Err(NetError::NotAdjacent(a, b));
                }
            }
            let root = list.first().map_or(0, |p| p.0);
            (root, Some(list.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect()))
        }
    };
    let len = |a: usize, b: usize| (pts[a] - pts[b]).norm();
    let mut pos: Vec<Option<[P2; 3]>> = vec![None; nf];
    let mut tree: BTreeSet<(usize, usize)> = BTreeSet::new();
    {
        let f = faces[root];
        let a = Vector2::zeros();
        let b = Vector2::new(len(f[0], f[1]), 0.0);
        let c = place(a, b, len(f[0], f[2]), len(f[1], f[2]), true);
        pos[root] = Some([a, b, c]);
    }
    let depth_first = matches!(selector, TreeSelector::DepthFirstFrom(_));
    let mut queue = VecDeque::from([root]);
    while let Some(p) = if depth_first { queue.pop_back() } else { queue.pop_front() } {
        let mut nbrs = dual[p].clone();
        nbrs.sort();
        for (q, e) in nbrs {
            if pos[q].is_some() || allowed.as_ref().is_some_and(|s| !s.contains(&(p, q))) {
                continue;
            }
            let at = |f: usize, v: usize| pos[f].unwrap()[faces[f].iter().position(|&x| x == v).unwrap()];
            let (pa, pb) = (at(p, e.0), at(p, e.1));
            let pw = at(p, third(&faces[p], e.0, e.1));
            let w = third(&faces[q], e.0, e.1);
            let left = cross(pa, pb, pw) < 0.0;
            let pq = place(pa, pb, len(e.0, w), len(e.1, w), left);
            let fq = faces[q];
            let mut c = [Vector2::zeros(); 3];
            for k in 0..3 {
                c[k] = if fq[k] == e.0 {
                    pa
                } else if fq[k] == e.1 {
                    pb
                } else {
                    pq
                };
            }
            pos[q] = Some(c);
            tree.insert((e.0, e.1));
            queue.push_back(q);
        }
    }
    let placed = pos.iter().filter(|p| p.is_some()).count();
    if placed < nf {
        return Err(NetError::Disconnected { placed, faces: nf });
    }
    let pos: Vec<[P2; 3]> = pos.into_iter().map(Option::unwrap).collect();

    let changing: BTreeSet<String> = trajectory.map(|t| t.fold_sign_changes().into_iter().collect()).unwrap_or_default();
    let dihedrals = all_dihedrals(mesh, &pts);
    let mut edges = Vec::new();
    let mut color = 0;
    for (e, fs) in &ef {
        let name = edge_name(mesh.label(e.0), mesh.label(e.1));
        let tag = if changing.contains(&name) {
            FoldTag::ScoreBoth
        } else {
            match fold_sign(dihedrals[e], tol) {
                FoldSign::Valley => FoldTag::Valley,
                _ => FoldTag::Mountain,
            }
        };
        let seg = |f: usize| {
            let i = faces[f].iter().position(|&x| x == e.0).unwrap();
            let j = faces[f].iter().position(|&x| x == e.1).unwrap();
            [[pos[f][i].x, pos[f][i].y], [pos[f][j].x, pos[f][j].y]]
        };
        if tree.contains(e) {
            edges.push(NetEdge { edge: name, tag, segments: vec![seg(fs[0])], color_key: None });
        } else {
            edges.push(NetEdge { edge: name, tag, segments: vec![seg(fs[0]), seg(fs[1])], color_key: Some(color) });
            color += 1;
        }
    }
    let scale = pts.iter().map(|p| p.coords.norm()).fold(0.0, f64::max).max(1.0);
    let mut overlaps = Vec::new();
    for i in 0..nf {
        for j in i + 1..nf {
            if overlap(&pos[i], &pos[j], 1e-9 * scale) {
                overlaps.push((i, j));
            }
        }
    }
    let placed_faces = (0..nf)
        .map(|f| PlacedFace {
            face: f,
            labels: mesh.face_labels(f).map(str::to_string),
            corners: pos[f].map(|p| [p.x, p.y]),
        })
        .collect();
    Ok(NetLayout { faces: placed_faces, edges, overlaps })
}

/// First overlap-free layout among breadth-first then depth-first trees,
/// trying `preferred` as root before the other faces. Falls back to the
/// layout with fewest overlaps.
pub fn unfold_auto(
    mesh: &TriMesh,
    config: &Configuration,
    preferred: usize,
    trajectory: Option<&TrajectoryDoc>,
    tol: &Tolerance,
) -> Result<NetLayout, NetError> {
    let nf = mesh.faces().len();
    let roots = std::iter::once(preferred).chain((0..nf).filter(|&f| f != preferred));
    let mut best: Option<NetLayout> = None;
    for root in roots {
        for sel in [TreeSelector::BreadthFirstFrom(root), TreeSelector::DepthFirstFrom(root)] {
            let net = unfold(mesh, config, &sel, trajectory, tol)?;
            if net.overlaps.is_empty() {
                return Ok(net);
            }
            if best.as_ref().is_none_or(|b| net.overlaps.len() < b.overlaps.len()) {
                best = Some(net);
            }
        }
    }
    best.ok_or(NetError::NotClosed)
}

const PALETTE: [&str; 10] = ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324", "#469990", "#808000"];

pub fn export_svg(net: &NetLayout) -> String {
    let all = net.faces.iter().flat_map(|f| f.corners.iter());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in all {
        x0 = x0.min(c[0]);
        y0 = y0.min(c[1]);
        x1 = x1.max(c[0]);
        y1 = y1.max(c[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let k = 800.0 / span;
    let m = 20.0;
    let tx = |p: &[f64; 2]| (m + (p[0] - x0) * k, m + (y1 - p[1]) * k);
    let (w, h) = ((x1 - x0) * k + 2.0 * m, (y1 - y0) * k + 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#);
    let _ = writeln!(
        s,
        "<style>.face{{fill:#f4f1ea;stroke:none}} .solid{{stroke-width:2}} .dashed{{stroke-width:2;stroke-dasharray:8 5}} .dotted{{stroke-width:2;stroke-dasharray:1 4;stroke-linecap:round}} text{{font:12px sans-serif;fill:#555}}</style>"
    );
    for f in &net.faces {
        let pts: Vec<String> = f.corners.iter().map(|c| {
            let (x, y) = tx(c);
            format!("{x:.2},{y:.2}")
        }).collect();
        let _ = writeln!(s, r#"<polygon class="face" data-face="{}" points="{}"/>"#, f.face, pts.join(" "));
    }
    for e in &net.edges {
        let stroke = e.color_key.map_or("#000000", |c| PALETTE[c % PALETTE.len()]);
        for seg in &e.segments {
            let (ax, ay) = tx(&seg[0]);
            let (bx, by) = tx(&seg[1]);
            let _ = writeln!(
                s,
                r#"<line class="{}" data-edge="{}" stroke="{stroke}" x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}"/>"#,
                e.tag.stroke_class(),
                e.edge
            );
        }
    }
    for f in &net.faces {
        let c = f.corners.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / 3.0, a[1] + p[1] / 3.0]);
        for (l, p) in f.labels.iter().zip(&f.corners) {
            let q = [p[0] + 0.15 * (c[0] - p[0]), p[1] + 0.15 * (c[1] - p[1])];
            let (x, y) = tx(&q);
            let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="middle">{l}</text>"#);
        }
    }
    s.push_str("</svg>\n");
    s
}
