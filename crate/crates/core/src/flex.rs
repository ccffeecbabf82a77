//! Bar-and-joint view of a triangulated surface: residuals, rigidity
//! matrix, flex dimension and a predictor-corrector tracer along the
//! one-dimensional solution curve of the edge-length equations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point3, Tolerance, Vec3};
use crate::mesh::{all_dihedrals, fold_sign, intersections_of, triangle_quality, validate, volume_of, Configuration, EdgeKey, FoldSign, MeshError, TriMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlexError {
    #[error("span deficient: configuration does not affinely span 3D")]
    SpanDeficient,
    #[error("not flexible: flex dimension {0} at the start")]
    NotFlexible(i64),
    #[error("corrector failed at the first step")]
    CorrectorFailure,
    #[error("degenerate quadrilateral")]
    DegenerateQuad,
    #[error("gauge vertices are collinear")]
    DegenerateGauge,
    #[error("unknown driving edge `{0}-{1}`")]
    UnknownDriving(String, String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Map edge -> target length, keyed by label pairs.
pub type EdgeLengthTable = BTreeMap<(String, String), f64>;

/// Edge-length constraint system with a fixed gauge.
///
/// The gauge pins `gauge[0]` at the origin, keeps `gauge[1]` on the positive
/// x-axis and `gauge[2]` in the xz-plane with z >= 0.
#[derive(Debug, Clone)]
pub struct Linkage {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub targets: Vec<f64>,
    pub gauge: [usize; 3],
}

impl Linkage {
    /// Edges of `mesh` with the lengths realised by `config`.
    pub fn from_mesh(mesh: &TriMesh, config: &Configuration) -> Result<Self, FlexError> {
        let pts = config.points_for(mesh)?;
        let edges = mesh.edges();
        let targets = edges.iter().map(|&(a, b)| (pts[a] - pts[b]).norm()).collect();
        Self::assemble(mesh, edges, targets, &pts)
    }

    pub fn with_targets(mesh: &TriMesh, config: &Configuration, table: &EdgeLengthTable) -> Result<Self, FlexError> {
        let pts = config.points_for(mesh)?;
        let edges = mesh.edges();
        let mut targets = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            let (la, lb) = (mesh.label(a).to_string(), mesh.label(b).to_string());
            let t = table
                .get(&(la.clone(), lb.clone()))
                .or_else(|| table.get(&(lb.clone(), la.clone())))
                .ok_or(MeshError::NotAnEdge(la, lb))?;
            targets.push(*t);
        }
        Self::assemble(mesh, edges, targets, &pts)
    }

    fn assemble(mesh: &TriMesh, edges: Vec<EdgeKey>, targets: Vec<f64>, pts: &[Point3]) -> Result<Self, FlexError> {
        let gauge = default_gauge(mesh, pts)?;
        Ok(Linkage { labels: mesh.vertices().to_vec(), edges, targets, gauge })
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    /// Longest target length.
    pub fn scale(&self) -> f64 {
        self.targets.iter().copied().fold(0.0, f64::max)
    }

    /// Gauge-free coordinates `(vertex, axis)` in unknown order.
    fn free_coords(&self) -> Vec<(usize, usize)> {
        let [g0, g1, g2] = self.gauge;
        let mut out = Vec::with_capacity(3 * self.num_vertices() - 6);
        for v in 0..self.num_vertices() {
            for c in 0..3 {
                let pinned = v == g0 || (v == g1 && c > 0) || (v == g2 && c == 1);
                if !pinned {
                    out.push((v, c));
                }
            }
        }
        out
    }

    /// Rigid motion of `pts` into the gauge frame.
    pub fn to_gauge(&self, pts: &[Point3]) -> Result<Vec<Point3>, FlexError> {
        let [g0, g1, g2] = self.gauge;
        let o = pts[g0];
        let ex = (pts[g1] - o).try_normalize(0.0).ok_or(FlexError::DegenerateGauge)?;
        let w = pts[g2] - o;
        let ez = (w - ex * w.dot(&ex)).try_normalize(1e-12 * w.norm().max(1.0)).ok_or(FlexError::DegenerateGauge)?;
        let ey = ez.cross(&ex);
        Ok(pts
            .iter()
            .map(|p| {
                let d = p - o;
                Point3::new(d.dot(&ex), d.dot(&ey), d.dot(&ez))
            })
            .collect())
    }
}

fn default_gauge(mesh: &TriMesh, pts: &[Point3]) -> Result<[usize; 3], FlexError> {
    let named = ["B'", "A'", "A"].map(|l| mesh.index_of(l));
    let cand = match named {
        [Some(a), Some(b), Some(c)] => [a, b, c],
        _ => {
            let f = mesh.faces().first().ok_or(FlexError::DegenerateGauge)?;
            *f
        }
    };
    let n = (pts[cand[1]] - pts[cand[0]]).cross(&(pts[cand[2]] - pts[cand[0]]));
    if n.norm() <= 1e-12 * (pts[cand[1]] - pts[cand[0]]).norm_squared().max(1e-300) {
        return Err(FlexError::DegenerateGauge);
    }
    Ok(cand)
}

/// `|p_u - p_v|^2 - L^2` for every edge.
pub fn residual(linkage: &Linkage, pts: &[Point3]) -> Vec<f64> {
    linkage
        .edges
        .iter()
        .zip(&linkage.targets)
        .map(|(&(a, b), l)| (pts[a] - pts[b]).norm_squared() - l * l)
        .collect()
}

/// Largest `| |p_u - p_v| - L |`.
pub fn max_length_error(linkage: &Linkage, pts: &[Point3]) -> f64 {
    linkage
        .edges
        .iter()
        .zip(&linkage.targets)
        .map(|(&(a, b), l)| ((pts[a] - pts[b]).norm() - l).abs())
        .fold(0.0, f64::max)
}

/// E x 3V matrix; row `(u, v)` holds `p_u - p_v` in u's block and
/// `p_v - p_u` in v's.
pub fn rigidity_matrix(edges: &[(usize, usize)], pts: &[Point3]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(edges.len(), 3 * pts.len());
    for (r, &(a, b)) in edges.iter().enumerate() {
        let d = pts[a] - pts[b];
        for c in 0..3 {
            m[(r, 3 * a + c)] = d[c];
            m[(r, 3 * b + c)] = -d[c];
        }
    }
    m
}

fn affine_rank(pts: &[Point3]) -> usize {
    if pts.len() < 2 {
        return 0;
    }
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n;
    let mut m = DMatrix::zeros(pts.len(), 3);
    let mut scale: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let d = p.coords - c;
        scale = scale.max(d.norm());
        for k in 0..3 {
            m[(i, k)] = d[k];
        }
    }
    let sv = m.singular_values();
    sv.iter().filter(|&&s| s > 1e-9 * scale.max(f64::MIN_POSITIVE)).count()
}

fn numerical_rank(m: &DMatrix<f64>, eps_rank: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > eps_rank * top).count()
}

/// `nullity(R) - 6`, the dimension of non-trivial infinitesimal flexes.
pub fn flex_dimension_of(edges: &[(usize, usize)], pts: &[Point3], tol: &Tolerance) -> Result<i64, FlexError> {
    if affine_rank(pts) < 3 {
        return Err(FlexError::SpanDeficient);
    }
    let r = rigidity_matrix(edges, pts);
    let nullity = 3 * pts.len() - numerical_rank(&r, tol.eps_rank);
    Ok(nullity as i64 - 6)
}

pub fn flex_dimension(mesh: &TriMesh, config: &Configuration, tol: &Tolerance) -> Result<i64, FlexError> {
    let pts = config.points_for(mesh)?;
    flex_dimension_of(&mesh.edges(), &pts, tol)
}

/// Degrees of freedom of the closed 4-bar `A B A' B'` modulo rigid motions.
pub fn quad_dof_check(a: &Point3, b: &Point3, a2: &Point3, b2: &Point3, tol: &Tolerance) -> Result<i64, FlexError> {
    let pts = [*a, *b, *a2, *b2];
    if affine_rank(&pts) < 2 {
        return Err(FlexError::DegenerateQuad);
    }
    for i in 0..4 {
        if (pts[i] - pts[(i + 1) % 4]).norm() == 0.0 {
            return Err(FlexError::DegenerateQuad);
        }
    }
    let r = rigidity_matrix(&[(0, 1), (1, 2), (2, 3), (3, 0)], &pts);
    Ok((12 - numerical_rank(&r, tol.eps_rank)) as i64 - 6)
}

/// Quantity followed along a trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Driving {
    /// Interior dihedral angle at an edge.
    Dihedral(String, String),
    /// Distance between two vertices.
    Distance(String, String),
}

impl Driving {
    pub fn name(&self) -> String {
        match self {
            Driving::Dihedral(a, b) => format!("dihedral:{a}-{b}"),
            Driving::Distance(a, b) => format!("distance:{a}-{b}"),
        }
    }

    /// Dihedral at `B-A'` when the mesh has that edge, else at its first
    /// edge.
    pub fn default_for(mesh: &TriMesh) -> Driving {
        if mesh.has_edge("B", "A'") {
            return Driving::Dihedral("B".into(), "A'".into());
        }
        let (a, b) = mesh.edge_labels().into_iter().next().unwrap_or_default();
        Driving::Dihedral(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    SelfIntersection,
    FoldFlat,
    QualityFloor,
    CorrectorFailure,
    ClosedLoop,
    MaxSamples,
}

#[derive(Debug, Clone)]
pub struct FlexOptions {
    pub driving: Option<Driving>,
    /// Initial and maximal step, relative to the longest edge.
    pub step: f64,
    pub max_samples: usize,
    pub stop_on_intersection: bool,
    pub quality_floor: f64,
    /// Largest tangent turn accepted in one step (radians).
    pub max_turn: f64,
    /// Dihedrals closer than this to 0 or 2π count as folded flat.
    pub fold_eps: f64,
    pub tol: Tolerance,
}

impl Default for FlexOptions {
    fn default() -> Self {
        FlexOptions {
            driving: None,
            step: 1.5e-3,
            max_samples: 2000,
            stop_on_intersection: true,
            quality_floor: 1e-3,
            max_turn: 0.3,
            fold_eps: 1e-4,
            tol: Tolerance::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Signed arc position (sum of chord lengths in gauge coordinates).
    pub s: f64,
    pub driving_value: f64,
    pub config: Configuration,
    pub volume: f64,
    pub max_residual: f64,
    pub intersections: usize,
    pub min_quality: f64,
    pub folds: BTreeMap<String, FoldSign>,
    pub dihedrals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexTrajectory {
    pub driving: String,
    pub samples: Vec<Sample>,
    /// Index of the starting configuration in `samples`.
    pub start: usize,
    /// Why marching stopped towards negative and positive `s`.
    pub stops: [StopReason; 2],
}

impl FlexTrajectory {
    pub fn s_range(&self) -> (f64, f64) {
        let s = self.samples.iter().map(|x| x.s);
        (s.clone().fold(f64::INFINITY, f64::min), s.fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|x| x.max_residual).fold(0.0, f64::max)
    }

    /// Edges whose fold sign differs between two samples.
    pub fn fold_sign_changes(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some(first) = self.samples.first() else { return out };
        for e in first.folds.keys() {
            let signs: std::collections::BTreeSet<FoldSign> =
                self.samples.iter().filter_map(|s| s.folds.get(e)).filter(|f| **f != FoldSign::Flat).copied().collect();
            if signs.len() > 1 {
                out.push(e.clone());
            }
        }
        out
    }
}

pub fn edge_name(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}-{b}")
    } else {
        format!("{b}-{a}")
    }
}

/// Predictor-corrector state on the solution curve, in gauge coordinates.
pub struct Tracer<'a> {
    mesh: &'a TriMesh,
    linkage: Linkage,
    free: Vec<(usize, usize)>,
    base: Vec<Point3>,
    u: DVector<f64>,
    t: DVector<f64>,
    scale: f64,
}

impl<'a> Tracer<'a> {
    pub fn new(mesh: &'a TriMesh, config: &Configuration) -> Result<Self, FlexError> {
        let linkage = Linkage::from_mesh(mesh, config)?;
        let pts = linkage.to_gauge(&config.points_for(mesh)?)?;
        let free = linkage.free_coords();
        let u = DVector::from_iterator(free.len(), free.iter().map(|&(v, c)| pts[v][c]));
        let scale = linkage.scale();
        let mut tr = Tracer { mesh, linkage, free, base: pts, u, t: DVector::zeros(0), scale };
        let (t, gap) = tr.tangent_at(&tr.u.clone());
        if !gap {
            return Err(FlexError::NotFlexible(flex_dimension_of(&tr.linkage.edges, &tr.base, &Tolerance::default())?));
        }
        let k = t.iamax();
        tr.t = if t[k] < 0.0 { -t } else { t };
        Ok(tr)
    }

    pub fn linkage(&self) -> &Linkage {
        &self.linkage
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn tangent(&self) -> &DVector<f64> {
        &self.t
    }

    pub fn reverse(&mut self) {
        self.t = -self.t.clone();
    }

    pub fn points(&self) -> Vec<Point3> {
        self.unpack(&self.u)
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::from_mesh_points(self.mesh, &self.points())
    }

    fn unpack(&self, u: &DVector<f64>) -> Vec<Point3> {
        let mut pts = vec![Point3::origin(); self.base.len()];
        // pinned coordinates are zero in the gauge frame
        for (k, &(v, c)) in self.free.iter().enumerate() {
            pts[v][c] = u[k];
        }
        pts
    }

    fn jacobian(&self, pts: &[Point3]) -> DMatrix<f64> {
        let n = self.free.len();
        let mut col = vec![[usize::MAX; 3]; pts.len()];
        for (k, &(v, c)) in self.free.iter().enumerate() {
            col[v][c] = k;
        }
        let rows = self.linkage.edges.len().max(n);
        let mut j = DMatrix::zeros(rows, n);
        for (r, &(a, b)) in self.linkage.edges.iter().enumerate() {
            let d = pts[a] - pts[b];
            for c in 0..3 {
                if col[a][c] != usize::MAX {
                    j[(r, col[a][c])] += 2.0 * d[c];
                }
                if col[b][c] != usize::MAX {
                    j[(r, col[b][c])] -= 2.0 * d[c];
                }
            }
        }
        j
    }

    /// Unit null vector of the Jacobian and whether the null space is
    /// numerically one-dimensional.
    fn tangent_at(&self, u: &DVector<f64>) -> (DVector<f64>, bool) {
        let j = self.jacobian(&self.unpack(u));
        let svd = j.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
        let top = sv.iter().copied().fold(0.0, f64::max);
        let small = order[0];
        let next = sv[order[1]];
        let gap = next > 1e-6 * top && sv[small] < 1e-6 * top.max(1e-300);
        (v_t.row(small).transpose().normalize(), gap)
    }

    fn residual_vec(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(residual(&self.linkage, &self.unpack(u)))
    }

    /// Solve `F(w) = 0, |w - u|^2 = h^2` from the predictor `u + h t`.
    fn correct(&self, h: f64) -> Option<DVector<f64>> {
        let n = self.free.len();
        let m = self.linkage.edges.len();
        let mut w = &self.u + &self.t * h;
        let goal = 1e-13 * self.scale;
        let aug = |w: &DVector<f64>| -> DVector<f64> {
            let f = self.residual_vec(w);
            let mut g = DVector::zeros(m + 1);
            g.rows_mut(0, m).copy_from(&f);
            g[m] = (w - &self.u).norm_squared() - h * h;
            g
        };
        let mut g = aug(&w);
        for _ in 0..25 {
            let pts = self.unpack(&w);
            let mut a = DMatrix::zeros(m + 1, n);
            a.rows_mut(0, m).copy_from(&self.jacobian(&pts).rows(0, m));
            let dw = (&w - &self.u) * 2.0;
            a.row_mut(m).copy_from(&dw.transpose());
            let svd = a.svd(true, true);
            let d = svd.solve(&(-&g), 1e-14).ok()?;
            // backtracking on the residual norm
            let mut lambda = 1.0;
            let g0 = g.norm();
            let mut accepted = false;
            for _ in 0..8 {
                let trial = &w + &d * lambda;
                let gt = aug(&trial);
                if gt.norm() < g0 || gt.norm() < goal * self.scale {
                    w = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return None;
            }
            if d.norm() * lambda < goal {
                break;
            }
        }
        let pts = self.unpack(&w);
        let ok = max_length_error(&self.linkage, &pts) < 1e-11 * self.scale && ((&w - &self.u).norm() - h).abs() < 1e-6 * h + 1e-12 * self.scale;
        ok.then_some(w)
    }

    /// Attempt one step of chord length `h`; on success the tracer moves.
    pub fn try_step(&self, h: f64, max_turn: f64) -> Option<(DVector<f64>, DVector<f64>)> {
        let w = self.correct(h)?;
        let (mut t, gap) = self.tangent_at(&w);
        if !gap {
            return None;
        }
        if t.dot(&(&w - &self.u)) < 0.0 {
            t = -t;
        }
        let turn = t.dot(&self.t).clamp(-1.0, 1.0).acos();
        let chord = ((&w - &self.u) / h).dot(&self.t).clamp(-1.0, 1.0).acos();
        (turn <= max_turn && chord <= max_turn).then_some((w, t))
    }

    /// Move by a chord of length `h` along the current direction.
    pub fn step(&mut self, h: f64) -> Result<(), FlexError> {
        let (w, t) = self.try_step(h, 0.3).ok_or(FlexError::CorrectorFailure)?;
        self.u = w;
        self.t = t;
        Ok(())
    }

    fn accept(&mut self, w: DVector<f64>, t: DVector<f64>) {
        self.u = w;
        self.t = t;
    }
}

struct Probe {
    dihedrals: BTreeMap<EdgeKey, f64>,
    intersections: usize,
    min_quality: f64,
}

fn probe(mesh: &TriMesh, pts: &[Point3], tol: &Tolerance) -> Probe {
    let dihedrals = all_dihedrals(mesh, pts);
    let intersections = intersections_of(mesh.faces(), pts, tol).len();
    let min_quality = mesh
        .faces()
        .iter()
        .map(|f| triangle_quality(&[pts[f[0]], pts[f[1]], pts[f[2]]]))
        .fold(f64::INFINITY, f64::min);
    Probe { dihedrals, intersections, min_quality }
}

fn event(prev: &Probe, next: &Probe, opts: &FlexOptions) -> Option<StopReason> {
    if opts.stop_on_intersection && next.intersections > 0 {
        return Some(StopReason::SelfIntersection);
    }
    if next.min_quality < opts.quality_floor {
        return Some(StopReason::QualityFloor);
    }
    for (e, &a) in &next.dihedrals {
        let b = prev.dihedrals[e];
        if a < opts.fold_eps || a > 2.0 * PI - opts.fold_eps || (a - b).abs() > PI {
            return Some(StopReason::FoldFlat);
        }
    }
    None
}

fn driving_value(mesh: &TriMesh, pts: &[Point3], d: &Driving) -> Result<f64, FlexError> {
    match d {
        Driving::Dihedral(a, b) => {
            let (ia, ib) = (mesh.index_of(a), mesh.index_of(b));
            let (Some(ia), Some(ib)) = (ia, ib) else { return Err(FlexError::UnknownDriving(a.clone(), b.clone())) };
            all_dihedrals(mesh, pts)
                .get(&(ia.min(ib), ia.max(ib)))
                .copied()
                .ok_or_else(|| FlexError::UnknownDriving(a.clone(), b.clone()))
        }
        Driving::Distance(a, b) => {
            let (Some(ia), Some(ib)) = (mesh.index_of(a), mesh.index_of(b)) else {
                return Err(FlexError::UnknownDriving(a.clone(), b.clone()));
            };
            Ok((pts[ia] - pts[ib]).norm())
        }
    }
}

fn make_sample(mesh: &TriMesh, linkage: &Linkage, pts: &[Point3], s: f64, driving: &Driving, closed: bool, p: &Probe, tol: &Tolerance) -> Result<Sample, FlexError> {
    let mut folds = BTreeMap::new();
    let mut dihedrals = BTreeMap::new();
    for (&(a, b), &ang) in &p.dihedrals {
        let name = edge_name(mesh.label(a), mesh.label(b));
        folds.insert(name.clone(), fold_sign(ang, tol));
        dihedrals.insert(name, ang);
    }
    Ok(Sample {
        s,
        driving_value: driving_value(mesh, pts, driving)?,
        config: Configuration::from_mesh_points(mesh, pts),
        volume: if closed { volume_of(mesh.faces(), pts) } else { 0.0 },
        max_residual: max_length_error(linkage, pts),
        intersections: p.intersections,
        min_quality: p.min_quality,
        folds,
        dihedrals,
    })
}

/// March along the flex in both directions from `config`.
pub fn continue_flex(mesh: &TriMesh, config: &Configuration, opts: &FlexOptions) -> Result<FlexTrajectory, FlexError> {
    let tol = &opts.tol;
    let dim = flex_dimension(mesh, config, tol)?;
    if dim < 1 {
        return Err(FlexError::NotFlexible(dim));
    }
    let driving = opts.driving.clone().unwrap_or_else(|| Driving::default_for(mesh));
    let closed = validate(mesh).closed;
    let mut tracer = Tracer::new(mesh, config)?;
    let u0 = tracer.u.clone();
    let t0 = tracer.t.clone();
    let h0 = opts.step * tracer.scale;
    let h_min = 1e-6 * h0;
    let start_pts = tracer.points();
    let start_probe = probe(mesh, &start_pts, tol);
    let start = make_sample(mesh, &tracer.linkage, &start_pts, 0.0, &driving, closed, &start_probe, tol)?;

    let mut halves: [Vec<Sample>; 2] = [Vec::new(), Vec::new()];
    let mut stops = [StopReason::MaxSamples; 2];
    let mut looped = false;
    for (side, sign) in [(1usize, 1.0f64), (0usize, -1.0f64)] {
        if looped {
            stops[side] = StopReason::ClosedLoop;
            break;
        }
        tracer.u = u0.clone();
        tracer.t = &t0 * sign;
        let mut prev = probe(mesh, &start_pts, tol);
        let mut h = h0;
        let mut s = 0.0;
        let mut first = true;
        let mut pending: Option<StopReason> = None;
        let reason = loop {
            if halves[side].len() >= opts.max_samples {
                break StopReason::MaxSamples;
            }
            match tracer.try_step(h, opts.max_turn) {
                None => {
                    if h < h_min {
                        if first && pending.is_none() {
                            return Err(FlexError::CorrectorFailure);
                        }
                        break pending.unwrap_or(StopReason::CorrectorFailure);
                    }
                    h *= 0.5;
                }
                Some((w, t)) => {
                    let pts = tracer.unpack(&w);
                    let p = probe(mesh, &pts, tol);
                    if let Some(r) = event(&prev, &p, opts) {
                        pending = Some(r);
                        if h < h_min {
                            break r;
                        }
                        h *= 0.5;
                        continue;
                    }
                    pending = None;
                    s += sign * h;
                    let closes = halves[side].len() >= 8 && (&w - &u0).norm() < 0.5 * h0;
                    tracer.accept(w, t);
                    halves[side].push(make_sample(mesh, &tracer.linkage, &pts, s, &driving, closed, &p, tol)?);
                    prev = p;
                    first = false;
                    if closes {
                        looped = true;
                        break StopReason::ClosedLoop;
                    }
                    h = (1.5 * h).min(h0);
                }
            }
        };
        stops[side] = reason;
    }
    let [neg, pos] = halves;
    let mut samples: Vec<Sample> = neg.into_iter().rev().collect();
    let start_index = samples.len();
    samples.push(start);
    samples.extend(pos);
    Ok(FlexTrajectory { driving: driving.name(), samples, start: start_index, stops })
}

/// Configuration at arc position `s` of a trajectory, re-solved from the
/// nearest sample towards the start.
pub fn sample_at(mesh: &TriMesh, traj: &FlexTrajectory, s: f64) -> Option<Configuration> {
    let (lo, hi) = traj.s_range();
    if !(s >= lo && s <= hi) {
        return None;
    }
    // last sample not beyond s, walking outward from the start
    let k = if s >= 0.0 {
        traj.samples.iter().rposition(|x| x.s <= s && x.s >= 0.0)?
    } else {
        traj.samples.iter().position(|x| x.s >= s && x.s <= 0.0)?
    };
    let base = &traj.samples[k];
    let h = (s - base.s).abs();
    if h == 0.0 {
        return Some(base.config.clone());
    }
    let toward = if s >= 0.0 { k + 1 } else { k.checked_sub(1)? };
    let next = traj.samples.get(toward)?;
    let mut tr = Tracer::new(mesh, &base.config).ok()?;
    let a = tr.points();
    let b = tr.linkage.to_gauge(&next.config.points_for(mesh).ok()?).ok()?;
    let dir: f64 = tr.free.iter().enumerate().map(|(k, &(v, c))| (b[v][c] - a[v][c]) * tr.t[k]).sum();
    if dir < 0.0 {
        tr.reverse();
    }
    tr.step(h).ok()?;
    Some(tr.configuration())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RangeMetric {
    /// Largest total variation of any single interior dihedral.
    #[default]
    MaxSwing,
    /// Total variation of the trajectory's driving value.
    Driving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub metric: RangeMetric,
    pub value: f64,
    /// Edge realising the value (max-swing) or the driving quantity.
    pub edge: String,
    pub s_interval: (f64, f64),
    pub driving_interval: (f64, f64),
    pub stops: [StopReason; 2],
    pub samples: usize,
}

/// Embedded, non-degenerate run of samples around the start.
pub fn embedded_segment(traj: &FlexTrajectory, quality_floor: f64) -> std::ops::RangeInclusive<usize> {
    let good = |i: usize| traj.samples[i].intersections == 0 && traj.samples[i].min_quality >= quality_floor;
    let mut lo = traj.start;
    let mut hi = traj.start;
    while lo > 0 && good(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < traj.samples.len() && good(hi + 1) {
        hi += 1;
    }
    lo..=hi
}

fn total_variation(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

pub fn range_from_trajectory(traj: &FlexTrajectory, metric: RangeMetric, quality_floor: f64) -> RangeReport {
    let seg = embedded_segment(traj, quality_floor);
    let part = &traj.samples[seg.clone()];
    let (value, edge) = match metric {
        RangeMetric::Driving => (total_variation(part.iter().map(|s| s.driving_value)), traj.driving.clone()),
        RangeMetric::MaxSwing => {
            let mut best = (0.0, String::new());
            for e in traj.samples[traj.start].dihedrals.keys() {
                let tv = total_variation(part.iter().map(|s| s.dihedrals[e]));
                if tv > best.0 {
                    best = (tv, e.clone());
                }
            }
            best
        }
    };
    let dv = part.iter().map(|s| s.driving_value);
    let dmin = dv.clone().fold(f64::INFINITY, f64::min);
    let dmax = dv.fold(f64::NEG_INFINITY, f64::max);
    let stops = [
        if *seg.start() == 0 { traj.stops[0] } else { StopReason::SelfIntersection },
        if *seg.end() + 1 == traj.samples.len() { traj.stops[1] } else { StopReason::SelfIntersection },
    ];
    RangeReport {
        metric,
        value,
        edge,
        s_interval: (part.first().map_or(0.0, |s| s.s), part.last().map_or(0.0, |s| s.s)),
        driving_interval: (dmin, dmax),
        stops,
        samples: part.len(),
    }
}

/// Trace the flex from `config` and measure its range of motion.
pub fn range_of_motion(mesh: &TriMesh, config: &Configuration, opts: &FlexOptions, metric: RangeMetric) -> Result<(FlexTrajectory, RangeReport), FlexError> {
    let traj = continue_flex(mesh, config, opts)?;
    let r = range_from_trajectory(&traj, metric, opts.quality_floor);
    Ok((traj, r))
}
