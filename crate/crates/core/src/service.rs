//! Stateless JSON service over the construction and flex pipeline.

use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};

use crate::constructions::{build_dodecahedron, ConstructionError, DerivedLengths, Dodecahedron};
use crate::flex::{flex_dimension, range_from_trajectory, continue_flex, sample_at, FlexOptions, RangeMetric, RangeReport, StopReason};
use crate::geom::Tolerance;
use crate::io::{MeshDoc, ParamsDoc, SampleRecord, TrajectoryDoc, FORMAT};
use crate::mesh::{all_dihedrals, fold_sign, min_clearance, self_intersections, signed_volume, Configuration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceError {
    #[serde(skip)]
    pub status: u16,
    pub stage: String,
    pub error: String,
}

impl ServiceError {
    fn bad_request(stage: &str, error: impl ToString) -> Self {
        ServiceError { status: 400, stage: stage.into(), error: error.to_string() }
    }

    fn infeasible(stage: &str, error: impl ToString) -> Self {
        ServiceError { status: 422, stage: stage.into(), error: error.to_string() }
    }
}

impl From<ConstructionError> for ServiceError {
    fn from(e: ConstructionError) -> Self {
        let stage = e.stage();
        if matches!(stage, "derive_xy" | "params") {
            ServiceError::bad_request(stage, e)
        } else {
            ServiceError::infeasible(stage, e)
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct BuildRequest {
    pub params: ParamsDoc,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FlexRequest {
    pub params: ParamsDoc,
    #[serde(default)]
    pub max_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SampleRequest {
    pub params: ParamsDoc,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub volume: f64,
    pub tent_volume: f64,
    pub flex_dimension: i64,
    pub intersections: Vec<(usize, usize)>,
    pub min_clearance: f64,
    pub base_shape: f64,
    pub phi: f64,
    pub lengths: DerivedLengths,
    pub tent_face: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildResponse {
    pub format: String,
    pub mesh: MeshDoc,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexResponse {
    #[serde(flatten)]
    pub trajectory: TrajectoryDoc,
    pub start: usize,
    pub stops: [StopReason; 2],
    pub range: RangeReport,
}

fn parse<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::bad_request("request", e))
}

fn dodecahedron(p: &ParamsDoc) -> Result<Dodecahedron, ServiceError> {
    let params = p.params().map_err(|e| ServiceError::bad_request("request", e))?;
    params.validate().map_err(|e| ServiceError::bad_request("params", e))?;
    Ok(build_dodecahedron(&params, &Tolerance::default())?)
}

pub fn handle_build(req: &BuildRequest) -> Result<BuildResponse, ServiceError> {
    let tol = Tolerance::default();
    let d = dodecahedron(&req.params)?;
    let geom = |e: crate::mesh::MeshError| ServiceError::infeasible("mesh", e);
    let report = self_intersections(&d.mesh, &d.config, &tol).map_err(geom)?;
    let diagnostics = Diagnostics {
        vertices: d.mesh.vertices().len(),
        edges: d.mesh.edges().len(),
        faces: d.mesh.faces().len(),
        volume: signed_volume(&d.mesh, &d.config).map_err(geom)?,
        tent_volume: d.tent_volume,
        flex_dimension: flex_dimension(&d.mesh, &d.config, &tol).map_err(|e| ServiceError::infeasible("flex", e))?,
        intersections: report.face_pairs(),
        min_clearance: min_clearance(&d.mesh, &d.config).map_err(geom)?,
        base_shape: d.base_shape,
        phi: d.phi,
        lengths: d.lengths,
        tent_face: d.tent_face.clone(),
    };
    let mesh = MeshDoc::new(&d.mesh, &d.config).map_err(|e| ServiceError::infeasible("mesh", e))?;
    Ok(BuildResponse { format: FORMAT.into(), mesh, diagnostics })
}

fn flex_options(max_samples: Option<usize>) -> FlexOptions {
    let mut opts = FlexOptions::default();
    if let Some(n) = max_samples {
        opts.max_samples = n.max(1);
    }
    opts
}

pub fn handle_flex(req: &FlexRequest) -> Result<FlexResponse, ServiceError> {
    let d = dodecahedron(&req.params)?;
    let opts = flex_options(req.max_samples);
    let traj = continue_flex(&d.mesh, &d.config, &opts).map_err(|e| ServiceError::infeasible("flex", e))?;
    let range = range_from_trajectory(&traj, RangeMetric::default(), opts.quality_floor);
    Ok(FlexResponse { trajectory: TrajectoryDoc::from(&traj), start: traj.start, stops: traj.stops, range })
}

/// Configuration at arc position `s`; positions outside the traced
/// interval are infeasible.
pub fn handle_sample(req: &SampleRequest) -> Result<SampleRecord, ServiceError> {
    let tol = Tolerance::default();
    let d = dodecahedron(&req.params)?;
    let traj = continue_flex(&d.mesh, &d.config, &FlexOptions::default()).map_err(|e| ServiceError::infeasible("flex", e))?;
    let (lo, hi) = traj.s_range();
    let config = sample_at(&d.mesh, &traj, req.s)
        .ok_or_else(|| ServiceError::infeasible("sample", format!("s = {} outside the traced interval [{lo}, {hi}]", req.s)))?;
    describe(&d, config, req.s, &tol)
}

fn describe(d: &Dodecahedron, config: Configuration, s: f64, tol: &Tolerance) -> Result<SampleRecord, ServiceError> {
    let geom = |e: crate::mesh::MeshError| ServiceError::infeasible("mesh", e);
    let pts = config.points_for(&d.mesh).map_err(geom)?;
    let table = d.edge_length_table();
    let max_residual = table
        .iter()
        .map(|((a, b), l)| ((config.get(a).unwrap() - config.get(b).unwrap()).norm() - l).abs())
        .fold(0.0, f64::max);
    let folds = all_dihedrals(&d.mesh, &pts)
        .into_iter()
        .map(|((a, b), ang)| (crate::flex::edge_name(d.mesh.label(a), d.mesh.label(b)), fold_sign(ang, tol)))
        .collect();
    Ok(SampleRecord {
        s,
        volume: signed_volume(&d.mesh, &config).map_err(geom)?,
        max_residual,
        intersections: self_intersections(&d.mesh, &config, tol).map_err(geom)?.len(),
        folds,
        config,
    })
}

fn respond<T: Serialize>(r: Result<T, ServiceError>) -> Response {
    let (status, body) = match r {
        Ok(v) => (StatusCode::OK, serde_json::to_string(&v).expect("serializable")),
        Err(e) => (StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR), serde_json::to_string(&e).expect("serializable")),
    };
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn blocking<T, F>(f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => respond(r),
        Err(e) => respond::<()>(Err(ServiceError { status: 500, stage: "service".into(), error: e.to_string() })),
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/health", get(|| async { respond::<serde_json::Value>(Ok(serde_json::json!({"status": "ok", "format": FORMAT}))) }))
        .route(
            "/build",
            post(|body: Bytes| async move { blocking(move || handle_build(&parse::<BuildRequest>(&body)?)).await }),
        )
        .route(
            "/flex",
            post(|body: Bytes| async move { blocking(move || handle_flex(&parse::<FlexRequest>(&body)?)).await }),
        )
        .route(
            "/sample",
            post(|body: Bytes| async move { blocking(move || handle_sample(&parse::<SampleRequest>(&body)?)).await }),
        )
}

pub async fn serve(addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::DodecParams;

    #[test]
    fn malformed_and_invalid_params_are_bad_requests() {
        assert_eq!(parse::<BuildRequest>(b"{\"params\": 3}").unwrap_err().status, 400);
        let mut p = ParamsDoc::from(&DodecParams::standard());
        p.l[2] = 0.0;
        let e = handle_build(&BuildRequest { params: p }).unwrap_err();
        assert_eq!((e.status, e.stage.as_str()), (400, "params"));
        let mut p = ParamsDoc::from(&DodecParams::standard());
        p.l[1] = 10.0;
        let e = handle_build(&BuildRequest { params: p }).unwrap_err();
        assert_eq!((e.status, e.stage.as_str()), (400, "derive_xy"));
    }

    #[test]
    fn infeasible_base_shape_is_unprocessable() {
        let p = ParamsDoc::from(&DodecParams::standard().with_base_shape(50.0));
        let e = handle_build(&BuildRequest { params: p }).unwrap_err();
        assert_eq!(e.status, 422);
        assert_eq!(e.stage, "build_bricard1");
    }
}
