//! Versioned JSON documents for meshes, parameters and trajectories, and
//! OBJ export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::DodecParams;
use crate::flex::FlexTrajectory;
use crate::geom::Point3;
use crate::mesh::{Configuration, FoldSign, MeshError, TriMesh};

pub const FORMAT: &str = "polyflex/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported format tag {0:?}, expected \"polyflex/1\"")]
    Format(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn format_tag() -> String {
    FORMAT.to_string()
}

fn check_tag(tag: &str) -> Result<(), IoError> {
    if tag == FORMAT {
        Ok(())
    } else {
        Err(IoError::Format(tag.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub xyz: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDoc {
    #[serde(default = "format_tag")]
    pub format: String,
    pub vertices: Vec<VertexRecord>,
    pub faces: Vec<[String; 3]>,
}

impl MeshDoc {
    pub fn new(mesh: &TriMesh, config: &Configuration) -> Result<Self, IoError> {
        let pts = config.points_for(mesh)?;
        let vertices = mesh.vertices().iter().zip(&pts).map(|(id, p)| VertexRecord { id: id.clone(), xyz: [p.x, p.y, p.z] }).collect();
        let faces = (0..mesh.faces().len()).map(|f| mesh.face_labels(f).map(str::to_string)).collect();
        Ok(MeshDoc { format: format_tag(), vertices, faces })
    }

    pub fn into_parts(&self) -> Result<(TriMesh, Configuration), IoError> {
        check_tag(&self.format)?;
        let ids: Vec<&str> = self.vertices.iter().map(|v| v.id.as_str()).collect();
        let faces: Vec<[&str; 3]> = self.faces.iter().map(|f| [f[0].as_str(), f[1].as_str(), f[2].as_str()]).collect();
        let mesh = TriMesh::new(&ids, &faces)?;
        let config = Configuration::from_points(
            &self.vertices.iter().map(|v| (v.id.as_str(), Point3::new(v.xyz[0], v.xyz[1], v.xyz[2]))).collect::<Vec<_>>(),
        );
        Ok((mesh, config))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    #[serde(default = "format_tag")]
    pub format: String,
    pub l: [f64; 5],
    pub h: [f64; 3],
    #[serde(default)]
    pub base_shape: Option<f64>,
}

impl From<&DodecParams> for ParamsDoc {
    fn from(p: &DodecParams) -> Self {
        ParamsDoc { format: format_tag(), l: p.l, h: p.h, base_shape: p.base_shape }
    }
}

impl ParamsDoc {
    pub fn params(&self) -> Result<DodecParams, IoError> {
        check_tag(&self.format)?;
        Ok(DodecParams { l: self.l, h: self.h, base_shape: self.base_shape })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub s: f64,
    pub config: Configuration,
    pub volume: f64,
    pub max_residual: f64,
    pub intersections: usize,
    pub folds: BTreeMap<String, FoldSign>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDoc {
    #[serde(default = "format_tag")]
    pub format: String,
    pub driving: String,
    pub samples: Vec<SampleRecord>,
}

impl From<&FlexTrajectory> for TrajectoryDoc {
    fn from(t: &FlexTrajectory) -> Self {
        TrajectoryDoc {
            format: format_tag(),
            driving: t.driving.clone(),
            samples: t
                .samples
                .iter()
                .map(|s| SampleRecord {
                    s: s.s,
                    config: s.config.clone(),
                    volume: s.volume,
                    max_residual: s.max_residual,
                    intersections: s.intersections,
                    folds: s.folds.clone(),
                })
                .collect(),
        }
    }
}

impl TrajectoryDoc {
    /// Edges whose fold sign is mountain somewhere and valley elsewhere.
    pub fn fold_sign_changes(&self) -> Vec<String> {
        let mut seen: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
        for s in &self.samples {
            for (e, f) in &s.folds {
                let m = seen.entry(e).or_default();
                match f {
                    FoldSign::Mountain => m.0 = true,
                    FoldSign::Valley => m.1 = true,
                    FoldSign::Flat => {}
                }
            }
        }
        seen.into_iter().filter(|(_, (a, b))| *a && *b).map(|(e, _)| e.to_string()).collect()
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

pub fn mesh_to_json(mesh: &TriMesh, config: &Configuration) -> Result<String, IoError> {
    Ok(to_json(&MeshDoc::new(mesh, config)?))
}

pub fn mesh_from_json(s: &str) -> Result<(TriMesh, Configuration), IoError> {
    let doc: MeshDoc = serde_json::from_str(s)?;
    doc.into_parts()
}

pub fn params_to_json(p: &DodecParams) -> String {
    to_json(&ParamsDoc::from(p))
}

pub fn params_from_json(s: &str) -> Result<DodecParams, IoError> {
    let doc: ParamsDoc = serde_json::from_str(s)?;
    doc.params()
}

pub fn trajectory_to_json(t: &FlexTrajectory) -> String {
    to_json(&TrajectoryDoc::from(t))
}

pub fn trajectory_from_json(s: &str) -> Result<TrajectoryDoc, IoError> {
    let doc: TrajectoryDoc = serde_json::from_str(s)?;
    check_tag(&doc.format)?;
    Ok(doc)
}

/// Wavefront OBJ with 1-based indices in mesh order.
pub fn export_obj(mesh: &TriMesh, config: &Configuration) -> Result<String, IoError> {
    let pts = config.points_for(mesh)?;
    let mut out = String::new();
    for (id, p) in mesh.vertices().iter().zip(&pts) {
        let _ = writeln!(out, "# {id}");
        let _ = writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    Ok(out)
}
