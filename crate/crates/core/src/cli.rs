//! Command-line front end. The `polyflex` binary only forwards to [`run`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::constructions::{build_dodecahedron, DodecParams};
use crate::flex::{continue_flex, flex_dimension, range_from_trajectory, FlexOptions, RangeMetric};
use crate::geom::Tolerance;
use crate::io::{mesh_from_json, params_from_json, params_to_json, to_json, trajectory_from_json, trajectory_to_json, TrajectoryDoc};
use crate::minimality::{degree_identity_check, enumerate_triangulations, flexibility_candidates, reduce_degree3};
use crate::mesh::{self_intersections, signed_volume, validate, MeshReport, TriMesh};
use crate::net::{export_svg, unfold, unfold_auto, TreeSelector};
use crate::optimize::{search_logged, EvalOptions, SearchOptions};
use crate::service::{handle_build, BuildRequest};

#[derive(Debug, Parser)]
#[command(name = "polyflex", version, about = "Build, flex and check flexible polyhedra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArg {
    /// Params JSON file; defaults to the standard parameter set.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Use the larger-range alternative parameter set.
    #[arg(long, conflicts_with = "params")]
    pub alt: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Params to mesh JSON; diagnostics go to stderr (stdout with --out).
    Build {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Params to trajectory JSON.
    Flex {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 2000)]
        max_samples: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Validation, intersections, volume and flex dimension of a mesh file.
    Check { mesh: PathBuf },
    /// SVG net. Uses --mesh/--trajectory when given, else builds from params.
    Net {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Root face of a breadth-first layout; by default the first
        /// overlap-free layout, starting from the tented face.
        #[arg(long)]
        root: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Sphere triangulations up to --max vertices and the flexibility candidates.
    Enumerate {
        #[arg(long = "max", default_value_t = 7)]
        n_max: usize,
        /// Write the adjacency structures as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Random search for a larger range of motion.
    Optimize {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 500)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        floor: f64,
        /// JSON-lines log, one record per trial (appended).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

/// Failure with the pipeline stage it came from.
#[derive(Debug)]
pub struct CliError {
    pub stage: String,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.stage, self.message)
    }
}

fn fail(stage: &str, e: impl ToString) -> CliError {
    CliError { stage: stage.into(), message: e.to_string() }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| fail("io", format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_params(a: &ParamsArg) -> Result<DodecParams, CliError> {
    match (&a.params, a.alt) {
        (Some(p), _) => params_from_json(&read(p)?).map_err(|e| fail("params", e)),
        (None, true) => Ok(DodecParams::alternative()),
        (None, false) => Ok(DodecParams::standard()),
    }
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub validation: MeshReport,
    pub intersections: Vec<(usize, usize)>,
    pub volume: f64,
    pub flex_dimension: i64,
    pub verdict: String,
}

pub fn check_mesh(mesh: &TriMesh, config: &crate::mesh::Configuration) -> Result<CheckReport, CliError> {
    let tol = Tolerance::default();
    let validation = validate(mesh);
    if !validation.is_sphere() {
        return Err(fail("validate", format!("not a closed oriented sphere triangulation: {validation:?}")));
    }
    let inter = self_intersections(mesh, config, &tol).map_err(|e| fail("validate", e))?;
    let k = flex_dimension(mesh, config, &tol).map_err(|e| fail("flex", e))?;
    let verdict = if k == 0 { "rigid (flex dimension 0)".to_string() } else { format!("flexible (flex dimension {k})") };
    Ok(CheckReport {
        validation,
        intersections: inter.face_pairs(),
        volume: signed_volume(mesh, config).map_err(|e| fail("validate", e))?,
        flex_dimension: k,
        verdict,
    })
}

#[derive(Debug, Serialize)]
struct EnumerationReport {
    counts: Vec<(usize, usize)>,
    candidates: Vec<CandidateRecord>,
}

#[derive(Debug, Serialize)]
struct CandidateRecord {
    label: String,
    vertices: usize,
    degrees: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    reduced_vertices: usize,
    identity: Option<crate::minimality::DegreeReport>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let tol = Tolerance::default();
    match cli.command {
        Command::Build { params, out } => {
            let p = load_params(&params)?;
            let r = handle_build(&BuildRequest { params: (&p).into() }).map_err(|e| fail(&e.stage, e.error))?;
            let diag = to_json(&r.diagnostics);
            emit(&out, &to_json(&r.mesh))?;
            if out.is_some() {
                println!("{diag}");
            } else {
                eprintln!("{diag}");
            }
        }
        Command::Flex { params, max_samples, out } => {
            let p = load_params(&params)?;
            let d = build_dodecahedron(&p, &tol).map_err(|e| fail(e.stage(), e))?;
            let opts = FlexOptions { max_samples, ..Default::default() };
            let traj = continue_flex(&d.mesh, &d.config, &opts).map_err(|e| fail("flex", e))?;
            let r = range_from_trajectory(&traj, RangeMetric::MaxSwing, opts.quality_floor);
            emit(&out, &trajectory_to_json(&traj))?;
            eprintln!(
                "{} samples, stops {:?}, max residual {:.3e}, range {:.4} rad ({})",
                traj.samples.len(),
                traj.stops,
                traj.max_residual(),
                r.value,
                r.edge
            );
        }
        Command::Check { mesh } => {
            let (m, c) = mesh_from_json(&read(&mesh)?).map_err(|e| fail("parse", e))?;
            let r = check_mesh(&m, &c)?;
            println!("{}", to_json(&r));
            eprintln!("{}", r.verdict);
        }
        Command::Net { params, mesh, trajectory, root, out } => {
            let (m, c, traj): (TriMesh, _, Option<TrajectoryDoc>) = match mesh {
                Some(path) => {
                    let (m, c) = mesh_from_json(&read(&path)?).map_err(|e| fail("parse", e))?;
                    let t = match trajectory {
                        Some(tp) => Some(trajectory_from_json(&read(&tp)?).map_err(|e| fail("parse", e))?),
                        None => None,
                    };
                    (m, c, t)
                }
                None => {
                    let p = load_params(&params)?;
                    let d = build_dodecahedron(&p, &tol).map_err(|e| fail(e.stage(), e))?;
                    let t = continue_flex(&d.mesh, &d.config, &FlexOptions::default()).map_err(|e| fail("flex", e))?;
                    (d.mesh, d.config, Some(TrajectoryDoc::from(&t)))
                }
            };
            let net = match root {
                Some(r) => unfold(&m, &c, &TreeSelector::BreadthFirstFrom(r), traj.as_ref(), &tol),
                None => unfold_auto(&m, &c, default_root(&m), traj.as_ref(), &tol),
            }
            .map_err(|e| fail("net", e))?;
            for (a, b) in &net.overlaps {
                eprintln!("warning: net faces {a} and {b} overlap");
            }
            emit(&out, &export_svg(&net))?;
        }
        Command::Enumerate { n_max, json } => {
            let all = enumerate_triangulations(n_max).map_err(|e| fail("enumerate", e))?;
            let cands = flexibility_candidates(n_max).map_err(|e| fail("enumerate", e))?;
            for (n, ts) in &all {
                println!("V = {n}: {} triangulations", ts.len());
            }
            println!("{} flexibility candidates:", cands.len());
            for c in &cands {
                println!("  V = {}  {:<28} degrees {:?}", c.triangulation.n, c.label, c.triangulation.degree_profile());
            }
            if let Some(path) = json {
                let report = EnumerationReport {
                    counts: all.iter().map(|(n, t)| (*n, t.len())).collect(),
                    candidates: cands
                        .iter()
                        .map(|c| {
                            let r = reduce_degree3(&c.triangulation);
                            CandidateRecord {
                                label: c.label.clone(),
                                vertices: c.triangulation.n,
                                degrees: c.triangulation.degrees(),
                                adjacency: c.triangulation.rotation_system(),
                                reduced_vertices: r.n,
                                identity: degree_identity_check(&r).ok(),
                            }
                        })
                        .collect(),
                };
                emit(&Some(path), &to_json(&report))?;
            }
        }
        Command::Optimize { params, budget, seed, floor, log, out } => {
            let p = load_params(&params)?;
            let mut sink = match &log {
                Some(path) => Some(
                    fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))?,
                ),
                None => None,
            };
            let opts = SearchOptions { budget, seed, quality_floor: floor, ..Default::default() };
            let res = search_logged(&p, &opts, &EvalOptions::default(), |rec| {
                if let Some(f) = sink.as_mut() {
                    let _ = writeln!(f, "{}", serde_json::to_string(rec).expect("serializable"));
                }
            })
            .map_err(|e| fail("optimize", e))?;
            eprintln!(
                "range {:.4} -> {:.4} ({} of {} proposals accepted)",
                res.seed_result.range, res.result.range, res.accepted, res.trials
            );
            emit(&out, &params_to_json(&res.params))?;
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| fail("serve", e))?;
            eprintln!("listening on http://{addr}");
            rt.block_on(crate::service::serve(&addr)).map_err(|e| fail("serve", e))?;
        }
    }
    Ok(())
}

/// Face holding the tent apex `T` if there is one.
fn default_root(m: &TriMesh) -> usize {
    m.index_of("T").and_then(|t| m.faces().iter().position(|f| f.contains(&t))).unwrap_or(0)
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}
