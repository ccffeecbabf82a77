//! Trace the flex of both parameter sets and compare their range of motion.

use polyflex::constructions::{build_dodecahedron, DodecParams};
use polyflex::flex::{range_from_trajectory, range_of_motion, FlexOptions, RangeMetric};
use polyflex::geom::Tolerance;

fn main() {
    let tol = Tolerance::default();
    let opts = FlexOptions::default();
    let mut ranges = Vec::new();
    for (name, params) in [("standard", DodecParams::standard()), ("alternative", DodecParams::alternative())] {
        let d = build_dodecahedron(&params, &tol).unwrap();
        let (traj, swing) = range_of_motion(&d.mesh, &d.config, &opts, RangeMetric::MaxSwing).unwrap();
        let driving = range_from_trajectory(&traj, RangeMetric::Driving, opts.quality_floor);
        let vols: Vec<f64> = traj.samples.iter().map(|s| s.volume).collect();
        let mean = vols.iter().sum::<f64>() / vols.len() as f64;
        let sd = (vols.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vols.len() as f64).sqrt();
        println!("{name}:");
        println!("  {} samples, stops {:?}, max residual {:.1e}", traj.samples.len(), traj.stops, traj.max_residual());
        println!("  volume {mean:.6} +- {sd:.1e}");
        println!("  max dihedral swing {:.4} rad at {}", swing.value, swing.edge);
        println!("  {} swing {:.4} rad", traj.driving, driving.value);
        println!("  fold sign changes at {:?}", traj.fold_sign_changes());
        ranges.push(swing.value);
    }
    println!("range ratio {:.3}", ranges[1] / ranges[0]);
}
