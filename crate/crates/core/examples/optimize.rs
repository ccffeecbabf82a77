//! Short random search for parameters with a larger range of motion.
//! Pass a budget as the first argument (default 40).

use polyflex::constructions::DodecParams;
use polyflex::optimize::{evaluate, search_logged, EvalOptions, SearchOptions};

fn main() {
    let budget = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let seed = DodecParams::standard();
    let r0 = evaluate(&seed);
    println!("seed range {:.4}, clearance {:.4}, quality {:.4}", r0.range, r0.min_clearance, r0.min_triangle_quality);
    let opts = SearchOptions { budget, seed: 7, ..Default::default() };
    let out = search_logged(&seed, &opts, &EvalOptions::default(), |t| {
        if t.accepted {
            println!("  trial {:>4}: range {:.4}", t.trial, t.result.range);
        }
    })
    .unwrap();
    println!("best range {:.4} after {} trials", out.result.range, out.trials);
    println!("l = {:?}", out.params.l);
    println!("h = {:?}", out.params.h);
}
