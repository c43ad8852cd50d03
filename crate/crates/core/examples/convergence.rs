// Temporal and spatial self-convergence on the fig2 data.

use vort1d::spectral::FilterSpec;
use vort1d::studies::{spatial_convergence, temporal_convergence};

fn main() {
    let h = 0.5 / 256.0;
    println!("time (n = 256, t = 0.5)");
    for r in temporal_convergence(256, 0.5, &[4.0 * h, 2.0 * h, h], FilterSpec::default()).expect("runs") {
        println!("  dt {:.3e}  error {:.3e}  order {}", r.param, r.error, r.order.map_or("-".into(), |o| format!("{o:.3}")));
    }
    println!("space (dt = 1e-3, t = 0.25, reference n = 512)");
    for r in spatial_convergence(&[32, 64, 128], 512, 0.25, 1e-3).expect("runs") {
        println!("  n {:4}  error {:.3e}", r.param, r.error);
    }
}
