// Compare the growth of ‖u_x‖∞ between a = 1 and a = -1 from the same data.
// Usage: `cargo run --release --example fig3_growth [n] [t_end]`.

use vort1d::diagnostics::{linear_growth_fit, record};
use vort1d::models::ModelSpec;
use vort1d::studies::fig2_state;
use vort1d::timestepper::{advance, StepControls};

fn slope(a: f64, n: usize, t_end: f64) -> f64 {
    let spec = ModelSpec::mhd1d(a);
    let s0 = fig2_state(n).expect("grid");
    let mut series = vec![(0.0, record(&s0, &spec, None).linf_ux)];
    advance(&s0, &spec, &StepControls::cfl(0.5, t_end), |s| {
        series.push((s.time, record(s, &spec, None).linf_ux));
        Ok(())
    })
    .expect("run completes");
    linear_growth_fit(&series).expect("enough samples").slope
}

fn main() {
    let mut args = std::env::args().skip(1);
    let n = args.next().map_or(256, |a| a.parse().expect("n"));
    let t_end = args.next().map_or(4.0, |a| a.parse().expect("t_end"));
    let (s2, s3) = (slope(1.0, n, t_end), slope(-1.0, n, t_end));
    println!("envelope slope of linf_ux: a = 1 -> {s2:.4}, a = -1 -> {s3:.4}");
}
