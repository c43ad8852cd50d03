// Log-Lipschitz modulus of velocities recovered from bounded vorticity:
// |p(x) - p(y)| <= c0 ‖Ω‖∞ s(1 - log s). Re-measure c0 on the calibration
// corpus and compare with the frozen constant.

use vort1d::characteristics::{calibrate_c0, calibration_corpus, modulus_ratio, ModulusSpec, CALIBRATED_C0};
use vort1d::diagnostics::PairPlan;
use vort1d::spectral::{make_grid, velocity_from_vorticity, Gauge};
use vort1d::studies::fig2_state;

fn main() {
    let g = make_grid(128).expect("grid");
    let corpus = calibration_corpus(&g);
    let c0 = calibrate_c0(&corpus, &PairPlan::AllNodes);
    println!("measured c0 over {} fields: {c0:.6} (frozen {CALIBRATED_C0})", corpus.len());

    let s = fig2_state(128).expect("grid");
    for (name, w) in [("p from Ω", &s.omega_p), ("m from ω", &s.omega_m)] {
        let v = velocity_from_vorticity(w, Gauge::ZeroMean);
        let spec = ModulusSpec { c0: CALIBRATED_C0, amplitude: w.max_abs() };
        println!("{name}: modulus ratio {:.4}", modulus_ratio(&v, &spec, &PairPlan::AllNodes));
    }
}
