// Constantin–Lax–Majda model (OSW with a = 0) from ω₀ = cos x, compared
// with its closed-form solution, which blows up at t = 2.

use vort1d::models::{MhdState, ModelSpec};
use vort1d::spectral::{make_grid, SpectralField};
use vort1d::studies::clm_cos_exact;
use vort1d::timestepper::{advance, StepControls};

fn main() {
    let g = make_grid(256).expect("grid");
    let spec = ModelSpec::osw(0.0);
    let mut s = MhdState::scalar(SpectralField::from_fn(&g, f64::cos), 0.0);
    for t in [0.5, 1.0, 1.5] {
        s = advance(&s, &spec, &StepControls::fixed(1e-3, t), |_| Ok(())).expect("smooth phase").state;
        let exact = SpectralField::from_fn(&g, |x| clm_cos_exact(t, x));
        println!(
            "t {t}: |ω|∞ = {:8.4} (exact {:8.4}), error {:.2e}",
            s.omega_m.max_abs(),
            exact.max_abs(),
            s.omega_m.max_abs_diff(&exact)
        );
    }
}
