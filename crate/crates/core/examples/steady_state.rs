// For a = 1 a single-mode pair Ω, ω with the same wavenumber is an exact
// steady state. Integrate it and report how far it drifts.

use vort1d::studies::check_steady;

fn main() {
    let drift = check_steady(256, 0.5, 5.0).expect("steady run");
    println!("Ω = sin(2x+0.3), ω = 0.5 sin(2x+1.1), n = 256, t = 5: max drift {drift:.2e}");
}
