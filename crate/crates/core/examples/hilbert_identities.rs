// The periodic Hilbert transform on trigonometric modes and its algebraic
// identities, measured at n = 256.

use vort1d::spectral::{hilbert, make_grid, SpectralField};

fn main() {
    let g = make_grid(256).expect("valid grid");
    let theta = 0.7;
    let mut worst: f64 = 0.0;
    for k in 1..=64 {
        let k = k as f64;
        let s = SpectralField::from_fn(&g, |x| (k * x + theta).sin());
        let c = SpectralField::from_fn(&g, |x| (k * x + theta).cos());
        // H sin = -cos, H cos = sin
        worst = worst.max(hilbert(&s).add(&c).max_abs());
        worst = worst.max(hilbert(&c).sub(&s).max_abs());
    }
    println!("max error of H on sin/cos modes, k <= 64: {worst:.2e}");

    let v = SpectralField::from_fn(&g, |x| x.sin() + 0.5 * (3.0 * x + 1.0).cos() + 0.2 * (7.0 * x).sin() + 2.0);
    let hv = hilbert(&v);
    let involution = hilbert(&hv).add(&v).map(|y| y - v.mean()).max_abs();
    println!("H(Hv) = -(v - mean v):           {involution:.2e}");
    let lhs = hilbert(&v.sub(&SpectralField::constant(&g, v.mean())).mul(&hv));
    let rhs = hv.mul(&hv).sub(&v.map(|y| y - v.mean()).map(|y| y * y)).scale(0.5);
    println!("H(v Hv) = ((Hv)^2 - v^2)/2:      {:.2e}", lhs.sub(&rhs).max_abs());
    println!("H(const) = {}", hilbert(&SpectralField::constant(&g, 3.0)).max_abs());
}
