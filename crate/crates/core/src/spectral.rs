//! Fourier-collocation substrate on the periodic interval `[-π, π)`.
//!
//! Coefficients follow `f̂(k) = (1/n) Σ_j f(x_j) e^{-ik x_j}` with reconstruction
//! `f(x) = Σ_k f̂(k) e^{ikx}`, `k = -n/2+1 ..= n/2`. They are stored in FFT order:
//! slot `i` holds mode `i` for `i <= n/2` and mode `i - n` above that.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform collocation grid with a reusable transform plan.
pub struct Grid {
    n: usize,
    nodes: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

/// Builds a shareable grid of `n` points, `x_j = -π + 2πj/n`.
pub fn make_grid(n: usize) -> Result<Arc<Grid>> {
    Grid::new(n).map(Arc::new)
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::GridSize(n));
        }
        let mut planner = FftPlanner::new();
        let nodes = (0..n).map(|j| -PI + TAU * j as f64 / n as f64).collect();
        Ok(Grid {
            n,
            nodes,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Highest resolved mode magnitude, `n/2`.
    pub fn k_max(&self) -> usize {
        self.n / 2
    }

    /// Signed wavenumber held in FFT slot `i`; the Nyquist slot reports `+n/2`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        // (-1)^k shifts the DFT origin from x = 0 to the first node x = -π.
        let scale = 1.0 / self.n as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            let sign = if i % 2 == 0 { scale } else { -scale };
            *c *= sign;
        }
        buf
    }

    fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c } else { -c })
            .collect();
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Gauge fixing the free constant when recovering a velocity from its vorticity.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
#[serde(tag = "kind", content = "point", rename_all = "kebab-case")]
pub enum Gauge {
    #[default]
    ZeroMean,
    /// Velocity vanishes at the given point of `[-π, π)`.
    PointValue(f64),
}

impl Gauge {
    pub fn point_value(x: f64) -> Result<Self> {
        if !(-PI..PI).contains(&x) {
            return Err(Error::InvalidArgument(format!(
                "gauge point {x} lies outside [-π, π)"
            )));
        }
        Ok(Gauge::PointValue(x))
    }
}

/// Exponential filter `σ(η) = exp(-alpha·η^order)` with `η = |k|/k_max`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FilterSpec {
    pub enabled: bool,
    pub alpha: f64,
    pub order: u32,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            enabled: true,
            alpha: 36.0,
            order: 36,
        }
    }
}

impl FilterSpec {
    pub fn disabled() -> Self {
        FilterSpec {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "filter alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.order == 0 || !self.order.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "filter order must be a positive even integer, got {}",
                self.order
            )));
        }
        Ok(())
    }

    pub fn sigma(&self, eta: f64) -> f64 {
        (-self.alpha * eta.powi(self.order as i32)).exp()
    }
}

/// A real periodic field: nodal values with lazily computed Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl SpectralField {
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            values,
            coeffs: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        SpectralField {
            grid: Arc::clone(grid),
            values,
            coeffs: OnceLock::new(),
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Builds a field from coefficients in FFT order. The coefficients must be
    /// conjugate symmetric; the nodal values keep only the real part.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: coeffs.len(),
            });
        }
        let values = grid.synthesize(&coeffs);
        Ok(SpectralField {
            grid: Arc::clone(grid),
            values,
            coeffs: OnceLock::from(coeffs),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| self.grid.transform(&self.values))
    }

    /// Coefficient of signed mode `k`, zero outside the resolved band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.len() as i64;
        if k <= -n / 2 || k > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs()[k.rem_euclid(n) as usize]
    }

    pub fn same_grid(&self, other: &SpectralField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.len() == other.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, quantity: &str, time: f64) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NumericalFailure {
                quantity: quantity.to_string(),
                time,
            })
        }
    }

    /// Mean value over the period (the `k = 0` coefficient).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Periodic trapezoid quadrature `(2π/n) Σ f(x_j)`.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Maximum of `|f|` on a grid refined by `factor`, via zero-padded synthesis.
    pub fn max_abs_oversampled(&self, factor: usize) -> Result<f64> {
        if factor <= 1 {
            return Ok(self.max_abs());
        }
        let fine = Grid::new(self.len() * factor)?;
        let mut padded = vec![Complex64::new(0.0, 0.0); fine.len()];
        let n = self.len();
        for (i, &c) in self.coeffs().iter().enumerate() {
            let k = self.grid.wavenumber(i);
            if self.grid.is_nyquist(i) {
                // split the Nyquist mode evenly between ±n/2 so the padded field stays real
                padded[n / 2] += c * 0.5;
                padded[fine.len() - n / 2] += c * 0.5;
            } else {
                padded[k.rem_euclid(fine.len() as i64) as usize] = c;
            }
        }
        let values = fine.synthesize(&padded);
        Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Applies a Fourier multiplier `m(k)` to every resolved mode.
    pub fn apply_multiplier(&self, multiplier: impl Fn(i64) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, &c)| c * multiplier(self.grid.wavenumber(i)))
            .collect();
        SpectralField::from_coeffs(&self.grid, coeffs).expect("coefficient length matches grid")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        SpectralField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// Pointwise combination on the nodes. Panics if the grids differ in size.
    pub fn zip_with(&self, other: &SpectralField, f: impl Fn(f64, f64) -> f64) -> SpectralField {
        assert!(
            self.same_grid(other),
            "pointwise operation on fields of size {} and {}",
            self.len(),
            other.len()
        );
        SpectralField {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &SpectralField) -> SpectralField {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        self.map(|v| s * v)
    }

    /// Inner product by nodal quadrature, `(2π/n) Σ f g`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }
}

/// Periodic Hilbert transform, multiplier `-i·sgn(k)`. The Nyquist mode is dropped.
pub fn hilbert(f: &SpectralField) -> SpectralField {
    let k_max = f.grid().k_max() as i64;
    f.apply_multiplier(|k| {
        if k == 0 || k == k_max {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -(k.signum() as f64))
        }
    })
}

/// Spectral derivative, multiplier `ik`. The Nyquist mode is dropped.
pub fn derivative(f: &SpectralField) -> SpectralField {
    let k_max = f.grid().k_max() as i64;
    f.apply_multiplier(|k| {
        if k == k_max {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k as f64)
        }
    })
}

/// Second derivative, multiplier `-k²`, Nyquist dropped.
pub fn second_derivative(f: &SpectralField) -> SpectralField {
    let k_max = f.grid().k_max() as i64;
    f.apply_multiplier(|k| {
        if k == k_max {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-((k * k) as f64), 0.0)
        }
    })
}

/// Recovers `p` from `p_x = H w`: `p̂(k) = -ŵ(k)/|k|` for `k ≠ 0`, constant fixed by the gauge.
pub fn velocity_from_vorticity(w: &SpectralField, gauge: Gauge) -> SpectralField {
    let p = w.apply_multiplier(|k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / k.unsigned_abs() as f64, 0.0)
        }
    });
    match gauge {
        Gauge::ZeroMean => p,
        Gauge::PointValue(x0) => {
            let shift = interpolate(&p, x0);
            let mut coeffs = p.coeffs().to_vec();
            coeffs[0] -= shift;
            SpectralField::from_coeffs(w.grid(), coeffs).expect("coefficient length matches grid")
        }
    }
}

/// Scales each mode by `σ(|k|/k_max)`. A disabled spec returns the field unchanged.
pub fn exp_filter(f: &SpectralField, spec: &FilterSpec) -> SpectralField {
    if !spec.enabled {
        return f.clone();
    }
    let k_max = f.grid().k_max() as f64;
    f.apply_multiplier(|k| Complex64::new(spec.sigma(k.unsigned_abs() as f64 / k_max), 0.0))
}

/// Reduces `x` into `[-π, π)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    // rem_euclid may round up to exactly TAU
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Periodic distance `min(|x-y|, 2π-|x-y|)`.
#[inline]
pub fn periodic_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Evaluates the trigonometric interpolant of `f` at an arbitrary point.
pub fn interpolate(f: &SpectralField, x: f64) -> f64 {
    eval_coeffs(f.coeffs(), x)
}

/// Evaluates `Re Σ_k ĉ(k) e^{ikx}` for FFT-ordered coefficients of a real field.
pub fn eval_coeffs(coeffs: &[Complex64], x: f64) -> f64 {
    let n = coeffs.len();
    let half = n / 2;
    let x = wrap(x);
    let step = Complex64::from_polar(1.0, x);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate().take(half).skip(1) {
        // re-anchor the recurrence periodically to bound drift
        if k % 64 == 0 {
            phase = Complex64::from_polar(1.0, k as f64 * x);
        } else {
            phase *= step;
        }
        acc += (c * phase).re;
    }
    let nyquist = coeffs[half] * Complex64::from_polar(1.0, half as f64 * x);
    coeffs[0].re + 2.0 * acc + nyquist.re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<Grid> {
        make_grid(n).unwrap()
    }

    #[test]
    fn grid_nodes_are_uniform_from_minus_pi() {
        let g = grid(8);
        let expected: Vec<f64> = (0..8).map(|j| -PI + j as f64 * PI / 4.0).collect();
        for (a, b) in g.nodes().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(g.k_max(), 4);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_rejects_odd_and_tiny_sizes() {
        let err = Grid::new(7).unwrap_err();
        assert!(err.to_string().contains("grid size must be even"));
        assert!(Grid::new(2).is_err());
        assert!(Grid::new(0).is_err());
        assert_eq!(make_grid(12800).unwrap().len(), 12800);
    }

    #[test]
    fn coefficient_convention_matches_definition() {
        let g = grid(16);
        let f = SpectralField::from_fn(&g, |x| 3.0 + 2.0 * (2.0 * x).cos() - (3.0 * x).sin());
        assert!((f.coeff(0).re - 3.0).abs() < 1e-14);
        assert!((f.coeff(2) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((f.coeff(-2) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // sin(3x) = (e^{3ix} - e^{-3ix}) / 2i
        assert!((f.coeff(3) - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        assert!((f.coeff(-3) - f.coeff(3).conj()).norm() < 1e-15);
    }

    #[test]
    fn round_trip_reproduces_values() {
        let g = grid(64);
        let f = SpectralField::from_fn(&g, |x| (x.sin()).exp());
        let back = SpectralField::from_coeffs(&g, f.coeffs().to_vec()).unwrap();
        let scale = f.max_abs();
        assert!(f.max_abs_diff(&back) <= 1e-12 * scale);
    }

    #[test]
    fn hilbert_of_trig_modes() {
        let g = grid(64);
        for k in 1..=16 {
            let kf = k as f64;
            let s = hilbert(&SpectralField::from_fn(&g, |x| (kf * x).sin()));
            let c = hilbert(&SpectralField::from_fn(&g, |x| (kf * x).cos()));
            let neg_cos = SpectralField::from_fn(&g, |x| -(kf * x).cos());
            let sin = SpectralField::from_fn(&g, |x| (kf * x).sin());
            assert!(s.max_abs_diff(&neg_cos) < 1e-13);
            assert!(c.max_abs_diff(&sin) < 1e-13);
        }
        let h = hilbert(&SpectralField::constant(&g, 4.2));
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn derivative_examples() {
        let g = grid(32);
        let d = derivative(&SpectralField::from_fn(&g, f64::sin));
        assert!(d.max_abs_diff(&SpectralField::from_fn(&g, f64::cos)) < 1e-13);
        let d4 = derivative(&SpectralField::from_fn(&g, |x| (4.0 * x).cos()));
        let expected = SpectralField::from_fn(&g, |x| -4.0 * (4.0 * x).sin());
        assert!(d4.max_abs_diff(&expected) < 1e-12);
        assert!(derivative(&SpectralField::constant(&g, 3.0)).max_abs() < 1e-15);
    }

    #[test]
    fn derivative_is_spectrally_accurate() {
        let mut last = f64::INFINITY;
        let error = |n: usize| {
            let g = grid(n);
            let f = SpectralField::from_fn(&g, |x| x.sin().exp());
            let exact = SpectralField::from_fn(&g, |x| x.cos() * x.sin().exp());
            derivative(&f).max_abs_diff(&exact)
        };
        for n in [8, 16, 32] {
            let err = error(n);
            assert!(err < last / 100.0, "n = {n}: {err:e} vs {last:e}");
            last = err;
        }
        assert!(error(64) < 1e-10);
    }

    #[test]
    fn velocity_examples() {
        let g = grid(32);
        let p = velocity_from_vorticity(&SpectralField::from_fn(&g, f64::sin), Gauge::ZeroMean);
        assert!(p.max_abs_diff(&SpectralField::from_fn(&g, |x| -x.sin())) < 1e-14);

        let p = velocity_from_vorticity(
            &SpectralField::from_fn(&g, |x| (2.0 * x).cos()),
            Gauge::ZeroMean,
        );
        let expected = SpectralField::from_fn(&g, |x| -(2.0 * x).cos() / 2.0);
        assert!(p.max_abs_diff(&expected) < 1e-14);

        let p = velocity_from_vorticity(
            &SpectralField::from_fn(&g, f64::sin),
            Gauge::point_value(0.0).unwrap(),
        );
        assert!(p.max_abs_diff(&SpectralField::from_fn(&g, |x| -x.sin())) < 1e-14);
    }

    #[test]
    fn point_gauge_vanishes_at_point() {
        let g = grid(64);
        let w = SpectralField::from_fn(&g, |x| (2.0 * x).cos() + 0.3 * (5.0 * x + 1.0).sin());
        let gauge = Gauge::point_value(0.7).unwrap();
        let p = velocity_from_vorticity(&w, gauge);
        assert!(interpolate(&p, 0.7).abs() < 1e-14);
        assert!(Gauge::point_value(PI).is_err());
    }

    #[test]
    fn filter_examples() {
        let spec = FilterSpec::default();
        assert_eq!(spec.sigma(0.0), 1.0);
        let at_kmax = spec.sigma(1.0);
        assert!((at_kmax - (-36.0f64).exp()).abs() < 1e-30);
        assert!((at_kmax - 2.319522830243569e-16).abs() < 1e-28);

        let g = grid(16);
        let f = SpectralField::from_fn(&g, |x| 2.0 + x.cos() + (8.0 * (x + PI)).cos());
        let filtered = exp_filter(&f, &spec);
        assert!((filtered.coeff(0).re - 2.0).abs() < 1e-15);
        assert!((filtered.coeff(8).re - at_kmax).abs() < 1e-15);

        let off = exp_filter(&f, &FilterSpec::disabled());
        assert_eq!(off.values(), f.values());
    }

    #[test]
    fn interpolation_examples() {
        let g = grid(32);
        let f = SpectralField::from_fn(&g, |x| x.sin() + 0.25 * (3.0 * x).cos() + 1.0);
        for (j, &x) in g.nodes().iter().enumerate() {
            assert!((interpolate(&f, x) - f.values()[j]).abs() < 1e-12);
        }
        let s = SpectralField::from_fn(&g, f64::sin);
        assert!((interpolate(&s, 0.5) - 0.479425538604203).abs() < 1e-14);
        assert!((interpolate(&f, 0.3) - interpolate(&f, 0.3 + TAU)).abs() < 1e-13);
    }

    #[test]
    fn oversampled_max_of_band_limited_field() {
        let g = grid(8);
        // peaks of sin(3x + 0.4) fall between the nodes of an 8-point grid
        let f = SpectralField::from_fn(&g, |x| (3.0 * x + 0.4).sin());
        let fine = f.max_abs_oversampled(16).unwrap();
        assert!(f.max_abs() < 0.93);
        assert!((fine - 1.0).abs() < 1e-3);
    }

    #[test]
    fn wrap_and_distance() {
        assert!((wrap(PI) + PI).abs() < 1e-15);
        assert!((wrap(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((periodic_distance(-3.0, 3.0) - (TAU - 6.0)).abs() < 1e-12);
        assert_eq!(periodic_distance(0.5, 0.5), 0.0);
    }
}
