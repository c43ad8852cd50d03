//! Particle trajectories for the pure transport system, and numerical
//! counterparts of the log-Lipschitz machinery that controls them.
//!
//! For `Ω_t + m Ω_x = 0`, `ω_t + p ω_x = 0` the profiles are carried along
//! `dX/dt = p(t, X)` and `dY/dt = m(t, Y)`: `ω(t, X_t(ξ)) = ω₀(ξ)` and
//! `Ω(t, Y_t(ξ)) = Ω₀(ξ)`. Velocity continuity is measured against the
//! modulus `F(s) = c₀ A s (1 - log s)` and particle separation against the
//! exact solution of `z' = F(z)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::PairPlan;
use crate::error::{Error, Result};
use crate::models::{MhdState, ModelKind, ModelSpec};
use crate::spectral::{eval_coeffs, interpolate, periodic_distance, velocity_from_vorticity, SpectralField};
use crate::timestepper::{advance, StepControls};

/// Velocity as a function of time and position.
pub trait VelocitySampler: Sync {
    fn velocity(&self, t: f64, x: f64) -> Result<f64>;
}

/// Time-independent velocity from a field, sampled by trigonometric interpolation.
#[derive(Debug, Clone)]
pub struct FrozenVelocity {
    coeffs: Vec<Complex64>,
}

impl FrozenVelocity {
    pub fn new(field: &SpectralField) -> Self {
        FrozenVelocity {
            coeffs: field.coeffs().to_vec(),
        }
    }
}

impl VelocitySampler for FrozenVelocity {
    fn velocity(&self, _t: f64, x: f64) -> Result<f64> {
        Ok(eval_coeffs(&self.coeffs, x))
    }
}

/// Spatially uniform velocity.
#[derive(Debug, Clone, Copy)]
pub struct ConstantVelocity(pub f64);

impl VelocitySampler for ConstantVelocity {
    fn velocity(&self, _t: f64, _x: f64) -> Result<f64> {
        Ok(self.0)
    }
}

/// Stored snapshots of a velocity field: trigonometric in space, linear in time.
#[derive(Debug, Clone, Default)]
pub struct VelocityHistory {
    times: Vec<f64>,
    coeffs: Vec<Vec<Complex64>>,
}

impl VelocityHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a snapshot; times must increase.
    pub fn push(&mut self, t: f64, field: &SpectralField) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidArgument(format!(
                    "snapshot times must increase ({last} then {t})"
                )));
            }
        }
        self.times.push(t);
        self.coeffs.push(field.coeffs().to_vec());
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    /// Longest gap between consecutive snapshots.
    pub fn max_interval(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

impl VelocitySampler for VelocityHistory {
    fn velocity(&self, t: f64, x: f64) -> Result<f64> {
        let (start, end) = self.span().ok_or(Error::SamplerRange {
            time: t,
            start: f64::NAN,
            end: f64::NAN,
        })?;
        let slack = 1e-12 * (end - start).abs().max(1.0);
        if t < start - slack || t > end + slack {
            return Err(Error::SamplerRange { time: t, start, end });
        }
        if self.times.len() == 1 {
            return Ok(eval_coeffs(&self.coeffs[0], x));
        }
        let hi = self.times.partition_point(|&s| s < t).clamp(1, self.times.len() - 1);
        let lo = hi - 1;
        let (t0, t1) = (self.times[lo], self.times[hi]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let v0 = eval_coeffs(&self.coeffs[lo], x);
        if w == 0.0 {
            return Ok(v0);
        }
        let v1 = eval_coeffs(&self.coeffs[hi], x);
        Ok((1.0 - w) * v0 + w * v1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParticleLabel {
    /// Carried by `p`.
    X,
    /// Carried by `m`.
    Y,
    /// Backward map of `X`.
    Q1,
    /// Backward map of `Y`.
    Q2,
}

impl ParticleLabel {
    pub fn is_backward(self) -> bool {
        matches!(self, ParticleLabel::Q1 | ParticleLabel::Q2)
    }
}

/// Particle positions reduced into `[-π, π)`, with winding numbers kept separately.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub seeds: Vec<f64>,
    pub positions: Vec<f64>,
    pub windings: Vec<i64>,
    pub label: ParticleLabel,
}

fn reduce(x: f64) -> (f64, i64) {
    let w = ((x + PI) / TAU).floor();
    let mut r = x - w * TAU;
    let mut w = w as i64;
    if r >= PI {
        r -= TAU;
        w += 1;
    }
    (r, w)
}

impl ParticleSet {
    pub fn new(seeds: Vec<f64>, label: ParticleLabel) -> Self {
        let (positions, windings) = seeds.iter().map(|&x| reduce(x)).unzip();
        let seeds = seeds.iter().map(|&x| reduce(x).0).collect();
        ParticleSet {
            seeds,
            positions,
            windings,
            label,
        }
    }

    /// `count` seeds at `-π + 2πi/count`.
    pub fn uniform(count: usize, label: ParticleLabel) -> Self {
        Self::new(
            (0..count).map(|i| -PI + TAU * i as f64 / count as f64).collect(),
            label,
        )
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Position on the real line, `position + 2π·winding`.
    pub fn unwrapped(&self, i: usize) -> f64 {
        self.positions[i] + TAU * self.windings[i] as f64
    }

    /// Whether the lifted positions are still strictly ordered within one period.
    pub fn order_preserved(&self, tol: f64) -> bool {
        let lifted: Vec<f64> = (0..self.len()).map(|i| self.unwrapped(i)).collect();
        let ordered = lifted.windows(2).all(|w| w[1] - w[0] > -tol);
        let within = match (lifted.first(), lifted.last()) {
            (Some(a), Some(b)) => b - a < TAU + tol,
            _ => true,
        };
        ordered && within
    }
}

fn rk4_path(sampler: &dyn VelocitySampler, x0: f64, t0: f64, h: f64, steps: usize) -> Result<f64> {
    let mut x = x0;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = sampler.velocity(t, x)?;
        let k2 = sampler.velocity(t + 0.5 * h, x + 0.5 * h * k1)?;
        let k3 = sampler.velocity(t + 0.5 * h, x + 0.5 * h * k2)?;
        let k4 = sampler.velocity(t + h, x + h * k3)?;
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(x)
}

/// Integrates every particle with classical RK4 over `[t0, t1]`.
///
/// `X`/`Y` sets move forward from `t0` to `t1`. `Q1`/`Q2` sets start at `t1`
/// and run the velocity history backwards to `t0`, which gives the preimage of
/// their positions under the forward flow. The step is the largest value not
/// exceeding `dt` that divides the interval evenly.
pub fn trace(
    velocity: &dyn VelocitySampler,
    particles: &ParticleSet,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<ParticleSet> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("particle dt must be positive, got {dt}")));
    }
    let span = t1 - t0;
    let steps = (span.abs() / dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(particles.clone());
    }
    let (start, h) = if particles.label.is_backward() {
        (t1, -span / steps as f64)
    } else {
        (t0, span / steps as f64)
    };
    let lifted: Vec<f64> = (0..particles.len()).map(|i| particles.unwrapped(i)).collect();
    let moved: Vec<f64> = lifted
        .par_iter()
        .map(|&x| rk4_path(velocity, x, start, h, steps))
        .collect::<Result<_>>()?;
    let (positions, windings) = moved.into_iter().map(reduce).unzip();
    Ok(ParticleSet {
        seeds: particles.seeds.clone(),
        positions,
        windings,
        label: particles.label,
    })
}

/// A run with every step's velocities retained for particle tracing.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub spec: ModelSpec,
    pub initial: MhdState,
    pub final_state: MhdState,
    /// History of `p`, the velocity carrying `ω`.
    pub p_history: VelocityHistory,
    /// History of `m`, the velocity carrying `Ω`.
    pub m_history: VelocityHistory,
    pub steps: usize,
}

impl StoredRun {
    /// Integrates `s0` and stores `p` and `m` after every step.
    pub fn record(s0: &MhdState, spec: &ModelSpec, controls: &StepControls) -> Result<Self> {
        let mut p_history = VelocityHistory::new();
        let mut m_history = VelocityHistory::new();
        let mut push = |s: &MhdState| -> Result<()> {
            p_history.push(s.time, &velocity_from_vorticity(&s.omega_p, spec.gauge))?;
            m_history.push(s.time, &velocity_from_vorticity(&s.omega_m, spec.gauge))
        };
        push(s0)?;
        let out = advance(s0, spec, controls, &mut push)?;
        Ok(StoredRun {
            spec: *spec,
            initial: s0.clone(),
            final_state: out.state,
            p_history,
            m_history,
            steps: out.steps,
        })
    }
}

/// Largest violation of `ω(t, X_t(ξ)) = ω₀(ξ)` and `Ω(t, Y_t(ξ)) = Ω₀(ξ)` over
/// `n_particles` uniformly spaced seeds, traced over the whole run.
pub fn transport_invariance_error(run: &StoredRun, n_particles: usize) -> Result<f64> {
    if run.spec.kind != ModelKind::Transport {
        return Err(Error::InvalidArgument(format!(
            "transport invariance needs a transport run, got {}",
            run.spec.kind
        )));
    }
    let (t0, t1) = (run.initial.time, run.final_state.time);
    if t1 == t0 {
        return Ok(0.0);
    }
    let dt = run.p_history.max_interval();
    let xs = trace(&run.p_history, &ParticleSet::uniform(n_particles, ParticleLabel::X), t0, t1, dt)?;
    let ys = trace(&run.m_history, &ParticleSet::uniform(n_particles, ParticleLabel::Y), t0, t1, dt)?;

    let mut worst: f64 = 0.0;
    for i in 0..n_particles {
        let carried = interpolate(&run.final_state.omega_m, xs.positions[i]);
        worst = worst.max((carried - interpolate(&run.initial.omega_m, xs.seeds[i])).abs());
        let carried = interpolate(&run.final_state.omega_p, ys.positions[i]);
        worst = worst.max((carried - interpolate(&run.initial.omega_p, ys.seeds[i])).abs());
    }
    Ok(worst)
}

/// Parameters of the log-Lipschitz modulus `F(s) = c₀·A·s(1 - log s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusSpec {
    pub c0: f64,
    /// `‖Ω₀‖∞` (or `‖ω₀‖∞`).
    pub amplitude: f64,
}

impl ModulusSpec {
    pub fn rate(&self) -> f64 {
        self.c0 * self.amplitude
    }

    /// `F(s)`, constant for `s > 1`.
    pub fn modulus(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s <= 1.0 {
            self.rate() * s * (1.0 - s.ln())
        } else {
            self.rate()
        }
    }
}

/// `sup |v(x) - v(y)| / F(d(x, y))` over the planned pairs.
pub fn modulus_ratio(velocity: &SpectralField, spec: &ModulusSpec, pairs: &PairPlan) -> f64 {
    let mut worst: f64 = 0.0;
    pairs.for_each(velocity, |x, vx, y, vy| {
        let f = spec.modulus(periodic_distance(x, y));
        if f > 0.0 {
            worst = worst.max((vx - vy).abs() / f);
        }
    });
    worst
}

/// Exact solution of `z' = rate·z(1 - log z)` (continued by `z' = rate` above
/// one) with `z(0) = s0`: `s0^β e^{1-β}`, `β = e^{-rate·t}`, until it reaches 1
/// at `t₀ = ln(1 - ln s0)/rate`, then `1 + rate (t - t₀)`.
pub fn comparison_solution(s0: f64, rate: f64, t: f64) -> Result<f64> {
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "comparison solution needs 0 < s0 < 1, got {s0}"
        )));
    }
    if !(rate > 0.0) || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "comparison solution needs rate > 0 and t >= 0 (rate {rate}, t {t})"
        )));
    }
    let t_switch = (1.0 - s0.ln()).ln() / rate;
    if t < t_switch {
        let beta = (-rate * t).exp();
        Ok((beta * s0.ln() + 1.0 - beta).exp())
    } else {
        Ok(1.0 + rate * (t - t_switch))
    }
}

/// Frozen value of `c₀`, from [`calibrate_c0`] over [`calibration_corpus`] at
/// 256 points, rounded up.
pub const CALIBRATED_C0: f64 = 2.0;

/// Vorticities used to calibrate `c₀`: trigonometric polynomials of degree at most 8.
pub fn calibration_corpus(grid: &std::sync::Arc<crate::spectral::Grid>) -> Vec<SpectralField> {
    let mut corpus = Vec::new();
    for d in 1..=8 {
        let k = d as f64;
        corpus.push(SpectralField::from_fn(grid, move |x| (k * x).sin()));
        corpus.push(SpectralField::from_fn(grid, move |x| (k * x).cos()));
    }
    // partial sums of square wave, sawtooth and Dirichlet kernel
    corpus.push(SpectralField::from_fn(grid, |x| {
        (1..=8).step_by(2).map(|j| (j as f64 * x).sin() / j as f64).sum()
    }));
    corpus.push(SpectralField::from_fn(grid, |x| {
        (1..=8).map(|j| (j as f64 * x).sin() / j as f64).sum()
    }));
    corpus.push(SpectralField::from_fn(grid, |x| (1..=8).map(|j| (j as f64 * x).cos()).sum()));
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    for _ in 0..16 {
        let terms: Vec<(f64, f64, f64)> = (1..=8)
            .map(|j| (j as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        corpus.push(SpectralField::from_fn(grid, move |x| {
            terms.iter().map(|&(k, a, b)| a * (k * x).cos() + b * (k * x).sin()).sum()
        }));
    }
    corpus
}

/// Smallest `c₀` with `modulus_ratio <= 1` for the velocity of every vorticity
/// in `corpus`, with amplitude `‖vorticity‖∞`.
pub fn calibrate_c0(corpus: &[SpectralField], pairs: &PairPlan) -> f64 {
    corpus
        .iter()
        .map(|w| {
            let v = velocity_from_vorticity(w, crate::spectral::Gauge::ZeroMean);
            let unit = ModulusSpec {
                c0: 1.0,
                amplitude: w.max_abs(),
            };
            modulus_ratio(&v, &unit, pairs)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn zero_velocity_leaves_particles() {
        let set = ParticleSet::uniform(16, ParticleLabel::X);
        let out = trace(&ConstantVelocity(0.0), &set, 0.0, 2.0, 0.1).unwrap();
        assert_eq!(out.positions, set.positions);
    }

    #[test]
    fn constant_velocity_wraps() {
        let set = ParticleSet::new(vec![0.0, 3.0], ParticleLabel::X);
        let out = trace(&ConstantVelocity(1.5), &set, 0.0, 2.0, 0.25).unwrap();
        assert!((out.positions[0] - 3.0).abs() < 1e-12);
        assert!((out.positions[1] - (6.0 - TAU)).abs() < 1e-12);
        assert_eq!(out.windings[1], 1);
        assert!((out.unwrapped(1) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_sine_velocity_closed_form() {
        let g = make_grid(32).unwrap();
        let v = FrozenVelocity::new(&SpectralField::from_fn(&g, |x| -x.sin()));
        let set = ParticleSet::new(vec![FRAC_PI_2], ParticleLabel::X);
        let out = trace(&v, &set, 0.0, 1.0, 1e-2).unwrap();
        let exact = 2.0 * (-1f64).exp().atan();
        assert!((exact - 0.705027).abs() < 1e-6);
        assert!((out.positions[0] - exact).abs() < 1e-9);
    }

    #[test]
    fn backward_labels_invert_forward_flow() {
        let g = make_grid(32).unwrap();
        let v = FrozenVelocity::new(&SpectralField::from_fn(&g, |x| 0.3 + (2.0 * x).cos()));
        let fwd = trace(&v, &ParticleSet::uniform(8, ParticleLabel::X), 0.0, 0.7, 1e-2).unwrap();
        let mut back = fwd.clone();
        back.label = ParticleLabel::Q1;
        let back = trace(&v, &back, 0.0, 0.7, 1e-2).unwrap();
        for i in 0..8 {
            assert!(periodic_distance(back.positions[i], fwd.seeds[i]) < 1e-9);
        }
    }

    #[test]
    fn history_rejects_out_of_range_times() {
        let g = make_grid(16).unwrap();
        let mut h = VelocityHistory::new();
        h.push(0.0, &SpectralField::from_fn(&g, f64::sin)).unwrap();
        h.push(0.5, &SpectralField::from_fn(&g, f64::cos)).unwrap();
        assert!(h.push(0.5, &SpectralField::zeros(&g)).is_err());
        assert!(matches!(h.velocity(0.6, 0.0), Err(Error::SamplerRange { .. })));
        // halfway between sin and cos at x = 0
        assert!((h.velocity(0.25, 0.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn modulus_branches() {
        let spec = ModulusSpec { c0: 2.0, amplitude: 1.5 };
        assert_eq!(spec.modulus(0.0), 0.0);
        assert!((spec.modulus(1.0) - 3.0).abs() < 1e-15);
        assert_eq!(spec.modulus(2.5), 3.0);
        let s: f64 = 0.1;
        assert!((spec.modulus(s) - 3.0 * s * (1.0 - s.ln())).abs() < 1e-15);
    }

    #[test]
    fn modulus_ratio_examples() {
        let g = make_grid(512).unwrap();
        let spec = ModulusSpec { c0: 2.0, amplitude: 1.0 };
        assert_eq!(modulus_ratio(&SpectralField::zeros(&g), &spec, &PairPlan::AllNodes), 0.0);
        let v = velocity_from_vorticity(&SpectralField::from_fn(&g, f64::sin), crate::spectral::Gauge::ZeroMean);
        let r = modulus_ratio(&v, &spec, &PairPlan::AllNodes);
        assert!(r > 0.0 && r <= 1.0, "{r}");
        // a pair further apart than 1 uses the constant branch
        let r = modulus_ratio(&v, &spec, &PairPlan::Points(vec![(-FRAC_PI_2, FRAC_PI_2)]));
        assert!((r - 2.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_solution_examples() {
        assert!((comparison_solution(0.3, 1.7, 0.0).unwrap() - 0.3).abs() < 1e-15);
        assert!(comparison_solution(1.0, 1.0, 0.5).is_err());
        assert!(comparison_solution(1.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn comparison_solution_solves_its_ode() {
        let (s0, rate) = (0.05, 1.3);
        let spec = ModulusSpec { c0: 1.0, amplitude: rate };
        for t in [0.1, 0.5, 1.0, 3.0] {
            let h = 1e-5;
            let z = comparison_solution(s0, rate, t).unwrap();
            let dz = (comparison_solution(s0, rate, t + h).unwrap() - comparison_solution(s0, rate, t - h).unwrap())
                / (2.0 * h);
            assert!((dz - spec.modulus(z)).abs() < 1e-6, "t = {t}: {dz} vs {}", spec.modulus(z));
        }
    }

    #[test]
    fn comparison_solution_is_continuous_in_s0() {
        let t = 0.4;
        let near = comparison_solution(1.0 - 1e-12, 2.0, t).unwrap();
        assert!((near - (1.0 + 2.0 * t)).abs() < 1e-9);
        // across the branch switch in t
        let s0 = 0.2f64;
        let t_switch = (1.0 - s0.ln()).ln() / 2.0;
        let below = comparison_solution(s0, 2.0, t_switch - 1e-10).unwrap();
        let above = comparison_solution(s0, 2.0, t_switch + 1e-10).unwrap();
        assert!((below - 1.0).abs() < 1e-8 && (above - 1.0).abs() < 1e-8);
    }

    #[test]
    fn calibrated_c0_covers_corpus() {
        let g = make_grid(256).unwrap();
        let corpus = calibration_corpus(&g);
        let c0 = calibrate_c0(&corpus, &PairPlan::AllNodes);
        assert!(c0 <= CALIBRATED_C0, "measured {c0:.17}");
        assert!(c0 > 0.8 * CALIBRATED_C0, "frozen constant is loose: measured {c0}");
    }
}
