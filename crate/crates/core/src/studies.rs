//! Verification studies shared by the command-line driver, the examples and
//! the acceptance suite.

use crate::characteristics::{transport_invariance_error, StoredRun};
use crate::cli_io::Preset;
use crate::error::{Error, Result};
use crate::models::{MhdState, ModelKind, ModelSpec};
use crate::spectral::{make_grid, FilterSpec, SpectralField};
use crate::timestepper::{advance, StepControls};

/// The two-mode data of the fig2/fig3 runs on an `n`-point grid.
pub fn fig2_state(n: usize) -> Result<MhdState> {
    Ok(Preset::Fig2.initial().state(&make_grid(n)?, ModelKind::Mhd1d))
}

/// Single-mode steady state of the `a = 1` model.
pub fn steady_state(n: usize) -> Result<MhdState> {
    let g = make_grid(n)?;
    MhdState::new(
        SpectralField::from_fn(&g, |x| (2.0 * x + 0.3).sin()),
        SpectralField::from_fn(&g, |x| 0.5 * (2.0 * x + 1.1).sin()),
        0.0,
    )
}

/// Max-norm drift of the steady state over `[0, t_end]`.
pub fn check_steady(n: usize, cfl: f64, t_end: f64) -> Result<f64> {
    let s0 = steady_state(n)?;
    let mut drift: f64 = 0.0;
    advance(&s0, &ModelSpec::mhd1d(1.0), &StepControls::cfl(cfl, t_end), |s| {
        drift = drift.max(s.max_abs_diff(&s0));
        Ok(())
    })?;
    Ok(drift)
}

/// Values of both fields at every `stride`-th node.
pub fn restrict(s: &MhdState, n: usize) -> Result<MhdState> {
    if n == 0 || !s.n().is_multiple_of(n) {
        return Err(Error::InvalidArgument(format!("cannot restrict {} points to {n}", s.n())));
    }
    let stride = s.n() / n;
    let g = make_grid(n)?;
    let pick = |f: &SpectralField| f.values().iter().step_by(stride).copied().collect::<Vec<_>>();
    MhdState::new(
        SpectralField::from_values(&g, pick(&s.omega_p))?,
        SpectralField::from_values(&g, pick(&s.omega_m))?,
        s.time,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConvergenceRow {
    /// `dt` or `n` of the row.
    pub param: f64,
    pub error: f64,
    /// Observed order against the previous row, if any.
    pub order: Option<f64>,
}

fn with_orders(rows: Vec<(f64, f64)>) -> Vec<ConvergenceRow> {
    let mut out: Vec<ConvergenceRow> = Vec::with_capacity(rows.len());
    for (i, &(param, error)) in rows.iter().enumerate() {
        let order = (i > 0).then(|| {
            let (p0, e0) = rows[i - 1];
            (e0 / error).ln() / (p0 / param).ln().abs()
        });
        out.push(ConvergenceRow { param, error, order });
    }
    out
}

/// Self-convergence in time for the fig2 data at fixed `n`. `dts` must be
/// decreasing; row `i` holds `max|y(dt_i) − y(dt_{i+1})|` and is labelled
/// by `dt_i`.
pub fn temporal_convergence(n: usize, t_end: f64, dts: &[f64], filter: FilterSpec) -> Result<Vec<ConvergenceRow>> {
    if dts.len() < 2 || dts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("need at least two decreasing time steps".into()));
    }
    let s0 = fig2_state(n)?;
    let spec = ModelSpec::mhd1d(1.0);
    let finals = dts
        .iter()
        .map(|&dt| Ok(advance(&s0, &spec, &StepControls::fixed(dt, t_end).with_filter(filter), |_| Ok(()))?.state))
        .collect::<Result<Vec<_>>>()?;
    let rows = dts
        .windows(2)
        .zip(finals.windows(2))
        .map(|(d, f)| (d[0], f[0].max_abs_diff(&f[1])))
        .collect();
    Ok(with_orders(rows))
}

/// Spatial convergence of the fig2 data at fixed `dt` against an `n_ref`
/// reference, compared on the coarse nodes. Every `n` must divide `n_ref`.
pub fn spatial_convergence(ns: &[usize], n_ref: usize, t_end: f64, dt: f64) -> Result<Vec<ConvergenceRow>> {
    let spec = ModelSpec::mhd1d(1.0);
    let run = |n| -> Result<MhdState> {
        Ok(advance(&fig2_state(n)?, &spec, &StepControls::fixed(dt, t_end), |_| Ok(()))?.state)
    };
    let reference = run(n_ref)?;
    let rows = ns
        .iter()
        .map(|&n| Ok((n as f64, run(n)?.max_abs_diff(&restrict(&reference, n)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(with_orders(rows))
}

/// Transport invariance error of the fig2 data under the transport model.
pub fn transport_verify(n: usize, t_end: f64, cfl: f64, particles: usize) -> Result<f64> {
    let run = StoredRun::record(&fig2_state(n)?, &ModelSpec::transport(), &StepControls::cfl(cfl, t_end))?;
    transport_invariance_error(&run, particles)
}

/// Closed-form solution of `ω_t = ω Hω` with `ω₀ = cos x`:
/// `ω = 4 cos x / ((2 − t sin x)² + t² cos² x)`.
pub fn clm_cos_exact(t: f64, x: f64) -> f64 {
    4.0 * x.cos() / ((2.0 - t * x.sin()).powi(2) + (t * x.cos()).powi(2))
}

/// `(16 y(dt/4) − y(dt/2)) / 15` for the CLM run from `cos x`.
pub fn clm_richardson_reference(n: usize, dt: f64, t_end: f64) -> Result<SpectralField> {
    let g = make_grid(n)?;
    let s0 = MhdState::scalar(SpectralField::from_fn(&g, f64::cos), 0.0);
    let spec = ModelSpec::osw(0.0);
    let run = |h: f64| -> Result<SpectralField> {
        Ok(advance(&s0, &spec, &StepControls::fixed(h, t_end), |_| Ok(()))?.state.omega_m)
    };
    let (half, quarter) = (run(dt / 2.0)?, run(dt / 4.0)?);
    Ok(quarter.zip_with(&half, |q, h| (16.0 * q - h) / 15.0))
}
