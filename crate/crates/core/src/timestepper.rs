//! Five-stage, fourth-order, two-register Runge–Kutta (Carpenter–Kennedy)
//! with CFL step control, per-step filtering and backward integration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{rhs, MhdState, ModelSpec};
use crate::spectral::{exp_filter, velocity_from_vorticity, FilterSpec, SpectralField};

/// Stage multipliers of the previous register increment.
pub const LSRK4_A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];

/// Stage weights applied to the solution register.
pub const LSRK4_B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];

/// Stage abscissae.
pub const LSRK4_C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

/// Smallest admissible step magnitude; below it the run is treated as blowing up.
pub const DT_MIN: f64 = 1e-10;

/// One low-storage step on a flat register. `rhs(y, t, out)` writes `dy/dt` into `out`.
///
/// Errors from `rhs` are tagged with the (1-based) stage index. When `check_finite`
/// is set the register is scanned after every stage.
pub fn low_storage_step<F>(
    y: &mut [f64],
    t: f64,
    dt: f64,
    check_finite: bool,
    mut rhs: F,
) -> Result<()>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
{
    let mut du = vec![0.0; y.len()];
    let mut k = vec![0.0; y.len()];
    for stage in 0..5 {
        rhs(y, t + LSRK4_C[stage] * dt, &mut k).map_err(|e| match e {
            Error::NumericalFailure { quantity, .. } => Error::StageFailure {
                stage: stage + 1,
                time: t,
                quantity,
            },
            other => other,
        })?;
        let a = LSRK4_A[stage];
        let b = LSRK4_B[stage];
        for ((d, &kv), yv) in du.iter_mut().zip(&k).zip(y.iter_mut()) {
            *d = a * *d + dt * kv;
            *yv += b * *d;
        }
        if check_finite && !y.iter().all(|v| v.is_finite()) {
            return Err(Error::StageFailure {
                stage: stage + 1,
                time: t,
                quantity: "state".into(),
            });
        }
    }
    Ok(())
}

fn step_impl(s: &MhdState, spec: &ModelSpec, dt: f64, filter: &FilterSpec, check: bool) -> Result<MhdState> {
    if dt == 0.0 {
        return Ok(s.clone());
    }
    let n = s.n();
    let grid = s.omega_p.grid().clone();
    let mut y = Vec::with_capacity(2 * n);
    y.extend_from_slice(s.omega_p.values());
    y.extend_from_slice(s.omega_m.values());

    low_storage_step(&mut y, s.time, dt, check, |reg, t, out| {
        let stage = MhdState {
            omega_p: SpectralField::from_values(&grid, reg[..n].to_vec())?,
            omega_m: SpectralField::from_values(&grid, reg[n..].to_vec())?,
            time: t,
        };
        let (d1, d2) = rhs(&stage, spec)?;
        out[..n].copy_from_slice(d1.values());
        out[n..].copy_from_slice(d2.values());
        Ok(())
    })?;

    let omega_m = SpectralField::from_values(&grid, y.split_off(n))?;
    let omega_p = SpectralField::from_values(&grid, y)?;
    Ok(MhdState {
        omega_p: exp_filter(&omega_p, filter),
        omega_m: exp_filter(&omega_m, filter),
        time: s.time + dt,
    })
}

/// Advances `s` by `dt` (negative for backward integration), then filters both fields.
pub fn lsrk4_step(s: &MhdState, spec: &ModelSpec, dt: f64, filter: &FilterSpec) -> Result<MhdState> {
    step_impl(s, spec, dt, filter, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value", rename_all = "kebab-case")]
pub enum StepSize {
    Fixed(f64),
    Cfl(f64),
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Cfl(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControls {
    pub step: StepSize,
    /// Target time; below the start time for backward runs.
    pub t_end: f64,
    pub filter: FilterSpec,
    pub direction: Direction,
    /// Scan the state for non-finite values after every stage.
    pub nan_abort: bool,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls {
            step: StepSize::default(),
            t_end: 1.0,
            filter: FilterSpec::default(),
            direction: Direction::Forward,
            nan_abort: true,
        }
    }
}

impl StepControls {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        StepControls {
            step: StepSize::Fixed(dt),
            t_end,
            ..Self::default()
        }
    }

    pub fn cfl(cfl: f64, t_end: f64) -> Self {
        StepControls {
            step: StepSize::Cfl(cfl),
            t_end,
            ..Self::default()
        }
    }

    pub fn with_filter(mut self, filter: FilterSpec) -> Self {
        self.filter = filter;
        self
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }
}

/// `cfl·Δx / max(1, v_max)`.
pub fn cfl_dt(cfl: f64, dx: f64, max_velocity: f64) -> f64 {
    cfl * dx / max_velocity.max(1.0)
}

/// Largest `|p|` or `|m|` on the nodes.
pub fn max_velocity(s: &MhdState, spec: &ModelSpec) -> f64 {
    let p = velocity_from_vorticity(&s.omega_p, spec.gauge);
    let m = velocity_from_vorticity(&s.omega_m, spec.gauge);
    p.max_abs().max(m.max_abs())
}

#[derive(Debug, Clone)]
pub struct Advance {
    pub state: MhdState,
    pub steps: usize,
}

/// Integrates from `s0.time` to `controls.t_end`, calling `observer` after every
/// accepted step. The last step is shortened to land exactly on `t_end`.
pub fn advance<F>(s0: &MhdState, spec: &ModelSpec, controls: &StepControls, mut observer: F) -> Result<Advance>
where
    F: FnMut(&MhdState) -> Result<()>,
{
    let sign = controls.direction.sign();
    let span = (controls.t_end - s0.time) * sign;
    if span < -1e-12 * controls.t_end.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end = {} is not reachable {:?} from t = {}",
            controls.t_end, controls.direction, s0.time
        )));
    }
    match controls.step {
        StepSize::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")))
        }
        StepSize::Cfl(c) if !(c > 0.0 && c.is_finite()) => {
            return Err(Error::InvalidArgument(format!("cfl must be positive, got {c}")))
        }
        _ => {}
    }
    if !s0.is_finite() {
        return Err(Error::NumericalFailure {
            quantity: "initial state".into(),
            time: s0.time,
        });
    }

    let dx = s0.omega_p.grid().spacing();
    let tol = 1e-12 * controls.t_end.abs().max(1.0);
    let mut state = s0.clone();
    let mut steps = 0;
    loop {
        let remaining = (controls.t_end - state.time) * sign;
        if remaining <= tol {
            break;
        }
        let dt = match controls.step {
            StepSize::Fixed(dt) => dt,
            StepSize::Cfl(c) => cfl_dt(c, dx, max_velocity(&state, spec)),
        };
        if !(dt >= DT_MIN) {
            return Err(Error::BlowUpSuspected {
                time: state.time,
                reason: format!("time step {dt:e} fell below {DT_MIN:e}"),
            });
        }
        let last = dt >= remaining - tol;
        let h = if last { remaining } else { dt };
        state = step_impl(&state, spec, sign * h, &controls.filter, controls.nan_abort)?;
        if last {
            state.time = controls.t_end;
        }
        steps += 1;
        observer(&state)?;
    }
    Ok(Advance { state, steps })
}
